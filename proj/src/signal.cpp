#include "spikesort/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace spikesort {

namespace {

using Complex = std::complex<double>;

struct Zpk {
    std::vector<Complex> zeros;
    std::vector<Complex> poles;
    double gain = 1.0;
};

std::vector<Complex> butter_prototype_poles(int order) {
    std::vector<Complex> poles;
    poles.reserve(order);
    for (int k = 0; k < order; ++k) {
        const double theta = std::numbers::pi * (2.0 * k + order + 1.0) / (2.0 * order);
        poles.emplace_back(std::cos(theta), std::sin(theta));
    }
    return poles;
}

Zpk analog_highpass(int order, double omega_c) {
    Zpk out;
    out.zeros.assign(order, Complex{0.0, 0.0});
    for (const Complex& p : butter_prototype_poles(order)) out.poles.push_back(omega_c / p);
    out.gain = 1.0;  // unity at s = inf
    return out;
}

Zpk analog_bandpass(int order, double omega_lo, double omega_hi) {
    const double omega0 = std::sqrt(omega_lo * omega_hi);
    const double bw = omega_hi - omega_lo;
    Zpk out;
    out.zeros.assign(order, Complex{0.0, 0.0});
    double log_gain = 0.0;
    for (const Complex& p : butter_prototype_poles(order)) {
        const Complex bp = bw * p;
        const Complex disc = std::sqrt(bp * bp - 4.0 * omega0 * omega0);
        out.poles.push_back(0.5 * (bp + disc));
        out.poles.push_back(0.5 * (bp - disc));
        log_gain += std::log(std::abs(bw * p));  // |prod(-p)| * bw^order
    }
    out.gain = std::exp(log_gain);  // unity at s = j*omega0
    return out;
}

// Bilinear transform with c = 2*fs. Zeros short of poles land at z = -1.
Zpk bilinear(const Zpk& analog, double fs_hz) {
    const double c = 2.0 * fs_hz;
    Zpk out;
    Complex num{1.0, 0.0}, den{1.0, 0.0};
    for (const Complex& z : analog.zeros) {
        out.zeros.push_back((c + z) / (c - z));
        num *= (c - z);
    }
    for (const Complex& p : analog.poles) {
        out.poles.push_back((c + p) / (c - p));
        den *= (c - p);
    }
    out.zeros.resize(analog.poles.size(), Complex{-1.0, 0.0});
    out.gain = analog.gain * (num / den).real();
    return out;
}

// Groups the pole list into conjugate (or real) pairs, nearest the unit
// circle first, and greedily attaches the two closest remaining zeros to
// each pair. Any pairing realizes the same filter; near pairing keeps the
// per-section dynamic range small.
std::vector<Biquad> zpk_to_sos(const Zpk& zpk) {
    std::vector<Complex> poles = zpk.poles;
    std::vector<Complex> zeros = zpk.zeros;

    std::vector<std::pair<Complex, Complex>> pole_pairs;
    std::vector<Complex> upper, real_poles;
    for (const Complex& p : poles) {
        if (p.imag() > 1e-12)
            upper.push_back(p);
        else if (p.imag() >= -1e-12)
            real_poles.push_back(p);
    }
    std::sort(upper.begin(), upper.end(), [](const Complex& a, const Complex& b) {
        const double ma = std::abs(a), mb = std::abs(b);
        if (ma != mb) return ma > mb;
        return a.real() < b.real();
    });
    std::sort(real_poles.begin(), real_poles.end(),
              [](const Complex& a, const Complex& b) { return std::abs(a) > std::abs(b); });
    for (const Complex& p : upper) pole_pairs.emplace_back(p, std::conj(p));
    for (std::size_t i = 0; i + 1 < real_poles.size(); i += 2)
        pole_pairs.emplace_back(real_poles[i], real_poles[i + 1]);
    const bool odd_real = real_poles.size() % 2 == 1;

    std::vector<bool> used(zeros.size(), false);
    auto take_nearest_zero = [&](const Complex& ref) -> Complex {
        std::size_t best = zeros.size();
        double dist = 0.0;
        for (std::size_t i = 0; i < zeros.size(); ++i) {
            if (used[i]) continue;
            const double d = std::abs(zeros[i] - ref);
            if (best == zeros.size() || d < dist) {
                best = i;
                dist = d;
            }
        }
        used[best] = true;
        return zeros[best];
    };

    std::vector<Biquad> sections;
    for (const auto& [p1, p2] : pole_pairs) {
        const Complex z1 = take_nearest_zero(p1);
        const Complex z2 = take_nearest_zero(p1);
        Biquad s;
        s.b0 = 1.0;
        s.b1 = -(z1 + z2).real();
        s.b2 = (z1 * z2).real();
        s.a1 = -(p1 + p2).real();
        s.a2 = (p1 * p2).real();
        sections.push_back(s);
    }
    if (odd_real) {
        const Complex p = real_poles.back();
        const Complex z = take_nearest_zero(p);
        Biquad s;
        s.b0 = 1.0;
        s.b1 = -z.real();
        s.a1 = -p.real();
        sections.push_back(s);
    }

    // Spread the overall gain evenly; any sign goes on the first section.
    const double mag = std::pow(std::abs(zpk.gain), 1.0 / sections.size());
    for (Biquad& s : sections) {
        s.b0 *= mag;
        s.b1 *= mag;
        s.b2 *= mag;
    }
    if (zpk.gain < 0.0) {
        sections.front().b0 = -sections.front().b0;
        sections.front().b1 = -sections.front().b1;
        sections.front().b2 = -sections.front().b2;
    }
    return sections;
}

// One pass of the cascade, DF2T, with each section's state initialized to
// the steady-state response of the first sample. A constant input then
// produces its steady-state output from sample 0.
void sos_forward(const std::vector<Biquad>& sections, std::vector<double>& x) {
    double x0 = x.empty() ? 0.0 : x.front();
    for (const Biquad& s : sections) {
        const double denom = 1.0 + s.a1 + s.a2;
        const double g = denom != 0.0 ? (s.b0 + s.b1 + s.b2) / denom : 0.0;
        double s1 = (s.b1 + s.b2 - (s.a1 + s.a2) * g) * x0;
        double s2 = (s.b2 - s.a2 * g) * x0;
        for (double& v : x) {
            const double in = v;
            const double out = s.b0 * in + s1;
            s1 = s.b1 * in - s.a1 * out + s2;
            s2 = s.b2 * in - s.a2 * out;
            v = out;
        }
        x0 *= g;
    }
}

}  // namespace

std::complex<double> SosFilter::response(double f_hz, double fs_hz) const {
    const Complex z = std::polar(1.0, 2.0 * std::numbers::pi * f_hz / fs_hz);
    const Complex zi = 1.0 / z;
    Complex h{1.0, 0.0};
    for (const Biquad& s : sections)
        h *= (s.b0 + s.b1 * zi + s.b2 * zi * zi) / (1.0 + s.a1 * zi + s.a2 * zi * zi);
    return h;
}

SosFilter design_filter(const FilterSpec& spec, double fs_hz) {
    if (fs_hz <= 0.0) throw InvalidBandError("design_filter: sampling rate must be positive");
    if (spec.order < 1) throw InvalidBandError("design_filter: order must be >= 1");
    const double nyquist = 0.5 * fs_hz;
    if (spec.low_hz <= 0.0 || spec.low_hz >= nyquist)
        throw InvalidBandError("design_filter: low cutoff must lie in (0, fs/2)");

    auto prewarp = [fs_hz](double f) {
        return 2.0 * fs_hz * std::tan(std::numbers::pi * f / fs_hz);
    };

    Zpk analog;
    if (spec.kind == FilterKind::bandpass) {
        if (spec.high_hz >= nyquist)
            throw InvalidBandError("design_filter: high cutoff must be below fs/2");
        if (spec.low_hz >= spec.high_hz)
            throw InvalidBandError("design_filter: low cutoff must be below high cutoff");
        analog = analog_bandpass(spec.order, prewarp(spec.low_hz), prewarp(spec.high_hz));
    } else {
        analog = analog_highpass(spec.order, prewarp(spec.low_hz));
    }

    SosFilter out;
    out.sections = zpk_to_sos(bilinear(analog, fs_hz));
    out.n_poles = spec.kind == FilterKind::bandpass ? 2 * spec.order : spec.order;
    return out;
}

Trace filtfilt(const SosFilter& f, const Trace& t) {
    const std::int64_t n = static_cast<std::int64_t>(t.samples.size());
    const std::int64_t pad = 3 * static_cast<std::int64_t>(f.n_poles);
    if (n <= pad)
        throw TooShortError("filtfilt: trace must be longer than 3x the filter order");

    // Odd-symmetric extension about both endpoints.
    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::int64_t i = pad; i >= 1; --i) ext.push_back(2.0 * t.samples[0] - t.samples[i]);
    ext.insert(ext.end(), t.samples.begin(), t.samples.end());
    for (std::int64_t i = 1; i <= pad; ++i)
        ext.push_back(2.0 * t.samples[n - 1] - t.samples[n - 1 - i]);

    sos_forward(f.sections, ext);
    std::reverse(ext.begin(), ext.end());
    sos_forward(f.sections, ext);
    std::reverse(ext.begin(), ext.end());

    Trace out;
    out.fs_hz = t.fs_hz;
    out.samples.assign(ext.begin() + pad, ext.begin() + pad + n);
    return out;
}

std::vector<std::int64_t> detect_spikes(const Trace& t, double k_sigma,
                                        std::int64_t refractory_samples) {
    const std::int64_t n = static_cast<std::int64_t>(t.samples.size());
    std::vector<std::int64_t> out;
    if (n < 3) return out;

    std::vector<double> mags(t.samples.size());
    for (std::size_t i = 0; i < t.samples.size(); ++i) mags[i] = std::abs(t.samples[i]);
    std::vector<double> sorted = mags;
    std::sort(sorted.begin(), sorted.end());
    const double median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    const double threshold = k_sigma * median / 0.6745;

    for (std::int64_t i = 1; i + 1 < n; ++i) {
        if (mags[i] <= threshold) continue;
        if (!(mags[i] >= mags[i - 1] && mags[i] > mags[i + 1])) continue;
        if (!out.empty() && i - out.back() < refractory_samples) {
            if (mags[i] > mags[out.back()]) out.back() = i;  // keep the larger event
            continue;
        }
        out.push_back(i);
    }
    return out;
}

ExtractResult extract_waveforms(const Trace& t, const std::vector<std::int64_t>& times,
                                int window, int align_offset) {
    if (window < 2) throw DimensionMismatchError("extract_waveforms: window must be >= 2");
    if (align_offset < 0 || align_offset >= window)
        throw DimensionMismatchError("extract_waveforms: align_offset must lie in [0, window)");

    const std::int64_t n = static_cast<std::int64_t>(t.samples.size());
    ExtractResult out;
    std::vector<std::int64_t> kept;
    for (const std::int64_t time : times) {
        const std::int64_t start = time - align_offset;
        if (start < 0 || start + window > n) {
            ++out.dropped;
            continue;
        }
        kept.push_back(time);
    }

    out.spikes.x.resize(window, static_cast<Eigen::Index>(kept.size()));
    out.spikes.times = kept;
    for (std::size_t j = 0; j < kept.size(); ++j) {
        const std::int64_t start = kept[j] - align_offset;
        for (int i = 0; i < window; ++i) out.spikes.x(i, j) = t.samples[start + i];
    }
    return out;
}

}  // namespace spikesort
