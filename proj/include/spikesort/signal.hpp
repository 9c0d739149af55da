#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "spikesort/types.hpp"

namespace spikesort {

struct Trace {
    std::vector<double> samples;
    double fs_hz = 0.0;
};

enum class FilterKind { bandpass, highpass };

struct FilterSpec {
    FilterKind kind = FilterKind::bandpass;
    double low_hz = 300.0;
    double high_hz = 6000.0;  // unused for highpass
    int order = 4;            // analog prototype order
};

// One second-order section, direct form II transposed, a0 normalized to 1.
struct Biquad {
    double b0 = 0.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;
};

struct SosFilter {
    std::vector<Biquad> sections;
    int n_poles = 0;  // realized order: 2*order for bandpass, order for highpass

    // Frequency response at f_hz, product over sections.
    std::complex<double> response(double f_hz, double fs_hz) const;
};

// Butterworth design: analog prototype, band transform, bilinear transform,
// poles and zeros paired into stable second-order sections.
SosFilter design_filter(const FilterSpec& spec, double fs_hz);

// Zero-phase forward-backward filtering with odd-symmetric edge padding of
// length 3 * n_poles and steady-state section initialization.
Trace filtfilt(const SosFilter& f, const Trace& t);

// Threshold detection on a filtered trace: local extrema of either polarity
// whose magnitude exceeds k_sigma * median(|x|)/0.6745. Within a refractory
// window the largest-magnitude extremum wins.
std::vector<std::int64_t> detect_spikes(const Trace& t, double k_sigma,
                                        std::int64_t refractory_samples);

struct ExtractResult {
    SpikeMatrix spikes;
    int dropped = 0;  // events without a full window of margin
};

// Column i = samples[t_i - align_offset .. t_i - align_offset + window).
ExtractResult extract_waveforms(const Trace& t, const std::vector<std::int64_t>& times,
                                int window, int align_offset);

}  // namespace spikesort
