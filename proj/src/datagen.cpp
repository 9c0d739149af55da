#include "spikesort/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include <json.hpp>

#include "spikesort/io.hpp"
#include "spikesort/rng.hpp"

namespace spikesort {

namespace {

constexpr std::uint64_t kTemplateTag = 0x7E3B;
constexpr std::uint64_t kLabelTag = 0x1AB5;
constexpr std::uint64_t kNoiseTag = 0x0153;
constexpr std::uint64_t kOverlapTag = 0x0F1A;
constexpr std::uint64_t kTimingTag = 0x7133;

struct LobeParams {
    double main_width;
    double rebound_amp, rebound_lag, rebound_width;
    double pre_amp, pre_lag, pre_width;
    double sign;  // units 3-5 are positive-going
};

// Distinct biphasic/triphasic shapes; widths and lags are in samples at d=64.
constexpr LobeParams kEasyTable[] = {
    {1.5, 0.85, 5.0, 2.5, 0.00, 0.0, 1.0, 1.0},    // fast biphasic
    {3.6, 0.60, 13.0, 6.5, 0.00, 0.0, 1.0, 1.0},   // slow biphasic
    {2.0, 0.22, 17.0, 6.0, 0.70, 6.0, 2.2, 1.0},   // triphasic with leading bump
    {1.5, 0.43, 14.0, 6.4, 0.52, 5.0, 2.8, -1.0},
    {2.9, 0.84, 7.8, 2.7, 0.62, 11.3, 2.6, -1.0},
    {5.1, 0.56, 16.6, 6.0, 0.00, 0.0, 1.0, -1.0},
};

// Units 1 and 2 nearly coincide, everything else follows the easy table.
constexpr LobeParams kDifficultPair[2] = {
    {2.60, 0.50, 7.5, 3.8, 0.0, 0.0, 1.0, 1.0},
    {3.30, 0.54, 9.0, 4.4, 0.0, 0.0, 1.0, 1.0},
};

int peak_row(int d) { return static_cast<int>(std::lround(20.0 * d / 64.0)); }

Vector render_template(const LobeParams& p, int d, double scale) {
    const double peak = peak_row(d);
    Vector t(d);
    for (int i = 0; i < d; ++i) {
        const double x = static_cast<double>(i);
        double v = -std::exp(-std::pow(x - peak, 2) / (2.0 * std::pow(p.main_width * scale, 2)));
        v += p.rebound_amp *
             std::exp(-std::pow(x - peak - p.rebound_lag * scale, 2) /
                      (2.0 * std::pow(p.rebound_width * scale, 2)));
        if (p.pre_amp > 0.0)
            v += p.pre_amp * std::exp(-std::pow(x - peak + p.pre_lag * scale, 2) /
                                      (2.0 * std::pow(p.pre_width * scale, 2)));
        t(i) = v;
    }
    return t / t.cwiseAbs().maxCoeff();
}

// AR(2) with poles at radius sqrt(0.45); variance-normalized to 1.
void fill_colored_noise(Vector& out, Rng& rng) {
    constexpr double phi1 = 1.0, phi2 = -0.45;
    const double stationary_var =
        (1.0 - phi2) / ((1.0 + phi2) * ((1.0 - phi2) * (1.0 - phi2) - phi1 * phi1));
    const double scale = 1.0 / std::sqrt(stationary_var);
    double y1 = 0.0, y2 = 0.0;
    for (int i = 0; i < 50; ++i) {  // burn-in toward stationarity
        const double y = phi1 * y1 + phi2 * y2 + rng.normal();
        y2 = y1;
        y1 = y;
    }
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        const double y = phi1 * y1 + phi2 * y2 + rng.normal();
        y2 = y1;
        y1 = y;
        out(i) = y * scale;
    }
}

void fill_noise(Vector& out, Rng& rng, bool colored) {
    if (colored) {
        fill_colored_noise(out, rng);
    } else {
        for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = rng.normal();
    }
}

struct OverlapDraw {
    bool flagged = false;
    int partner = 0;
    int lag = 0;
};

// Drawn from a dedicated stream so synthesize_spikes and render_trace see
// the same events.
std::vector<OverlapDraw> draw_overlaps(const SynthSpec& spec, int n_total) {
    std::vector<OverlapDraw> out(n_total);
    if (spec.overlap_fraction <= 0.0) return out;
    Rng rng(derive_seed(spec.seed, kOverlapTag));
    const int lag_range = spec.d / 4;
    for (int i = 0; i < n_total; ++i) {
        if (rng.uniform01() >= spec.overlap_fraction) continue;
        out[i].flagged = true;
        out[i].partner = static_cast<int>(rng.uniform_int(spec.n_units - 1));
        out[i].lag = static_cast<int>(rng.uniform_int(2 * lag_range + 1)) - lag_range;
    }
    return out;
}

nlohmann::json spec_to_json(const SynthSpec& s) {
    return {
        {"d", s.d},
        {"n_units", s.n_units},
        {"n_spikes_per_unit", s.n_spikes_per_unit},
        {"noise_level", s.noise_level},
        {"difficulty", s.difficulty == Difficulty::easy ? "easy" : "difficult"},
        {"overlap_fraction", s.overlap_fraction},
        {"colored_noise", s.colored_noise},
        {"fs_hz", s.fs_hz},
        {"seed", s.seed},
    };
}

SynthSpec spec_from_json(const nlohmann::json& j) {
    SynthSpec s;
    s.d = j.at("d").get<int>();
    s.n_units = j.at("n_units").get<int>();
    s.n_spikes_per_unit = j.at("n_spikes_per_unit").get<int>();
    s.noise_level = j.at("noise_level").get<double>();
    s.difficulty =
        j.at("difficulty").get<std::string>() == "difficult" ? Difficulty::difficult : Difficulty::easy;
    s.overlap_fraction = j.at("overlap_fraction").get<double>();
    s.colored_noise = j.at("colored_noise").get<bool>();
    s.fs_hz = j.at("fs_hz").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    return s;
}

}  // namespace

Matrix make_templates(const SynthSpec& spec) {
    if (spec.n_units < 2) throw DimensionMismatchError("make_templates: need at least 2 units");
    if (spec.d < 8) throw DimensionMismatchError("make_templates: window too short");

    Rng rng(derive_seed(spec.seed, kTemplateTag));
    const double scale = static_cast<double>(spec.d) / 64.0;
    const int table_size = static_cast<int>(std::size(kEasyTable));

    Matrix templates(spec.d, spec.n_units);
    for (int k = 0; k < spec.n_units; ++k) {
        LobeParams p = kEasyTable[k % table_size];
        if (spec.difficulty == Difficulty::difficult && (k == 1 || k == 2))
            p = kDifficultPair[k - 1];
        if (k >= table_size) p.main_width *= std::pow(1.2, k / table_size);
        // small per-seed jitter; bounds on template similarity still hold
        p.main_width *= 1.0 + 0.02 * (rng.uniform01() - 0.5);
        p.rebound_width *= 1.0 + 0.02 * (rng.uniform01() - 0.5);
        templates.col(k) = render_template(p, spec.d, scale);
    }
    return templates;
}

SynthDataset synthesize_spikes(const SynthSpec& spec) {
    if (spec.noise_level < 0.0)
        throw DimensionMismatchError("synthesize_spikes: noise_level must be >= 0");
    if (spec.overlap_fraction < 0.0 || spec.overlap_fraction >= 1.0)
        throw DimensionMismatchError("synthesize_spikes: overlap_fraction must lie in [0, 1)");
    if (spec.n_spikes_per_unit < 1)
        throw DimensionMismatchError("synthesize_spikes: need at least one spike per unit");

    SynthDataset ds;
    ds.templates = make_templates(spec);
    const int n_total = spec.n_units * spec.n_spikes_per_unit;
    const int d = spec.d;

    // label multiset, shuffled in place (Fisher-Yates)
    ds.labels.reserve(n_total);
    for (int k = 0; k < spec.n_units; ++k)
        ds.labels.insert(ds.labels.end(), spec.n_spikes_per_unit, k);
    Rng label_rng(derive_seed(spec.seed, kLabelTag));
    for (int i = n_total - 1; i > 0; --i)
        std::swap(ds.labels[i], ds.labels[label_rng.uniform_int(i + 1)]);

    Rng timing_rng(derive_seed(spec.seed, kTimingTag));
    std::int64_t t = 2 * d;
    ds.times.reserve(n_total);
    for (int i = 0; i < n_total; ++i) {
        ds.times.push_back(t);
        t += 2 * d + static_cast<std::int64_t>(timing_rng.uniform_int(d));
    }

    const std::vector<OverlapDraw> overlaps = draw_overlaps(spec, n_total);

    Rng noise_rng(derive_seed(spec.seed, kNoiseTag));
    ds.x.x.resize(d, n_total);
    ds.overlap_flags.assign(n_total, false);
    Vector noise(d);
    for (int i = 0; i < n_total; ++i) {
        fill_noise(noise, noise_rng, spec.colored_noise);
        Vector col = ds.templates.col(ds.labels[i]) + spec.noise_level * noise;
        if (overlaps[i].flagged) {
            ds.overlap_flags[i] = true;
            int partner = overlaps[i].partner;
            if (partner >= ds.labels[i]) ++partner;  // uniform over the other units
            const int lag = overlaps[i].lag;
            for (int r = 0; r < d; ++r) {
                const int src = r - lag;  // partner peak lands at peak + lag
                if (src >= 0 && src < d) col(r) += ds.templates(src, partner);
            }
        }
        ds.x.x.col(i) = col;
    }
    ds.x.times = ds.times;
    return ds;
}

Trace render_trace(const SynthSpec& spec, const SynthDataset& ds) {
    const int d = spec.d;
    const int peak = peak_row(d);
    Trace trace;
    trace.fs_hz = spec.fs_hz;
    const std::int64_t len = (ds.times.empty() ? 0 : ds.times.back()) + 2 * d;
    trace.samples.assign(static_cast<std::size_t>(len), 0.0);

    Rng noise_rng(derive_seed(spec.seed, kNoiseTag ^ 0xF100F));
    Vector noise(static_cast<Eigen::Index>(len));
    fill_noise(noise, noise_rng, spec.colored_noise);
    for (std::int64_t i = 0; i < len; ++i) trace.samples[i] = spec.noise_level * noise(i);

    const std::vector<OverlapDraw> overlaps =
        draw_overlaps(spec, static_cast<int>(ds.times.size()));
    auto add_template = [&](int unit, std::int64_t peak_time) {
        for (int r = 0; r < d; ++r) {
            const std::int64_t pos = peak_time - peak + r;
            if (pos >= 0 && pos < len) trace.samples[pos] += ds.templates(r, unit);
        }
    };
    for (std::size_t i = 0; i < ds.times.size(); ++i) {
        add_template(ds.labels[i], ds.times[i]);
        if (i < overlaps.size() && overlaps[i].flagged) {
            int partner = overlaps[i].partner;
            if (partner >= ds.labels[i]) ++partner;
            add_template(partner, ds.times[i] + overlaps[i].lag);
        }
    }
    return trace;
}

SavedDataset save_dataset(const std::string& prefix, const SynthSpec& spec,
                          const SynthDataset& ds) {
    SavedDataset paths;
    paths.spikes_path = prefix + "_spikes.csv";
    paths.labels_path = prefix + "_labels.csv";
    paths.times_path = prefix + "_times.csv";
    paths.manifest_path = prefix + "_manifest.json";

    write_spikes_csv(paths.spikes_path, ds.x.x);
    write_labels_csv(paths.labels_path, ds.labels);
    write_times_csv(paths.times_path, ds.times);

    nlohmann::json manifest;
    manifest["spec"] = spec_to_json(spec);
    manifest["files"] = {
        {"spikes", std::filesystem::path(paths.spikes_path).filename().string()},
        {"labels", std::filesystem::path(paths.labels_path).filename().string()},
        {"times", std::filesystem::path(paths.times_path).filename().string()},
    };
    manifest["checksums"] = {
        {"spikes", file_checksum(paths.spikes_path)},
        {"labels", file_checksum(paths.labels_path)},
        {"times", file_checksum(paths.times_path)},
    };
    std::vector<int> overlap_indices;
    for (std::size_t i = 0; i < ds.overlap_flags.size(); ++i)
        if (ds.overlap_flags[i]) overlap_indices.push_back(static_cast<int>(i));
    manifest["overlap_indices"] = overlap_indices;
    manifest["overlap_lag_range_samples"] = {-spec.d / 4, spec.d / 4};
    write_text_file(paths.manifest_path, manifest.dump(2) + "\n");
    return paths;
}

SynthDataset load_external(const std::string& path, const std::string& format) {
    if (format == "csv") {
        SynthDataset ds;
        ds.x.x = read_spikes_csv(path);
        ds.x.times.resize(ds.x.n());
        for (Eigen::Index i = 0; i < ds.x.n(); ++i) ds.x.times[i] = i;  // placeholder order
        ds.times = ds.x.times;
        ds.overlap_flags.assign(ds.x.n(), false);
        return ds;
    }
    if (format != "manifest")
        throw ParseError("load_external: unknown format '" + format + "' (csv|manifest)");

    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    SynthDataset ds;
    try {
        const SynthSpec spec = spec_from_json(manifest.at("spec"));
        const auto dir = std::filesystem::path(path).parent_path();
        const auto resolve = [&dir](const std::string& name) { return (dir / name).string(); };
        const std::string spikes = resolve(manifest.at("files").at("spikes").get<std::string>());
        const std::string labels = resolve(manifest.at("files").at("labels").get<std::string>());
        const std::string times = resolve(manifest.at("files").at("times").get<std::string>());

        const auto& sums = manifest.at("checksums");
        for (const auto& [key, file] :
             {std::pair{"spikes", spikes}, {"labels", labels}, {"times", times}}) {
            if (file_checksum(file) != sums.at(key).get<std::string>())
                throw ParseError(file + ": checksum does not match the manifest");
        }

        ds.x.x = read_spikes_csv(spikes);
        ds.labels = read_labels_csv(labels);
        ds.times = read_times_csv(times);
        ds.x.times = ds.times;
        ds.templates = make_templates(spec);
        ds.overlap_flags.assign(ds.x.n(), false);
        for (const auto& idx : manifest.at("overlap_indices"))
            ds.overlap_flags.at(idx.get<std::size_t>()) = true;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    if (static_cast<Eigen::Index>(ds.labels.size()) != ds.x.n() ||
        static_cast<Eigen::Index>(ds.times.size()) != ds.x.n())
        throw ParseError(path + ": spike, label and time counts disagree");
    return ds;
}

}  // namespace spikesort
