#pragma once

#include <string>

#include "spikesort/signal.hpp"
#include "spikesort/types.hpp"

namespace spikesort {

enum class Difficulty { easy, difficult };

struct SynthSpec {
    int d = 64;
    int n_units = 3;
    int n_spikes_per_unit = 300;
    double noise_level = 0.1;  // noise std relative to the unit peak amplitude
    Difficulty difficulty = Difficulty::easy;
    double overlap_fraction = 0.0;  // [0, 1)
    bool colored_noise = false;     // AR(2) noise instead of white
    double fs_hz = 24000.0;
    std::uint64_t seed = 42;
};

struct SynthDataset {
    SpikeMatrix x;
    std::vector<int> labels;                // may be empty for external spikes-only data
    std::vector<std::int64_t> times;        // mirrors x.times
    std::vector<bool> overlap_flags;
    Matrix templates;                       // d x n_units (empty for external data)

    bool has_labels() const { return !labels.empty(); }
};

// Unit-peak-normalized biphasic waveforms, peak magnitude at the row matching
// the extractor's default alignment (20 for d=64). Easy mode keeps pairwise
// cosines <= 0.7; difficult mode makes at least one pair >= 0.9.
Matrix make_templates(const SynthSpec& spec);

// spike = unit template + noise of std = noise_level * peak amplitude; an
// overlap_fraction of spikes also receive a second unit's template at a
// random lag in [-d/4, d/4].
SynthDataset synthesize_spikes(const SynthSpec& spec);

// Continuous trace: noise floor plus clean templates inserted at the
// dataset's recorded times (spacing >= 2d for non-overlap events).
Trace render_trace(const SynthSpec& spec, const SynthDataset& ds);

// format "csv": spikes-only file, one spike per row; format "manifest":
// manifest JSON written by save_dataset, restoring labels/times/flags too.
SynthDataset load_external(const std::string& path, const std::string& format);

struct SavedDataset {
    std::string spikes_path, labels_path, times_path, manifest_path;
};

// Writes <prefix>_spikes.csv, <prefix>_labels.csv, <prefix>_times.csv and a
// manifest JSON with the spec, file names, checksums and overlap metadata.
SavedDataset save_dataset(const std::string& prefix, const SynthSpec& spec,
                          const SynthDataset& ds);

}  // namespace spikesort
