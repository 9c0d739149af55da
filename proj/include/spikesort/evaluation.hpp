#pragma once

#include "spikesort/datagen.hpp"
#include "spikesort/solver.hpp"

namespace spikesort {

struct TrialStats {
    double mean_accuracy_pct = 0.0;
    double std_accuracy_pct = 0.0;
    double mean_runtime_ms = 0.0;
    double std_runtime_ms = 0.0;
    int n_trials = 0;
};

struct DetectionScore {
    double fpr = 0.0;
    double fnr = 0.0;
    int matched = 0;
};

// Minimum-cost assignment on a square cost matrix (Kuhn-Munkres with
// potentials); returns the column picked for each row.
std::vector<int> assign_min_cost(const Matrix& cost);

// Best-permutation accuracy in percent: the confusion matrix is matched
// one-to-one by optimal assignment.
double accuracy(const std::vector<int>& truth, const Partition& pred);

// Greedy one-to-one matching of sorted event times within +-tol samples.
// An empty prediction list scores fnr = 1, fpr = 0.
DetectionScore fpr_fnr(const std::vector<std::int64_t>& gt_times,
                       const std::vector<std::int64_t>& cluster_times,
                       std::int64_t tol_samples);

// Scores every cluster's event times against the ground-truth unit and
// returns the cluster minimizing fnr + fpr.
std::pair<int, DetectionScore> best_cluster_score(const std::vector<std::int64_t>& gt_times,
                                                  const Partition& partition,
                                                  const std::vector<std::int64_t>& spike_times,
                                                  std::int64_t tol_samples);

enum class Method { proposed, baseline };

// Twenty-trials-style harness: per-trial seeds are base_seed + trial index;
// accuracy and wall time are aggregated as mean and sample std.
TrialStats run_trials(const SynthDataset& dataset, Method method, int c, int n_trials,
                      std::uint64_t base_seed, int jobs = 1);

struct MonotonicityReport {
    bool is_monotone = true;
    std::vector<int> violations;  // indices i where history[i] < history[i-1] past tolerance
};

MonotonicityReport monotonicity_report(const std::vector<double>& history, double rel_tol = 1e-9);

}  // namespace spikesort
