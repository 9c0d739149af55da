#pragma once

#include "spikesort/solver.hpp"

namespace spikesort {

enum class IndexKind { calinski_harabasz, gap };

struct EstimationReport {
    std::vector<int> candidates;
    std::vector<double> scores;      // CH value or gap value per candidate
    std::vector<double> gap_sk;      // gap only: s_k per candidate
    std::vector<bool> degenerate;    // CH only: zero within-scatter sentinel
    int chosen = 0;
    IndexKind index_kind = IndexKind::calinski_harabasz;
    int m0 = 3;
    std::string index_space = "pca_m0";  // indices are computed in the m0-dim PCA space
};

struct ChScore {
    double value = 0.0;
    bool degenerate_within = false;  // within-scatter trace was zero; value is +inf
};

// [trace(between)/(c-1)] / [trace(within)/(n-c)]; larger is better.
ChScore calinski_harabasz(const Matrix& y, const Partition& g);

struct GapOptions {
    int b_refs = 10;
    int restarts = 10;
    int max_km_iters = 300;
    bool data_as_reference = false;  // test hook: the gap is then exactly 0
};

struct GapResult {
    double gap = 0.0;
    double s_k = 0.0;
};

// gap = mean_b log W*_b - log W_k with uniform references over the data's
// principal-axis-aligned bounding box; s_k = sd * sqrt(1 + 1/b_refs).
GapResult gap_statistic(const Matrix& y, int c, const GapOptions& opts, std::uint64_t seed);

struct EstimateOptions {
    int m0 = 3;
    int c_min = 2;
    int c_max = 10;
    IndexKind index_kind = IndexKind::calinski_harabasz;
    int restarts = 10;
    int max_km_iters = 300;
    int gap_b_refs = 10;
    bool gap_argmax = false;  // pick argmax gap instead of the first-k rule
    std::uint64_t seed = 42;
};

// Pre-runs restarted K-means on the m0-dim PCA embedding for every candidate
// c and scores each partition with the selected validity index.
EstimationReport estimate_c(const Matrix& x, const EstimateOptions& opts);

struct AutoSortResult {
    SortResult sort;
    EstimationReport report;
};

// estimate_c, then the full solver with c = chosen and m = chosen - 1.
AutoSortResult auto_sort(const Matrix& x, const EstimateOptions& est, SolverOptions solver_opts);

}  // namespace spikesort
