#pragma once

#include "spikesort/model.hpp"
#include "spikesort/rng.hpp"

namespace spikesort {

struct SolverOptions {
    int c = 2;           // cluster count, >= 2
    int restarts = 10;   // K-means++ initialisations per outer iteration
    int max_outer = 100;
    int max_km_iters = 300;
    std::uint64_t seed = 42;
    double ridge_rel = kDefaultRidgeRel;
};

struct SortResult {
    Projection projection;
    Partition partition;
    std::vector<double> objective_history;  // J after every outer iteration
    std::vector<double> g_history;          // accepted whitened K-means value per iteration
    std::vector<double> g_prev_history;     // previous partition re-scored in the same space
    std::vector<int> objective_decreases;   // iterations where J dropped past 1e-9 relative
    int outer_iterations = 0;
    double runtime_ms = 0.0;
    bool converged = false;
};

// K-means++ seeding: first center uniform, the rest sampled proportionally to
// the squared distance to the nearest chosen center. Centers are distinct
// data columns.
Matrix kmeanspp_seed(const Matrix& y, int c, Rng& rng);

struct KmResult {
    Partition partition;
    Matrix centers;
    double sse = 0.0;
    int iterations = 0;
};

// Lloyd iterations until assignments stabilize or max_iters. Ties go to the
// lowest cluster index; an emptied cluster is repaired by moving the point
// farthest from its own center into it.
KmResult kmeans(const Matrix& y, int c, const Matrix& init_centers, int max_iters);

struct GUpdate {
    Partition partition;
    Matrix centers;
    double g_value = 0.0;       // whitened K-means value of the returned partition
    double g_prev_value = 0.0;  // g_prev evaluated in the current whitened space
    bool took_restart = false;  // comparison rule accepted a fresh restart
};

// One G step: restarted K-means on the whitened embedding; a restart is
// accepted only when it strictly beats the previous partition re-scored in
// the current space, otherwise Lloyd continues from the previous centers.
GUpdate update_g(const Matrix& x, const Projection& w, const Partition& g_prev,
                 const SolverOptions& opts, Rng& rng);

// One W step: top-m generalized eigenvectors of (S1, S2), re-orthonormalized.
// A failed positive-definiteness check retries with the default ridge.
Projection update_w(const Matrix& x, const Partition& g, int m,
                    double ridge_rel = kDefaultRidgeRel);

// The full alternating solver with m = c - 1, PCA initialisation and
// stopping when the partition repeats (up to relabeling).
SortResult fit(const Matrix& x, const SolverOptions& opts);

// PCA projection followed by restarted K-means, no alternation.
SortResult sequential_baseline(const Matrix& x, int c, int m, std::uint64_t seed);

}  // namespace spikesort
