#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "spikesort/errors.hpp"

namespace spikesort {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Detected spikes, one waveform of length d per column, plus the sample index
// of each aligned peak (strictly increasing).
struct SpikeMatrix {
    Matrix x;                          // d x n
    std::vector<std::int64_t> times;   // n entries

    Eigen::Index d() const { return x.rows(); }
    Eigen::Index n() const { return x.cols(); }
};

// Per-spike cluster labels in [0, c). Equivalent to the n x c indicator
// matrix with one 1 per row and no empty column.
struct Partition {
    std::vector<int> labels;
    int c = 0;

    int n() const { return static_cast<int>(labels.size()); }
};

// Throws EmptyClusterError / DimensionMismatchError when the indicator-matrix
// constraints are violated.
void validate_partition(const Partition& g);

std::vector<int> cluster_sizes(const Partition& g);

// Relabels clusters by first occurrence, making comparisons
// permutation-insensitive.
Partition canonicalize(const Partition& g);

bool same_partition(const Partition& a, const Partition& b);

// d x m linear map with orthonormal columns.
struct Projection {
    Matrix w;

    Eigen::Index d() const { return w.rows(); }
    Eigen::Index m() const { return w.cols(); }
};

bool is_finite(const Matrix& m);
bool is_symmetric(const Matrix& m, double tol = 1e-12);

}  // namespace spikesort
