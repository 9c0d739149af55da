#pragma once

#include "spikesort/types.hpp"

namespace spikesort {

// Relative Tikhonov scale used whenever an m x m Gram is inverted. The
// absolute ridge is rel * trace(W^T S1 W) / m: the total-scatter Gram gives a
// usable scale even when the denominator Gram is exactly singular, which
// happens for perfect partitions.
inline constexpr double kDefaultRidgeRel = 1e-10;

// Value of the unified trace-ratio criterion tr{(W^T S2 W + r I)^-1 W^T S1 W}
// together with the traces of the two projected scatters.
struct Objective {
    double value = 0.0;
    double s1_trace = 0.0;         // trace of W^T S1 W
    double s2_trace = 0.0;         // trace of W^T S2 W (before ridging)
    bool ridge_dominated = false;  // denominator trace fell below the ridge mass
};

// Explicit centering matrix I - N/n. Kept for tests; production paths center
// by row-mean subtraction and never materialize the n x n matrix.
Matrix centering_matrix(Eigen::Index n);

// X H: removes the mean column.
Matrix center(const Matrix& x);

// S1 = X H X^T, the total scatter.
Matrix total_scatter(const Matrix& x);

// S2 = X H (I - G (G^T G)^-1 G^T) H X^T. Its trace equals the K-means sum of
// squared errors of partition g at optimal centers.
Matrix within_complement_scatter(const Matrix& x, const Partition& g);

// Column j = mean of the y-columns assigned to cluster j. y may be the raw
// data or any embedding of it.
Matrix class_means(const Matrix& y, const Partition& g);

Objective objective(const Matrix& x, const Projection& w, const Partition& g,
                    double ridge_rel = kDefaultRidgeRel);

// Top-m0 eigenvectors of the total scatter. m0 is clipped to min(d, n-1)
// with a warning on stderr.
Projection pca_init(const Matrix& x, int m0);

// (W^T S1 W + r I)^(-1/2) W^T X H. Rows of the result have identity total
// scatter.
Matrix whitened_embedding(const Matrix& x, const Projection& w,
                          double ridge_rel = kDefaultRidgeRel);

}  // namespace spikesort
