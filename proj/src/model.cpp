#include "spikesort/model.hpp"

#include <Eigen/Cholesky>
#include <cstdio>

#include "spikesort/numerics.hpp"

namespace spikesort {

Matrix centering_matrix(Eigen::Index n) {
    if (n < 1) throw DimensionMismatchError("centering_matrix: n must be >= 1");
    return Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
}

Matrix center(const Matrix& x) {
    if (x.cols() < 1) throw DimensionMismatchError("center: empty matrix");
    return x.colwise() - x.rowwise().mean().eval();
}

Matrix total_scatter(const Matrix& x) {
    const Matrix xc = center(x);
    return xc * xc.transpose();
}

Matrix within_complement_scatter(const Matrix& x, const Partition& g) {
    if (static_cast<Eigen::Index>(g.labels.size()) != x.cols())
        throw DimensionMismatchError("within_complement_scatter: label count != spike count");
    validate_partition(g);

    // S2 = S1 - sum_j n_j mu_j mu_j^T on the centered data; the projector
    // G (G^T G)^-1 G^T is never materialized.
    const Matrix xc = center(x);
    const Matrix mu = class_means(xc, g);
    const std::vector<int> counts = cluster_sizes(g);
    Matrix s2 = xc * xc.transpose();
    for (int j = 0; j < g.c; ++j)
        s2.noalias() -= static_cast<double>(counts[j]) * mu.col(j) * mu.col(j).transpose();
    return 0.5 * (s2 + s2.transpose());
}

Matrix class_means(const Matrix& y, const Partition& g) {
    if (static_cast<Eigen::Index>(g.labels.size()) != y.cols())
        throw DimensionMismatchError("class_means: label count != column count");
    validate_partition(g);

    Matrix mu = Matrix::Zero(y.rows(), g.c);
    std::vector<int> counts(g.c, 0);
    for (Eigen::Index i = 0; i < y.cols(); ++i) {
        mu.col(g.labels[i]) += y.col(i);
        ++counts[g.labels[i]];
    }
    for (int j = 0; j < g.c; ++j) mu.col(j) /= static_cast<double>(counts[j]);
    return mu;
}

Objective objective(const Matrix& x, const Projection& w, const Partition& g, double ridge_rel) {
    const Eigen::Index m = w.m();
    if (w.d() != x.rows())
        throw DimensionMismatchError("objective: projection rows != spike dimension");

    const Matrix s1 = total_scatter(x);
    const Matrix s2 = within_complement_scatter(x, g);
    const Matrix a = w.w.transpose() * s1 * w.w;
    Matrix b = w.w.transpose() * s2 * w.w;

    Objective out;
    out.s1_trace = a.trace();
    out.s2_trace = b.trace();

    const double ridge = ridge_rel * out.s1_trace / static_cast<double>(m);
    out.ridge_dominated = out.s2_trace < static_cast<double>(m) * ridge;
    b.diagonal().array() += ridge;
    Eigen::LLT<Matrix> llt(0.5 * (b + b.transpose()));
    if (llt.info() != Eigen::Success)
        throw SingularDenominatorError("objective: denominator Gram singular after ridging");
    out.value = llt.solve(a).trace();
    if (!std::isfinite(out.value))
        throw SingularDenominatorError("objective: non-finite value");
    return out;
}

Projection pca_init(const Matrix& x, int m0) {
    const Eigen::Index d = x.rows();
    const Eigen::Index n = x.cols();
    if (m0 < 1) throw DimensionMismatchError("pca_init: m0 must be >= 1");
    const int cap = static_cast<int>(std::min(d, n > 1 ? n - 1 : Eigen::Index{1}));
    if (m0 > cap) {
        std::fprintf(stderr, "pca_init: m0=%d clipped to %d (rank limit)\n", m0, cap);
        m0 = cap;
    }
    const EigPairs pairs = sym_eig(total_scatter(x));
    Projection w;
    w.w = pairs.vectors.leftCols(m0);
    return w;
}

Matrix whitened_embedding(const Matrix& x, const Projection& w, double ridge_rel) {
    if (w.d() != x.rows())
        throw DimensionMismatchError("whitened_embedding: projection rows != spike dimension");
    const Matrix p = w.w.transpose() * center(x);  // m x n
    const Matrix a = p * p.transpose();            // W^T S1 W
    const double tr = a.trace();
    if (tr <= 0.0)
        throw SingularDenominatorError("whitened_embedding: total scatter vanishes");
    return inv_sqrt_spd(a, ridge_rel * tr / static_cast<double>(a.rows())) * p;
}

}  // namespace spikesort
