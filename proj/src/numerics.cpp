#include "spikesort/numerics.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace spikesort {

namespace {

// Largest-magnitude entry positive; first such entry wins on ties.
void fix_column_signs(Matrix& v) {
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
        Eigen::Index best = 0;
        double mag = -1.0;
        for (Eigen::Index i = 0; i < v.rows(); ++i) {
            const double m = std::abs(v(i, j));
            if (m > mag) {
                mag = m;
                best = i;
            }
        }
        if (v(best, j) < 0.0) v.col(j) = -v.col(j);
    }
}

}  // namespace

EigPairs sym_eig(const Matrix& a) {
    if (a.rows() != a.cols())
        throw DimensionMismatchError("sym_eig: matrix is not square");
    if (!is_finite(a))
        throw NonFiniteError("sym_eig: input contains NaN/Inf");

    // SymMatrix inputs are symmetric to 1e-12; symmetrize away the dust.
    const Matrix sym = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    if (solver.info() != Eigen::Success)
        throw NonFiniteError("sym_eig: eigensolver failed to converge");

    const Eigen::Index d = a.rows();
    EigPairs out;
    out.values.resize(d);
    out.vectors.resize(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {  // Eigen sorts ascending
        out.values(i) = solver.eigenvalues()(d - 1 - i);
        out.vectors.col(i) = solver.eigenvectors().col(d - 1 - i);
    }
    fix_column_signs(out.vectors);
    return out;
}

EigPairs gen_eig_spd(const Matrix& s1, const Matrix& s2, int m, double ridge) {
    const Eigen::Index d = s1.rows();
    if (s1.cols() != d || s2.rows() != d || s2.cols() != d)
        throw DimensionMismatchError("gen_eig_spd: s1 and s2 must be square with equal dims");
    if (m < 1 || m > d)
        throw DimensionMismatchError("gen_eig_spd: m out of range");
    if (!is_finite(s1) || !is_finite(s2))
        throw NonFiniteError("gen_eig_spd: input contains NaN/Inf");
    if (ridge < 0.0)
        throw DimensionMismatchError("gen_eig_spd: ridge must be non-negative");

    Matrix b = 0.5 * (s2 + s2.transpose());
    b.diagonal().array() += ridge;
    Eigen::LLT<Matrix> llt(b);
    if (llt.info() != Eigen::Success)
        throw SingularDenominatorError("gen_eig_spd: s2 + ridge*I is not positive definite");

    // L^-1 s1 L^-T is symmetric with the pencil's eigenvalues; eigenvectors
    // transform back through L^-T.
    const Matrix l = llt.matrixL();
    Matrix c = l.triangularView<Eigen::Lower>().solve(0.5 * (s1 + s1.transpose()));
    c = l.triangularView<Eigen::Lower>().solve(c.transpose()).transpose();
    const EigPairs std_pairs = sym_eig(c);

    EigPairs out;
    out.values = std_pairs.values.head(m);
    out.vectors = l.transpose().triangularView<Eigen::Upper>().solve(std_pairs.vectors.leftCols(m));
    if (!is_finite(out.vectors) || !out.values.allFinite())
        throw SingularDenominatorError("gen_eig_spd: back-transform produced non-finite vectors");
    fix_column_signs(out.vectors);
    return out;
}

Matrix inv_sqrt_spd(const Matrix& a, double ridge) {
    if (a.rows() != a.cols())
        throw DimensionMismatchError("inv_sqrt_spd: matrix is not square");
    if (!is_finite(a))
        throw NonFiniteError("inv_sqrt_spd: input contains NaN/Inf");

    Matrix b = 0.5 * (a + a.transpose());
    b.diagonal().array() += ridge;
    const EigPairs pairs = sym_eig(b);
    if (pairs.values(pairs.values.size() - 1) <= 0.0)
        throw SingularDenominatorError("inv_sqrt_spd: matrix is not positive definite after ridging");

    return pairs.vectors * pairs.values.cwiseSqrt().cwiseInverse().asDiagonal() *
           pairs.vectors.transpose();
}

}  // namespace spikesort
