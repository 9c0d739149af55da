#pragma once

#include "spikesort/types.hpp"

namespace spikesort {

// Eigenvalues sorted descending with matching column eigenvectors.
struct EigPairs {
    Vector values;
    Matrix vectors;  // d x k
};

// Full symmetric EVD, eigenvalues descending. Each eigenvector is flipped so
// its largest-magnitude entry is positive, which pins the sign across runs.
EigPairs sym_eig(const Matrix& a);

// Top-m pairs of s1 w = lambda (s2 + ridge I) w for a symmetric pencil with
// positive definite denominator. Solved by Cholesky reduction to a standard
// symmetric EVD rather than forming inv(s2) s1. ridge is an absolute
// Tikhonov term; callers decide when to apply it.
EigPairs gen_eig_spd(const Matrix& s1, const Matrix& s2, int m, double ridge = 0.0);

// (a + ridge I)^(-1/2) for symmetric positive definite a.
Matrix inv_sqrt_spd(const Matrix& a, double ridge = 0.0);

}  // namespace spikesort
