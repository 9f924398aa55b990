#pragma once

#include "cfmimo/complex_matrix.hpp"

namespace cfmimo {

/// Full SVD A = U * diag(sigma) * V^*, with U (m x m) and V (n x n) unitary and
/// sigma descending. Phase convention: the first nonzero entry of every U column
/// is real nonnegative, with the matching V column rotated jointly so the
/// factorization is preserved.
struct SvdFactors {
    ComplexMatrix u;            // m x m
    std::vector<double> sigma;  // length min(m, n), descending
    ComplexMatrix v;            // n x n
    std::size_t rank = 0;       // number of sigma[i] > rank_tolerance
    double rank_tolerance = 0.0;
};

/// Column blocks of U and V split at the numerical rank. u0/v0 span the left and
/// right null spaces; u1/v1 the non-annihilating subspaces. Blocks may have zero
/// width.
struct NullBases {
    ComplexMatrix u0, v0, u1, v1;
};

/// One-sided Jacobi SVD. Throws std::invalid_argument on empty or non-finite input.
SvdFactors svd(const ComplexMatrix& a);

NullBases null_bases(const SvdFactors& f);

/// delta^T * B * B^*  for a column basis B; delta length must equal rows(B).
CVec project_vector(const CVec& delta, const ComplexMatrix& basis);

/// B * B^* * A  for a column basis B; rows(A) must equal rows(B).
ComplexMatrix project_matrix(const ComplexMatrix& a, const ComplexMatrix& basis);

}  // namespace cfmimo
