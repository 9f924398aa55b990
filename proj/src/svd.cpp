#include "cfmimo/svd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cfmimo {

namespace {

constexpr double kJacobiTol = 1.0e-15;
constexpr int kMaxSweeps = 64;

// One-sided Jacobi on B (m x n, m >= n): right-multiplies plane rotations until
// the columns of B are mutually orthogonal, accumulating them into V.
void jacobi_orthogonalize(ComplexMatrix& b, ComplexMatrix& v) {
    const std::size_t m = b.rows(), n = b.cols();
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double app = 0.0, aqq = 0.0;
                cxd apq{};
                for (std::size_t r = 0; r < m; ++r) {
                    const cxd bp = b(r, p), bq = b(r, q);
                    app += std::norm(bp);
                    aqq += std::norm(bq);
                    apq += std::conj(bp) * bq;
                }
                const double g = std::abs(apq);
                if (g <= kJacobiTol * std::sqrt(app * aqq) || g == 0.0) continue;
                rotated = true;

                // Phase-align column q so the 2x2 Gram matrix becomes real, then
                // apply the classical symmetric Jacobi rotation.
                const cxd omega_bar = std::conj(apq) / g;
                const double tau = (aqq - app) / (2.0 * g);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;

                for (std::size_t r = 0; r < m; ++r) {
                    const cxd bp = b(r, p);
                    const cxd bq = b(r, q) * omega_bar;
                    b(r, p) = c * bp - s * bq;
                    b(r, q) = s * bp + c * bq;
                }
                for (std::size_t r = 0; r < n; ++r) {
                    const cxd vp = v(r, p);
                    const cxd vq = v(r, q) * omega_bar;
                    v(r, p) = c * vp - s * vq;
                    v(r, q) = s * vp + c * vq;
                }
            }
        }
        if (!rotated) break;
    }
}

// Appends orthonormal columns to u (starting at column `from`) completing it to a
// full unitary basis, via Gram-Schmidt against the existing columns.
void complete_basis(ComplexMatrix& u, std::size_t from) {
    const std::size_t m = u.rows();
    std::size_t next = from;
    for (std::size_t cand = 0; cand < m && next < m; ++cand) {
        CVec e(m);
        e[cand] = 1.0;
        for (int pass = 0; pass < 2; ++pass) {  // twice for numerical orthogonality
            for (std::size_t c = 0; c < next; ++c) {
                cxd proj{};
                for (std::size_t r = 0; r < m; ++r) proj += std::conj(u(r, c)) * e[r];
                for (std::size_t r = 0; r < m; ++r) e[r] -= proj * u(r, c);
            }
        }
        const double nrm = vec_norm(e);
        if (nrm < 0.5) continue;  // candidate nearly in the span already
        for (std::size_t r = 0; r < m; ++r) u(r, next) = e[r] / nrm;
        ++next;
    }
}

// First entry of column c with modulus above `floor` made real nonnegative;
// returns the applied phase multiplier (1 if the column is effectively zero).
cxd column_phase_fix(ComplexMatrix& mat, std::size_t c, double floor_mag) {
    for (std::size_t r = 0; r < mat.rows(); ++r) {
        const double mag = std::abs(mat(r, c));
        if (mag > floor_mag) {
            const cxd factor = std::conj(mat(r, c)) / mag;
            for (std::size_t rr = 0; rr < mat.rows(); ++rr) mat(rr, c) *= factor;
            return factor;
        }
    }
    return cxd{1.0, 0.0};
}

}  // namespace

SvdFactors svd(const ComplexMatrix& a) {
    if (a.empty()) throw std::invalid_argument("svd: empty matrix");
    if (!a.is_finite()) throw std::invalid_argument("svd: non-finite entries in input");

    const bool flipped = a.rows() < a.cols();
    ComplexMatrix b = flipped ? a.adjoint() : a;  // tall: m >= n
    const std::size_t m = b.rows(), n = b.cols();

    ComplexMatrix v = ComplexMatrix::identity(n);
    jacobi_orthogonalize(b, v);

    std::vector<double> norms(n);
    for (std::size_t c = 0; c < n; ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < m; ++r) s += std::norm(b(r, c));
        norms[c] = std::sqrt(s);
    }

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(),
                     [&](std::size_t i, std::size_t j) { return norms[i] > norms[j]; });

    SvdFactors f;
    f.sigma.resize(n);
    ComplexMatrix u(m, m);
    ComplexMatrix vs(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        f.sigma[c] = norms[perm[c]];
        for (std::size_t r = 0; r < n; ++r) vs(r, c) = v(r, perm[c]);
    }

    const double sigma_max = f.sigma.empty() ? 0.0 : f.sigma[0];
    const double eps = std::numeric_limits<double>::epsilon();
    f.rank_tolerance = static_cast<double>(std::max(m, n)) * eps * sigma_max;

    std::size_t rank = 0;
    for (std::size_t c = 0; c < n; ++c)
        if (f.sigma[c] > f.rank_tolerance) ++rank;
    f.rank = rank;

    for (std::size_t c = 0; c < rank; ++c) {
        const std::size_t src = perm[c];
        for (std::size_t r = 0; r < m; ++r) u(r, c) = b(r, src) / f.sigma[c];
    }
    complete_basis(u, rank);

    // Joint phase fix for the paired columns, independent for the rest.
    for (std::size_t c = 0; c < rank; ++c) {
        const cxd factor = column_phase_fix(u, c, 1e-300);
        for (std::size_t r = 0; r < n; ++r) vs(r, c) *= factor;
    }
    for (std::size_t c = rank; c < m; ++c) column_phase_fix(u, c, 1e-300);
    for (std::size_t c = rank; c < n; ++c) column_phase_fix(vs, c, 1e-300);

    if (flipped) {
        f.u = std::move(vs);
        f.v = std::move(u);
    } else {
        f.u = std::move(u);
        f.v = std::move(vs);
    }
    return f;
}

NullBases null_bases(const SvdFactors& f) {
    NullBases b;
    b.u1 = f.u.col_block(0, f.rank);
    b.u0 = f.u.col_block(f.rank, f.u.cols());
    b.v1 = f.v.col_block(0, f.rank);
    b.v0 = f.v.col_block(f.rank, f.v.cols());
    return b;
}

CVec project_vector(const CVec& delta, const ComplexMatrix& basis) {
    if (delta.size() != basis.rows())
        throw std::invalid_argument("project_vector: dimension mismatch");
    // delta^T * B, then * B^*
    CVec t(basis.cols());
    for (std::size_t r = 0; r < basis.rows(); ++r) {
        const cxd d = delta[r];
        if (d == cxd{}) continue;
        for (std::size_t c = 0; c < basis.cols(); ++c) t[c] += d * basis(r, c);
    }
    CVec out(delta.size());
    for (std::size_t c = 0; c < basis.cols(); ++c) {
        const cxd tc = t[c];
        if (tc == cxd{}) continue;
        for (std::size_t r = 0; r < basis.rows(); ++r) out[r] += tc * std::conj(basis(r, c));
    }
    return out;
}

ComplexMatrix project_matrix(const ComplexMatrix& a, const ComplexMatrix& basis) {
    if (a.rows() != basis.rows())
        throw std::invalid_argument("project_matrix: dimension mismatch");
    // B^* * A, then B * (that)
    ComplexMatrix t(basis.cols(), a.cols());
    for (std::size_t c = 0; c < basis.cols(); ++c)
        for (std::size_t r = 0; r < basis.rows(); ++r) {
            const cxd bc = std::conj(basis(r, c));
            if (bc == cxd{}) continue;
            for (std::size_t k = 0; k < a.cols(); ++k) t(c, k) += bc * a(r, k);
        }
    ComplexMatrix out(a.rows(), a.cols());
    for (std::size_t r = 0; r < basis.rows(); ++r)
        for (std::size_t c = 0; c < basis.cols(); ++c) {
            const cxd br = basis(r, c);
            if (br == cxd{}) continue;
            for (std::size_t k = 0; k < a.cols(); ++k) out(r, k) += br * t(c, k);
        }
    return out;
}

}  // namespace cfmimo
