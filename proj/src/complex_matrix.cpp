#include "cfmimo/complex_matrix.hpp"

#include <cmath>

namespace cfmimo {

ComplexMatrix ComplexMatrix::adjoint() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
    return out;
}

ComplexMatrix ComplexMatrix::transpose() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
    return out;
}

ComplexMatrix ComplexMatrix::conjugate() const {
    ComplexMatrix out(rows_, cols_);
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = std::conj(data_[i]);
    return out;
}

ComplexMatrix ComplexMatrix::operator*(const ComplexMatrix& rhs) const {
    if (cols_ != rhs.rows_) throw std::invalid_argument("ComplexMatrix: dimension mismatch in product");
    ComplexMatrix out(rows_, rhs.cols_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t k = 0; k < cols_; ++k) {
            const cxd a = (*this)(r, k);
            if (a == cxd{}) continue;
            for (std::size_t c = 0; c < rhs.cols_; ++c) out(r, c) += a * rhs(k, c);
        }
    }
    return out;
}

ComplexMatrix ComplexMatrix::operator+(const ComplexMatrix& rhs) const {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_)
        throw std::invalid_argument("ComplexMatrix: dimension mismatch in sum");
    ComplexMatrix out = *this;
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] += rhs.data_[i];
    return out;
}

ComplexMatrix ComplexMatrix::operator-(const ComplexMatrix& rhs) const {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_)
        throw std::invalid_argument("ComplexMatrix: dimension mismatch in difference");
    ComplexMatrix out = *this;
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] -= rhs.data_[i];
    return out;
}

ComplexMatrix& ComplexMatrix::operator*=(cxd s) {
    for (auto& v : data_) v *= s;
    return *this;
}

ComplexMatrix ComplexMatrix::col_block(std::size_t first, std::size_t last) const {
    if (first > last || last > cols_) throw std::invalid_argument("ComplexMatrix: bad column block");
    ComplexMatrix out(rows_, last - first);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = first; c < last; ++c) out(r, c - first) = (*this)(r, c);
    return out;
}

CVec ComplexMatrix::col(std::size_t c) const {
    CVec v(rows_);
    for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
    return v;
}

void ComplexMatrix::set_col(std::size_t c, const CVec& v) {
    for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = v[r];
}

double ComplexMatrix::frobenius_norm() const {
    double s = 0.0;
    for (const auto& v : data_) s += std::norm(v);
    return std::sqrt(s);
}

bool ComplexMatrix::is_finite() const {
    for (const auto& v : data_)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

double vec_norm(const CVec& v) {
    double s = 0.0;
    for (const auto& x : v) s += std::norm(x);
    return std::sqrt(s);
}

cxd vec_dot(const CVec& a, const CVec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("vec_dot: length mismatch");
    cxd s{};
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

CVec row_times_matrix(const CVec& x, const ComplexMatrix& m) {
    if (x.size() != m.rows()) throw std::invalid_argument("row_times_matrix: dimension mismatch");
    CVec y(m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const cxd a = x[r];
        if (a == cxd{}) continue;
        for (std::size_t c = 0; c < m.cols(); ++c) y[c] += a * m(r, c);
    }
    return y;
}

CVec matrix_times_vec(const ComplexMatrix& m, const CVec& x) {
    if (x.size() != m.cols()) throw std::invalid_argument("matrix_times_vec: dimension mismatch");
    CVec y(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        cxd s{};
        for (std::size_t c = 0; c < m.cols(); ++c) s += m(r, c) * x[c];
        y[r] = s;
    }
    return y;
}

}  // namespace cfmimo
