#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace cfmimo {

using cxd = std::complex<double>;
using CVec = std::vector<cxd>;

/// Dense complex matrix, row-major storage.
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols, cxd fill = {})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    cxd& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const cxd& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    const std::vector<cxd>& data() const { return data_; }
    std::vector<cxd>& data() { return data_; }

    ComplexMatrix adjoint() const;     // conjugate transpose
    ComplexMatrix transpose() const;
    ComplexMatrix conjugate() const;

    ComplexMatrix operator*(const ComplexMatrix& rhs) const;
    ComplexMatrix operator+(const ComplexMatrix& rhs) const;
    ComplexMatrix operator-(const ComplexMatrix& rhs) const;
    ComplexMatrix& operator*=(cxd s);

    /// Columns [first, last) as a new matrix; last may equal first (zero-width block).
    ComplexMatrix col_block(std::size_t first, std::size_t last) const;

    CVec col(std::size_t c) const;
    void set_col(std::size_t c, const CVec& v);

    double frobenius_norm() const;
    bool is_finite() const;

    bool operator==(const ComplexMatrix& rhs) const {
        return rows_ == rhs.rows_ && cols_ == rhs.cols_ && data_ == rhs.data_;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<cxd> data_;
};

// Row-vector helpers used by the projection operators: vectors are treated as
// 1 x n rows where the operators require it.
double vec_norm(const CVec& v);
cxd vec_dot(const CVec& a, const CVec& b);  // conjugate(a) . b

/// y = x^T * M  (x length = rows(M), result length = cols(M)).
CVec row_times_matrix(const CVec& x, const ComplexMatrix& m);
/// y = M * x  (x length = cols(M), result length = rows(M)).
CVec matrix_times_vec(const ComplexMatrix& m, const CVec& x);

}  // namespace cfmimo
