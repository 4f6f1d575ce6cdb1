#pragma once
//
// Dense column-major matrix and the handful of BLAS-like kernels the solver
// needs. Nothing here is blocked for cache; sizes are desk scale.
//

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "hodlrkit/error.hpp"

namespace hodlrkit {

using index_t = std::size_t;

class DenseMatrix {
public:
    DenseMatrix() = default;

    DenseMatrix(index_t rows, index_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill)
    {
    }

    // Row-wise nested initializer, e.g. DenseMatrix{{1, 2}, {3, 4}}.
    DenseMatrix(std::initializer_list<std::initializer_list<double>> rows)
        : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0), data_(rows_ * cols_)
    {
        index_t i = 0;
        for (const auto& r : rows) {
            if (r.size() != cols_)
                throw error(errc::dimension_mismatch, "ragged initializer list");
            index_t j = 0;
            for (double v : r)
                (*this)(i, j++) = v;
            ++i;
        }
    }

    static DenseMatrix identity(index_t n)
    {
        DenseMatrix m(n, n);
        for (index_t i = 0; i < n; ++i)
            m(i, i) = 1.0;
        return m;
    }

    static DenseMatrix column(std::span<const double> values)
    {
        DenseMatrix m(values.size(), 1);
        std::copy(values.begin(), values.end(), m.data_.begin());
        return m;
    }

    index_t rows() const noexcept { return rows_; }
    index_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

    double& operator()(index_t i, index_t j) noexcept
    {
        assert(i < rows_ && j < cols_);
        return data_[i + j * rows_];
    }
    double operator()(index_t i, index_t j) const noexcept
    {
        assert(i < rows_ && j < cols_);
        return data_[i + j * rows_];
    }

    std::span<double> col(index_t j) noexcept { return {data_.data() + j * rows_, rows_}; }
    std::span<const double> col(index_t j) const noexcept { return {data_.data() + j * rows_, rows_}; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    DenseMatrix transpose() const
    {
        DenseMatrix t(cols_, rows_);
        for (index_t j = 0; j < cols_; ++j)
            for (index_t i = 0; i < rows_; ++i)
                t(j, i) = (*this)(i, j);
        return t;
    }

    DenseMatrix block(index_t r0, index_t nr, index_t c0, index_t nc) const
    {
        if (r0 + nr > rows_ || c0 + nc > cols_)
            throw error(errc::dimension_mismatch, "block out of bounds");
        DenseMatrix b(nr, nc);
        for (index_t j = 0; j < nc; ++j)
            std::copy_n(data_.data() + r0 + (c0 + j) * rows_, nr, b.data_.data() + j * nr);
        return b;
    }

    DenseMatrix middle_rows(index_t r0, index_t nr) const { return block(r0, nr, 0, cols_); }
    DenseMatrix middle_cols(index_t c0, index_t nc) const { return block(0, rows_, c0, nc); }

    void set_block(index_t r0, index_t c0, const DenseMatrix& b)
    {
        if (r0 + b.rows_ > rows_ || c0 + b.cols_ > cols_)
            throw error(errc::dimension_mismatch, "set_block out of bounds");
        for (index_t j = 0; j < b.cols_; ++j)
            std::copy_n(b.data_.data() + j * b.rows_, b.rows_, data_.data() + r0 + (c0 + j) * rows_);
    }

    DenseMatrix& operator+=(const DenseMatrix& o)
    {
        check_same(o);
        for (index_t k = 0; k < data_.size(); ++k)
            data_[k] += o.data_[k];
        return *this;
    }
    DenseMatrix& operator-=(const DenseMatrix& o)
    {
        check_same(o);
        for (index_t k = 0; k < data_.size(); ++k)
            data_[k] -= o.data_[k];
        return *this;
    }
    DenseMatrix& operator*=(double s)
    {
        for (double& v : data_)
            v *= s;
        return *this;
    }

    friend DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) { return a += b; }
    friend DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) { return a -= b; }
    friend DenseMatrix operator*(DenseMatrix a, double s) { return a *= s; }

    bool all_finite() const
    {
        return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
    }

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    void check_same(const DenseMatrix& o) const
    {
        if (o.rows_ != rows_ || o.cols_ != cols_)
            throw error(errc::dimension_mismatch, "elementwise operands differ in shape");
    }

    index_t rows_ = 0;
    index_t cols_ = 0;
    std::vector<double> data_;
};

enum class op { none, trans };

// C = alpha * op(A) * op(B) + beta * C
inline void gemm(double alpha, const DenseMatrix& A, op opA, const DenseMatrix& B, op opB, double beta,
                 DenseMatrix& C)
{
    const index_t m = opA == op::none ? A.rows() : A.cols();
    const index_t k = opA == op::none ? A.cols() : A.rows();
    const index_t kb = opB == op::none ? B.rows() : B.cols();
    const index_t n = opB == op::none ? B.cols() : B.rows();
    if (k != kb || C.rows() != m || C.cols() != n)
        throw error(errc::dimension_mismatch, "gemm operand shapes");

    if (beta != 1.0)
        C *= beta;
    if (m == 0 || n == 0 || k == 0 || alpha == 0.0)
        return;

    auto b_at = [&](index_t l, index_t j) { return opB == op::none ? B(l, j) : B(j, l); };

    if (opA == op::none) {
        for (index_t j = 0; j < n; ++j) {
            double* c = C.col(j).data();
            for (index_t l = 0; l < k; ++l) {
                const double s = alpha * b_at(l, j);
                if (s == 0.0)
                    continue;
                const double* a = A.col(l).data();
                for (index_t i = 0; i < m; ++i)
                    c[i] += s * a[i];
            }
        }
    } else {
        for (index_t j = 0; j < n; ++j) {
            for (index_t i = 0; i < m; ++i) {
                const double* a = A.col(i).data();
                double sum = 0.0;
                if (opB == op::none) {
                    const double* b = B.col(j).data();
                    for (index_t l = 0; l < k; ++l)
                        sum += a[l] * b[l];
                } else {
                    for (index_t l = 0; l < k; ++l)
                        sum += a[l] * B(j, l);
                }
                C(i, j) += alpha * sum;
            }
        }
    }
}

inline DenseMatrix multiply(const DenseMatrix& A, const DenseMatrix& B, op opA = op::none, op opB = op::none)
{
    DenseMatrix C(opA == op::none ? A.rows() : A.cols(), opB == op::none ? B.cols() : B.rows());
    gemm(1.0, A, opA, B, opB, 0.0, C);
    return C;
}

inline DenseMatrix operator*(const DenseMatrix& A, const DenseMatrix& B) { return multiply(A, B); }

inline DenseMatrix hcat(const DenseMatrix& A, const DenseMatrix& B)
{
    if (A.rows() != B.rows())
        throw error(errc::dimension_mismatch, "hcat row counts differ");
    DenseMatrix C(A.rows(), A.cols() + B.cols());
    C.set_block(0, 0, A);
    C.set_block(0, A.cols(), B);
    return C;
}

inline DenseMatrix vcat(const DenseMatrix& A, const DenseMatrix& B)
{
    if (A.cols() != B.cols())
        throw error(errc::dimension_mismatch, "vcat column counts differ");
    DenseMatrix C(A.rows() + B.rows(), A.cols());
    C.set_block(0, 0, A);
    C.set_block(A.rows(), 0, B);
    return C;
}

inline double frobenius_norm(const DenseMatrix& A)
{
    // scaled accumulation, robust to tiny/huge entries
    double scale = 0.0, ssq = 1.0;
    for (double v : A.data()) {
        if (v == 0.0)
            continue;
        const double a = std::abs(v);
        if (scale < a) {
            ssq = 1.0 + ssq * (scale / a) * (scale / a);
            scale = a;
        } else {
            ssq += (a / scale) * (a / scale);
        }
    }
    return scale * std::sqrt(ssq);
}

inline double max_abs(const DenseMatrix& A)
{
    double m = 0.0;
    for (double v : A.data())
        m = std::max(m, std::abs(v));
    return m;
}

inline double dot(std::span<const double> x, std::span<const double> y)
{
    double s = 0.0;
    for (index_t i = 0; i < x.size(); ++i)
        s += x[i] * y[i];
    return s;
}

inline double norm2(std::span<const double> x)
{
    double scale = 0.0, ssq = 1.0;
    for (double v : x) {
        if (v == 0.0)
            continue;
        const double a = std::abs(v);
        if (scale < a) {
            ssq = 1.0 + ssq * (scale / a) * (scale / a);
            scale = a;
        } else {
            ssq += (a / scale) * (a / scale);
        }
    }
    return scale * std::sqrt(ssq);
}

inline void axpy(double a, std::span<const double> x, std::span<double> y)
{
    for (index_t i = 0; i < x.size(); ++i)
        y[i] += a * x[i];
}

// Gathers the listed rows (in order) into a new matrix.
inline DenseMatrix select_rows(const DenseMatrix& A, std::span<const index_t> rows)
{
    DenseMatrix R(rows.size(), A.cols());
    for (index_t j = 0; j < A.cols(); ++j)
        for (index_t k = 0; k < rows.size(); ++k)
            R(k, j) = A(rows[k], j);
    return R;
}

inline DenseMatrix select_cols(const DenseMatrix& A, std::span<const index_t> cols)
{
    DenseMatrix C(A.rows(), cols.size());
    for (index_t k = 0; k < cols.size(); ++k)
        std::copy_n(A.col(cols[k]).data(), A.rows(), C.col(k).data());
    return C;
}

} // namespace hodlrkit
