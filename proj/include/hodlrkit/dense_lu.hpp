#pragma once
//
// Partial- and full-pivoting LU factorizations.
//
// Both kernels skip zero multipliers and zero pivot-row entries, so banded
// inputs (e.g. lexicographically ordered grid operators) cost O(n b^2)
// instead of O(n^3) without any change in the arithmetic performed.
//

#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include "hodlrkit/matrix.hpp"

namespace hodlrkit {

inline constexpr double singular_pivot_threshold = 1e-300;

class PartialPivLU {
public:
    PartialPivLU() = default;

    explicit PartialPivLU(DenseMatrix A) : lu_(std::move(A))
    {
        if (lu_.rows() != lu_.cols())
            throw error(errc::dimension_mismatch, "partial-pivot LU needs a square matrix");
        if (!lu_.all_finite())
            throw error(errc::invalid_argument, "non-finite entry in LU input");
        factor();
    }

    index_t size() const noexcept { return lu_.rows(); }
    const DenseMatrix& packed() const noexcept { return lu_; }
    const std::vector<index_t>& row_perm() const noexcept { return perm_; }

    DenseMatrix solve(DenseMatrix B) const
    {
        solve_in_place(B);
        return B;
    }

    void solve_in_place(DenseMatrix& B) const
    {
        const index_t n = size();
        if (B.rows() != n)
            throw error(errc::dimension_mismatch, "LU solve right-hand side has wrong row count");
        std::vector<double> tmp(n);
        for (index_t c = 0; c < B.cols(); ++c) {
            auto x = B.col(c);
            for (index_t i = 0; i < n; ++i)
                tmp[i] = x[perm_[i]];
            // L y = P b
            for (index_t k = 0; k < n; ++k) {
                const double xk = tmp[k];
                if (xk == 0.0)
                    continue;
                const double* l = lu_.col(k).data();
                for (index_t i = k + 1; i <= l_last_[k]; ++i)
                    tmp[i] -= l[i] * xk;
            }
            // U x = y
            for (index_t k = n; k-- > 0;) {
                tmp[k] /= lu_(k, k);
                const double xk = tmp[k];
                if (xk == 0.0)
                    continue;
                const double* u = lu_.col(k).data();
                for (index_t i = u_first_[k]; i < k; ++i)
                    tmp[i] -= u[i] * xk;
            }
            std::copy(tmp.begin(), tmp.end(), x.begin());
        }
    }

    // Reconstructs P*A = L*U as L*U (rows in pivoted order).
    DenseMatrix lower() const
    {
        const index_t n = size();
        DenseMatrix L(n, n);
        for (index_t j = 0; j < n; ++j) {
            L(j, j) = 1.0;
            for (index_t i = j + 1; i < n; ++i)
                L(i, j) = lu_(i, j);
        }
        return L;
    }
    DenseMatrix upper() const
    {
        const index_t n = size();
        DenseMatrix U(n, n);
        for (index_t j = 0; j < n; ++j)
            for (index_t i = 0; i <= j; ++i)
                U(i, j) = lu_(i, j);
        return U;
    }

private:
    void factor()
    {
        const index_t n = lu_.rows();
        perm_.resize(n);
        std::iota(perm_.begin(), perm_.end(), index_t{0});
        l_last_.assign(n, 0);
        u_first_.assign(n, 0);

        for (index_t k = 0; k < n; ++k) {
            index_t p = k;
            double best = std::abs(lu_(k, k));
            for (index_t i = k + 1; i < n; ++i) {
                const double a = std::abs(lu_(i, k));
                if (a > best) {
                    best = a;
                    p = i;
                }
            }
            if (best < singular_pivot_threshold)
                throw error(errc::singular_matrix, "pivot magnitude below threshold at step " + std::to_string(k));
            if (p != k) {
                for (index_t j = 0; j < n; ++j)
                    std::swap(lu_(k, j), lu_(p, j));
                std::swap(perm_[k], perm_[p]);
            }

            double* ck = lu_.col(k).data();
            const double inv = 1.0 / ck[k];
            index_t last_row = k;
            for (index_t i = k + 1; i < n; ++i) {
                if (ck[i] != 0.0) {
                    ck[i] *= inv;
                    last_row = i;
                }
            }
            l_last_[k] = last_row;

            index_t last_col = k;
            for (index_t j = k + 1; j < n; ++j)
                if (lu_(k, j) != 0.0)
                    last_col = j;

            if (last_row > k) {
                for (index_t j = k + 1; j <= last_col; ++j) {
                    double* cj = lu_.col(j).data();
                    const double ukj = cj[k];
                    if (ukj == 0.0)
                        continue;
                    for (index_t i = k + 1; i <= last_row; ++i)
                        cj[i] -= ck[i] * ukj;
                }
            }
        }

        // Row swaps after step k can move entries below l_last_ of an earlier
        // column; recompute the exact extents on the final packed factors.
        for (index_t k = 0; k < n; ++k) {
            index_t last = k;
            for (index_t i = k + 1; i < n; ++i)
                if (lu_(i, k) != 0.0)
                    last = i;
            l_last_[k] = last;
            index_t first = k;
            for (index_t i = 0; i < k; ++i)
                if (lu_(i, k) != 0.0) {
                    first = i;
                    break;
                }
            u_first_[k] = first;
        }
    }

    DenseMatrix lu_;
    std::vector<index_t> perm_;    // position k holds original row perm_[k]
    std::vector<index_t> l_last_;  // last nonzero row of L(:, k)
    std::vector<index_t> u_first_; // first nonzero row of U(:, k)
};

inline PartialPivLU lu_partial(DenseMatrix A) { return PartialPivLU(std::move(A)); }

// Complete-pivoting LU of a (possibly rectangular, rank-deficient) matrix:
//   A(row_perm[i], col_perm[j]) = (L * U)(i, j)
// Elimination stops as soon as the trailing block is exactly zero, so
// `steps()` may be smaller than min(m, n). Rank deficiency is reported
// through the pivots, never raised.
class FullPivLU {
public:
    FullPivLU() = default;

    explicit FullPivLU(DenseMatrix A) : lu_(std::move(A))
    {
        if (!lu_.all_finite())
            throw error(errc::invalid_argument, "non-finite entry in full-pivot LU input");
        factor();
    }

    index_t rows() const noexcept { return lu_.rows(); }
    index_t cols() const noexcept { return lu_.cols(); }
    index_t steps() const noexcept { return pivots_.size(); }
    const DenseMatrix& packed() const noexcept { return lu_; }
    const std::vector<index_t>& row_perm() const noexcept { return row_perm_; }
    const std::vector<index_t>& col_perm() const noexcept { return col_perm_; }
    const std::vector<double>& pivot_magnitudes() const noexcept { return pivots_; }

    // Length of the leading run of pivots with |p_k| >= tau * |p_0|.
    index_t numerical_rank(double tau) const noexcept
    {
        if (pivots_.empty() || pivots_.front() == 0.0)
            return 0;
        const double cut = tau * pivots_.front();
        index_t r = 0;
        while (r < pivots_.size() && pivots_[r] >= cut)
            ++r;
        return r;
    }

    // m x steps unit lower factor
    DenseMatrix lower() const
    {
        DenseMatrix L(rows(), steps());
        for (index_t j = 0; j < steps(); ++j) {
            L(j, j) = 1.0;
            for (index_t i = j + 1; i < rows(); ++i)
                L(i, j) = lu_(i, j);
        }
        return L;
    }

    // steps x n upper factor
    DenseMatrix upper() const
    {
        DenseMatrix U(steps(), cols());
        for (index_t j = 0; j < cols(); ++j)
            for (index_t i = 0; i < std::min(j + 1, steps()); ++i)
                U(i, j) = lu_(i, j);
        return U;
    }

    // In place: X <- L(0:r,0:r)^{-1} X, X has r rows.
    void solve_lower_leading(index_t r, DenseMatrix& X) const
    {
        if (X.rows() != r || r > steps())
            throw error(errc::dimension_mismatch, "leading lower solve shape");
        for (index_t c = 0; c < X.cols(); ++c) {
            auto x = X.col(c);
            for (index_t k = 0; k < r; ++k)
                for (index_t i = k + 1; i < r; ++i)
                    x[i] -= lu_(i, k) * x[k];
        }
    }

    // In place: X <- X * U(0:r,0:r)^{-1}, X has r columns.
    void solve_upper_leading_right(index_t r, DenseMatrix& X) const
    {
        if (X.cols() != r || r > steps())
            throw error(errc::dimension_mismatch, "leading upper solve shape");
        for (index_t j = 0; j < r; ++j) {
            auto xj = X.col(j);
            for (index_t k = 0; k < j; ++k) {
                const double ukj = lu_(k, j);
                if (ukj != 0.0)
                    axpy(-ukj, X.col(k), xj);
            }
            const double inv = 1.0 / lu_(j, j);
            for (double& v : xj)
                v *= inv;
        }
    }

private:
    void factor()
    {
        const index_t m = lu_.rows(), n = lu_.cols();
        row_perm_.resize(m);
        col_perm_.resize(n);
        std::iota(row_perm_.begin(), row_perm_.end(), index_t{0});
        std::iota(col_perm_.begin(), col_perm_.end(), index_t{0});

        const index_t kmax = std::min(m, n);
        for (index_t k = 0; k < kmax; ++k) {
            index_t pr = k, pc = k;
            double best = 0.0;
            for (index_t j = k; j < n; ++j) {
                const double* c = lu_.col(j).data();
                for (index_t i = k; i < m; ++i) {
                    const double a = std::abs(c[i]);
                    if (a > best) {
                        best = a;
                        pr = i;
                        pc = j;
                    }
                }
            }
            if (best == 0.0)
                break;
            if (pr != k) {
                for (index_t j = 0; j < n; ++j)
                    std::swap(lu_(k, j), lu_(pr, j));
                std::swap(row_perm_[k], row_perm_[pr]);
            }
            if (pc != k) {
                for (index_t i = 0; i < m; ++i)
                    std::swap(lu_(i, k), lu_(i, pc));
                std::swap(col_perm_[k], col_perm_[pc]);
            }
            pivots_.push_back(best);

            double* ck = lu_.col(k).data();
            const double inv = 1.0 / ck[k];
            for (index_t i = k + 1; i < m; ++i)
                ck[i] *= inv;
            for (index_t j = k + 1; j < n; ++j) {
                double* cj = lu_.col(j).data();
                const double ukj = cj[k];
                if (ukj == 0.0)
                    continue;
                for (index_t i = k + 1; i < m; ++i)
                    cj[i] -= ck[i] * ukj;
            }
        }
    }

    DenseMatrix lu_;
    std::vector<index_t> row_perm_;
    std::vector<index_t> col_perm_;
    std::vector<double> pivots_;
};

inline FullPivLU lu_full(DenseMatrix A) { return FullPivLU(std::move(A)); }

} // namespace hodlrkit
