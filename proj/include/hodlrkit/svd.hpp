#pragma once
//
// One-sided (Hestenes) Jacobi SVD. Slower than bidiagonalization but
// accurate to high relative precision, which is what a reference oracle
// for compression error needs.
//

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "hodlrkit/low_rank_factor.hpp"
#include "hodlrkit/matrix.hpp"

namespace hodlrkit {

struct SvdResult {
    DenseMatrix U;                      // m x k, orthonormal columns, k = min(m, n)
    std::vector<double> singular_values; // non-increasing
    DenseMatrix V;                      // n x k, orthonormal columns
};

namespace detail {

// Fills exactly-zero columns of Q (flagged in `dead`) with unit vectors
// orthogonalized against every other column, so Q^T Q = I holds even for
// rank-deficient inputs.
inline void complete_orthonormal(DenseMatrix& Q, const std::vector<bool>& dead)
{
    const index_t m = Q.rows();
    index_t probe = 0;
    for (index_t j = 0; j < Q.cols(); ++j) {
        if (!dead[j])
            continue;
        for (; probe < m; ++probe) {
            std::vector<double> v(m, 0.0);
            v[probe] = 1.0;
            for (int pass = 0; pass < 2; ++pass) {
                for (index_t c = 0; c < Q.cols(); ++c) {
                    if (c == j || (dead[c] && c > j))
                        continue;
                    const double h = dot(Q.col(c), v);
                    axpy(-h, Q.col(c), v);
                }
            }
            const double nv = norm2(v);
            if (nv > 0.5) {
                for (index_t i = 0; i < m; ++i)
                    Q(i, j) = v[i] / nv;
                ++probe;
                break;
            }
        }
    }
}

// Requires m >= n.
inline SvdResult jacobi_svd_tall(const DenseMatrix& A)
{
    const index_t m = A.rows(), n = A.cols();
    // Work on A / max|a_ij| and skip columns far below that scale: their dot
    // products sink into the subnormal range, where the orthogonality test
    // can never be met, and they are invisible at double precision anyway.
    const double scale = max_abs(A);
    DenseMatrix W = A;
    if (scale > 0.0)
        for (double& v : W.data())
            v /= scale;
    constexpr double negligible = 1e-200; // squared column norm
    DenseMatrix V = DenseMatrix::identity(n);
    const double eps = std::sqrt(static_cast<double>(m)) * std::numeric_limits<double>::epsilon();
    const index_t max_sweeps = std::max<index_t>(100 * n, 1);

    std::vector<double> sq(n);
    for (index_t j = 0; j < n; ++j)
        sq[j] = dot(W.col(j), W.col(j));

    bool converged = n < 2;
    for (index_t sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        bool rotated = false;
        for (index_t p = 0; p + 1 < n; ++p) {
            for (index_t q = p + 1; q < n; ++q) {
                const double alpha = sq[p], beta = sq[q];
                if (alpha <= negligible || beta <= negligible)
                    continue;
                double* wp = W.col(p).data();
                double* wq = W.col(q).data();
                double gamma = 0.0;
                for (index_t i = 0; i < m; ++i)
                    gamma += wp[i] * wq[i];
                if (std::abs(gamma) <= eps * std::sqrt(alpha) * std::sqrt(beta))
                    continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (index_t i = 0; i < m; ++i) {
                    const double a = wp[i], b = wq[i];
                    wp[i] = c * a - s * b;
                    wq[i] = s * a + c * b;
                }
                double* vp = V.col(p).data();
                double* vq = V.col(q).data();
                for (index_t i = 0; i < n; ++i) {
                    const double a = vp[i], b = vq[i];
                    vp[i] = c * a - s * b;
                    vq[i] = s * a + c * b;
                }
                sq[p] = dot(W.col(p), W.col(p));
                sq[q] = dot(W.col(q), W.col(q));
            }
        }
        converged = !rotated;
    }
    if (!converged)
        throw error(errc::no_convergence, "Jacobi SVD exceeded " + std::to_string(max_sweeps) + " sweeps");

    std::vector<double> sigma(n);
    for (index_t j = 0; j < n; ++j)
        sigma[j] = norm2(W.col(j)) * scale;
    std::vector<index_t> order(n);
    std::iota(order.begin(), order.end(), index_t{0});
    std::stable_sort(order.begin(), order.end(), [&](index_t a, index_t b) { return sigma[a] > sigma[b]; });

    SvdResult r{DenseMatrix(m, n), std::vector<double>(n), DenseMatrix(n, n)};
    std::vector<bool> dead(n, false);
    for (index_t k = 0; k < n; ++k) {
        const index_t j = order[k];
        r.singular_values[k] = sigma[j];
        std::copy_n(V.col(j).data(), n, r.V.col(k).data());
        const double nw = sigma[j] / scale;
        if (nw * nw > negligible) {
            for (index_t i = 0; i < m; ++i)
                r.U(i, k) = W(i, j) / nw;
        } else {
            r.singular_values[k] = 0.0;
            dead[k] = true;
        }
    }
    complete_orthonormal(r.U, dead);
    return r;
}

} // namespace detail

inline SvdResult svd(const DenseMatrix& A)
{
    if (!A.all_finite())
        throw error(errc::invalid_argument, "non-finite entry in SVD input");
    if (A.rows() >= A.cols())
        return detail::jacobi_svd_tall(A);
    SvdResult t = detail::jacobi_svd_tall(A.transpose());
    std::swap(t.U, t.V);
    return t;
}

// Number of singular values kept: the smallest k with sigma[k] <= tol * sigma[0]
// (0-based), or all of them when no value falls under the threshold.
inline index_t truncation_rank(std::span<const double> sigma, double tol)
{
    if (sigma.empty())
        return 0;
    const double cut = tol * sigma.front();
    for (index_t k = 0; k < sigma.size(); ++k)
        if (sigma[k] <= cut)
            return k;
    return sigma.size();
}

inline LowRankFactor truncate_svd(const SvdResult& s, double tol)
{
    if (!(tol > 0.0 && tol < 1.0))
        throw error(errc::invalid_argument, "truncation tolerance must lie in (0, 1)");
    const index_t k = truncation_rank(s.singular_values, tol);
    DenseMatrix U = s.U.middle_cols(0, k);
    for (index_t j = 0; j < k; ++j)
        for (double& v : U.col(j))
            v *= s.singular_values[j];
    return {std::move(U), s.V.middle_cols(0, k)};
}

// Rank-k truncation regardless of tolerance (used for error curves).
inline LowRankFactor truncate_svd_rank(const SvdResult& s, index_t k)
{
    k = std::min<index_t>(k, s.singular_values.size());
    DenseMatrix U = s.U.middle_cols(0, k);
    for (index_t j = 0; j < k; ++j)
        for (double& v : U.col(j))
            v *= s.singular_values[j];
    return {std::move(U), s.V.middle_cols(0, k)};
}

} // namespace hodlrkit
