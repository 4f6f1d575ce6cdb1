#pragma once
//
// Left-preconditioned GMRES without restarts (modified Gram-Schmidt Arnoldi,
// Givens least squares) and the preconditioners used with it.
//

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "hodlrkit/hodlr.hpp"
#include "hodlrkit/lowrank.hpp"
#include "hodlrkit/matrix.hpp"

namespace hodlrkit {

// y = Op(x); x and y never alias.
using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

inline LinearOperator dense_operator(const BlockAccessor& A)
{
    if (A.rows() != A.cols())
        throw error(errc::dimension_mismatch, "operator must be square");
    return [A](std::span<const double> x, std::span<double> y) {
        std::fill(y.begin(), y.end(), 0.0);
        std::vector<double> column(A.rows());
        for (index_t j = 0; j < A.cols(); ++j) {
            if (x[j] == 0.0)
                continue;
            A.col(j, column);
            axpy(x[j], column, y);
        }
    };
}

struct DiagonalPreconditioner {
    std::vector<double> inverse_diagonal;
    index_t zero_diagonals = 0; // replaced by 1

    explicit DiagonalPreconditioner(const BlockAccessor& A)
    {
        const index_t n = std::min(A.rows(), A.cols());
        inverse_diagonal.resize(n);
        for (index_t i = 0; i < n; ++i) {
            const double d = A(i, i);
            if (d == 0.0) {
                ++zero_diagonals;
                inverse_diagonal[i] = 1.0;
            } else {
                inverse_diagonal[i] = 1.0 / d;
            }
        }
    }

    bool flagged() const noexcept { return zero_diagonals > 0; }

    void operator()(std::span<const double> x, std::span<double> y) const
    {
        for (index_t i = 0; i < x.size(); ++i)
            y[i] = x[i] * inverse_diagonal[i];
    }
};

inline LinearOperator diagonal_preconditioner(const BlockAccessor& A)
{
    DiagonalPreconditioner p(A);
    return [p = std::move(p)](std::span<const double> x, std::span<double> y) { p(x, y); };
}

// The factorization must outlive the returned operator.
inline LinearOperator hodlr_preconditioner(const HodlrFactorization& fact)
{
    return [&fact](std::span<const double> x, std::span<double> y) {
        const DenseMatrix sol = fact.solve(DenseMatrix::column(x));
        std::copy(sol.col(0).begin(), sol.col(0).end(), y.begin());
    };
}

struct GmresConfig {
    double tol = 1e-10;
    index_t max_iter = 1000;
    LinearOperator preconditioner; // empty: none

    void validate() const
    {
        if (!(tol > 0.0 && tol < 1.0))
            throw error(errc::invalid_argument, "GMRES tolerance must lie in (0, 1)");
        if (max_iter < 1)
            throw error(errc::invalid_argument, "GMRES needs at least one iteration");
    }
};

struct GmresResult {
    std::vector<double> x;
    index_t iterations = 0;
    bool converged = false;
    bool breakdown = false;              // Arnoldi stalled without a usable solution
    std::vector<double> residual_history; // preconditioned relative residual, entry 0 is the start
    double true_residual = 0.0;           // ||b - A x|| / ||b||, unpreconditioned
};

inline GmresResult gmres(const LinearOperator& A, std::span<const double> b, const GmresConfig& cfg)
{
    cfg.validate();
    const index_t n = b.size();
    GmresResult res;
    res.x.assign(n, 0.0);

    auto precondition = [&](std::span<const double> in, std::span<double> out) {
        if (cfg.preconditioner)
            cfg.preconditioner(in, out);
        else
            std::copy(in.begin(), in.end(), out.begin());
    };

    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        res.converged = true;
        res.residual_history.push_back(0.0);
        return res;
    }

    std::vector<double> work(n), w(n);
    precondition(b, w);
    const double beta = norm2(w);
    if (beta == 0.0)
        throw error(errc::gmres_breakdown, "preconditioned right-hand side vanished");

    std::vector<std::vector<double>> basis;
    basis.emplace_back(n);
    for (index_t i = 0; i < n; ++i)
        basis[0][i] = w[i] / beta;

    std::vector<std::vector<double>> H; // column j has j + 2 entries
    std::vector<double> cs, sn, g{beta};
    res.residual_history.push_back(1.0);

    auto true_residual_of = [&](const std::vector<double>& x) {
        A(x, work);
        for (index_t i = 0; i < n; ++i)
            work[i] = b[i] - work[i];
        return norm2(work) / bnorm;
    };

    auto form_solution = [&](index_t k) {
        std::vector<double> y(k);
        for (index_t i = k; i-- > 0;) {
            double s = g[i];
            for (index_t j = i + 1; j < k; ++j)
                s -= H[j][i] * y[j];
            y[i] = s / H[i][i];
        }
        std::vector<double> x(n, 0.0);
        for (index_t j = 0; j < k; ++j)
            axpy(y[j], basis[j], x);
        return x;
    };

    constexpr double inv_sqrt2 = 0.70710678118654752440;
    for (index_t j = 0; j < cfg.max_iter; ++j) {
        A(basis[j], work);
        precondition(work, w);

        std::vector<double> h(j + 2, 0.0);
        const double before = norm2(w);
        for (index_t i = 0; i <= j; ++i) {
            h[i] = dot(w, basis[i]);
            axpy(-h[i], basis[i], w);
        }
        double after = norm2(w);
        if (after < inv_sqrt2 * before) {
            for (index_t i = 0; i <= j; ++i) {
                const double c = dot(w, basis[i]);
                h[i] += c;
                axpy(-c, basis[i], w);
            }
            after = norm2(w);
        }
        h[j + 1] = after;

        for (index_t i = 0; i < j; ++i) {
            const double t = cs[i] * h[i] + sn[i] * h[i + 1];
            h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
            h[i] = t;
        }
        const double denom = std::hypot(h[j], h[j + 1]);
        if (denom == 0.0) {
            res.breakdown = true;
            res.iterations = j + 1;
            break;
        }
        cs.push_back(h[j] / denom);
        sn.push_back(h[j + 1] / denom);
        h[j] = denom;
        h[j + 1] = 0.0;
        g.push_back(-sn[j] * g[j]);
        g[j] *= cs[j];
        H.push_back(std::move(h));

        const double rel = std::abs(g[j + 1]) / beta;
        res.residual_history.push_back(rel);
        res.iterations = j + 1;

        const bool happy = after <= std::numeric_limits<double>::epsilon() * before;
        if (rel <= cfg.tol || happy) {
            auto x = form_solution(j + 1);
            const double tr = true_residual_of(x);
            res.x = std::move(x);
            res.true_residual = tr;
            if (tr <= 10.0 * cfg.tol) {
                res.converged = true;
                return res;
            }
            if (happy) {
                res.breakdown = true;
                return res;
            }
        }
        if (j + 1 == cfg.max_iter)
            break;

        basis.emplace_back(n);
        for (index_t i = 0; i < n; ++i)
            basis[j + 1][i] = w[i] / after;
    }

    if (!H.empty()) {
        res.x = form_solution(H.size());
        res.true_residual = true_residual_of(res.x);
    }
    return res;
}

} // namespace hodlrkit
