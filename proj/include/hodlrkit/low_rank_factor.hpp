#pragma once

#include "hodlrkit/matrix.hpp"

namespace hodlrkit {

// A ~= U * V^T with U: m x r, V: n x r.
struct LowRankFactor {
    DenseMatrix U;
    DenseMatrix V;

    LowRankFactor() = default;
    LowRankFactor(DenseMatrix u, DenseMatrix v) : U(std::move(u)), V(std::move(v))
    {
        if (U.cols() != V.cols())
            throw error(errc::dimension_mismatch, "low-rank factors disagree on rank");
    }

    static LowRankFactor zero(index_t m, index_t n) { return {DenseMatrix(m, 0), DenseMatrix(n, 0)}; }

    index_t rows() const noexcept { return U.rows(); }
    index_t cols() const noexcept { return V.rows(); }
    index_t rank() const noexcept { return U.cols(); }

    DenseMatrix dense() const { return multiply(U, V, op::none, op::trans); }
};

} // namespace hodlrkit
