#pragma once
//
// Off-diagonal block compression: truncated SVD (reference), partial-pivoting
// adaptive cross approximation, and the boundary-distance pseudo-skeleton
// scheme (BDLR) that picks rows/columns from the sparse graph.
//

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hodlrkit/dense_lu.hpp"
#include "hodlrkit/graph.hpp"
#include "hodlrkit/low_rank_factor.hpp"
#include "hodlrkit/matrix.hpp"
#include "hodlrkit/svd.hpp"

namespace hodlrkit {

// Read-only window onto a (possibly implicit) matrix. Sub-blocks share the
// underlying source. When a vertex graph is attached (vertex k <-> row/col
// k of the full matrix), off-diagonal sub-blocks expose a BlockGraphView.
class BlockAccessor {
public:
    using EntryFn = std::function<double(index_t, index_t)>;

    BlockAccessor() = default;

    static BlockAccessor dense(std::shared_ptr<const DenseMatrix> A)
    {
        BlockAccessor b;
        b.m_ = A->rows();
        b.n_ = A->cols();
        b.dense_ = std::move(A);
        return b;
    }
    static BlockAccessor dense_copy(DenseMatrix A) { return dense(std::make_shared<const DenseMatrix>(std::move(A))); }
    // Non-owning; `A` must outlive the accessor and all its sub-blocks.
    static BlockAccessor dense_view(const DenseMatrix& A)
    {
        return dense(std::shared_ptr<const DenseMatrix>(&A, [](const DenseMatrix*) {}));
    }
    static BlockAccessor function(index_t m, index_t n, EntryFn f)
    {
        BlockAccessor b;
        b.m_ = m;
        b.n_ = n;
        b.fn_ = std::make_shared<const EntryFn>(std::move(f));
        return b;
    }

    BlockAccessor with_graph(BlockGraphView view) const
    {
        if (view.row_verts.size() != m_ || view.col_verts.size() != n_)
            throw error(errc::dimension_mismatch, "graph view does not match block shape");
        BlockAccessor b = *this;
        b.view_ = std::move(view);
        return b;
    }

    BlockAccessor with_vertex_graph(std::shared_ptr<const SparsePattern> g) const
    {
        if (g && (g->size() != m_ || m_ != n_ || r0_ != 0 || c0_ != 0))
            throw error(errc::dimension_mismatch, "vertex graph must match a full square matrix");
        BlockAccessor b = *this;
        b.vertex_graph_ = std::move(g);
        return b;
    }

    index_t rows() const noexcept { return m_; }
    index_t cols() const noexcept { return n_; }
    const std::shared_ptr<const SparsePattern>& vertex_graph() const noexcept { return vertex_graph_; }

    double operator()(index_t i, index_t j) const
    {
        return dense_ ? (*dense_)(r0_ + i, c0_ + j) : (*fn_)(r0_ + i, c0_ + j);
    }

    void row(index_t i, std::span<double> out) const
    {
        for (index_t j = 0; j < n_; ++j)
            out[j] = (*this)(i, j);
    }
    void col(index_t j, std::span<double> out) const
    {
        if (dense_) {
            std::copy_n(dense_->col(c0_ + j).data() + r0_, m_, out.data());
            return;
        }
        for (index_t i = 0; i < m_; ++i)
            out[i] = (*this)(i, j);
    }

    BlockAccessor sub(index_t r0, index_t nr, index_t c0, index_t nc) const
    {
        if (r0 + nr > m_ || c0 + nc > n_)
            throw error(errc::block_out_of_range, "sub-block exceeds accessor bounds");
        BlockAccessor b = *this;
        b.r0_ = r0_ + r0;
        b.c0_ = c0_ + c0;
        b.m_ = nr;
        b.n_ = nc;
        b.view_.reset();
        return b;
    }

    // Graph view of this block: the explicit one if attached, otherwise the
    // contiguous-range view derived from the vertex graph (off-diagonal only).
    std::optional<BlockGraphView> graph_view() const
    {
        if (view_)
            return view_;
        if (!vertex_graph_)
            return std::nullopt;
        const bool disjoint = r0_ + m_ <= c0_ || c0_ + n_ <= r0_;
        if (!disjoint)
            return std::nullopt;
        return BlockGraphView::ranges(vertex_graph_, r0_, m_, c0_, n_);
    }

    DenseMatrix materialize() const
    {
        DenseMatrix A(m_, n_);
        for (index_t j = 0; j < n_; ++j)
            col(j, A.col(j));
        return A;
    }

    DenseMatrix rows_of(std::span<const index_t> rows) const
    {
        DenseMatrix R(rows.size(), n_);
        for (index_t j = 0; j < n_; ++j)
            for (index_t k = 0; k < rows.size(); ++k)
                R(k, j) = (*this)(rows[k], j);
        return R;
    }

    DenseMatrix cols_of(std::span<const index_t> cols) const
    {
        DenseMatrix C(m_, cols.size());
        for (index_t k = 0; k < cols.size(); ++k)
            col(cols[k], C.col(k));
        return C;
    }

private:
    std::shared_ptr<const DenseMatrix> dense_;
    std::shared_ptr<const EntryFn> fn_;
    index_t r0_ = 0, c0_ = 0, m_ = 0, n_ = 0;
    std::shared_ptr<const SparsePattern> vertex_graph_;
    std::optional<BlockGraphView> view_;
};

enum class scheme { svd, aca, bdlr };

inline const char* to_string(scheme s)
{
    switch (s) {
    case scheme::svd: return "svd";
    case scheme::aca: return "aca";
    case scheme::bdlr: return "bdlr";
    }
    return "?";
}

inline scheme parse_scheme(const std::string& s)
{
    if (s == "svd")
        return scheme::svd;
    if (s == "aca")
        return scheme::aca;
    if (s == "bdlr")
        return scheme::bdlr;
    throw error(errc::invalid_argument, "unknown compression scheme '" + s + "'");
}

struct CompressionConfig {
    scheme method = scheme::svd;
    double tol = 1e-6;
    int depth = 1;              // bdlr only
    index_t max_rank = 0;       // 0: min(m, n)
    index_t monitor_samples = 8; // held-out rows and columns per side

    void validate() const
    {
        if (!(tol > 0.0 && tol < 1.0))
            throw error(errc::invalid_argument, "tolerance must lie in (0, 1)");
        if (depth < 0)
            throw error(errc::invalid_argument, "depth must be non-negative");
    }

    index_t rank_cap(index_t m, index_t n) const
    {
        const index_t full = std::min(m, n);
        return max_rank == 0 ? full : std::min(full, max_rank);
    }
};

namespace detail {

inline LowRankFactor clip_rank(LowRankFactor f, index_t r)
{
    if (f.rank() <= r)
        return f;
    return {f.U.middle_cols(0, r), f.V.middle_cols(0, r)};
}

} // namespace detail

inline LowRankFactor compress_svd(const BlockAccessor& block, const CompressionConfig& cfg)
{
    cfg.validate();
    if (block.rows() == 0 || block.cols() == 0)
        return LowRankFactor::zero(block.rows(), block.cols());
    const SvdResult s = svd(block.materialize());
    return detail::clip_rank(truncate_svd(s, cfg.tol), cfg.rank_cap(block.rows(), block.cols()));
}

struct AcaResult {
    LowRankFactor factor;
    bool exhausted = false;   // every row visited before meeting the tolerance
    index_t zero_rows = 0;    // residual rows found exactly zero (restarts)
};

// Partial-pivoting cross approximation. Each step takes the residual row at
// the current pivot row, pivots on its largest entry, forms the residual
// column there, and moves to that column's largest unvisited entry. Stops
// once ||u_k|| ||v_k|| <= tol * ||sum_l u_l v_l^T||_F; that last cross is
// below tolerance and is not kept.
inline AcaResult compress_aca_detailed(const BlockAccessor& block, const CompressionConfig& cfg)
{
    cfg.validate();
    const index_t m = block.rows(), n = block.cols();
    AcaResult out;
    const index_t cap = cfg.rank_cap(m, n);
    if (m == 0 || n == 0 || cap == 0) {
        out.factor = LowRankFactor::zero(m, n);
        return out;
    }

    std::vector<std::vector<double>> us, vs;
    std::vector<char> used_row(m, 0);
    double approx_sq = 0.0;
    index_t pivot_row = 0;
    std::vector<double> row(n), column(m);

    auto next_untouched = [&]() -> std::optional<index_t> {
        for (index_t i = 0; i < m; ++i)
            if (!used_row[i])
                return i;
        return std::nullopt;
    };

    while (us.size() < cap) {
        used_row[pivot_row] = 1;
        block.row(pivot_row, row);
        for (index_t l = 0; l < us.size(); ++l)
            axpy(-us[l][pivot_row], vs[l], row);

        index_t pc = 0;
        double best = 0.0;
        for (index_t j = 0; j < n; ++j) {
            if (std::abs(row[j]) > best) {
                best = std::abs(row[j]);
                pc = j;
            }
        }
        if (best == 0.0) {
            ++out.zero_rows;
            auto r = next_untouched();
            if (!r) {
                out.exhausted = true;
                break;
            }
            pivot_row = *r;
            continue;
        }

        std::vector<double> v(row);
        const double inv = 1.0 / row[pc];
        for (double& x : v)
            x *= inv;
        block.col(pc, column);
        for (index_t l = 0; l < us.size(); ++l)
            axpy(-vs[l][pc], us[l], column);
        std::vector<double> u(column);

        const double nu = norm2(u), nv = norm2(v);
        double cross = 0.0;
        for (index_t l = 0; l < us.size(); ++l)
            cross += dot(u, us[l]) * dot(vs[l], v);
        approx_sq = std::max(approx_sq + 2.0 * cross + nu * nu * nv * nv, 0.0);
        if (!us.empty() && nu * nv <= cfg.tol * std::sqrt(approx_sq))
            break;

        us.push_back(std::move(u));
        vs.push_back(std::move(v));

        index_t pr = m;
        double bestc = -1.0;
        for (index_t i = 0; i < m; ++i) {
            if (!used_row[i] && std::abs(us.back()[i]) > bestc) {
                bestc = std::abs(us.back()[i]);
                pr = i;
            }
        }
        if (pr == m) {
            out.exhausted = true;
            break;
        }
        pivot_row = pr;
    }

    const index_t r = us.size();
    DenseMatrix U(m, r), V(n, r);
    for (index_t l = 0; l < r; ++l) {
        std::copy(us[l].begin(), us[l].end(), U.col(l).begin());
        std::copy(vs[l].begin(), vs[l].end(), V.col(l).begin());
    }
    out.factor = LowRankFactor(std::move(U), std::move(V));
    return out;
}

inline LowRankFactor compress_aca(const BlockAccessor& block, const CompressionConfig& cfg)
{
    return compress_aca_detailed(block, cfg).factor;
}

struct MonitorResult {
    double value = 0.0;
    bool absolute = false; // reference norm vanished; value is the absolute error
};

// Relative Frobenius error of U V^T on the given rows and columns of the block
// (full rows and full columns; entries on both are counted twice, consistently
// in numerator and denominator).
inline MonitorResult monitor_error(const BlockAccessor& block, const LowRankFactor& f,
                                   std::span<const index_t> rows, std::span<const index_t> cols)
{
    if (f.rows() != block.rows() || f.cols() != block.cols())
        throw error(errc::dimension_mismatch, "factor does not match block");
    double err_sq = 0.0, ref_sq = 0.0;
    std::vector<double> buf;
    const index_t r = f.rank();

    buf.resize(block.cols());
    for (index_t i : rows) {
        block.row(i, buf);
        for (index_t j = 0; j < block.cols(); ++j) {
            double approx = 0.0;
            for (index_t l = 0; l < r; ++l)
                approx += f.U(i, l) * f.V(j, l);
            ref_sq += buf[j] * buf[j];
            err_sq += (buf[j] - approx) * (buf[j] - approx);
        }
    }
    buf.resize(block.rows());
    for (index_t j : cols) {
        block.col(j, buf);
        for (index_t i = 0; i < block.rows(); ++i) {
            double approx = 0.0;
            for (index_t l = 0; l < r; ++l)
                approx += f.U(i, l) * f.V(j, l);
            ref_sq += buf[i] * buf[i];
            err_sq += (buf[i] - approx) * (buf[i] - approx);
        }
    }
    const double ref = std::sqrt(ref_sq), err = std::sqrt(err_sq);
    if (ref < 1e-300)
        return {err, true};
    return {err / ref, false};
}

struct BdlrResult {
    LowRankFactor factor;
    Selection selection;               // skeleton vertices (layer order)
    std::vector<double> pivots;        // |pivot| of the skeleton's full-pivot LU
    index_t skeleton_rank = 0;         // pivots kept under tol
    std::optional<MonitorResult> held_out_error;
    bool empty_selection = false;
};

// Vertices of layers beyond `depth`, layer then id order, at most `count`.
inline std::vector<index_t> held_out_vertices(const BlockGraphView& view, side s, int depth, index_t count)
{
    const DistanceIndex idx = distance_index(view, s);
    std::vector<index_t> cand;
    for (index_t v : view.verts(s))
        if (idx.reachable(v) && idx[v] > depth)
            cand.push_back(v);
    std::sort(cand.begin(), cand.end(),
              [&](index_t a, index_t b) { return std::pair(idx[a], a) < std::pair(idx[b], b); });
    if (cand.size() > count)
        cand.resize(count);
    return cand;
}

inline BdlrResult compress_bdlr_detailed(const BlockAccessor& block, const CompressionConfig& cfg)
{
    cfg.validate();
    const auto view = block.graph_view();
    if (!view)
        throw error(errc::invalid_argument, "BDLR needs a graph view of the block");
    const index_t m = block.rows(), n = block.cols();

    BdlrResult out;
    try {
        out.selection = select_by_depth(*view, cfg.depth);
    } catch (const error& e) {
        if (e.code() != errc::empty_selection)
            throw;
        out.empty_selection = true;
        out.factor = LowRankFactor::zero(m, n);
        return out;
    }

    const auto row_pos = local_positions(*view, side::row, out.selection.rows);
    const auto col_pos = local_positions(*view, side::col, out.selection.cols);
    const DenseMatrix R = block.rows_of(row_pos);
    const DenseMatrix C = block.cols_of(col_pos);
    const FullPivLU lu(select_cols(R, col_pos));
    out.pivots = lu.pivot_magnitudes();

    const index_t r = std::min(lu.numerical_rank(cfg.tol), cfg.rank_cap(m, n));
    out.skeleton_rank = r;
    if (r == 0) {
        if (max_abs(R) > 0.0 || max_abs(C) > 0.0)
            throw error(errc::degenerate_skeleton,
                        "skeleton intersection is zero while its rows/columns are not; increase depth");
        out.factor = LowRankFactor::zero(m, n);
        return out;
    }

    // C~ = (C Q)(:, 1:r) U(1:r, 1:r)^{-1},  R~ = L(1:r, 1:r)^{-1} (P R)(1:r, :)
    const std::vector<index_t> q(lu.col_perm().begin(), lu.col_perm().begin() + static_cast<std::ptrdiff_t>(r));
    const std::vector<index_t> p(lu.row_perm().begin(), lu.row_perm().begin() + static_cast<std::ptrdiff_t>(r));
    DenseMatrix Ct = select_cols(C, q);
    lu.solve_upper_leading_right(r, Ct);
    DenseMatrix Rt = select_rows(R, p);
    lu.solve_lower_leading(r, Rt);
    out.factor = LowRankFactor(std::move(Ct), Rt.transpose());

    if (cfg.monitor_samples > 0) {
        const auto hr = held_out_vertices(*view, side::row, cfg.depth, cfg.monitor_samples);
        const auto hc = held_out_vertices(*view, side::col, cfg.depth, cfg.monitor_samples);
        if (!hr.empty() || !hc.empty())
            out.held_out_error = monitor_error(block, out.factor, local_positions(*view, side::row, hr),
                                               local_positions(*view, side::col, hc));
    }
    return out;
}

inline LowRankFactor compress_bdlr(const BlockAccessor& block, const CompressionConfig& cfg)
{
    return compress_bdlr_detailed(block, cfg).factor;
}

inline LowRankFactor compress(const BlockAccessor& block, const CompressionConfig& cfg)
{
    switch (cfg.method) {
    case scheme::svd: return compress_svd(block, cfg);
    case scheme::aca: return compress_aca(block, cfg);
    case scheme::bdlr: return compress_bdlr(block, cfg);
    }
    throw error(errc::invalid_argument, "unknown scheme");
}

} // namespace hodlrkit
