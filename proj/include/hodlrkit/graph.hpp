#pragma once
//
// Symmetric sparse adjacency, boundary detection between a row and a column
// vertex set, and multi-source BFS distance ("d-index") used to pick
// pseudo-skeleton rows and columns.
//

#include <algorithm>
#include <deque>
#include <limits>
#include <memory>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "hodlrkit/matrix.hpp"

namespace hodlrkit {

// CSR adjacency of a structurally symmetric matrix. Self loops are kept out
// of the adjacency; the diagonal lives in its own array. Values are optional;
// neighbor_values(i)[k] is A(i, neighbors(i)[k]).
class SparsePattern {
public:
    SparsePattern() = default;

    // Builds from (row, col, value) triplets. The pattern is symmetrized by
    // union; a missing mirror entry gets value 0. Duplicate entries are summed.
    static SparsePattern from_triplets(index_t n, std::vector<std::tuple<index_t, index_t, double>> entries,
                                       bool with_values = true)
    {
        SparsePattern p;
        p.n_ = n;
        p.has_values_ = with_values;
        p.diag_.assign(n, 0.0);

        std::vector<std::tuple<index_t, index_t, double>> sym;
        sym.reserve(2 * entries.size());
        for (auto [i, j, v] : entries) {
            if (i >= n || j >= n)
                throw error(errc::dimension_mismatch, "triplet index out of range");
            if (i == j) {
                p.diag_[i] += v;
                continue;
            }
            sym.emplace_back(i, j, v);
            sym.emplace_back(j, i, std::numeric_limits<double>::quiet_NaN()); // mirror placeholder
        }
        std::sort(sym.begin(), sym.end(), [](const auto& a, const auto& b) {
            return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
        });

        p.offsets_.assign(n + 1, 0);
        for (index_t k = 0; k < sym.size();) {
            const auto [i, j, v0] = sym[k];
            double value = 0.0;
            for (; k < sym.size() && std::get<0>(sym[k]) == i && std::get<1>(sym[k]) == j; ++k) {
                const double v = std::get<2>(sym[k]);
                if (v == v) // skip mirror placeholders
                    value += v;
            }
            p.cols_.push_back(j);
            p.vals_.push_back(value);
            ++p.offsets_[i + 1];
        }
        for (index_t i = 0; i < n; ++i)
            p.offsets_[i + 1] += p.offsets_[i];
        if (!with_values) {
            p.vals_.clear();
            p.diag_.assign(n, 0.0);
        }
        return p;
    }

    index_t size() const noexcept { return n_; }
    index_t edge_count() const noexcept { return cols_.size() / 2; }
    bool has_values() const noexcept { return has_values_; }

    std::span<const index_t> neighbors(index_t v) const
    {
        return {cols_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
    }
    std::span<const double> neighbor_values(index_t v) const
    {
        if (!has_values_)
            return {};
        return {vals_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
    }
    double diagonal(index_t v) const { return diag_[v]; }

    bool adjacent(index_t u, index_t v) const
    {
        auto nb = neighbors(u);
        return std::binary_search(nb.begin(), nb.end(), v);
    }

    // A(i, j) with structural zeros reported as 0.
    double value(index_t i, index_t j) const
    {
        if (i == j)
            return diag_[i];
        if (!has_values_)
            return 0.0;
        auto nb = neighbors(i);
        auto it = std::lower_bound(nb.begin(), nb.end(), j);
        if (it == nb.end() || *it != j)
            return 0.0;
        return vals_[offsets_[i] + static_cast<index_t>(it - nb.begin())];
    }

    // Pattern (and values) induced on `verts`; vertex k of the result is verts[k].
    SparsePattern induced(std::span<const index_t> verts) const
    {
        std::vector<index_t> local(n_, npos);
        for (index_t k = 0; k < verts.size(); ++k)
            local[verts[k]] = k;
        std::vector<std::tuple<index_t, index_t, double>> t;
        for (index_t k = 0; k < verts.size(); ++k) {
            const index_t v = verts[k];
            if (has_values_ && diag_[v] != 0.0)
                t.emplace_back(k, k, diag_[v]);
            auto nb = neighbors(v);
            for (index_t e = 0; e < nb.size(); ++e) {
                const index_t w = local[nb[e]];
                if (w != npos)
                    t.emplace_back(k, w, has_values_ ? vals_[offsets_[v] + e] : 1.0);
            }
        }
        return from_triplets(verts.size(), std::move(t), has_values_);
    }

    DenseMatrix to_dense() const
    {
        DenseMatrix A(n_, n_);
        for (index_t i = 0; i < n_; ++i) {
            A(i, i) = diag_[i];
            if (!has_values_)
                continue;
            auto nb = neighbors(i);
            for (index_t e = 0; e < nb.size(); ++e)
                A(i, nb[e]) = vals_[offsets_[i] + e];
        }
        return A;
    }

    static constexpr index_t npos = std::numeric_limits<index_t>::max();

private:
    index_t n_ = 0;
    bool has_values_ = false;
    std::vector<index_t> offsets_{0};
    std::vector<index_t> cols_;
    std::vector<double> vals_;
    std::vector<double> diag_;
};

enum class side { row, col };

// An off-diagonal block seen through the graph: local row i of the block is
// vertex row_verts[i], local column j is vertex col_verts[j].
struct BlockGraphView {
    std::shared_ptr<const SparsePattern> pattern;
    std::vector<index_t> row_verts;
    std::vector<index_t> col_verts;

    BlockGraphView() = default;
    BlockGraphView(std::shared_ptr<const SparsePattern> p, std::vector<index_t> rows, std::vector<index_t> cols)
        : pattern(std::move(p)), row_verts(std::move(rows)), col_verts(std::move(cols))
    {
        validate();
    }

    // Contiguous vertex ranges [r0, r0 + nr) x [c0, c0 + nc).
    static BlockGraphView ranges(std::shared_ptr<const SparsePattern> p, index_t r0, index_t nr, index_t c0,
                                 index_t nc)
    {
        std::vector<index_t> rows(nr), cols(nc);
        for (index_t k = 0; k < nr; ++k)
            rows[k] = r0 + k;
        for (index_t k = 0; k < nc; ++k)
            cols[k] = c0 + k;
        return {std::move(p), std::move(rows), std::move(cols)};
    }

    const std::vector<index_t>& verts(side s) const { return s == side::row ? row_verts : col_verts; }
    const std::vector<index_t>& other(side s) const { return s == side::row ? col_verts : row_verts; }

    void validate() const
    {
        if (!pattern)
            throw error(errc::invalid_argument, "graph view without a pattern");
        std::vector<char> mark(pattern->size(), 0);
        for (index_t v : row_verts) {
            if (v >= pattern->size() || mark[v])
                throw error(errc::invalid_argument, "row vertex out of range or repeated");
            mark[v] = 1;
        }
        for (index_t v : col_verts) {
            if (v >= pattern->size() || mark[v])
                throw error(errc::invalid_argument, "column vertex out of range, repeated, or shared with rows");
            mark[v] = 2;
        }
    }
};

// d(v) for every vertex of the pattern; vertices outside the searched side or
// unreachable from its boundary carry `unreachable`.
struct DistanceIndex {
    static constexpr int unreachable = std::numeric_limits<int>::max();
    std::vector<int> d;

    int operator[](index_t v) const { return d[v]; }
    bool reachable(index_t v) const { return d[v] != unreachable; }
};

// Vertices of side `s` with at least one edge into the opposite side, ascending.
inline std::vector<index_t> boundary_vertices(const BlockGraphView& view, side s)
{
    const SparsePattern& g = *view.pattern;
    std::vector<char> in_other(g.size(), 0);
    for (index_t v : view.other(s))
        in_other[v] = 1;
    std::vector<index_t> out;
    for (index_t v : view.verts(s)) {
        for (index_t w : g.neighbors(v)) {
            if (in_other[w]) {
                out.push_back(v);
                break;
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Multi-source BFS from the boundary, confined to the subgraph induced on
// the side's own vertex set.
inline DistanceIndex distance_index(const BlockGraphView& view, side s)
{
    const SparsePattern& g = *view.pattern;
    DistanceIndex idx{std::vector<int>(g.size(), DistanceIndex::unreachable)};
    std::vector<char> in_side(g.size(), 0);
    for (index_t v : view.verts(s))
        in_side[v] = 1;

    std::deque<index_t> queue;
    for (index_t v : boundary_vertices(view, s)) {
        idx.d[v] = 0;
        queue.push_back(v);
    }
    while (!queue.empty()) {
        const index_t v = queue.front();
        queue.pop_front();
        for (index_t w : g.neighbors(v)) {
            if (in_side[w] && idx.d[w] == DistanceIndex::unreachable) {
                idx.d[w] = idx.d[v] + 1;
                queue.push_back(w);
            }
        }
    }
    return idx;
}

// Vertices of side `s` with d <= depth, ordered by layer then vertex id.
inline std::vector<index_t> select_side_by_depth(const BlockGraphView& view, side s, int depth)
{
    const DistanceIndex idx = distance_index(view, s);
    std::vector<index_t> sel;
    for (index_t v : view.verts(s))
        if (idx.reachable(v) && idx[v] <= depth)
            sel.push_back(v);
    std::sort(sel.begin(), sel.end(), [&](index_t a, index_t b) { return std::pair(idx[a], a) < std::pair(idx[b], b); });
    return sel;
}

struct Selection {
    std::vector<index_t> rows; // vertex ids
    std::vector<index_t> cols;
};

inline Selection select_by_depth(const BlockGraphView& view, int depth)
{
    if (depth < 0)
        throw error(errc::invalid_argument, "depth must be non-negative");
    Selection sel{select_side_by_depth(view, side::row, depth), select_side_by_depth(view, side::col, depth)};
    if (sel.rows.empty() || sel.cols.empty())
        throw error(errc::empty_selection, "no boundary vertices between the row and column sets");
    return sel;
}

// Maps vertex ids of one side back to block-local positions.
inline std::vector<index_t> local_positions(const BlockGraphView& view, side s, std::span<const index_t> verts)
{
    const auto& all = view.verts(s);
    std::vector<index_t> pos_of(view.pattern->size(), SparsePattern::npos);
    for (index_t k = 0; k < all.size(); ++k)
        pos_of[all[k]] = k;
    std::vector<index_t> out;
    out.reserve(verts.size());
    for (index_t v : verts)
        out.push_back(pos_of[v]);
    return out;
}

} // namespace hodlrkit
