#pragma once
//
// Test-problem generators: smooth kernel matrices, and frontal matrices
// obtained as exact Schur complements of grid stencil operators onto a
// planar separator.
//

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "hodlrkit/dense_lu.hpp"
#include "hodlrkit/graph.hpp"
#include "hodlrkit/lowrank.hpp"
#include "hodlrkit/matrix.hpp"

namespace hodlrkit {

enum class stencil { laplacian, vector_laplacian };

// Extents of a structured grid (1 to 3 of them). Extents equal to 1 are
// degenerate directions: they contribute no neighbors and no diagonal weight,
// so a 5x1 grid is the 1D chain.
struct GridSpec {
    std::vector<index_t> dims;
    stencil kind = stencil::laplacian;

    index_t dofs_per_node() const noexcept { return kind == stencil::vector_laplacian ? 3 : 1; }
    index_t node_count() const
    {
        index_t n = 1;
        for (index_t d : dims)
            n *= d;
        return n;
    }
    index_t size() const { return node_count() * dofs_per_node(); }

    void validate() const
    {
        if (dims.empty() || dims.size() > 3)
            throw error(errc::invalid_argument, "grid needs 1 to 3 extents");
        for (index_t d : dims)
            if (d < 1)
                throw error(errc::invalid_argument, "grid extents must be positive");
    }

    std::array<index_t, 3> coords(index_t node) const
    {
        std::array<index_t, 3> c{0, 0, 0};
        for (index_t a = 0; a < dims.size(); ++a) {
            c[a] = node % dims[a];
            node /= dims[a];
        }
        return c;
    }

    // x fastest, then y, then z
    index_t node_id(const std::array<index_t, 3>& c) const
    {
        index_t id = 0;
        for (index_t a = dims.size(); a-- > 0;)
            id = id * dims[a] + c[a];
        return id;
    }
};

// Dirichlet-eliminated stencil operator: diagonal 2 * (number of
// non-degenerate directions), -1 to each grid neighbor. The vector variant
// carries 3 decoupled components per node but keeps the node-block sparsity
// (all component pairs of adjacent nodes are structural entries).
inline SparsePattern grid_operator(const GridSpec& spec)
{
    spec.validate();
    const index_t dof = spec.dofs_per_node();
    index_t active = 0;
    for (index_t d : spec.dims)
        active += d > 1 ? 1 : 0;
    const double diag = 2.0 * static_cast<double>(active);

    std::vector<std::tuple<index_t, index_t, double>> t;
    for (index_t node = 0; node < spec.node_count(); ++node) {
        const auto c = spec.coords(node);
        for (index_t p = 0; p < dof; ++p)
            for (index_t q = 0; q < dof; ++q)
                t.emplace_back(node * dof + p, node * dof + q, p == q ? diag : 0.0);
        for (index_t a = 0; a < spec.dims.size(); ++a) {
            if (c[a] + 1 >= spec.dims[a])
                continue;
            auto nc = c;
            ++nc[a];
            const index_t other = spec.node_id(nc);
            for (index_t p = 0; p < dof; ++p)
                for (index_t q = 0; q < dof; ++q)
                    t.emplace_back(node * dof + p, other * dof + q, p == q ? -1.0 : 0.0);
        }
    }
    // from_triplets counts explicit mirrors; supply them so both halves carry values.
    const index_t m = t.size();
    for (index_t k = 0; k < m; ++k) {
        auto [i, j, v] = t[k];
        if (i != j)
            t.emplace_back(j, i, v);
    }
    return SparsePattern::from_triplets(spec.size(), std::move(t));
}

struct SeparatorSplit {
    std::vector<index_t> sep, left, right;
};

inline SeparatorSplit planar_separator(const GridSpec& spec, index_t axis, index_t plane)
{
    spec.validate();
    if (axis >= spec.dims.size())
        throw error(errc::invalid_plane, "axis " + std::to_string(axis) + " does not exist");
    if (plane == 0 || plane + 1 >= spec.dims[axis])
        throw error(errc::invalid_plane, "plane " + std::to_string(plane) + " is not strictly interior");
    const index_t dof = spec.dofs_per_node();
    SeparatorSplit s;
    for (index_t node = 0; node < spec.node_count(); ++node) {
        const index_t c = spec.coords(node)[axis];
        auto& dst = c == plane ? s.sep : (c < plane ? s.left : s.right);
        for (index_t p = 0; p < dof; ++p)
            dst.push_back(node * dof + p);
    }
    return s;
}

struct FrontProblem {
    DenseMatrix front;                           // Schur complement onto the separator
    std::shared_ptr<const SparsePattern> graph;  // operator pattern induced on the separator
    std::vector<index_t> ordering;               // operator vertex of each front row
    DenseMatrix rhs;

    // Accessor with the separator graph attached. Views `front` without
    // copying: the FrontProblem must outlive it.
    BlockAccessor accessor() const { return BlockAccessor::dense_view(front).with_vertex_graph(graph); }
};

namespace detail {

// Uniform in [-1, 1) from the top 53 bits; identical on every platform.
inline double uniform_pm1(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
}

} // namespace detail

inline DenseMatrix random_matrix(index_t m, index_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    DenseMatrix A(m, n);
    for (double& v : A.data())
        v = detail::uniform_pm1(rng);
    return A;
}

enum class elimination_order { left_first, right_first };

// front = A(s,s) - A(s,L) A(L,L)^{-1} A(L,s) - A(s,R) A(R,R)^{-1} A(R,s),
// by dense LU of each interior block.
inline FrontProblem schur_front(const SparsePattern& op, const std::vector<index_t>& sep,
                                const std::vector<index_t>& left, const std::vector<index_t>& right,
                                elimination_order order = elimination_order::left_first, std::uint64_t rhs_seed = 0)
{
    const index_t n = op.size();
    std::vector<int> part(n, -1);
    auto mark = [&](const std::vector<index_t>& vs, int tag) {
        for (index_t v : vs) {
            if (v >= n || part[v] != -1)
                throw error(errc::invalid_argument, "separator sets overlap or exceed the operator");
            part[v] = tag;
        }
    };
    mark(sep, 0);
    mark(left, 1);
    mark(right, 2);
    for (index_t v = 0; v < n; ++v)
        if (part[v] == -1)
            throw error(errc::invalid_argument, "separator sets do not cover the operator");
    for (index_t v : left)
        for (index_t w : op.neighbors(v))
            if (part[w] == 2 && op.value(v, w) != 0.0)
                throw error(errc::invalid_argument, "left and right sets are coupled; not a separator");

    const index_t s = sep.size();
    std::vector<index_t> sep_pos(n, SparsePattern::npos);
    for (index_t k = 0; k < s; ++k)
        sep_pos[sep[k]] = k;

    DenseMatrix front(s, s);
    for (index_t i = 0; i < s; ++i)
        for (index_t j = 0; j < s; ++j)
            front(i, j) = op.value(sep[i], sep[j]);

    auto eliminate = [&](const std::vector<index_t>& interior) {
        const index_t m = interior.size();
        if (m == 0)
            return;
        std::vector<index_t> pos(n, SparsePattern::npos);
        for (index_t k = 0; k < m; ++k)
            pos[interior[k]] = k;
        DenseMatrix Aii(m, m), Ais(m, s);
        for (index_t k = 0; k < m; ++k) {
            const index_t v = interior[k];
            Aii(k, k) = op.diagonal(v);
            auto nb = op.neighbors(v);
            auto vals = op.neighbor_values(v);
            for (index_t e = 0; e < nb.size(); ++e) {
                if (pos[nb[e]] != SparsePattern::npos)
                    Aii(k, pos[nb[e]]) = vals[e];
                else if (sep_pos[nb[e]] != SparsePattern::npos)
                    Ais(k, sep_pos[nb[e]]) = vals[e];
            }
        }
        PartialPivLU lu;
        try {
            lu = lu_partial(std::move(Aii));
        } catch (const error& e) {
            throw error(errc::singular_interior, e.what());
        }
        const DenseMatrix W = lu.solve(std::move(Ais)); // A(I,I)^{-1} A(I,s)
        // front -= A(s,I) W, walking the sparse rows of A(s,I)
        for (index_t i = 0; i < s; ++i) {
            const index_t v = sep[i];
            auto nb = op.neighbors(v);
            auto vals = op.neighbor_values(v);
            for (index_t e = 0; e < nb.size(); ++e) {
                const index_t k = pos[nb[e]];
                if (k == SparsePattern::npos || vals[e] == 0.0)
                    continue;
                for (index_t j = 0; j < s; ++j)
                    front(i, j) -= vals[e] * W(k, j);
            }
        }
    };

    if (order == elimination_order::left_first) {
        eliminate(left);
        eliminate(right);
    } else {
        eliminate(right);
        eliminate(left);
    }

    FrontProblem fp;
    fp.front = std::move(front);
    fp.graph = std::make_shared<const SparsePattern>(op.induced(sep));
    fp.ordering = sep;
    fp.rhs = random_matrix(s, 1, rhs_seed);
    return fp;
}

// Convenience: operator + planar separator + Schur complement.
inline FrontProblem grid_front(const GridSpec& spec, index_t axis, index_t plane, std::uint64_t rhs_seed = 0)
{
    const SparsePattern op = grid_operator(spec);
    const SeparatorSplit split = planar_separator(spec, axis, plane);
    return schur_front(op, split.sep, split.left, split.right, elimination_order::left_first, rhs_seed);
}

enum class kernel_kind { inv_distance, exp_decay };

inline double kernel_value(kernel_kind kind, double r)
{
    return kind == kernel_kind::inv_distance ? 1.0 / (1.0 + r) : std::exp(-r / 8.0);
}

// k(|i - j|) + shift * [i == j], evaluated on demand.
inline BlockAccessor kernel_accessor(index_t n, kernel_kind kind, double shift)
{
    if (n < 1)
        throw error(errc::invalid_argument, "kernel matrix needs n >= 1");
    return BlockAccessor::function(n, n, [kind, shift](index_t i, index_t j) {
        const double r = i > j ? static_cast<double>(i - j) : static_cast<double>(j - i);
        return kernel_value(kind, r) + (i == j ? shift : 0.0);
    });
}

inline DenseMatrix kernel_matrix(index_t n, kernel_kind kind, double shift)
{
    return kernel_accessor(n, kind, shift).materialize();
}

} // namespace hodlrkit
