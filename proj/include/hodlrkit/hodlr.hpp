#pragma once
//
// HODLR direct solver.
//
// For a node split into children a (top) and b (bottom),
//
//     K = [ K_a            U_a V_ab^T ]
//         [ U_b V_ba^T     K_b        ]
//
// the factorization stores d_a = K_a^{-1} U_a, d_b = K_b^{-1} U_b and the
// LU of the coupling system
//
//     S = [ I            V_ba^T d_a ]
//         [ V_ab^T d_b   I          ]
//
// and a solve with [x_a; x_b] = [K_a^{-1} f_a; K_b^{-1} f_b] is finished by
//
//     [y_1; y_2] = S^{-1} [V_ba^T x_a; V_ab^T x_b],   x_a -= d_a y_2,  x_b -= d_b y_1.
//
// The d blocks of every level are produced in one downward sweep: each node
// hands its children the vertical slices of its own right-hand sides Z,
// prefixed by the child's U, so that one recursive solve yields [d c] for
// all ancestors at once. The c part is then corrected on the way up exactly
// like a solution vector.
//

#include <chrono>
#include <cmath>
#include <future>
#include <optional>
#include <vector>

#include "hodlrkit/dense_lu.hpp"
#include "hodlrkit/lowrank.hpp"
#include "hodlrkit/matrix.hpp"

namespace hodlrkit {

struct HodlrNode {
    int level = 0;
    index_t lo = 0, hi = 0;
    int first = -1, second = -1; // children, -1 for leaves

    bool is_leaf() const noexcept { return first < 0; }
    index_t size() const noexcept { return hi - lo; }
};

class HodlrTree {
public:
    HodlrTree() = default;
    HodlrTree(std::vector<HodlrNode> nodes, index_t leaf_threshold)
        : nodes_(std::move(nodes)), leaf_threshold_(leaf_threshold)
    {
    }

    index_t size() const noexcept { return nodes_.empty() ? 0 : nodes_.front().size(); }
    index_t leaf_threshold() const noexcept { return leaf_threshold_; }
    const std::vector<HodlrNode>& nodes() const noexcept { return nodes_; }
    const HodlrNode& node(int id) const { return nodes_.at(static_cast<index_t>(id)); }
    const HodlrNode& root() const { return nodes_.front(); }

    int depth() const noexcept
    {
        int d = 0;
        for (const auto& n : nodes_)
            d = std::max(d, n.level);
        return d;
    }

    // Node ids at a level, left to right.
    std::vector<int> level_nodes(int level) const
    {
        std::vector<int> out;
        for (index_t k = 0; k < nodes_.size(); ++k)
            if (nodes_[k].level == level)
                out.push_back(static_cast<int>(k));
        return out;
    }

private:
    std::vector<HodlrNode> nodes_; // breadth-first, root at 0
    index_t leaf_threshold_ = 0;
};

// Balanced bisection; the first child takes ceil(size / 2).
inline HodlrTree build_tree(index_t n, index_t leaf_threshold)
{
    if (n < 1 || leaf_threshold < 1)
        throw error(errc::invalid_argument, "tree needs n >= 1 and leaf threshold >= 1");
    std::vector<HodlrNode> nodes{{0, 0, n, -1, -1}};
    for (index_t k = 0; k < nodes.size(); ++k) {
        const HodlrNode cur = nodes[k];
        if (cur.size() <= leaf_threshold)
            continue;
        const index_t mid = cur.lo + (cur.size() + 1) / 2;
        nodes[k].first = static_cast<int>(nodes.size());
        nodes.push_back({cur.level + 1, cur.lo, mid, -1, -1});
        nodes[k].second = static_cast<int>(nodes.size());
        nodes.push_back({cur.level + 1, mid, cur.hi, -1, -1});
    }
    return {std::move(nodes), leaf_threshold};
}

struct NodeFactors {
    PartialPivLU leaf_lu;   // leaves only
    LowRankFactor upper;    // K(a, b) ~= U_a V_ab^T
    LowRankFactor lower;    // K(b, a) ~= U_b V_ba^T
    DenseMatrix d_first;    // K_a^{-1} U_a
    DenseMatrix d_second;   // K_b^{-1} U_b
    DenseMatrix schur;      // S as assembled
    PartialPivLU schur_lu;
};

struct LevelStats {
    int level = 0;               // level of the node whose split produced the blocks
    index_t max_rank = 0;
    double mean_rank = 0.0;
    index_t blocks = 0;
    double lowrank_seconds = 0.0;
    double factor_seconds = 0.0; // leaf LU + Schur work of nodes at this level
};

struct PhaseTimings {
    double lowrank = 0.0;
    double leaf_lu = 0.0;
    double schur = 0.0;
    double solve = 0.0;
};

struct SolveReport {
    std::vector<LevelStats> levels;
    PhaseTimings timings;
    std::optional<double> residual; // ||K x - F||_F / ||F||_F against the original operator
};

struct FactorizeOptions {
    unsigned threads = 1;             // concurrent child factorizations
    bool reverse_child_order = false; // factor the second child first
};

namespace detail {

// x <- x - [0 d_a; d_b 0] S^{-1} [V_ba^T x_a; V_ab^T x_b] for a stacked x = [x_a; x_b].
inline void couple(const NodeFactors& nf, index_t na, index_t nb, DenseMatrix& X)
{
    const index_t ra = nf.upper.rank(), rb = nf.lower.rank();
    if (ra + rb == 0 || X.cols() == 0)
        return;
    DenseMatrix y = vcat(multiply(nf.lower.V, X.middle_rows(0, na), op::trans),
                         multiply(nf.upper.V, X.middle_rows(na, nb), op::trans));
    nf.schur_lu.solve_in_place(y);
    DenseMatrix top = multiply(nf.d_first, y.middle_rows(rb, ra));
    DenseMatrix bottom = multiply(nf.d_second, y.middle_rows(0, rb));
    for (index_t j = 0; j < X.cols(); ++j) {
        auto x = X.col(j);
        for (index_t i = 0; i < na; ++i)
            x[i] -= top(i, j);
        for (index_t i = 0; i < nb; ++i)
            x[na + i] -= bottom(i, j);
    }
}

} // namespace detail

class HodlrFactorization {
public:
    HodlrFactorization() = default;
    HodlrFactorization(HodlrTree tree, std::vector<NodeFactors> nodes)
        : tree_(std::move(tree)), nodes_(std::move(nodes))
    {
    }

    const HodlrTree& tree() const noexcept { return tree_; }
    const std::vector<NodeFactors>& nodes() const noexcept { return nodes_; }
    index_t size() const noexcept { return tree_.size(); }

    DenseMatrix solve(const DenseMatrix& F) const
    {
        if (F.rows() != size())
            throw error(errc::dimension_mismatch, "right-hand side rows do not match the factorization");
        if (!F.all_finite())
            throw error(errc::invalid_argument, "non-finite right-hand side");
        return solve_node(0, F);
    }

private:
    DenseMatrix solve_node(int id, const DenseMatrix& B) const
    {
        const HodlrNode& node = tree_.node(id);
        const NodeFactors& nf = nodes_[static_cast<index_t>(id)];
        if (node.is_leaf())
            return nf.leaf_lu.solve(B);
        const index_t na = tree_.node(node.first).size();
        DenseMatrix X = vcat(solve_node(node.first, B.middle_rows(0, na)),
                             solve_node(node.second, B.middle_rows(na, B.rows() - na)));
        detail::couple(nf, tree_.node(node.first).size(), tree_.node(node.second).size(), X);
        return X;
    }

    HodlrTree tree_;
    std::vector<NodeFactors> nodes_;
};

struct Factorized {
    HodlrFactorization factorization;
    SolveReport report;
};

namespace detail {

using clock = std::chrono::steady_clock;

inline double seconds_since(clock::time_point t0)
{
    return std::chrono::duration<double>(clock::now() - t0).count();
}

class HodlrBuilder {
public:
    HodlrBuilder(const BlockAccessor& front, const HodlrTree& tree, const CompressionConfig& cfg,
                 const FactorizeOptions& opts)
        : front_(front), tree_(tree), cfg_(cfg), opts_(opts), nodes_(tree.nodes().size()),
          lowrank_s_(tree.nodes().size(), 0.0), leaf_s_(tree.nodes().size(), 0.0),
          schur_s_(tree.nodes().size(), 0.0)
    {
    }

    Factorized run()
    {
        const DenseMatrix Z(tree_.size(), 0);
        factor_node(0, Z, std::max(opts_.threads, 1u));

        Factorized out;
        out.report = summarize();
        out.factorization = HodlrFactorization(tree_, std::move(nodes_));
        return out;
    }

private:
    // Returns K_node^{-1} Z, recording the node's factors on the way.
    DenseMatrix factor_node(int id, const DenseMatrix& Z, unsigned budget)
    {
        const HodlrNode& node = tree_.node(id);
        NodeFactors& nf = nodes_[static_cast<index_t>(id)];

        if (node.is_leaf()) {
            const auto t0 = clock::now();
            try {
                nf.leaf_lu = lu_partial(front_.sub(node.lo, node.size(), node.lo, node.size()).materialize());
            } catch (const error& e) {
                if (e.code() != errc::singular_matrix)
                    throw;
                throw error(errc::singular_leaf, "leaf [" + std::to_string(node.lo) + ", " +
                                                     std::to_string(node.hi) + "): " + e.what());
            }
            DenseMatrix W = nf.leaf_lu.solve(Z);
            leaf_s_[static_cast<index_t>(id)] = seconds_since(t0);
            return W;
        }

        const HodlrNode& a = tree_.node(node.first);
        const HodlrNode& b = tree_.node(node.second);

        auto t0 = clock::now();
        nf.upper = compress(front_.sub(a.lo, a.size(), b.lo, b.size()), cfg_);
        nf.lower = compress(front_.sub(b.lo, b.size(), a.lo, a.size()), cfg_);
        lowrank_s_[static_cast<index_t>(id)] = seconds_since(t0);
        const index_t ra = nf.upper.rank(), rb = nf.lower.rank();

        const DenseMatrix Za = hcat(nf.upper.U, Z.middle_rows(0, a.size()));
        const DenseMatrix Zb = hcat(nf.lower.U, Z.middle_rows(a.size(), b.size()));

        DenseMatrix Wa, Wb;
        if (budget > 1) {
            const unsigned half = budget / 2;
            auto other = std::async(std::launch::async, [&] { return factor_node(node.second, Zb, half); });
            Wa = factor_node(node.first, Za, budget - half);
            Wb = other.get();
        } else if (opts_.reverse_child_order) {
            Wb = factor_node(node.second, Zb, 1);
            Wa = factor_node(node.first, Za, 1);
        } else {
            Wa = factor_node(node.first, Za, 1);
            Wb = factor_node(node.second, Zb, 1);
        }

        t0 = clock::now();
        nf.d_first = Wa.middle_cols(0, ra);
        nf.d_second = Wb.middle_cols(0, rb);

        nf.schur = DenseMatrix::identity(ra + rb);
        nf.schur.set_block(0, rb, multiply(nf.lower.V, nf.d_first, op::trans));
        nf.schur.set_block(rb, 0, multiply(nf.upper.V, nf.d_second, op::trans));
        try {
            nf.schur_lu = lu_partial(nf.schur);
        } catch (const error& e) {
            if (e.code() != errc::singular_matrix)
                throw;
            throw error(errc::singular_schur, "coupling system of node [" + std::to_string(node.lo) + ", " +
                                                  std::to_string(node.hi) + ") is singular; compression too aggressive");
        }

        DenseMatrix C = vcat(Wa.middle_cols(ra, Z.cols()), Wb.middle_cols(rb, Z.cols()));
        couple(nf, a.size(), b.size(), C);
        schur_s_[static_cast<index_t>(id)] = seconds_since(t0);
        return C;
    }

    SolveReport summarize() const
    {
        SolveReport rep;
        const int depth = tree_.depth();
        for (int level = 0; level <= depth; ++level) {
            LevelStats ls;
            ls.level = level;
            index_t sum = 0;
            for (int id : tree_.level_nodes(level)) {
                const auto k = static_cast<index_t>(id);
                ls.factor_seconds += leaf_s_[k] + schur_s_[k];
                if (tree_.node(id).is_leaf())
                    continue;
                ls.lowrank_seconds += lowrank_s_[k];
                for (index_t r : {nodes_[k].upper.rank(), nodes_[k].lower.rank()}) {
                    ls.max_rank = std::max(ls.max_rank, r);
                    sum += r;
                    ++ls.blocks;
                }
            }
            ls.mean_rank = ls.blocks ? static_cast<double>(sum) / static_cast<double>(ls.blocks) : 0.0;
            rep.levels.push_back(ls);
        }
        for (index_t k = 0; k < nodes_.size(); ++k) {
            rep.timings.lowrank += lowrank_s_[k];
            rep.timings.leaf_lu += leaf_s_[k];
            rep.timings.schur += schur_s_[k];
        }
        return rep;
    }

    const BlockAccessor& front_;
    const HodlrTree& tree_;
    const CompressionConfig& cfg_;
    FactorizeOptions opts_;
    std::vector<NodeFactors> nodes_;
    std::vector<double> lowrank_s_, leaf_s_, schur_s_;
};

} // namespace detail

inline Factorized factorize(const BlockAccessor& front, const HodlrTree& tree, const CompressionConfig& cfg,
                            const FactorizeOptions& opts = {})
{
    if (front.rows() != front.cols() || front.rows() != tree.size())
        throw error(errc::dimension_mismatch, "front must be square and match the tree size");
    cfg.validate();
    if (cfg.method == scheme::bdlr && !front.vertex_graph())
        throw error(errc::invalid_argument, "BDLR compression needs the front's separator graph");
    return detail::HodlrBuilder(front, tree, cfg, opts).run();
}

// Exact product with the original (uncompressed) front.
inline DenseMatrix apply(const BlockAccessor& front, const DenseMatrix& X)
{
    if (X.rows() != front.cols())
        throw error(errc::dimension_mismatch, "operand rows do not match front columns");
    DenseMatrix Y(front.rows(), X.cols());
    std::vector<double> column(front.rows());
    for (index_t j = 0; j < front.cols(); ++j) {
        front.col(j, column);
        for (index_t c = 0; c < X.cols(); ++c) {
            const double s = X(j, c);
            if (s != 0.0)
                axpy(s, column, Y.col(c));
        }
    }
    return Y;
}

inline double relative_residual(const BlockAccessor& front, const DenseMatrix& X, const DenseMatrix& F)
{
    const double fn = frobenius_norm(F);
    const double rn = frobenius_norm(apply(front, X) - F);
    return fn > 0.0 ? rn / fn : rn;
}

} // namespace hodlrkit
