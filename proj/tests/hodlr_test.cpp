#include <gtest/gtest.h>

#include <cmath>

#include "hodlrkit/frontgen.hpp"
#include "hodlrkit/hodlr.hpp"
#include "oracles.hpp"

using namespace hodlrkit;

namespace {

CompressionConfig config(scheme s, double tol, int depth = 1)
{
    CompressionConfig c;
    c.method = s;
    c.tol = tol;
    c.depth = depth;
    return c;
}

DenseMatrix small_kernel_front(index_t n)
{
    DenseMatrix A = DenseMatrix::identity(n);
    for (index_t i = 0; i < n; ++i)
        for (index_t j = 0; j < n; ++j)
            A(i, j) += 0.1 / (1.0 + std::abs(double(i) - double(j)));
    return A;
}

bool same_bits(const DenseMatrix& a, const DenseMatrix& b)
{
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           std::equal(a.data().begin(), a.data().end(), b.data().begin());
}

void expect_identical(const HodlrFactorization& x, const HodlrFactorization& y)
{
    ASSERT_EQ(x.nodes().size(), y.nodes().size());
    for (index_t k = 0; k < x.nodes().size(); ++k) {
        const auto& a = x.nodes()[k];
        const auto& b = y.nodes()[k];
        EXPECT_TRUE(same_bits(a.leaf_lu.packed(), b.leaf_lu.packed())) << k;
        EXPECT_TRUE(same_bits(a.upper.U, b.upper.U)) << k;
        EXPECT_TRUE(same_bits(a.lower.V, b.lower.V)) << k;
        EXPECT_TRUE(same_bits(a.d_first, b.d_first)) << k;
        EXPECT_TRUE(same_bits(a.d_second, b.d_second)) << k;
        EXPECT_TRUE(same_bits(a.schur_lu.packed(), b.schur_lu.packed())) << k;
    }
}

} // namespace

TEST(BuildTree, SingleLeaf)
{
    const auto t = build_tree(8, 8);
    EXPECT_EQ(t.nodes().size(), 1u);
    EXPECT_TRUE(t.root().is_leaf());
    EXPECT_EQ(t.depth(), 0);
}

TEST(BuildTree, PowerOfTwo)
{
    const auto t = build_tree(8, 2);
    EXPECT_EQ(t.nodes().size(), 7u);
    EXPECT_EQ(t.depth(), 2);
    for (int id : t.level_nodes(2)) {
        EXPECT_TRUE(t.node(id).is_leaf());
        EXPECT_EQ(t.node(id).size(), 2u);
    }
}

TEST(BuildTree, HalvingRule)
{
    const auto t = build_tree(100, 30);
    EXPECT_EQ(t.node(t.root().first).size(), 50u);
    EXPECT_EQ(t.node(t.root().second).size(), 50u);
    for (int id : t.level_nodes(2))
        EXPECT_EQ(t.node(id).size(), 25u);
    EXPECT_EQ(t.depth(), 2);
}

TEST(BuildTree, InvariantsOnManySizes)
{
    for (index_t n : {1u, 2u, 3u, 17u, 63u, 64u, 65u, 1000u, 1025u})
        for (index_t leaf : {1u, 4u, 16u, 64u}) {
            const auto t = build_tree(n, leaf);
            for (const auto& node : t.nodes()) {
                EXPECT_EQ(node.is_leaf(), node.size() <= leaf);
                if (node.is_leaf())
                    continue;
                const auto& a = t.node(node.first);
                const auto& b = t.node(node.second);
                EXPECT_EQ(a.lo, node.lo);
                EXPECT_EQ(a.hi, b.lo);
                EXPECT_EQ(b.hi, node.hi);
                EXPECT_EQ(a.size(), (node.size() + 1) / 2); // odd sizes: smaller tail
            }
            if (n > leaf) {
                EXPECT_EQ(t.depth(), static_cast<int>(std::ceil(std::log2(double(n) / double(leaf)) - 1e-12)))
                    << n << "/" << leaf;
            }
        }
    EXPECT_THROW(build_tree(0, 4), error);
    EXPECT_THROW(build_tree(4, 0), error);
}

TEST(Factorize, BlockDiagonalFrontHasNoCoupling)
{
    DenseMatrix A(32, 32);
    for (index_t b = 0; b < 4; ++b)
        A.set_block(8 * b, 8 * b, oracle::random_gaussian(8, 8, b) + DenseMatrix::identity(8) * 10.0);
    const auto acc = BlockAccessor::dense_view(A);
    for (scheme s : {scheme::svd, scheme::aca}) {
        const auto [fact, rep] = factorize(acc, build_tree(32, 8), config(s, 1e-8));
        for (const auto& lv : rep.levels)
            EXPECT_EQ(lv.max_rank, 0u);
        for (const auto& nf : fact.nodes())
            EXPECT_EQ(nf.schur.rows(), 0u); // S = I of size 0
        const DenseMatrix F = oracle::random_gaussian(32, 2, 5);
        const DenseMatrix X = fact.solve(F);
        for (index_t b = 0; b < 4; ++b) {
            const DenseMatrix xb = lu_partial(A.block(8 * b, 8, 8 * b, 8)).solve(F.middle_rows(8 * b, 8));
            EXPECT_TRUE(same_bits(X.middle_rows(8 * b, 8), xb));
        }
    }
}

TEST(Factorize, KernelFrontSolveResidual)
{
    const DenseMatrix A = small_kernel_front(64);
    const auto acc = BlockAccessor::dense_view(A);
    const auto [fact, rep] = factorize(acc, build_tree(64, 16), config(scheme::svd, 1e-12));
    const DenseMatrix F = oracle::random_gaussian(64, 1, 1);
    const DenseMatrix X = fact.solve(F);
    EXPECT_LE(oracle::fro_diff(oracle::matmul(A, X), F) / oracle::fro(F), 1e-10);
    EXPECT_LE(oracle::rel_diff(X, oracle::solve(A, F)), 1e-10);
}

TEST(Factorize, SchurHasUnitDiagonalBlocks)
{
    const DenseMatrix A = small_kernel_front(100);
    const auto [fact, rep] = factorize(BlockAccessor::dense_view(A), build_tree(100, 20), config(scheme::aca, 1e-8));
    for (index_t k = 0; k < fact.nodes().size(); ++k) {
        const auto& nf = fact.nodes()[k];
        if (fact.tree().nodes()[k].is_leaf())
            continue;
        const index_t ra = nf.upper.rank(), rb = nf.lower.rank();
        ASSERT_EQ(nf.schur.rows(), ra + rb);
        EXPECT_EQ(nf.schur.block(0, rb, 0, rb), DenseMatrix::identity(rb));
        EXPECT_EQ(nf.schur.block(rb, ra, rb, ra), DenseMatrix::identity(ra));
        EXPECT_EQ(nf.d_first.cols(), ra);
        EXPECT_EQ(nf.d_second.cols(), rb);
    }
}

TEST(Factorize, TableRegimesOnGeneratedFront)
{
    const FrontProblem fp = grid_front(GridSpec{{30, 15}}, 1, 7);
    const auto acc = fp.accessor();
    for (auto [tol, depth] : {std::pair{1e-1, 1}, {1e-3, 3}, {1e-5, 5}}) {
        auto run = [&] { return factorize(acc, build_tree(acc.rows(), 8), config(scheme::bdlr, tol, depth)); };
        EXPECT_NO_THROW(run()) << tol;
    }
}

TEST(Factorize, BdlrNeedsGraph)
{
    const DenseMatrix A = small_kernel_front(16);
    EXPECT_THROW(factorize(BlockAccessor::dense_view(A), build_tree(16, 4), config(scheme::bdlr, 0.1)), error);
}

TEST(Factorize, ShapeErrors)
{
    const DenseMatrix A = small_kernel_front(16);
    EXPECT_THROW(factorize(BlockAccessor::dense_view(A), build_tree(15, 4), config(scheme::svd, 0.1)), error);
    const DenseMatrix B(4, 5);
    EXPECT_THROW(factorize(BlockAccessor::dense_view(B), build_tree(4, 2), config(scheme::svd, 0.1)), error);
}

TEST(Factorize, SingularLeaf)
{
    DenseMatrix A = small_kernel_front(16);
    for (index_t j = 0; j < 4; ++j)
        for (index_t i = 0; i < 16; ++i)
            A(i, j) = 0.0;
    try {
        factorize(BlockAccessor::dense_view(A), build_tree(16, 4), config(scheme::svd, 1e-8));
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::singular_leaf);
    }
}

TEST(Factorize, SingularSchur)
{
    // [[1, 1], [1, 1]] with 1x1 leaves: leaves are fine, the coupling is singular
    const DenseMatrix A{{1, 1}, {1, 1}};
    try {
        factorize(BlockAccessor::dense_view(A), build_tree(2, 1), config(scheme::svd, 1e-8));
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::singular_schur);
    }
}

TEST(Solve, IdentityFront)
{
    const DenseMatrix I = DenseMatrix::identity(40);
    const auto [fact, rep] = factorize(BlockAccessor::dense_view(I), build_tree(40, 8), config(scheme::aca, 1e-6));
    const DenseMatrix F = oracle::random_gaussian(40, 3, 2);
    EXPECT_EQ(fact.solve(F), F);
}

TEST(Solve, MatchesDenseOnGeneratedFront)
{
    const FrontProblem fp = grid_front(GridSpec{{256, 5}}, 1, 2);
    ASSERT_EQ(fp.front.rows(), 256u);
    const auto [fact, rep] = factorize(fp.accessor(), build_tree(256, 32), config(scheme::svd, 1e-12));
    const DenseMatrix x = fact.solve(fp.rhs);
    const DenseMatrix x_dense = lu_partial(fp.front).solve(fp.rhs);
    EXPECT_LE(oracle::rel_diff(x, x_dense), 1e-9);
}

TEST(Solve, MultipleRightHandSides)
{
    const DenseMatrix A = small_kernel_front(90);
    const auto [fact, rep] = factorize(BlockAccessor::dense_view(A), build_tree(90, 10), config(scheme::svd, 1e-13));
    const DenseMatrix F = oracle::random_gaussian(90, 4, 3);
    const DenseMatrix X = fact.solve(F);
    for (index_t j = 0; j < 4; ++j) {
        const DenseMatrix xj = fact.solve(F.middle_cols(j, 1));
        EXPECT_LE(oracle::fro_diff(xj, X.middle_cols(j, 1)), 1e-14 * oracle::fro(xj));
    }
    EXPECT_THROW(fact.solve(DenseMatrix(89, 1)), error);
}

TEST(Solve, ExactCompressionMatchesDenseOnRandomFronts)
{
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const index_t n = 64 + 61 * seed;
        DenseMatrix A = oracle::random_gaussian(n, n, seed);
        for (index_t i = 0; i < n; ++i)
            A(i, i) += 3.0 * std::sqrt(double(n));
        const auto [fact, rep] = factorize(BlockAccessor::dense_view(A), build_tree(n, 16), config(scheme::svd, 1e-14));
        const DenseMatrix F = oracle::random_gaussian(n, 1, seed + 50);
        EXPECT_LE(oracle::rel_diff(fact.solve(F), oracle::solve(A, F)), 1e-9) << n;
    }
}

TEST(Factorize, ChildOrderAndThreadsAreBitIdentical)
{
    const FrontProblem fp = grid_front(GridSpec{{48, 9}}, 1, 4);
    const auto acc = fp.accessor();
    const auto tree = build_tree(acc.rows(), 6);
    for (scheme s : {scheme::svd, scheme::aca, scheme::bdlr}) {
        const auto cfg = config(s, 1e-6, 2);
        const auto base = factorize(acc, tree, cfg);
        FactorizeOptions rev;
        rev.reverse_child_order = true;
        expect_identical(base.factorization, factorize(acc, tree, cfg, rev).factorization);
        FactorizeOptions par;
        par.threads = 4;
        expect_identical(base.factorization, factorize(acc, tree, cfg, par).factorization);
    }
}

TEST(Factorize, ReportShape)
{
    const FrontProblem fp = grid_front(GridSpec{{64, 9}}, 1, 4);
    const auto acc = fp.accessor();
    const auto tree = build_tree(acc.rows(), 8);
    const auto [fact, rep] = factorize(acc, tree, config(scheme::aca, 1e-6));
    ASSERT_EQ(rep.levels.size(), static_cast<index_t>(tree.depth() + 1));
    for (const auto& lv : rep.levels) {
        EXPECT_GE(lv.lowrank_seconds, 0.0);
        EXPECT_GE(lv.factor_seconds, 0.0);
        EXPECT_LE(lv.mean_rank, double(lv.max_rank));
    }
    EXPECT_EQ(rep.levels.back().blocks, 0u); // leaves only
    EXPECT_EQ(rep.levels.front().blocks, 2u);
    EXPECT_GE(rep.timings.lowrank, 0.0);
    EXPECT_FALSE(rep.residual);
}

TEST(Factorize, RankDecaysTowardLeaves)
{
    index_t pairs = 0, good = 0;
    for (const GridSpec& spec : {GridSpec{{128, 9}}, GridSpec{{200, 7}}, GridSpec{{12, 12, 12}}}) {
        const FrontProblem fp = grid_front(spec, spec.dims.size() - 1, spec.dims.back() / 2);
        const auto acc = fp.accessor();
        const auto [fact, rep] = factorize(acc, build_tree(acc.rows(), 16), config(scheme::svd, 1e-6));
        for (index_t l = 0; l + 1 < rep.levels.size(); ++l) {
            if (rep.levels[l + 1].blocks == 0)
                continue;
            ++pairs;
            good += rep.levels[l + 1].max_rank <= rep.levels[l].max_rank ? 1 : 0;
        }
    }
    ASSERT_GT(pairs, 0u);
    EXPECT_GE(double(good), 0.8 * double(pairs));
}

TEST(Apply, Basics)
{
    const DenseMatrix I = DenseMatrix::identity(5);
    const DenseMatrix X = oracle::random_gaussian(5, 2, 1);
    EXPECT_EQ(apply(BlockAccessor::dense_view(I), X), X);
    EXPECT_EQ(apply(BlockAccessor::dense_copy(DenseMatrix(5, 5)), X), DenseMatrix(5, 2));
    const DenseMatrix A = oracle::random_gaussian(32, 32, 2);
    DenseMatrix e3(32, 1);
    e3(3, 0) = 1.0;
    EXPECT_EQ(apply(BlockAccessor::dense_view(A), e3), A.middle_cols(3, 1));
    EXPECT_THROW(apply(BlockAccessor::dense_view(A), DenseMatrix(31, 1)), error);
}

TEST(Apply, ResidualMatchesIndependentComputation)
{
    const FrontProblem fp = grid_front(GridSpec{{40, 9}}, 1, 4);
    const auto acc = fp.accessor();
    const auto [fact, rep] = factorize(acc, build_tree(acc.rows(), 8), config(scheme::aca, 1e-4));
    const DenseMatrix x = fact.solve(fp.rhs);
    const double mine = relative_residual(acc, x, fp.rhs);
    const double ref = oracle::fro_diff(oracle::matmul(fp.front, x), fp.rhs) / oracle::fro(fp.rhs);
    EXPECT_NEAR(mine, ref, 1e-13);
    EXPECT_GT(mine, 0.0); // tolerance 1e-4 leaves a visible residual
}
