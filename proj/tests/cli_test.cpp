#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>

#include "hodlrkit/commands.hpp"
#include "oracles.hpp"

using namespace hodlrkit;
using cli::command;
using cli::RunConfig;

namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override
    {
        spdlog::set_level(spdlog::level::warn);
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("hodlrkit_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    RunConfig on_front(command cmd, const std::string& front) const
    {
        RunConfig cfg;
        cfg.cmd = cmd;
        cfg.front = front;
        return cfg;
    }

    // 2D grid front written to disk; returns the prefix
    std::string generate(const std::string& grid, const std::string& axis, std::optional<index_t> plane = {})
    {
        RunConfig cfg;
        cfg.cmd = command::gen;
        cfg.grid = grid;
        cfg.sep_axis = axis;
        cfg.sep_plane = plane;
        cfg.prefix = path(grid);
        cli::run(cfg);
        return cfg.prefix;
    }

    RunConfig on_generated(command cmd, const std::string& prefix) const
    {
        RunConfig cfg = on_front(cmd, prefix + ".front.mtx");
        cfg.graph = prefix + ".op.mtx";
        cfg.ordering = prefix + ".order.txt";
        return cfg;
    }

    fs::path dir_;
};

std::string slurp(const std::string& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

errc code_of(const RunConfig& cfg)
{
    try {
        cli::run(cfg);
    } catch (const error& e) {
        return e.code();
    }
    ADD_FAILURE() << "command succeeded";
    return errc::io_error;
}

SparsePattern chain(index_t n)
{
    std::vector<std::tuple<index_t, index_t, double>> t;
    for (index_t i = 0; i + 1 < n; ++i) {
        t.emplace_back(i, i + 1, 1.0);
        t.emplace_back(i + 1, i, 1.0);
    }
    return SparsePattern::from_triplets(n, t);
}

cli::json without_timings(cli::json r)
{
    r.erase("timings");
    return r;
}

} // namespace

TEST_F(CliTest, GenGridWritesFrontGraphAndOperator)
{
    const std::string prefix = generate("9x9", "x", 4);
    const DenseMatrix front = read_dense(prefix + ".front.mtx");
    EXPECT_EQ(front.rows(), 9u);
    EXPECT_EQ(front.cols(), 9u);
    EXPECT_EQ(read_sparse(prefix + ".graph.mtx").size(), 9u);
    EXPECT_EQ(read_sparse(prefix + ".op.mtx").size(), 81u);
    EXPECT_EQ(read_ordering(prefix + ".order.txt"), (std::vector<index_t>{4, 13, 22, 31, 40, 49, 58, 67, 76}));
    EXPECT_EQ(front, grid_front(GridSpec{{9, 9}}, 0, 4).front);
}

TEST_F(CliTest, GenIsByteIdenticalForSameSeed)
{
    RunConfig cfg;
    cfg.cmd = command::gen;
    cfg.grid = "12x7";
    cfg.sep_axis = "x";
    cfg.seed = 11;
    cfg.prefix = path("a");
    const auto ra = cli::run(cfg);
    cfg.prefix = path("b");
    const auto rb = cli::run(cfg);
    for (const char* suffix : {".front.mtx", ".graph.mtx", ".op.mtx", ".order.txt", ".rhs.mtx"}) {
        const std::string a = slurp(path("a") + suffix);
        EXPECT_FALSE(a.empty()) << suffix;
        EXPECT_EQ(a, slurp(path("b") + suffix)) << suffix;
    }
    EXPECT_EQ(ra.report["result"]["n"], rb.report["result"]["n"]);
}

TEST_F(CliTest, GenKernel)
{
    RunConfig cfg;
    cfg.cmd = command::gen;
    cfg.kernel = "inv-distance";
    cfg.n = 256;
    cfg.shift = 2.0;
    cfg.prefix = path("k");
    cli::run(cfg);
    const std::string text = slurp(cfg.prefix + ".front.mtx");
    EXPECT_EQ(text.rfind("%%MatrixMarket matrix array real general\n256 256\n", 0), 0u);
    EXPECT_EQ(read_dense(cfg.prefix + ".front.mtx"), kernel_matrix(256, kernel_kind::inv_distance, 2.0));
}

TEST_F(CliTest, GenRejectsBadFlags)
{
    RunConfig cfg;
    cfg.cmd = command::gen;
    cfg.prefix = path("bad");
    EXPECT_EQ(code_of(cfg), errc::invalid_argument); // neither --grid nor --kernel
    cfg.grid = "9x9";
    cfg.kernel = "exp-decay";
    EXPECT_EQ(code_of(cfg), errc::invalid_argument);
    cfg.kernel.clear();
    cfg.sep_plane = 0;
    EXPECT_EQ(code_of(cfg), errc::invalid_plane);
    cfg.sep_plane.reset();
    cfg.sep_axis = "z";
    EXPECT_EQ(code_of(cfg), errc::invalid_plane);
    cfg.sep_axis = "x";
    cfg.grid = "9xq";
    EXPECT_EQ(code_of(cfg), errc::invalid_argument);
}

TEST_F(CliTest, GmresOnIdentityFront)
{
    write_matrix_market_file(path("eye.mtx"), DenseMatrix::identity(10));
    const auto out = cli::run(on_front(command::gmres, path("eye.mtx")));
    EXPECT_EQ(out.exit_code, 0);
    EXPECT_EQ(out.report["result"]["hodlr"]["iterations"], 1);
    EXPECT_EQ(out.report["result"]["hodlr"]["converged"], true);
}

TEST_F(CliTest, GmresOnGenerated2DFrontWithBdlr)
{
    const std::string prefix = generate("81x9", "y", 4);
    RunConfig cfg = on_generated(command::gmres, prefix);
    cfg.method = scheme::bdlr;
    cfg.tol = 1e-1;
    cfg.depth = 1;
    cfg.leaf_size = 16;
    cfg.baseline = true;
    const auto out = cli::run(cfg);
    const auto& r = out.report["result"];
    EXPECT_EQ(r["n"], 81);
    EXPECT_EQ(out.exit_code, 0);
    EXPECT_EQ(r["hodlr"]["converged"], true);
    EXPECT_LT(r["hodlr"]["iterations"].get<int>(), 1000);
    EXPECT_LE(r["hodlr"]["true_residual"].get<double>(), 10 * cfg.gmres_tol);
    EXPECT_EQ(r["baseline"]["converged"], true);
    EXPECT_LT(r["hodlr"]["iterations"].get<int>(), r["baseline"]["iterations"].get<int>());
}

TEST_F(CliTest, StandardToleranceDepthPairsAreAccepted)
{
    const std::string prefix = generate("40x9", "y", 4);
    for (auto [tol, depth] : {std::pair{1e-1, 1}, {1e-3, 3}, {1e-5, 5}}) {
        RunConfig cfg = on_generated(command::gmres, prefix);
        cfg.method = scheme::bdlr;
        cfg.tol = tol;
        cfg.depth = depth;
        cfg.leaf_size = 8;
        const auto out = cli::run(cfg);
        EXPECT_EQ(out.exit_code, 0) << tol;
        EXPECT_EQ(out.report["config"]["depth"], depth);
    }
}

TEST_F(CliTest, NonConvergenceIsExitCodeTwo)
{
    const std::string prefix = generate("64x9", "y", 4);
    RunConfig cfg = on_generated(command::gmres, prefix);
    cfg.method = scheme::aca;
    cfg.tol = 0.9;
    cfg.leaf_size = 4;
    cfg.gmres_maxit = 1;
    const auto out = cli::run(cfg);
    EXPECT_EQ(out.exit_code, 2);
    EXPECT_EQ(out.report["result"]["hodlr"]["converged"], false);
    EXPECT_EQ(out.report["result"]["hodlr"]["iterations"], 1);
}

TEST_F(CliTest, SolveWritesSolution)
{
    const std::string prefix = generate("30x7", "x");
    RunConfig cfg = on_front(command::solve, prefix + ".front.mtx");
    cfg.rhs = prefix + ".rhs.mtx";
    cfg.tol = 1e-12;
    cfg.leaf_size = 2;
    cfg.solution = path("x.mtx");
    const auto out = cli::run(cfg);
    EXPECT_LE(out.report["result"]["residual"].get<double>(), 1e-10);
    const DenseMatrix A = read_dense(cfg.front), b = read_dense(cfg.rhs), x = read_dense(cfg.solution);
    EXPECT_LE(oracle::fro_diff(oracle::matmul(A, x), b), 1e-10 * oracle::fro(b));
}

TEST_F(CliTest, FactorReportsLevelsAndIsDeterministic)
{
    const std::string prefix = generate("64x9", "y", 4);
    RunConfig cfg = on_generated(command::factor, prefix);
    cfg.method = scheme::bdlr;
    cfg.tol = 1e-3;
    cfg.depth = 3;
    cfg.leaf_size = 8;
    const auto a = cli::run(cfg);
    cfg.threads = 4;
    const auto b = cli::run(cfg);
    const auto& levels = a.report["result"]["levels"];
    ASSERT_EQ(levels.size(), 4u); // 64 -> 32 -> 16 -> 8, three split levels plus the leaves
    EXPECT_EQ(levels[0]["blocks"], 2);
    EXPECT_EQ(levels[3]["blocks"], 0);
    auto ea = without_timings(a.report), eb = without_timings(b.report);
    ea["config"].erase("threads");
    eb["config"].erase("threads");
    EXPECT_EQ(ea, eb);
    for (const auto& [key, value] : a.report["timings"].items()) {
        if (value.is_number()) {
            EXPECT_GE(value.get<double>(), 0.0) << key;
        }
    }
}

TEST_F(CliTest, LoadValidation)
{
    const std::string prefix = generate("9x9", "x", 4);
    RunConfig cfg = on_front(command::factor, prefix + ".front.mtx");
    cfg.ordering = prefix + ".order.txt";
    EXPECT_EQ(code_of(cfg), errc::invalid_argument); // ordering without graph
    cfg.ordering.clear();
    cfg.graph = prefix + ".op.mtx";
    EXPECT_EQ(code_of(cfg), errc::dimension_mismatch); // 81-vertex graph, 9-row front
    cfg.graph.clear();
    write_matrix_market_file(path("wide.mtx"), DenseMatrix(3, 4));
    cfg.front = path("wide.mtx");
    EXPECT_EQ(code_of(cfg), errc::dimension_mismatch);
    cfg.front = path("missing.mtx");
    EXPECT_EQ(code_of(cfg), errc::io_error);
}

TEST_F(CliTest, StudyPivotsSingleCrossingEdge)
{
    // block-diagonal front plus one coupling entry between rows 3 and 4, the
    // only graph edge that crosses the root split
    DenseMatrix A = DenseMatrix::identity(8);
    A(3, 4) = 0.5;
    A(4, 3) = 0.5;
    write_matrix_market_file(path("front.mtx"), A);
    write_matrix_market_file(path("chain.mtx"), chain(8));
    RunConfig cfg = on_front(command::study_pivots, path("front.mtx"));
    cfg.graph = path("chain.mtx");
    cfg.leaf_size = 4;
    const auto out = cli::run(cfg);
    const auto& piv = out.report["result"]["pivots"];
    ASSERT_EQ(piv.size(), 1u);
    EXPECT_EQ(piv[0]["pivot"], 0.5);
    EXPECT_EQ(piv[0]["row"], 3);
    EXPECT_EQ(piv[0]["col"], 0);
    EXPECT_EQ(piv[0]["row_d"], 0);
    EXPECT_EQ(piv[0]["col_d"], 0);
    EXPECT_EQ(A(3, 4), piv[0]["pivot"].get<double>()); // against the materialized block
}

TEST_F(CliTest, StudyPivotsZeroBlockIsEmpty)
{
    write_matrix_market_file(path("front.mtx"), DenseMatrix::identity(8));
    write_matrix_market_file(path("chain.mtx"), chain(8));
    RunConfig cfg = on_front(command::study_pivots, path("front.mtx"));
    cfg.graph = path("chain.mtx");
    cfg.leaf_size = 4;
    const auto out = cli::run(cfg);
    EXPECT_TRUE(out.report["result"]["pivots"].empty());
    EXPECT_TRUE(out.report["result"]["quartiles"].is_null());
}

TEST_F(CliTest, StudyPivotsLargePivotsSitNearTheInterface)
{
    const std::string prefix = generate("64x9", "y", 4);
    RunConfig cfg = on_generated(command::study_pivots, prefix);
    cfg.leaf_size = 16;
    const auto out = cli::run(cfg);
    const auto& piv = out.report["result"]["pivots"];
    ASSERT_GE(piv.size(), 4u);
    // recompute the quartile means from the emitted list
    std::vector<std::pair<double, double>> md; // (pivot, mean d)
    for (const auto& p : piv) {
        ASSERT_GE(p["row_d"].get<int>(), 0);
        ASSERT_GE(p["col_d"].get<int>(), 0);
        md.emplace_back(p["pivot"].get<double>(), 0.5 * (p["row_d"].get<double>() + p["col_d"].get<double>()));
    }
    std::stable_sort(md.begin(), md.end(), [](auto a, auto b) { return a.first > b.first; });
    const std::size_t q = std::max<std::size_t>(1, md.size() / 4);
    double top = 0, bottom = 0;
    for (std::size_t k = 0; k < q; ++k) {
        top += md[k].second / double(q);
        bottom += md[md.size() - 1 - k].second / double(q);
    }
    EXPECT_LE(top, bottom);
    EXPECT_NEAR(out.report["result"]["quartiles"]["top"]["mean_d"].get<double>(), top, 1e-12);
    EXPECT_NEAR(out.report["result"]["quartiles"]["bottom"]["mean_d"].get<double>(), bottom, 1e-12);
}

TEST_F(CliTest, StudyPivotsNeedsGraph)
{
    write_matrix_market_file(path("front.mtx"), DenseMatrix::identity(8));
    EXPECT_EQ(code_of(on_front(command::study_pivots, path("front.mtx"))), errc::invalid_argument);
}

TEST_F(CliTest, StudyRankOfRankThreeBlock)
{
    DenseMatrix A = DenseMatrix::identity(40);
    const DenseMatrix B = oracle::random_rank(20, 20, 3, 21);
    A.set_block(0, 20, B);
    A.set_block(20, 0, B.transpose());
    write_matrix_market_file(path("front.mtx"), A);
    write_matrix_market_file(path("chain.mtx"), chain(40));
    RunConfig cfg = on_front(command::study_rank, path("front.mtx"));
    cfg.graph = path("chain.mtx");
    cfg.leaf_size = 20;
    const auto out = cli::run(cfg);
    const auto& curve = out.report["result"]["svd_curve"];
    ASSERT_EQ(curve.size(), 21u);
    EXPECT_NEAR(curve[0]["error"].get<double>(), 1.0, 1e-14);
    EXPECT_GT(curve[2]["error"].get<double>(), 1e-6);
    EXPECT_LE(curve[3]["error"].get<double>(), 1e-12);
}

TEST_F(CliTest, StudyRankZeroBlock)
{
    write_matrix_market_file(path("front.mtx"), DenseMatrix::identity(16));
    write_matrix_market_file(path("chain.mtx"), chain(16));
    RunConfig cfg = on_front(command::study_rank, path("front.mtx"));
    cfg.graph = path("chain.mtx");
    cfg.leaf_size = 8;
    const auto out = cli::run(cfg);
    for (const auto& p : out.report["result"]["svd_curve"])
        EXPECT_EQ(p["error"], 0.0);
    for (const auto& p : out.report["result"]["points"]) {
        ASSERT_FALSE(p.contains("failure")) << p.dump();
        EXPECT_EQ(p["error"], 0.0);
    }
}

TEST_F(CliTest, StudyRankSvdBoundsEveryScheme)
{
    const std::string prefix = generate("128x9", "y", 4);
    RunConfig cfg = on_generated(command::study_rank, prefix);
    cfg.tols = {1e-1, 1e-2, 1e-3, 1e-5, 1e-7};
    cfg.depths = {1, 2, 3, 5, 6};
    const auto out = cli::run(cfg);
    const auto& curve = out.report["result"]["svd_curve"];
    const auto& points = out.report["result"]["points"];
    ASSERT_EQ(points.size(), 10u);
    for (const auto& p : points) {
        ASSERT_FALSE(p.contains("failure")) << p.dump();
        const auto k = p["rank"].get<std::size_t>();
        EXPECT_LE(curve[k]["error"].get<double>(), p["error"].get<double>() + 1e-12) << p.dump();
    }
    EXPECT_EQ(out.report["result"]["svd_dominates"], true);
}

TEST_F(CliTest, StudyRankWithoutGraphRecordsBdlrFailure)
{
    const std::string prefix = generate("32x9", "y", 4);
    RunConfig cfg = on_front(command::study_rank, prefix + ".front.mtx");
    cfg.leaf_size = 8;
    const auto out = cli::run(cfg);
    for (const auto& p : out.report["result"]["points"])
        EXPECT_EQ(p.contains("failure"), p["scheme"] == "bdlr");
}

TEST_F(CliTest, BlockOutOfRange)
{
    write_matrix_market_file(path("front.mtx"), DenseMatrix::identity(16));
    write_matrix_market_file(path("chain.mtx"), chain(16));
    RunConfig cfg = on_front(command::study_rank, path("front.mtx"));
    cfg.graph = path("chain.mtx");
    cfg.leaf_size = 8;
    for (const char* block : {"2,0", "0,1", "1,0", "-1,0"}) {
        cfg.block = block;
        cfg.cmd = command::study_rank;
        EXPECT_EQ(code_of(cfg), errc::block_out_of_range) << block;
        cfg.cmd = command::study_pivots;
        EXPECT_EQ(code_of(cfg), errc::block_out_of_range) << block;
    }
    cfg.block = "0";
    EXPECT_EQ(code_of(cfg), errc::invalid_argument);
    cfg.block = "0,0,left";
    EXPECT_EQ(code_of(cfg), errc::invalid_argument);
    cfg.block = "0,0,lower";
    EXPECT_NO_THROW(cli::run(cfg));
}
