#pragma once
//
// Implementation of the hodlrkit command-line tool. Each command turns a
// RunConfig into a JSON report; main.cpp only parses flags and writes output.
//
// Report layout (schemas/report.schema.json):
//   { "schema_version", "command", "config", "result", "timings" }
// Every wall-clock number lives under "timings", so two runs with the same
// flags and seed produce identical reports once that block is dropped.
//

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "hodlrkit/frontgen.hpp"
#include "hodlrkit/hodlr.hpp"
#include "hodlrkit/krylov.hpp"
#include "hodlrkit/matrix_market.hpp"
#include "json.hpp"

namespace hodlrkit::cli {

using json = nlohmann::ordered_json;

inline constexpr int schema_version = 1;

enum class command { gen, factor, solve, gmres, study_rank, study_pivots };

inline const char* to_string(command c)
{
    switch (c) {
    case command::gen: return "gen";
    case command::factor: return "factor";
    case command::solve: return "solve";
    case command::gmres: return "gmres";
    case command::study_rank: return "study-rank";
    case command::study_pivots: return "study-pivots";
    }
    return "?";
}

struct RunConfig {
    command cmd = command::factor;

    // inputs
    std::string front, graph, ordering, rhs;

    // compression and solver
    scheme method = scheme::svd;
    double tol = 1e-6;
    int depth = 1;
    index_t leaf_size = 64;
    double gmres_tol = 1e-10;
    index_t gmres_maxit = 1000;
    bool baseline = false;
    unsigned threads = 1;
    std::uint64_t seed = 0;

    // study commands
    std::string block = "0,0,upper";
    std::vector<double> tols{1e-1, 1e-3, 1e-5};
    std::vector<int> depths{1, 3, 5};

    // solve
    std::string solution;

    // gen
    std::string grid;
    std::string stencil_name = "laplacian";
    std::string sep_axis = "x";
    std::optional<index_t> sep_plane;
    std::string kernel;
    index_t n = 256;
    double shift = 0.0;
    std::string prefix = "front";
};

struct Outcome {
    json report;
    int exit_code = 0; // 0 success, 2 non-convergence
};

namespace detail {

using clock = std::chrono::steady_clock;

inline double since(clock::time_point t0)
{
    return std::chrono::duration<double>(clock::now() - t0).count();
}

inline std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        out.push_back(item);
    return out;
}

inline long long parse_int(const std::string& s, const std::string& what)
{
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size())
        throw error(errc::invalid_argument, "cannot parse " + what + " from '" + s + "'");
    return v;
}

// "9x9" or "6x6x6"
inline std::vector<index_t> parse_grid(const std::string& s)
{
    std::vector<index_t> dims;
    for (const auto& part : split(s, 'x')) {
        const long long v = parse_int(part, "grid extent");
        if (v < 1)
            throw error(errc::invalid_argument, "grid extents must be positive");
        dims.push_back(static_cast<index_t>(v));
    }
    if (dims.empty() || dims.size() > 3)
        throw error(errc::invalid_argument, "--grid takes 1 to 3 extents, e.g. 9x9 or 6x6x6");
    return dims;
}

inline index_t parse_axis(const std::string& s)
{
    if (s == "x")
        return 0;
    if (s == "y")
        return 1;
    if (s == "z")
        return 2;
    throw error(errc::invalid_argument, "--sep-axis must be x, y or z");
}

inline kernel_kind parse_kernel(const std::string& s)
{
    if (s == "inv-distance")
        return kernel_kind::inv_distance;
    if (s == "exp-decay")
        return kernel_kind::exp_decay;
    throw error(errc::invalid_argument, "--kernel must be inv-distance or exp-decay");
}

inline stencil parse_stencil(const std::string& s)
{
    if (s == "laplacian")
        return stencil::laplacian;
    if (s == "vector-laplacian")
        return stencil::vector_laplacian;
    throw error(errc::invalid_argument, "--stencil must be laplacian or vector-laplacian");
}

struct BlockRef {
    int level = 0;
    index_t index = 0;
    bool upper = true;
};

inline BlockRef parse_block(const std::string& s)
{
    const auto parts = split(s, ',');
    if (parts.size() < 2 || parts.size() > 3)
        throw error(errc::invalid_argument, "--block takes level,index[,upper|lower]");
    BlockRef b;
    const long long level = parse_int(parts[0], "block level");
    const long long index = parse_int(parts[1], "block index");
    if (level < 0 || index < 0)
        throw error(errc::block_out_of_range, "block level and index must be non-negative");
    b.level = static_cast<int>(level);
    b.index = static_cast<index_t>(index);
    if (parts.size() == 3) {
        if (parts[2] == "lower")
            b.upper = false;
        else if (parts[2] != "upper")
            throw error(errc::invalid_argument, "block side must be upper or lower");
    }
    return b;
}

struct LoadedFront {
    DenseMatrix front;
    std::shared_ptr<const SparsePattern> graph;
    DenseMatrix rhs;

    BlockAccessor accessor() const
    {
        auto acc = BlockAccessor::dense_view(front);
        return graph ? acc.with_vertex_graph(graph) : acc;
    }
};

inline LoadedFront load(const RunConfig& cfg)
{
    if (cfg.front.empty())
        throw error(errc::invalid_argument, "--front is required");
    LoadedFront lf;
    lf.front = read_dense(cfg.front);
    const index_t n = lf.front.rows();
    if (lf.front.cols() != n)
        throw error(errc::dimension_mismatch, "front must be square");
    if (!lf.front.all_finite())
        throw error(errc::invalid_argument, "front has non-finite entries");

    if (!cfg.graph.empty()) {
        SparsePattern g = read_sparse(cfg.graph);
        if (!cfg.ordering.empty()) {
            const auto ids = read_ordering(cfg.ordering);
            if (ids.size() != n)
                throw error(errc::dimension_mismatch, "ordering has " + std::to_string(ids.size()) +
                                                          " entries for a front of size " + std::to_string(n));
            std::vector<char> seen(g.size(), 0);
            for (index_t v : ids) {
                if (v >= g.size() || seen[v])
                    throw error(errc::dimension_mismatch, "ordering entry out of range or repeated");
                seen[v] = 1;
            }
            g = g.induced(ids);
        } else if (g.size() != n) {
            throw error(errc::dimension_mismatch, "graph has " + std::to_string(g.size()) +
                                                      " vertices for a front of size " + std::to_string(n) +
                                                      "; pass --ordering to link an operator graph");
        }
        lf.graph = std::make_shared<const SparsePattern>(std::move(g));
    } else if (!cfg.ordering.empty()) {
        throw error(errc::invalid_argument, "--ordering needs --graph");
    }

    if (!cfg.rhs.empty()) {
        lf.rhs = read_dense(cfg.rhs);
        if (lf.rhs.rows() != n || lf.rhs.cols() < 1)
            throw error(errc::dimension_mismatch, "right-hand side does not match the front");
    } else {
        lf.rhs = random_matrix(n, 1, cfg.seed);
    }
    spdlog::info("loaded front n={} graph={} rhs columns={}", n, lf.graph ? "yes" : "no", lf.rhs.cols());
    return lf;
}

inline CompressionConfig compression(const RunConfig& cfg)
{
    CompressionConfig c;
    c.method = cfg.method;
    c.tol = cfg.tol;
    c.depth = cfg.depth;
    c.validate();
    return c;
}

inline json config_echo(const RunConfig& cfg)
{
    json c;
    c["command"] = to_string(cfg.cmd);
    if (cfg.cmd == command::gen) {
        if (!cfg.grid.empty()) {
            c["grid"] = cfg.grid;
            c["stencil"] = cfg.stencil_name;
            c["sep_axis"] = cfg.sep_axis;
            c["sep_plane"] = cfg.sep_plane ? json(*cfg.sep_plane) : json(nullptr);
        } else {
            c["kernel"] = cfg.kernel;
            c["n"] = cfg.n;
            c["shift"] = cfg.shift;
        }
        c["prefix"] = cfg.prefix;
        c["seed"] = cfg.seed;
        return c;
    }
    c["inputs"] = {{"front", cfg.front}, {"graph", cfg.graph}, {"ordering", cfg.ordering}, {"rhs", cfg.rhs}};
    c["scheme"] = to_string(cfg.method);
    c["tol"] = cfg.tol;
    c["depth"] = cfg.depth;
    c["leaf_size"] = cfg.leaf_size;
    c["threads"] = cfg.threads;
    c["seed"] = cfg.seed;
    if (cfg.cmd == command::gmres) {
        c["gmres_tol"] = cfg.gmres_tol;
        c["gmres_maxit"] = cfg.gmres_maxit;
        c["baseline"] = cfg.baseline;
    }
    if (cfg.cmd == command::study_rank || cfg.cmd == command::study_pivots)
        c["block"] = cfg.block;
    if (cfg.cmd == command::study_rank) {
        c["tols"] = cfg.tols;
        c["depths"] = cfg.depths;
    }
    return c;
}

inline json levels_json(const SolveReport& rep)
{
    json a = json::array();
    for (const auto& lv : rep.levels)
        a.push_back({{"level", lv.level}, {"max_rank", lv.max_rank}, {"mean_rank", lv.mean_rank}, {"blocks", lv.blocks}});
    return a;
}

inline json level_timings_json(const SolveReport& rep)
{
    json a = json::array();
    for (const auto& lv : rep.levels)
        a.push_back({{"level", lv.level}, {"lowrank", lv.lowrank_seconds}, {"factor", lv.factor_seconds}});
    return a;
}

inline json tree_json(const HodlrTree& tree)
{
    index_t leaves = 0;
    for (const auto& node : tree.nodes())
        leaves += node.is_leaf() ? 1 : 0;
    return {{"depth", tree.depth()}, {"leaves", leaves}, {"leaf_size", tree.leaf_threshold()}};
}

// Finite-only numbers in reports: non-finite values become null.
inline json number(double v)
{
    return std::isfinite(v) ? json(v) : json(nullptr);
}

inline json gmres_json(const GmresResult& r)
{
    json h = json::array();
    for (double v : r.residual_history)
        h.push_back(number(v));
    return {{"converged", r.converged},
            {"iterations", r.iterations},
            {"breakdown", r.breakdown},
            {"true_residual", number(r.true_residual)},
            {"residual_history", h}};
}

struct FactorRun {
    HodlrTree tree;
    Factorized fact;
    double seconds = 0.0;
};

inline FactorRun run_factorize(const LoadedFront& lf, const RunConfig& cfg)
{
    if (cfg.leaf_size < 1)
        throw error(errc::invalid_argument, "--leaf-size must be at least 1");
    const auto ccfg = compression(cfg);
    FactorRun fr;
    fr.tree = build_tree(lf.front.rows(), cfg.leaf_size);
    FactorizeOptions opts;
    opts.threads = std::max(cfg.threads, 1u);
    const auto t0 = clock::now();
    fr.fact = factorize(lf.accessor(), fr.tree, ccfg, opts);
    fr.seconds = since(t0);
    for (const auto& lv : fr.fact.report.levels)
        spdlog::debug("level {}: max rank {}, mean rank {:.2f}", lv.level, lv.max_rank, lv.mean_rank);
    spdlog::info("factorized n={} with {} in {:.3f}s", lf.front.rows(), to_string(cfg.method), fr.seconds);
    return fr;
}

inline json factor_timings(const FactorRun& fr)
{
    const auto& t = fr.fact.report.timings;
    return {{"lowrank", t.lowrank},
            {"leaf_lu", t.leaf_lu},
            {"schur", t.schur},
            {"factorize_total", fr.seconds},
            {"levels", level_timings_json(fr.fact.report)}};
}

// Resolve --block against the HODLR tree of the front.
struct ChosenBlock {
    BlockRef ref;
    index_t r0 = 0, nr = 0, c0 = 0, nc = 0;
};

inline ChosenBlock choose_block(const RunConfig& cfg, index_t n)
{
    const BlockRef ref = parse_block(cfg.block);
    if (cfg.leaf_size < 1)
        throw error(errc::invalid_argument, "--leaf-size must be at least 1");
    const HodlrTree tree = build_tree(n, cfg.leaf_size);
    const auto ids = tree.level_nodes(ref.level);
    if (ref.index >= ids.size())
        throw error(errc::block_out_of_range, "no node " + std::to_string(ref.index) + " at level " +
                                                  std::to_string(ref.level) + " (tree depth " +
                                                  std::to_string(tree.depth()) + ")");
    const HodlrNode& node = tree.node(ids[ref.index]);
    if (node.is_leaf())
        throw error(errc::block_out_of_range, "node " + std::to_string(ref.index) + " at level " +
                                                  std::to_string(ref.level) + " is a leaf; it has no off-diagonal block");
    const HodlrNode& a = tree.node(node.first);
    const HodlrNode& b = tree.node(node.second);
    ChosenBlock cb{ref, a.lo, a.size(), b.lo, b.size()};
    if (!ref.upper)
        cb = {ref, b.lo, b.size(), a.lo, a.size()};
    return cb;
}

inline json block_json(const ChosenBlock& cb)
{
    return {{"level", cb.ref.level},
            {"index", cb.ref.index},
            {"side", cb.ref.upper ? "upper" : "lower"},
            {"row_offset", cb.r0},
            {"rows", cb.nr},
            {"col_offset", cb.c0},
            {"cols", cb.nc}};
}

inline json base_report(const RunConfig& cfg)
{
    json r;
    r["schema_version"] = schema_version;
    r["command"] = to_string(cfg.cmd);
    r["config"] = config_echo(cfg);
    return r;
}

} // namespace detail

inline Outcome cmd_gen(const RunConfig& cfg)
{
    using namespace detail;
    const auto t0 = clock::now();
    if (cfg.grid.empty() == cfg.kernel.empty())
        throw error(errc::invalid_argument, "gen needs exactly one of --grid or --kernel");
    if (cfg.prefix.empty())
        throw error(errc::invalid_argument, "--prefix must not be empty");

    Outcome out;
    out.report = base_report(cfg);
    json result;
    json files = json::array();
    auto emit = [&](const std::string& suffix) {
        files.push_back(cfg.prefix + suffix);
        return cfg.prefix + suffix;
    };

    if (!cfg.grid.empty()) {
        GridSpec spec{parse_grid(cfg.grid), parse_stencil(cfg.stencil_name)};
        const index_t axis = parse_axis(cfg.sep_axis);
        if (axis >= spec.dims.size())
            throw error(errc::invalid_plane, "axis " + cfg.sep_axis + " does not exist on a " +
                                                 std::to_string(spec.dims.size()) + "D grid");
        const index_t plane = cfg.sep_plane ? *cfg.sep_plane : spec.dims[axis] / 2;
        const SparsePattern op = grid_operator(spec);
        const SeparatorSplit split = planar_separator(spec, axis, plane);
        const FrontProblem fp = schur_front(op, split.sep, split.left, split.right, elimination_order::left_first,
                                            cfg.seed);
        write_matrix_market_file(emit(".front.mtx"), fp.front);
        write_matrix_market_file(emit(".graph.mtx"), *fp.graph);
        write_matrix_market_file(emit(".op.mtx"), op);
        write_ordering(emit(".order.txt"), fp.ordering);
        write_matrix_market_file(emit(".rhs.mtx"), fp.rhs);
        result["kind"] = "grid";
        result["n"] = fp.front.rows();
        result["operator_size"] = op.size();
        result["left"] = split.left.size();
        result["right"] = split.right.size();
        result["sep_plane"] = plane;
        spdlog::info("generated {} front of size {} from a {}-vertex operator", cfg.grid, fp.front.rows(), op.size());
    } else {
        if (cfg.n < 1)
            throw error(errc::invalid_argument, "--n must be at least 1");
        const DenseMatrix K = kernel_matrix(cfg.n, parse_kernel(cfg.kernel), cfg.shift);
        write_matrix_market_file(emit(".front.mtx"), K);
        write_matrix_market_file(emit(".rhs.mtx"), random_matrix(cfg.n, 1, cfg.seed));
        result["kind"] = "kernel";
        result["n"] = cfg.n;
        spdlog::info("generated {} kernel matrix of size {}", cfg.kernel, cfg.n);
    }
    result["files"] = files;
    out.report["result"] = result;
    out.report["timings"] = {{"total", since(t0)}};
    return out;
}

inline Outcome cmd_factor(const RunConfig& cfg)
{
    using namespace detail;
    const auto t0 = clock::now();
    const LoadedFront lf = load(cfg);
    const FactorRun fr = run_factorize(lf, cfg);

    Outcome out;
    out.report = base_report(cfg);
    out.report["result"] = {{"n", lf.front.rows()},
                            {"tree", tree_json(fr.tree)},
                            {"levels", levels_json(fr.fact.report)}};
    json t = factor_timings(fr);
    t["total"] = since(t0);
    out.report["timings"] = t;
    return out;
}

inline Outcome cmd_solve(const RunConfig& cfg)
{
    using namespace detail;
    const auto t0 = clock::now();
    const LoadedFront lf = load(cfg);
    const FactorRun fr = run_factorize(lf, cfg);

    const auto ts = clock::now();
    const DenseMatrix x = fr.fact.factorization.solve(lf.rhs);
    const double solve_s = since(ts);
    const double residual = relative_residual(lf.accessor(), x, lf.rhs);
    spdlog::info("solve residual {:.3e}", residual);
    if (!cfg.solution.empty())
        write_matrix_market_file(cfg.solution, x);

    Outcome out;
    out.report = base_report(cfg);
    out.report["result"] = {{"n", lf.front.rows()},
                            {"rhs_columns", lf.rhs.cols()},
                            {"tree", tree_json(fr.tree)},
                            {"levels", levels_json(fr.fact.report)},
                            {"residual", number(residual)},
                            {"solution", cfg.solution.empty() ? json(nullptr) : json(cfg.solution)}};
    json t = factor_timings(fr);
    t["solve"] = solve_s;
    t["total"] = since(t0);
    out.report["timings"] = t;
    return out;
}

inline Outcome cmd_gmres(const RunConfig& cfg)
{
    using namespace detail;
    const auto t0 = clock::now();
    const LoadedFront lf = load(cfg);
    if (lf.rhs.cols() != 1)
        throw error(errc::dimension_mismatch, "gmres takes a single right-hand side");
    const FactorRun fr = run_factorize(lf, cfg);
    const auto acc = lf.accessor();
    const LinearOperator A = dense_operator(acc);
    const std::vector<double> b(lf.rhs.data().begin(), lf.rhs.data().end());

    GmresConfig gcfg;
    gcfg.tol = cfg.gmres_tol;
    gcfg.max_iter = cfg.gmres_maxit;
    gcfg.preconditioner = hodlr_preconditioner(fr.fact.factorization);
    auto ti = clock::now();
    const GmresResult h = gmres(A, b, gcfg);
    const double iterate_s = since(ti);
    spdlog::info("hodlr-preconditioned GMRES: {} iterations, converged={}", h.iterations, h.converged);

    json result = {{"n", lf.front.rows()},
                   {"tree", tree_json(fr.tree)},
                   {"levels", levels_json(fr.fact.report)},
                   {"hodlr", gmres_json(h)}};
    json t = factor_timings(fr);
    t["iterate"] = iterate_s;

    if (cfg.baseline) {
        const DiagonalPreconditioner dp(acc);
        if (dp.flagged())
            spdlog::warn("diagonal preconditioner: {} zero diagonal entries replaced by 1", dp.zero_diagonals);
        GmresConfig dcfg = gcfg;
        dcfg.preconditioner = [dp](std::span<const double> x, std::span<double> y) { dp(x, y); };
        ti = clock::now();
        const GmresResult d = gmres(A, b, dcfg);
        t["baseline_iterate"] = since(ti);
        json dj = gmres_json(d);
        dj["zero_diagonals"] = dp.zero_diagonals;
        result["baseline"] = dj;
        spdlog::info("diagonal-preconditioned GMRES: {} iterations, converged={}", d.iterations, d.converged);
    }
    t["total"] = since(t0);

    Outcome out;
    out.report = base_report(cfg);
    out.report["result"] = result;
    out.report["timings"] = t;
    out.exit_code = h.converged ? 0 : 2;
    return out;
}

inline Outcome cmd_study_rank(const RunConfig& cfg)
{
    using namespace detail;
    const auto t0 = clock::now();
    const LoadedFront lf = load(cfg);
    const ChosenBlock cb = choose_block(cfg, lf.front.rows());
    const BlockAccessor block = lf.accessor().sub(cb.r0, cb.nr, cb.c0, cb.nc);
    const DenseMatrix A = block.materialize();
    const double norm = frobenius_norm(A);
    auto rel = [norm](double e) { return norm > 0.0 ? e / norm : 0.0; };

    const auto ts = clock::now();
    const SvdResult s = svd(A);
    const double svd_s = since(ts);
    // tail[k] = ||A - A_k||_F
    const index_t kmax = s.singular_values.size();
    std::vector<double> tail(kmax + 1, 0.0);
    for (index_t k = kmax; k-- > 0;)
        tail[k] = std::hypot(tail[k + 1], s.singular_values[k]);
    json curve = json::array();
    for (index_t k = 0; k <= kmax; ++k)
        curve.push_back({{"rank", k}, {"error", rel(tail[k])}});

    if (!cfg.depths.empty() && cfg.depths.size() != 1 && cfg.depths.size() != cfg.tols.size())
        throw error(errc::invalid_argument, "--depths must have one entry or one per tolerance");
    json points = json::array();
    bool dominated = true;
    const auto tp = clock::now();
    for (index_t k = 0; k < cfg.tols.size(); ++k) {
        for (scheme sch : {scheme::aca, scheme::bdlr}) {
            CompressionConfig c;
            c.method = sch;
            c.tol = cfg.tols[k];
            c.depth = cfg.depths.empty() ? cfg.depth : cfg.depths[cfg.depths.size() == 1 ? 0 : k];
            c.validate();
            json p = {{"scheme", to_string(sch)}, {"tol", c.tol}, {"depth", sch == scheme::bdlr ? json(c.depth) : json(nullptr)}};
            if (sch == scheme::bdlr && !block.graph_view()) {
                p["failure"] = "no graph supplied";
                points.push_back(p);
                continue;
            }
            try {
                const LowRankFactor f = compress(block, c);
                const double err = rel(frobenius_norm(f.rank() ? A - f.dense() : A));
                const double best = rel(tail[std::min(f.rank(), kmax)]);
                p["rank"] = f.rank();
                p["error"] = number(err);
                p["svd_error"] = best;
                p["svd_dominates"] = best <= err + 1e-12;
                dominated = dominated && best <= err + 1e-12;
            } catch (const error& e) {
                p["failure"] = e.what();
            }
            points.push_back(p);
        }
    }

    Outcome out;
    out.report = base_report(cfg);
    out.report["result"] = {{"block", block_json(cb)},
                            {"block_norm", norm},
                            {"svd_curve", curve},
                            {"points", points},
                            {"svd_dominates", dominated}};
    out.report["timings"] = {{"svd", svd_s}, {"schemes", since(tp)}, {"total", since(t0)}};
    return out;
}

inline Outcome cmd_study_pivots(const RunConfig& cfg)
{
    using namespace detail;
    const auto t0 = clock::now();
    const LoadedFront lf = load(cfg);
    if (!lf.graph)
        throw error(errc::invalid_argument, "study-pivots needs --graph for d-indices");
    const ChosenBlock cb = choose_block(cfg, lf.front.rows());
    const BlockAccessor block = lf.accessor().sub(cb.r0, cb.nr, cb.c0, cb.nc);
    const BlockGraphView view = *block.graph_view();
    const DistanceIndex drow = distance_index(view, side::row);
    const DistanceIndex dcol = distance_index(view, side::col);

    const FullPivLU lu(block.materialize());
    const auto& piv = lu.pivot_magnitudes();
    struct Entry {
        index_t step;
        double pivot;
        int rd, cd;
    };
    std::vector<Entry> entries;
    json list = json::array();
    for (index_t k = 0; k < piv.size(); ++k) {
        const index_t rv = view.row_verts[lu.row_perm()[k]];
        const index_t cv = view.col_verts[lu.col_perm()[k]];
        const int rd = drow.reachable(rv) ? drow[rv] : -1;
        const int cd = dcol.reachable(cv) ? dcol[cv] : -1;
        entries.push_back({k, piv[k], rd, cd});
        list.push_back({{"step", k},
                        {"pivot", piv[k]},
                        {"row", lu.row_perm()[k]},
                        {"col", lu.col_perm()[k]},
                        {"row_d", rd},
                        {"col_d", cd}});
    }

    json quartiles = nullptr;
    if (!entries.empty()) {
        std::vector<Entry> sorted = entries;
        std::stable_sort(sorted.begin(), sorted.end(), [](const Entry& a, const Entry& b) { return a.pivot > b.pivot; });
        const index_t q = std::max<index_t>(1, sorted.size() / 4);
        auto summary = [](auto first, auto last) {
            double rs = 0, cs = 0;
            index_t rc = 0, cc = 0;
            for (auto it = first; it != last; ++it) {
                if (it->rd >= 0) {
                    rs += it->rd;
                    ++rc;
                }
                if (it->cd >= 0) {
                    cs += it->cd;
                    ++cc;
                }
            }
            const json mr = rc ? json(rs / double(rc)) : json(nullptr);
            const json mc = cc ? json(cs / double(cc)) : json(nullptr);
            const json md = rc && cc ? json(0.5 * (rs / double(rc) + cs / double(cc))) : json(nullptr);
            return json{{"mean_row_d", mr}, {"mean_col_d", mc}, {"mean_d", md}};
        };
        const json top = summary(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(q));
        const json bottom = summary(sorted.end() - static_cast<std::ptrdiff_t>(q), sorted.end());
        json ordered = nullptr;
        if (!top["mean_d"].is_null() && !bottom["mean_d"].is_null())
            ordered = top["mean_d"].get<double>() <= bottom["mean_d"].get<double>();
        quartiles = {{"count", q}, {"top", top}, {"bottom", bottom}, {"top_nearer_boundary", ordered}};
    }

    Outcome out;
    out.report = base_report(cfg);
    out.report["result"] = {{"block", block_json(cb)}, {"pivots", list}, {"quartiles", quartiles}};
    out.report["timings"] = {{"total", since(t0)}};
    return out;
}

inline Outcome run(const RunConfig& cfg)
{
    switch (cfg.cmd) {
    case command::gen: return cmd_gen(cfg);
    case command::factor: return cmd_factor(cfg);
    case command::solve: return cmd_solve(cfg);
    case command::gmres: return cmd_gmres(cfg);
    case command::study_rank: return cmd_study_rank(cfg);
    case command::study_pivots: return cmd_study_pivots(cfg);
    }
    throw error(errc::invalid_argument, "unknown command");
}

} // namespace hodlrkit::cli
