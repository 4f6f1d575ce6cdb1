#include <cstdlib>
#include <fstream>
#include <iostream>

#include <spdlog/sinks/stdout_color_sinks.h>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

using namespace hodlrkit;
using hodlrkit::cli::RunConfig;

void setup_logging()
{
    auto logger = spdlog::stderr_color_mt("hodlrkit");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    const char* env = std::getenv("HODLRKIT_LOG");
    const std::string level = env ? env : "error";
    if (level == "debug")
        spdlog::set_level(spdlog::level::debug);
    else if (level == "info")
        spdlog::set_level(spdlog::level::info);
    else
        spdlog::set_level(spdlog::level::err);
    if (level != "debug" && level != "info" && level != "error")
        spdlog::error("HODLRKIT_LOG={} not recognised, using error", level);
}

void add_inputs(CLI::App* sub, RunConfig& cfg)
{
    sub->add_option("--front", cfg.front, "front matrix (Matrix Market)")->required();
    sub->add_option("--graph", cfg.graph, "graph (Matrix Market coordinate)");
    sub->add_option("--ordering", cfg.ordering, "graph vertex of each front row");
    sub->add_option("--rhs", cfg.rhs, "right-hand side (Matrix Market); random from --seed if absent");
    sub->add_option("--seed", cfg.seed, "seed for the random right-hand side");
    sub->add_option("--leaf-size", cfg.leaf_size, "HODLR leaf size")->check(CLI::PositiveNumber);
}

void add_compression(CLI::App* sub, RunConfig& cfg)
{
    sub->add_option_function<std::string>(
           "--scheme", [&cfg](const std::string& s) { cfg.method = parse_scheme(s); }, "svd, aca or bdlr")
        ->check(CLI::IsMember({"svd", "aca", "bdlr"}));
    sub->add_option("--tol", cfg.tol, "compression tolerance")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--depth", cfg.depth, "BDLR depth")->check(CLI::NonNegativeNumber);
    sub->add_option("--threads", cfg.threads, "worker threads")->check(CLI::PositiveNumber);
}

} // namespace

int main(int argc, char** argv)
{
    setup_logging();

    CLI::App app{"HODLR fast direct solver and preconditioner experiments"};
    app.require_subcommand(1);
    RunConfig cfg;
    std::string out;
    app.add_option("--out", out, "write the JSON report here instead of stdout");

    auto* gen = app.add_subcommand("gen", "generate a front or kernel matrix");
    gen->add_option("--grid", cfg.grid, "grid extents, e.g. 9x9 or 6x6x6");
    gen->add_option("--stencil", cfg.stencil_name, "laplacian or vector-laplacian");
    gen->add_option("--sep-axis", cfg.sep_axis, "x, y or z");
    gen->add_option_function<index_t>("--sep-plane", [&cfg](const index_t& p) { cfg.sep_plane = p; },
                                      "separator plane index");
    gen->add_option("--kernel", cfg.kernel, "inv-distance or exp-decay");
    gen->add_option("--n", cfg.n, "kernel matrix size");
    gen->add_option("--shift", cfg.shift, "diagonal shift for kernel matrices");
    gen->add_option("--seed", cfg.seed, "seed for the right-hand side");
    gen->add_option("--prefix", cfg.prefix, "output file prefix");

    auto* factor = app.add_subcommand("factor", "build the HODLR factorization and report ranks");
    auto* solve = app.add_subcommand("solve", "factorize and solve directly");
    solve->add_option("--solution", cfg.solution, "write the solution here (Matrix Market)");
    auto* gm = app.add_subcommand("gmres", "GMRES with the HODLR factorization as preconditioner");
    gm->add_option("--gmres-tol", cfg.gmres_tol, "relative residual target")->check(CLI::PositiveNumber);
    gm->add_option("--gmres-maxit", cfg.gmres_maxit, "iteration cap")->check(CLI::PositiveNumber);
    gm->add_flag("--baseline", cfg.baseline, "also run the diagonal-preconditioner baseline");
    auto* rank = app.add_subcommand("study-rank", "compression error against rank for one off-diagonal block");
    rank->add_option("--tols", cfg.tols, "tolerances to sweep")->delimiter(',');
    rank->add_option("--depths", cfg.depths, "BDLR depth per tolerance (or one for all)")->delimiter(',');
    auto* pivots = app.add_subcommand("study-pivots", "full-pivot LU pivots of one off-diagonal block");

    for (auto* sub : {factor, solve, gm, rank, pivots}) {
        add_inputs(sub, cfg);
        add_compression(sub, cfg);
        sub->add_option("--out", out, "write the JSON report here instead of stdout");
    }
    gen->add_option("--out", out, "write the JSON report here instead of stdout");
    for (auto* sub : {rank, pivots})
        sub->add_option("--block", cfg.block, "level,index[,upper|lower]");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (gen->parsed())
        cfg.cmd = cli::command::gen;
    else if (factor->parsed())
        cfg.cmd = cli::command::factor;
    else if (solve->parsed())
        cfg.cmd = cli::command::solve;
    else if (gm->parsed())
        cfg.cmd = cli::command::gmres;
    else if (rank->parsed())
        cfg.cmd = cli::command::study_rank;
    else
        cfg.cmd = cli::command::study_pivots;

    try {
        const cli::Outcome result = cli::run(cfg);
        const std::string text = result.report.dump(2) + "\n";
        if (out.empty()) {
            std::cout << text;
        } else {
            std::ofstream f(out);
            if (!f || !(f << text))
                throw error(errc::io_error, "cannot write " + out);
        }
        if (result.exit_code == 2)
            spdlog::warn("GMRES did not converge");
        return result.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
