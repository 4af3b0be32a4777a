// udgp: generate turnpike/beltway instances, solve them with IHT or l1-PGD,
// and run the recovery/timing benchmark grid.
//
// Exit codes: 0 success, 2 usage, 3 I/O, 4 numeric failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "udgp/udgp.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

struct SolverFlags {
    udgp::SolverConfig cfg;
    std::string normalization = "sum";

    void add_to(CLI::App& cmd) {
        cmd.add_option("--gamma", cfg.gamma, "base step in (0,1)")->capture_default_str();
        cmd.add_option("--alpha", cfg.alpha, "backtracking ratio in (0,1)")->capture_default_str();
        cmd.add_option("--delta", cfg.delta, "sufficient-decrease constant")->capture_default_str();
        cmd.add_option("--epsilon", cfg.epsilon, "stop when the step norm is at most this")->capture_default_str();
        cmd.add_option("--max-iters", cfg.max_iters)->capture_default_str();
        cmd.add_option("--max-backtracks", cfg.max_backtracks)->capture_default_str();
        cmd.add_option("--restarts", cfg.restarts, "additional random starts")->capture_default_str();
        cmd.add_option("--target-objective", cfg.target_objective,
                       "stop restarting once a start reaches this objective (negative: never)")
            ->capture_default_str();
        cmd.add_option("--normalization", normalization, "objective prefactor seen by the solver")
            ->check(CLI::IsMember({"sum", "per_lag"}))
            ->capture_default_str();
    }

    udgp::SolverConfig resolve() const {
        udgp::SolverConfig out = cfg;
        out.normalization = udgp::parse_normalization(normalization);
        out.validate();
        return out;
    }
};

int cmd_generate(const std::string& geometry, std::size_t s, std::size_t n, double xi, std::uint64_t seed,
                 const std::string& out) {
    const udgp::Instance inst = udgp::generate_instance(udgp::parse_geometry(geometry), s, n, xi, seed);
    udgp::save_instance(inst, out);
    double mass = 0.0;
    for (double v : inst.y) mass += v;
    std::cout << "geometry=" << geometry << " s=" << s << " n=" << n << " xi=" << xi << " sum_y=" << mass << '\n';
    return 0;
}

int cmd_solve(const std::string& in, const std::string& method_name, std::uint64_t seed, const SolverFlags& flags,
              const std::string& out) {
    const udgp::Method method = udgp::parse_method(method_name);
    udgp::SolverConfig cfg = flags.resolve();
    cfg.seed = seed;
    const udgp::Instance inst = udgp::load_instance(in);
    const auto [res, rep] = udgp::solve_and_score(inst, method, cfg);
    udgp::write_text(out, udgp::solve_record(method, cfg, res, rep).dump(2) + "\n");
    std::cout << "method=" << method_name << " co_p=" << rep.co_p << "/" << inst.s << " f=" << res.final_objective()
              << " iterations=" << res.iterations() << " stop=" << udgp::to_string(res.stop_reason)
              << " time_s=" << res.wall_time_seconds << '\n';
    return 0;
}

std::vector<std::pair<std::size_t, std::size_t>> parse_sizes(const std::vector<std::string>& specs) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (const auto& spec : specs) {
        const auto colon = spec.find(':');
        if (colon == std::string::npos) throw std::invalid_argument("size must be S:N, got " + spec);
        out.emplace_back(std::stoul(spec.substr(0, colon)), std::stoul(spec.substr(colon + 1)));
    }
    return out;
}

struct BenchFlags {
    std::string grid = "paper";
    std::size_t trials = 10;
    std::uint64_t seed = 0;
    std::string out;
    std::string trials_out;
    std::vector<std::string> geometries{"turnpike", "beltway"};
    std::vector<std::string> sizes{"10:1000"};
    std::vector<double> xis{0.0};
    std::vector<std::string> methods{"iht", "l1pgd"};
};

int cmd_bench(const BenchFlags& b, const SolverFlags& flags) {
    const udgp::SolverConfig cfg = flags.resolve();
    std::vector<udgp::BenchCell> cells;
    if (b.grid == "paper") {
        cells = udgp::full_grid();
    } else {
        for (const auto& g : b.geometries)
            for (auto [s, n] : parse_sizes(b.sizes))
                for (double xi : b.xis) cells.push_back({udgp::parse_geometry(g), s, n, xi});
    }
    std::vector<udgp::Method> methods;
    for (const auto& m : b.methods) methods.push_back(udgp::parse_method(m));

    std::vector<udgp::TrialRecord> records;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        auto rows = udgp::run_cell(cells[c], c, b.trials, b.seed, cfg, methods);
        records.insert(records.end(), rows.begin(), rows.end());
        if (b.trials > 0)
            std::cerr << "cell " << c + 1 << "/" << cells.size() << ' ' << udgp::to_string(cells[c].geometry)
                      << " s=" << cells[c].s << " n=" << cells[c].n << " xi=" << cells[c].xi << " done\n";
    }

    std::ostringstream summary;
    udgp::write_config_header(summary, cfg, b.seed, b.trials, b.grid);
    udgp::write_summary_csv(summary, udgp::summarize(records));
    udgp::write_text(b.out, summary.str());

    std::ostringstream trials;
    udgp::write_config_header(trials, cfg, b.seed, b.trials, b.grid);
    udgp::write_trials_csv(trials, records);
    udgp::write_text(b.trials_out.empty() ? b.out + ".trials.csv" : b.trials_out, trials.str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Turnpike and beltway reconstruction by iterative hard thresholding"};
    app.set_version_flag("--version", std::string(udgp::kVersion));
    app.require_subcommand(1);

    std::string geometry = "turnpike";
    std::size_t s = 10, n = 1000;
    double xi = 0.0;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    auto* gen = app.add_subcommand("generate", "sample an instance and write its record");
    gen->add_option("--geometry", geometry)->check(CLI::IsMember({"turnpike", "beltway"}))->capture_default_str();
    gen->add_option("--s", s, "number of points")->capture_default_str();
    gen->add_option("--n", n, "grid size")->capture_default_str();
    gen->add_option("--xi", xi, "distance noise standard deviation")->capture_default_str();
    gen->add_option("--seed", gen_seed)->capture_default_str();
    gen->add_option("--out", gen_out)->required();

    std::string solve_in, solve_out, method = "iht";
    std::uint64_t solve_seed = 0;
    SolverFlags solve_flags;
    auto* solve = app.add_subcommand("solve", "solve an instance record and score the recovery");
    solve->add_option("--in", solve_in)->required();
    solve->add_option("--method", method)->check(CLI::IsMember({"iht", "l1pgd"}))->capture_default_str();
    solve->add_option("--seed", solve_seed)->capture_default_str();
    solve->add_option("--out", solve_out)->required();
    solve_flags.add_to(*solve);

    BenchFlags bench_flags;
    SolverFlags bench_solver;
    auto* bench = app.add_subcommand("bench", "run the recovery/timing grid and write CSV tables");
    bench->add_option("--grid", bench_flags.grid)->check(CLI::IsMember({"paper", "custom"}))->capture_default_str();
    bench->add_option("--trials", bench_flags.trials)->capture_default_str();
    bench->add_option("--seed", bench_flags.seed)->capture_default_str();
    bench->add_option("--out", bench_flags.out)->required();
    bench->add_option("--trials-out", bench_flags.trials_out, "per-trial CSV (default: <out>.trials.csv)");
    bench->add_option("--geometry", bench_flags.geometries, "custom grid geometries")
        ->check(CLI::IsMember({"turnpike", "beltway"}));
    bench->add_option("--sizes", bench_flags.sizes, "custom grid sizes as S:N");
    bench->add_option("--xi", bench_flags.xis, "custom grid noise levels");
    bench->add_option("--methods", bench_flags.methods)->check(CLI::IsMember({"iht", "l1pgd"}));
    bench_solver.add_to(*bench);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*gen) return cmd_generate(geometry, s, n, xi, gen_seed, gen_out);
        if (*solve) return cmd_solve(solve_in, method, solve_seed, solve_flags, solve_out);
        if (*bench) return cmd_bench(bench_flags, bench_solver);
    } catch (const udgp::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const udgp::NumericError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
