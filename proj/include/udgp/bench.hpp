#pragma once

// Benchmark harness: recovery and timing over a grid of (geometry, s, n, xi)
// cells, both methods run on the same instances and start seeds.

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "udgp/instance.hpp"
#include "udgp/io.hpp"
#include "udgp/rng.hpp"
#include "udgp/solver.hpp"

namespace udgp {

struct BenchCell {
    Geometry geometry;
    std::size_t s;
    std::size_t n;
    double xi;
};

/// geometry x {(10,1e3), (20,2e3), (30,4e3)} x xi in {0, 1e-5, 3e-5, 5e-5, 7e-5}.
inline std::vector<BenchCell> full_grid() {
    std::vector<BenchCell> cells;
    const std::pair<std::size_t, std::size_t> sizes[] = {{10, 1000}, {20, 2000}, {30, 4000}};
    const double xis[] = {0.0, 1e-5, 3e-5, 5e-5, 7e-5};
    for (Geometry g : {Geometry::Turnpike, Geometry::Beltway})
        for (auto [s, n] : sizes)
            for (double xi : xis) cells.push_back({g, s, n, xi});
    return cells;
}

struct TrialRecord {
    BenchCell cell;
    Method method;
    std::size_t trial;
    std::uint64_t instance_seed;
    std::uint64_t solver_seed;
    std::size_t co_p;
    double time_s;
    double f_final;
    std::size_t iterations;
    StopReason stop_reason;
    std::size_t start_index;
};

struct SolveOutcome {
    SolveResult result;
    RecoveryReport report;
};

/// Multi-start solve followed by extraction and scoring.
inline SolveOutcome solve_and_score(const Instance& inst, Method method, const SolverConfig& cfg,
                                    const ClusterOptions& clusters = {}) {
    SolveResult res = multi_start(inst, cfg, method);
    const Vector est = extract_positions(res.x_final, inst.n, inst.geometry, clusters);
    RecoveryReport rep = score_recovery(est, inst);
    return {std::move(res), std::move(rep)};
}

/// Runs `trials` instances of one cell with every method. Instance and start
/// seeds depend only on (master seed, cell index, trial), so both methods see
/// identical problems and results do not depend on execution order.
inline std::vector<TrialRecord> run_cell(const BenchCell& cell, std::size_t cell_index, std::size_t trials,
                                         std::uint64_t master_seed, const SolverConfig& base,
                                         const std::vector<Method>& methods) {
    std::vector<TrialRecord> out;
    for (std::size_t t = 0; t < trials; ++t) {
        const std::uint64_t inst_seed = derive_seed(master_seed, {cell_index, t, 0});
        const std::uint64_t solver_seed = derive_seed(master_seed, {cell_index, t, 1});
        const Instance inst = generate_instance(cell.geometry, cell.s, cell.n, cell.xi, inst_seed);
        for (Method m : methods) {
            SolverConfig cfg = base;
            cfg.seed = solver_seed;
            const auto [res, rep] = solve_and_score(inst, m, cfg);
            out.push_back({cell, m, t, inst_seed, solver_seed, rep.co_p, res.wall_time_seconds, res.final_objective(),
                           res.iterations(), res.stop_reason, res.start_index});
        }
    }
    return out;
}

struct CellSummary {
    BenchCell cell;
    Method method;
    std::size_t trials = 0;
    double mean_co_p = 0.0;
    double mean_time_s = 0.0;
    double median_time_s = 0.0;
    std::optional<double> time_ratio; // iht mean time / l1pgd mean time
};

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

/// Per (cell, method) aggregates, in first-seen order.
inline std::vector<CellSummary> summarize(const std::vector<TrialRecord>& records) {
    using Key = std::tuple<int, std::size_t, std::size_t, double, int>;
    std::vector<Key> order;
    std::map<Key, std::vector<const TrialRecord*>> groups;
    for (const auto& r : records) {
        Key k{static_cast<int>(r.cell.geometry), r.cell.s, r.cell.n, r.cell.xi, static_cast<int>(r.method)};
        if (!groups.count(k)) order.push_back(k);
        groups[k].push_back(&r);
    }
    std::vector<CellSummary> out;
    for (const auto& k : order) {
        const auto& rs = groups[k];
        CellSummary c{rs.front()->cell, rs.front()->method};
        c.trials = rs.size();
        std::vector<double> times;
        for (const auto* r : rs) {
            c.mean_co_p += static_cast<double>(r->co_p);
            c.mean_time_s += r->time_s;
            times.push_back(r->time_s);
        }
        c.mean_co_p /= static_cast<double>(rs.size());
        c.mean_time_s /= static_cast<double>(rs.size());
        c.median_time_s = median(times);
        out.push_back(c);
    }
    for (auto& c : out) {
        const CellSummary* iht = nullptr;
        const CellSummary* l1 = nullptr;
        for (const auto& o : out) {
            if (o.cell.geometry != c.cell.geometry || o.cell.s != c.cell.s || o.cell.n != c.cell.n ||
                o.cell.xi != c.cell.xi)
                continue;
            (o.method == Method::Iht ? iht : l1) = &o;
        }
        if (iht && l1 && l1->mean_time_s > 0.0) c.time_ratio = iht->mean_time_s / l1->mean_time_s;
    }
    return out;
}

inline void write_config_header(std::ostream& os, const SolverConfig& cfg, std::uint64_t master_seed,
                                std::size_t trials, const std::string& grid) {
    os << "# " << kVersion << '\n';
    os << "# grid=" << grid << " trials=" << trials << " seed=" << master_seed << '\n';
    os << "# config=" << config_to_json(cfg).dump() << '\n';
    os << "# time_s is wall time of the multi-start solve call only\n";
}

inline constexpr const char* kSummaryHeader =
    "geometry,s,n,xi,method,mean_co_p,mean_time_s,trials,median_time_s,iht_over_l1pgd_time";
inline constexpr const char* kTrialHeader =
    "geometry,s,n,xi,method,trial,instance_seed,solver_seed,co_p,time_s,f_final,iterations,stop_reason,start_index";

inline void write_summary_csv(std::ostream& os, const std::vector<CellSummary>& rows) {
    os << kSummaryHeader << '\n';
    for (const auto& c : rows) {
        os << to_string(c.cell.geometry) << ',' << c.cell.s << ',' << c.cell.n << ',' << detail::format_real(c.cell.xi)
           << ',' << to_string(c.method) << ',' << c.mean_co_p << ',' << c.mean_time_s << ',' << c.trials << ','
           << c.median_time_s << ',';
        if (c.time_ratio) os << *c.time_ratio;
        os << '\n';
    }
}

inline void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& rows) {
    os << kTrialHeader << '\n';
    for (const auto& r : rows) {
        os << to_string(r.cell.geometry) << ',' << r.cell.s << ',' << r.cell.n << ',' << detail::format_real(r.cell.xi)
           << ',' << to_string(r.method) << ',' << r.trial << ',' << r.instance_seed << ',' << r.solver_seed << ','
           << r.co_p << ',' << r.time_s << ',' << detail::format_real(r.f_final) << ',' << r.iterations << ','
           << to_string(r.stop_reason) << ',' << r.start_index << '\n';
    }
}

} // namespace udgp
