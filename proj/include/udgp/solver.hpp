#pragma once

// Projected gradient solvers with Armijo backtracking:
//   iht_solve   - hard-thresholding projection onto the sparse box
//   l1pgd_solve - projection onto the capped simplex (baseline)
// plus stationarity diagnostics and seeded multi-start orchestration.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "udgp/instance.hpp"
#include "udgp/model.hpp"
#include "udgp/projections.hpp"
#include "udgp/rng.hpp"

namespace udgp {

class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SolverConfig {
    double gamma = 0.99;     // base step
    double alpha = 0.5;      // backtracking ratio
    double delta = 1e-4;     // sufficient-decrease constant
    double epsilon = 1e-8;   // stop when ||x^{k+1} - x^k|| <= epsilon
    std::size_t max_iters = 5000;
    std::size_t max_backtracks = 60;
    std::size_t restarts = 49;
    std::uint64_t seed = 0;
    // Objective prefactor seen by the solver. Steps are capped at gamma < 1,
    // so under PerLag (1/m) the steps shrink with the grid and hard
    // thresholding cannot swap support bins; Sum keeps steps O(1/L).
    Normalization normalization = Normalization::Sum;
    // multi_start returns the first start whose final objective is at or
    // below this value; negative disables the early exit.
    double target_objective = 1e-10;
    bool record_iterates = false; // keep every iterate in SolveResult::iterates

    void validate() const {
        if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0,1)");
        if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
        if (!(delta > 0.0) || !std::isfinite(delta)) throw std::invalid_argument("delta must be positive");
        if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be nonnegative");
        if (max_backtracks < 1) throw std::invalid_argument("max_backtracks must be positive");
    }

    double step_size(std::size_t t) const { return gamma * std::pow(alpha, static_cast<double>(t)); }
};

enum class StopReason { Converged, MaxIters, BacktrackExhausted };

inline std::string_view to_string(StopReason r) {
    switch (r) {
    case StopReason::Converged: return "converged";
    case StopReason::MaxIters: return "max_iters";
    case StopReason::BacktrackExhausted: return "backtrack_exhausted";
    }
    return "unknown";
}

struct SolveResult {
    Vector x_final;
    Vector objective_trace;            // f(x^0), f(x^1), ..., one entry per iterate
    Vector step_size_trace;            // tau_k per accepted iteration
    std::vector<std::size_t> backtrack_trace; // t_k per accepted iteration
    Vector step_norm_trace;            // ||x^{k+1} - x^k|| per accepted iteration
    std::vector<Vector> iterates;      // only with SolverConfig::record_iterates
    double final_step_norm = 0.0;
    double stationarity_residual = 0.0;
    StopReason stop_reason = StopReason::MaxIters;
    double wall_time_seconds = 0.0;
    std::size_t start_index = 0;       // which multi-start produced this result

    std::size_t iterations() const noexcept { return step_size_trace.size(); }
    double final_objective() const { return objective_trace.empty() ? 0.0 : objective_trace.back(); }
};

/// Hard-thresholding projection onto {x in [0,1]^n : ||x||_0 <= s}.
struct SparseBoxProjection {
    std::size_t s;
    Vector operator()(std::span<const double> z) const { return project_sparse_box(z, s); }
};

/// Projection onto {x in [0,1]^n : sum x = s}.
struct CappedSimplexProjectionOp {
    std::size_t s;
    Vector operator()(std::span<const double> z) const { return project_capped_simplex(z, s); }
};

struct ArmijoStep {
    Vector x_next;
    double f_next;
    double tau;
    std::size_t t;
};

/// Smallest t in {0..max_backtracks} with
///   f(x) - f(x_t) >= (delta/2) ||x - x_t||^2,  x_t = P(x - gamma alpha^t grad).
/// Returns nullopt when no t qualifies.
template <class Projection>
std::optional<ArmijoStep> armijo_step(std::span<const double> x, std::span<const double> grad, double f_x,
                                      const Instance& inst, const SolverConfig& cfg, const Projection& project) {
    const LagOperator op = inst.lag_operator();
    Vector trial(x.size());
    for (std::size_t t = 0; t <= cfg.max_backtracks; ++t) {
        const double tau = cfg.step_size(t);
        for (std::size_t j = 0; j < x.size(); ++j) trial[j] = x[j] - tau * grad[j];
        Vector x_next = project(trial);
        const double f_next = objective(x_next, inst.y, op, cfg.normalization);
        const double moved = distance2(x, x_next);
        if (f_x - f_next >= 0.5 * cfg.delta * moved * moved) return ArmijoStep{std::move(x_next), f_next, tau, t};
    }
    return std::nullopt;
}

inline std::optional<ArmijoStep> armijo_step(std::span<const double> x, std::span<const double> grad, double f_x,
                                             const Instance& inst, const SolverConfig& cfg) {
    return armijo_step(x, grad, f_x, inst, cfg, SparseBoxProjection{inst.s});
}

namespace detail {

inline std::string dump_iterate(std::span<const double> x) {
    std::ostringstream os;
    os.precision(17);
    os << "iterate nonzeros:";
    for (std::size_t j = 0; j < x.size(); ++j)
        if (x[j] != 0.0) os << ' ' << j << '=' << x[j];
    return os.str();
}

inline void check_finite(double f, std::span<const double> x, std::size_t k) {
    if (!std::isfinite(f))
        throw NumericError("non-finite objective at iteration " + std::to_string(k) + "; " + dump_iterate(x));
}

template <class Projection>
double fixed_point_residual(std::span<const double> x, double tau, std::span<const double> grad,
                            const Projection& project) {
    Vector z(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) z[j] = x[j] - tau * grad[j];
    return distance2(x, project(z));
}

/// Armijo projected gradient loop shared by both solvers.
template <class Projection>
SolveResult projected_gradient(const Instance& inst, const SolverConfig& cfg, Vector x, const Projection& project) {
    using Clock = std::chrono::steady_clock;
    const auto started = Clock::now();
    const LagOperator op = inst.lag_operator();

    SolveResult res;
    auto [f, grad] = objective_and_gradient(x, inst.y, op, cfg.normalization);
    check_finite(f, x, 0);
    res.objective_trace.push_back(f);
    if (cfg.record_iterates) res.iterates.push_back(x);
    res.stop_reason = StopReason::MaxIters;

    for (std::size_t k = 0; k < cfg.max_iters; ++k) {
        auto step = armijo_step(x, grad, f, inst, cfg, project);
        if (!step) {
            res.stop_reason = StopReason::BacktrackExhausted;
            break;
        }
        check_finite(step->f_next, step->x_next, k + 1);
        const double moved = distance2(x, step->x_next);
        x = std::move(step->x_next);
        f = step->f_next;
        res.objective_trace.push_back(f);
        res.step_size_trace.push_back(step->tau);
        res.backtrack_trace.push_back(step->t);
        res.step_norm_trace.push_back(moved);
        if (cfg.record_iterates) res.iterates.push_back(x);
        res.final_step_norm = moved;
        if (moved <= cfg.epsilon) {
            res.stop_reason = StopReason::Converged;
            break;
        }
        grad = gradient(x, inst.y, op, cfg.normalization);
    }

    const double tau_last = res.step_size_trace.empty() ? cfg.gamma : res.step_size_trace.back();
    res.stationarity_residual = fixed_point_residual(x, tau_last, gradient(x, inst.y, op, cfg.normalization), project);
    res.x_final = std::move(x);
    res.wall_time_seconds = std::chrono::duration<double>(Clock::now() - started).count();
    return res;
}

inline bool in_sparse_box(std::span<const double> x, std::size_t s) {
    std::size_t nnz = 0;
    for (double v : x) {
        if (!(v >= 0.0 && v <= 1.0)) return false;
        if (v != 0.0) ++nnz;
    }
    return nnz <= s;
}

} // namespace detail

/// Iterative hard thresholding with Armijo line search from a feasible x0.
inline SolveResult iht_solve(const Instance& inst, const SolverConfig& cfg, std::span<const double> x0) {
    cfg.validate();
    inst.lag_operator().check_signal(x0);
    if (!detail::in_sparse_box(x0, inst.s))
        throw std::invalid_argument("iht_solve: x0 must lie in [0,1]^n with at most s nonzeros");
    return detail::projected_gradient(inst, cfg, Vector(x0.begin(), x0.end()), SparseBoxProjection{inst.s});
}

/// Projected gradient on the capped simplex; x0 is projected first if infeasible.
inline SolveResult l1pgd_solve(const Instance& inst, const SolverConfig& cfg, std::span<const double> x0) {
    cfg.validate();
    inst.lag_operator().check_signal(x0);
    const CappedSimplexProjectionOp project{inst.s};
    Vector x(x0.begin(), x0.end());
    double sum = 0.0;
    bool boxed = true;
    for (double v : x) {
        sum += v;
        boxed = boxed && v >= 0.0 && v <= 1.0;
    }
    if (!boxed || std::abs(sum - static_cast<double>(inst.s)) > 1e-10) x = project(x);
    return detail::projected_gradient(inst, cfg, std::move(x), project);
}

/// ||x - P(x - tau grad f(x))||, zero exactly at fixed points of the IHT map.
inline double stationarity_residual(std::span<const double> x, double tau, const Instance& inst,
                                    Normalization z = SolverConfig{}.normalization) {
    if (!(tau > 0.0)) throw std::invalid_argument("stationarity_residual: tau must be positive");
    const Vector g = gradient(x, inst.y, inst.lag_operator(), z);
    return detail::fixed_point_residual(x, tau, g, SparseBoxProjection{inst.s});
}

struct StationarityViolation {
    enum class Kind { InteriorGradient, LowerBound, UpperBound };
    Kind kind;
    std::size_t index;
    double magnitude; // gradient value that breaks the condition
};

struct StationarityReport {
    std::vector<StationarityViolation> violations;
    std::vector<std::size_t> support;
    bool passed() const noexcept { return violations.empty(); }
};

/// Coordinatewise first-order conditions over the super supports of x:
/// grad_p = 0 where 0 < x_p < 1, grad_p <= 0 where x_p = 1, and grad_p >= 0
/// where x_p = 0 and p can belong to a super support (every zero coordinate
/// when x has fewer than s nonzeros, none otherwise).
inline StationarityReport check_l_stationarity(std::span<const double> x, const Instance& inst, double tol = 1e-6,
                                               Normalization z = SolverConfig{}.normalization) {
    const Vector g = gradient(x, inst.y, inst.lag_operator(), z);
    StationarityReport rep;
    for (std::size_t j = 0; j < x.size(); ++j)
        if (x[j] != 0.0) rep.support.push_back(j);
    const bool slack = rep.support.size() < inst.s;

    using Kind = StationarityViolation::Kind;
    for (std::size_t p = 0; p < x.size(); ++p) {
        if (x[p] > 0.0 && x[p] < 1.0) {
            if (std::abs(g[p]) > tol) rep.violations.push_back({Kind::InteriorGradient, p, g[p]});
        } else if (x[p] == 0.0) {
            if (slack && g[p] < -tol) rep.violations.push_back({Kind::LowerBound, p, g[p]});
        } else if (g[p] > tol) {
            rep.violations.push_back({Kind::UpperBound, p, g[p]});
        }
    }
    return rep;
}

/// Start point for multi-start index i: a random s-subset of bins set to 1.
inline Vector random_binary_start(std::size_t n, std::size_t s, std::uint64_t seed, std::size_t start_index) {
    Engine eng = make_engine(seed, {0x5374617274ULL, start_index});
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    // Partial Fisher-Yates: first s entries become a uniform s-subset.
    for (std::size_t i = 0; i < s; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(idx[i], idx[pick(eng)]);
    }
    Vector x(n, 0.0);
    for (std::size_t i = 0; i < s; ++i) x[idx[i]] = 1.0;
    return x;
}

enum class Method { Iht, L1Pgd };

inline std::string_view to_string(Method m) { return m == Method::Iht ? "iht" : "l1pgd"; }

inline Method parse_method(std::string_view name) {
    if (name == "iht") return Method::Iht;
    if (name == "l1pgd") return Method::L1Pgd;
    throw std::invalid_argument("unknown method: " + std::string(name));
}

/// Runs the chosen solver from restarts + 1 seeded starts and keeps the
/// result with the lowest final objective (earliest start on ties). Stops
/// early at the first start that reaches cfg.target_objective.
inline SolveResult multi_start(const Instance& inst, const SolverConfig& cfg, Method method = Method::Iht) {
    cfg.validate();
    std::optional<SolveResult> best;
    std::optional<std::string> first_error;
    const auto started = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i <= cfg.restarts; ++i) {
        const Vector x0 = random_binary_start(inst.n, inst.s, cfg.seed, i);
        try {
            SolveResult r = method == Method::Iht ? iht_solve(inst, cfg, x0) : l1pgd_solve(inst, cfg, x0);
            r.start_index = i;
            if (!best || r.final_objective() < best->final_objective()) best = std::move(r);
            if (best->final_objective() <= cfg.target_objective) break;
        } catch (const NumericError& e) {
            if (!first_error) first_error = e.what();
        }
    }
    if (!best) throw NumericError("all starts failed; first error: " + first_error.value_or("none"));
    best->wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return std::move(*best);
}

} // namespace udgp
