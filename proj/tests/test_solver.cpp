#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "udgp/solver.hpp"

using namespace udgp;

namespace {

Vector random_sparse_feasible(std::size_t n, std::size_t s, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vector x = random_binary_start(n, s, seed, 0);
    for (auto& v : x)
        if (v != 0.0) v = 0.2 + 0.8 * unif(rng);
    return x;
}

bool feasible_sparse(std::span<const double> x, std::size_t s) {
    std::size_t nnz = 0;
    for (double v : x) {
        if (v < 0.0 || v > 1.0) return false;
        nnz += v != 0.0;
    }
    return nnz <= s;
}

// Re-checks every accepted step of a run recorded with record_iterates.
void expect_descent_invariants(const SolveResult& r, const Instance& inst, const SolverConfig& cfg) {
    const LagOperator op = inst.lag_operator();
    ASSERT_EQ(r.iterates.size(), r.iterations() + 1);
    double sum_sq = 0.0;
    for (std::size_t k = 0; k < r.iterations(); ++k) {
        const auto& a = r.iterates[k];
        const auto& b = r.iterates[k + 1];
        const double fa = objective(a, inst.y, op, cfg.normalization);
        const double fb = objective(b, inst.y, op, cfg.normalization);
        const double step = distance2(a, b);
        EXPECT_GE(fa - fb, 0.5 * cfg.delta * step * step) << "k=" << k;
        EXPECT_EQ(fa, r.objective_trace[k]);
        EXPECT_LE(r.objective_trace[k + 1], r.objective_trace[k]);
        EXPECT_DOUBLE_EQ(r.step_size_trace[k], cfg.step_size(r.backtrack_trace[k]));
        EXPECT_GT(r.step_size_trace[k], 0.0);
        EXPECT_LE(r.step_size_trace[k], cfg.gamma);
        sum_sq += step * step;
    }
    EXPECT_LE(sum_sq, 2.0 / cfg.delta * r.objective_trace.front() * (1 + 1e-12));
}

} // namespace

TEST(Armijo, MatchesExhaustiveScan) {
    const Instance inst = generate_instance(Geometry::Turnpike, 3, 20, 0.0, 0);
    const LagOperator op = inst.lag_operator();
    SolverConfig cfg;
    cfg.max_backtracks = 40;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const Vector x = random_sparse_feasible(20, 3, seed);
        const auto [f, g] = objective_and_gradient(x, inst.y, op, cfg.normalization);

        std::optional<std::size_t> oracle;
        for (std::size_t t = 0; t <= 40 && !oracle; ++t) {
            Vector z(20);
            const double tau = cfg.gamma * std::pow(cfg.alpha, static_cast<double>(t));
            for (std::size_t j = 0; j < 20; ++j) z[j] = x[j] - tau * g[j];
            const Vector xt = project_sparse_box(z, 3);
            const double d = distance2(x, xt);
            if (f - objective(xt, inst.y, op, cfg.normalization) >= 0.5 * cfg.delta * d * d) oracle = t;
        }
        const auto step = armijo_step(x, g, f, inst, cfg);
        ASSERT_EQ(step.has_value(), oracle.has_value());
        if (step) {
            EXPECT_EQ(step->t, *oracle);
            EXPECT_DOUBLE_EQ(step->tau, cfg.step_size(step->t));
        }
    }
}

TEST(Armijo, FixedPointAcceptedImmediately) {
    const Instance inst = generate_instance(Geometry::Beltway, 4, 30, 0.0, 5);
    const Vector x = inst.true_indicator();
    const auto [f, g] = objective_and_gradient(x, inst.y, inst.lag_operator(), Normalization::Sum);
    const auto step = armijo_step(x, g, f, inst, SolverConfig{});
    ASSERT_TRUE(step);
    EXPECT_EQ(step->t, 0u);
    EXPECT_EQ(step->x_next, x);
}

TEST(Armijo, TinyBaseStepNeedsNoBacktracking) {
    const Instance inst = generate_instance(Geometry::Turnpike, 3, 20, 0.0, 0);
    SolverConfig cfg;
    cfg.gamma = 1e-6;
    const Vector x = random_sparse_feasible(20, 3, 17);
    const auto [f, g] = objective_and_gradient(x, inst.y, inst.lag_operator(), cfg.normalization);
    const auto step = armijo_step(x, g, f, inst, cfg);
    ASSERT_TRUE(step);
    EXPECT_EQ(step->t, 0u);
    const double d = distance2(x, step->x_next);
    EXPECT_GE(f - step->f_next, 0.5 * cfg.delta * d * d);
}

TEST(Iht, GroundTruthIsFixedPoint) {
    const Instance inst = generate_instance(Geometry::Turnpike, 3, 50, 0.0, 1);
    const Vector x0 = inst.true_indicator();
    const SolveResult r = iht_solve(inst, SolverConfig{}, x0);
    EXPECT_EQ(r.stop_reason, StopReason::Converged);
    EXPECT_EQ(r.iterations(), 1u);
    EXPECT_EQ(r.x_final, x0);
    EXPECT_EQ(r.final_objective(), 0.0);
    EXPECT_EQ(r.stationarity_residual, 0.0);
}

TEST(Iht, ZeroIterationBudget) {
    const Instance inst = generate_instance(Geometry::Beltway, 5, 40, 0.0, 2);
    SolverConfig cfg;
    cfg.max_iters = 0;
    const Vector x0 = random_binary_start(40, 5, 3, 0);
    const SolveResult r = iht_solve(inst, cfg, x0);
    EXPECT_EQ(r.stop_reason, StopReason::MaxIters);
    EXPECT_EQ(r.x_final, x0);
    EXPECT_EQ(r.iterations(), 0u);
    ASSERT_EQ(r.objective_trace.size(), 1u);
}

TEST(Iht, RejectsInfeasibleStartAndBadConfig) {
    const Instance inst = generate_instance(Geometry::Turnpike, 3, 20, 0.0, 0);
    Vector x0 = random_binary_start(20, 3, 0, 0);
    x0[(std::find(x0.begin(), x0.end(), 0.0) - x0.begin())] = 0.5; // fourth nonzero
    EXPECT_THROW(iht_solve(inst, SolverConfig{}, x0), std::invalid_argument);
    EXPECT_THROW(iht_solve(inst, SolverConfig{}, Vector(20, 1.5)), std::invalid_argument);
    EXPECT_THROW(iht_solve(inst, SolverConfig{}, Vector(19, 0.0)), std::invalid_argument);
    SolverConfig bad;
    bad.alpha = 1.0;
    EXPECT_THROW(iht_solve(inst, bad, random_binary_start(20, 3, 0, 0)), std::invalid_argument);
}

TEST(Iht, NonFiniteObjectiveRaisesNumericError) {
    Instance inst = generate_instance(Geometry::Turnpike, 3, 20, 0.0, 0);
    inst.y[4] = std::numeric_limits<double>::quiet_NaN();
    try {
        iht_solve(inst, SolverConfig{}, random_binary_start(20, 3, 0, 0));
        FAIL() << "expected NumericError";
    } catch (const NumericError& e) {
        EXPECT_NE(std::string(e.what()).find("iterate nonzeros"), std::string::npos);
    }
}

TEST(Iht, TracesSatisfyDescentInvariants) {
    SolverConfig cfg;
    cfg.record_iterates = true;
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        const Geometry g = seed % 2 ? Geometry::Beltway : Geometry::Turnpike;
        const Instance inst = generate_instance(g, 6, 120, seed % 3 ? 0.0 : 3e-3, seed);
        const SolveResult r = iht_solve(inst, cfg, random_binary_start(120, 6, seed, 1));
        expect_descent_invariants(r, inst, cfg);
        for (const auto& x : r.iterates) ASSERT_TRUE(feasible_sparse(x, 6));
        if (r.stop_reason == StopReason::Converged) {
            EXPECT_LE(r.stationarity_residual, 10 * cfg.epsilon);
            EXPECT_LE(r.final_step_norm, cfg.epsilon);
        }
    }
}

TEST(Stationarity, GroundTruthAndSpuriousZero) {
    const Instance inst = generate_instance(Geometry::Turnpike, 5, 60, 0.0, 4);
    for (double tau : {0.01, 0.5, 0.99}) {
        EXPECT_EQ(stationarity_residual(inst.true_indicator(), tau, inst), 0.0);
        // Gradient vanishes at the origin, so zero is a (spurious) fixed point.
        EXPECT_EQ(stationarity_residual(Vector(60, 0.0), tau, inst), 0.0);
    }
    EXPECT_THROW(stationarity_residual(Vector(60, 0.0), 0.0, inst), std::invalid_argument);
}

TEST(Stationarity, ShrinksAlongIterations) {
    const Instance inst = generate_instance(Geometry::Turnpike, 5, 80, 0.0, 6);
    SolverConfig cfg;
    cfg.record_iterates = true;
    const SolveResult r = iht_solve(inst, cfg, random_sparse_feasible(80, 5, 9));
    ASSERT_EQ(r.stop_reason, StopReason::Converged);
    const double first = stationarity_residual(r.iterates.front(), cfg.gamma, inst);
    EXPECT_GT(first, 0.0);
    EXPECT_LE(r.stationarity_residual, 1e-6);
}

TEST(LStationarity, GroundTruthPasses) {
    const Instance inst = generate_instance(Geometry::Beltway, 6, 90, 0.0, 8);
    EXPECT_TRUE(check_l_stationarity(inst.true_indicator(), inst).passed());
}

TEST(LStationarity, ConvergedRunsPass) {
    SolverConfig cfg;
    std::size_t checked = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Geometry g = seed % 2 ? Geometry::Beltway : Geometry::Turnpike;
        const Instance inst = generate_instance(g, 6, 150, 0.0, seed);
        const SolveResult r = iht_solve(inst, cfg, random_binary_start(150, 6, seed, 0));
        if (r.stop_reason != StopReason::Converged || r.final_step_norm > 1e-8) continue;
        ++checked;
        const auto rep = check_l_stationarity(r.x_final, inst, 1e-5);
        EXPECT_TRUE(rep.passed()) << "seed " << seed << ": " << rep.violations.size() << " violations";
    }
    EXPECT_GT(checked, 10u);
}

TEST(LStationarity, ReportsInteriorGradient) {
    Instance inst = generate_instance(Geometry::Turnpike, 3, 20, 0.0, 0);
    Vector x = inst.true_indicator();
    std::size_t p = 0;
    while (x[p] == 0.0) ++p;
    x[p] = 0.5;
    inst.y = forward(x, inst.lag_operator());
    ASSERT_TRUE(check_l_stationarity(x, inst).passed());
    std::size_t q = 0;
    while (q == p || x[q] == 0.0) ++q;
    const auto lag = inst.lag_operator().lag(std::min(p, q), std::max(p, q));
    inst.y[lag - 1] += 1.0; // residual on a lag that p participates in
    const auto rep = check_l_stationarity(x, inst);
    ASSERT_FALSE(rep.passed());
    bool interior = false;
    for (const auto& v : rep.violations)
        if (v.kind == StationarityViolation::Kind::InteriorGradient && v.index == p) interior = true;
    EXPECT_TRUE(interior);
}

TEST(LStationarity, SlackSupportChecksZeroCoordinates) {
    const Instance inst = generate_instance(Geometry::Turnpike, 4, 30, 0.0, 3);
    Vector x = inst.true_indicator();
    std::size_t p = 0;
    while (x[p] == 0.0) ++p;
    x[p] = 0.0; // drop a point: the missing distances pull zero coordinates up
    const auto rep = check_l_stationarity(x, inst);
    bool lower = false;
    for (const auto& v : rep.violations) lower |= v.kind == StationarityViolation::Kind::LowerBound;
    EXPECT_TRUE(lower);
}

TEST(MultiStart, SingleStartMatchesDirectSolve) {
    const Instance inst = generate_instance(Geometry::Turnpike, 5, 100, 0.0, 12);
    SolverConfig cfg;
    cfg.restarts = 0;
    cfg.seed = 99;
    const SolveResult a = multi_start(inst, cfg);
    const SolveResult b = iht_solve(inst, cfg, random_binary_start(100, 5, 99, 0));
    EXPECT_EQ(a.x_final, b.x_final);
    EXPECT_EQ(a.objective_trace, b.objective_trace);
    EXPECT_EQ(a.start_index, 0u);
}

TEST(MultiStart, DeterministicAndSeedDependent) {
    const Instance inst = generate_instance(Geometry::Beltway, 6, 200, 0.0, 21);
    SolverConfig cfg;
    cfg.restarts = 5;
    cfg.target_objective = -1.0;
    cfg.seed = 1;
    const SolveResult a = multi_start(inst, cfg), a2 = multi_start(inst, cfg);
    EXPECT_EQ(a.x_final, a2.x_final);
    EXPECT_EQ(a.start_index, a2.start_index);
    cfg.seed = 2;
    const SolveResult b = multi_start(inst, cfg);
    for (const auto* r : {&a, &b}) {
        EXPECT_TRUE(feasible_sparse(r->x_final, 6));
        for (std::size_t k = 1; k < r->objective_trace.size(); ++k)
            EXPECT_LE(r->objective_trace[k], r->objective_trace[k - 1]);
    }
}

TEST(MultiStart, KeepsLowestObjective) {
    const Instance inst = generate_instance(Geometry::Turnpike, 8, 300, 0.0, 5);
    SolverConfig cfg;
    cfg.restarts = 7;
    cfg.target_objective = -1.0;
    cfg.seed = 4;
    const SolveResult best = multi_start(inst, cfg);
    for (std::size_t i = 0; i <= cfg.restarts; ++i) {
        const SolveResult r = iht_solve(inst, cfg, random_binary_start(300, 8, 4, i));
        EXPECT_LE(best.final_objective(), r.final_objective());
        if (i < best.start_index) EXPECT_GT(r.final_objective(), best.final_objective());
    }
}

TEST(MultiStart, RecoversTenPointTurnpike) {
    const Instance inst = generate_instance(Geometry::Turnpike, 10, 1000, 0.0, 2024);
    SolverConfig cfg;
    cfg.restarts = 49;
    const SolveResult r = multi_start(inst, cfg);
    EXPECT_LE(r.final_objective(), 1e-10);
    const auto rep = score_recovery(extract_positions(r.x_final, 1000, Geometry::Turnpike), inst);
    EXPECT_EQ(rep.co_p, 10u);
}

TEST(L1Pgd, GroundTruthIsFixedPoint) {
    const Instance inst = generate_instance(Geometry::Turnpike, 4, 40, 0.0, 3);
    const SolveResult r = l1pgd_solve(inst, SolverConfig{}, inst.true_indicator());
    EXPECT_EQ(r.stop_reason, StopReason::Converged);
    EXPECT_NEAR(r.final_objective(), 0.0, 1e-20);
    EXPECT_LE(distance2(r.x_final, inst.true_indicator()), 1e-12);
}

TEST(L1Pgd, IteratesStayOnCappedSimplex) {
    SolverConfig cfg;
    cfg.record_iterates = true;
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const Geometry g = seed % 2 ? Geometry::Beltway : Geometry::Turnpike;
        const Instance inst = generate_instance(g, 5, 80, seed % 3 ? 0.0 : 2e-3, seed);
        const SolveResult r = l1pgd_solve(inst, cfg, random_binary_start(80, 5, seed, 0));
        expect_descent_invariants(r, inst, cfg);
        for (const auto& x : r.iterates) {
            double sum = 0.0;
            for (double v : x) {
                ASSERT_GE(v, 0.0);
                ASSERT_LE(v, 1.0);
                sum += v;
            }
            ASSERT_NEAR(sum, 5.0, 1e-8);
        }
    }
}

TEST(L1Pgd, ProjectsInfeasibleStart) {
    const Instance inst = generate_instance(Geometry::Turnpike, 4, 40, 0.0, 3);
    SolverConfig cfg;
    cfg.max_iters = 0;
    const SolveResult r = l1pgd_solve(inst, cfg, Vector(40, 0.0));
    double sum = 0.0;
    for (double v : r.x_final) sum += v;
    EXPECT_NEAR(sum, 4.0, 1e-10);
}
