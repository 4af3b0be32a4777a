#pragma once

// Quadratic measurement model for 1-D unassigned distance geometry.
//
// A point set on an n-bin grid is encoded as an occupancy vector x. The lag
// operator A_i (never stored) counts pairs of occupied bins separated by i
// bins, so x^T A_i x is the autocorrelation of x at lag i: linear for the
// turnpike problem, circular for the beltway problem.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace udgp {

using Vector = std::vector<double>;

enum class Geometry { Turnpike, Beltway };

/// Prefactor of the least-squares objective: PerLag is (1/m) sum_i r_i^2,
/// Sum is sum_i r_i^2. The solvers default to Sum; see SolverConfig.
enum class Normalization { PerLag, Sum };

inline std::string_view to_string(Normalization z) { return z == Normalization::PerLag ? "per_lag" : "sum"; }

inline Normalization parse_normalization(std::string_view name) {
    if (name == "per_lag") return Normalization::PerLag;
    if (name == "sum") return Normalization::Sum;
    throw std::invalid_argument("unknown normalization: " + std::string(name));
}

inline std::string_view to_string(Geometry g) {
    return g == Geometry::Turnpike ? "turnpike" : "beltway";
}

inline Geometry parse_geometry(std::string_view name) {
    if (name == "turnpike") return Geometry::Turnpike;
    if (name == "beltway") return Geometry::Beltway;
    throw std::invalid_argument("unknown geometry: " + std::string(name));
}

/// Implicit family {A_i}, i = 1..m, of lag (shift) matrices on an n-bin grid.
///
/// Turnpike: (A_i)_{u,v} = 1 iff v - u = i.
/// Beltway:  (A_i)_{u,v} = 1 iff (v - u) mod n = i.
/// Both geometries have m = n - 1 lags. Entry k of a histogram holds lag k + 1.
class LagOperator {
public:
    LagOperator(std::size_t n, Geometry geometry) : n_(n), geometry_(geometry) {
        if (n < 2) throw std::invalid_argument("LagOperator: grid size must be at least 2");
    }

    std::size_t n() const noexcept { return n_; }
    std::size_t m() const noexcept { return n_ - 1; }
    Geometry geometry() const noexcept { return geometry_; }

    /// Lag index (1..m) counted by A_i for the ordered pair (u, v), or 0 when
    /// the pair contributes to no A_i (v <= u on the line, v == u on the circle).
    std::size_t lag(std::size_t u, std::size_t v) const noexcept {
        if (geometry_ == Geometry::Turnpike) return v > u ? v - u : 0;
        return (v + n_ - u) % n_;
    }

    /// Dense entry (A_i)_{u,v}; used by tests on small grids only.
    double entry(std::size_t i, std::size_t u, std::size_t v) const noexcept {
        return (i >= 1 && i <= m() && lag(u, v) == i) ? 1.0 : 0.0;
    }

    double prefactor(Normalization z) const noexcept {
        return z == Normalization::PerLag ? 1.0 / static_cast<double>(m()) : 1.0;
    }

    void check_signal(std::span<const double> x) const {
        if (x.size() != n_)
            throw std::invalid_argument("signal length " + std::to_string(x.size()) +
                                        " does not match grid size " + std::to_string(n_));
    }

    void check_histogram(std::span<const double> y) const {
        if (y.size() != m())
            throw std::invalid_argument("histogram length " + std::to_string(y.size()) +
                                        " does not match lag count " + std::to_string(m()));
    }

private:
    std::size_t n_;
    Geometry geometry_;
};

namespace detail {

inline std::vector<std::size_t> support_of(std::span<const double> x) {
    std::vector<std::size_t> supp;
    for (std::size_t j = 0; j < x.size(); ++j)
        if (x[j] != 0.0) supp.push_back(j);
    return supp;
}

} // namespace detail

/// Reference forward map: y_i = sum_u x_u x_{u+i}, one pass per lag. O(n m).
inline Vector forward_direct(std::span<const double> x, const LagOperator& op) {
    op.check_signal(x);
    const std::size_t n = op.n();
    Vector y(op.m(), 0.0);
    for (std::size_t i = 1; i <= op.m(); ++i) {
        double acc = 0.0;
        if (op.geometry() == Geometry::Turnpike) {
            for (std::size_t u = 0; u + i < n; ++u) acc += x[u] * x[u + i];
        } else {
            for (std::size_t u = 0; u < n; ++u) acc += x[u] * x[(u + i) % n];
        }
        y[i - 1] = acc;
    }
    return y;
}

/// Forward map evaluated over the support of x only. O(nnz^2); this is the
/// path the solvers use, since IHT iterates carry at most s nonzeros.
inline Vector forward(std::span<const double> x, const LagOperator& op) {
    op.check_signal(x);
    const auto supp = detail::support_of(x);
    Vector y(op.m(), 0.0);
    for (std::size_t a = 0; a < supp.size(); ++a) {
        const std::size_t u = supp[a];
        for (std::size_t b = 0; b < supp.size(); ++b) {
            if (a == b) continue;
            const std::size_t v = supp[b];
            const std::size_t i = op.lag(u, v);
            if (i != 0) y[i - 1] += x[u] * x[v];
        }
    }
    return y;
}

/// r = forward(x) - y.
inline Vector residual(std::span<const double> x, std::span<const double> y, const LagOperator& op) {
    op.check_histogram(y);
    Vector r = forward(x, op);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= y[i];
    return r;
}

/// f(x) = (1/m) sum_i (x^T A_i x - y_i)^2, or the plain sum under Normalization::Sum.
inline double objective(std::span<const double> x, std::span<const double> y, const LagOperator& op,
                        Normalization z = Normalization::PerLag) {
    const Vector r = residual(x, y, op);
    double acc = 0.0;
    for (double ri : r) acc += ri * ri;
    return acc * op.prefactor(z);
}

namespace detail {

// grad_u = (2/m) sum_{v != u} x_v (R(v - u) + R(u - v)), where R(d) is the
// residual at the lag of the ordered pair, i.e. the two correlation passes of
// (2/m) sum_i r_i (A_i + A_i^T) x.
inline Vector gradient_from_residual(std::span<const double> x, std::span<const double> r,
                                     const LagOperator& op, Normalization z) {
    const std::size_t n = op.n();
    const auto supp = support_of(x);
    Vector g(n, 0.0);
    for (std::size_t u = 0; u < n; ++u) {
        double acc = 0.0;
        for (std::size_t v : supp) {
            if (v == u) continue;
            const std::size_t fwd = op.lag(u, v);
            const std::size_t bwd = op.lag(v, u);
            double w = 0.0;
            if (fwd != 0) w += r[fwd - 1];
            if (bwd != 0) w += r[bwd - 1];
            acc += x[v] * w;
        }
        g[u] = acc;
    }
    const double scale = 2.0 * op.prefactor(z);
    for (double& gi : g) gi *= scale;
    return g;
}

} // namespace detail

/// Exact gradient of objective().
inline Vector gradient(std::span<const double> x, std::span<const double> y, const LagOperator& op,
                       Normalization z = Normalization::PerLag) {
    const Vector r = residual(x, y, op);
    return detail::gradient_from_residual(x, r, op, z);
}

/// Reference gradient, (2/m) sum_i r_i (A_i + A_i^T) x as lag loops. O(n m).
inline Vector gradient_direct(std::span<const double> x, std::span<const double> y, const LagOperator& op,
                              Normalization z = Normalization::PerLag) {
    op.check_histogram(y);
    Vector r = forward_direct(x, op);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= y[i];
    const std::size_t n = op.n();
    Vector g(n, 0.0);
    for (std::size_t i = 1; i <= op.m(); ++i) {
        const double ri = r[i - 1];
        if (ri == 0.0) continue;
        for (std::size_t u = 0; u < n; ++u) {
            double t = 0.0;
            if (op.geometry() == Geometry::Turnpike) {
                if (u + i < n) t += x[u + i];
                if (u >= i) t += x[u - i];
            } else {
                t += x[(u + i) % n] + x[(u + n - i) % n];
            }
            g[u] += ri * t;
        }
    }
    const double scale = 2.0 * op.prefactor(z);
    for (double& gi : g) gi *= scale;
    return g;
}

/// Objective and gradient from one residual evaluation.
struct ObjectiveAndGradient {
    double value;
    Vector gradient;
};

inline ObjectiveAndGradient objective_and_gradient(std::span<const double> x, std::span<const double> y,
                                                   const LagOperator& op, Normalization z = Normalization::PerLag) {
    const Vector r = residual(x, y, op);
    double acc = 0.0;
    for (double ri : r) acc += ri * ri;
    return {acc * op.prefactor(z), detail::gradient_from_residual(x, r, op, z)};
}

inline double norm2(std::span<const double> v) {
    double acc = 0.0;
    for (double e : v) acc += e * e;
    return std::sqrt(acc);
}

inline double distance2(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

} // namespace udgp
