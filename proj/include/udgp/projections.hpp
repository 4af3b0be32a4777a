#pragma once

// Euclidean projections onto the two feasible sets used by the solvers:
//   sparse box     {x in [0,1]^n : ||x||_0 <= s}          (IHT)
//   capped simplex {x in [0,1]^n : sum_j x_j = s}         (l1-PGD baseline)

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "udgp/model.hpp"

namespace udgp {

class InfeasibleSetError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

inline double clamp01(double v) noexcept { return std::clamp(v, 0.0, 1.0); }

/// Decrease in squared distance from keeping coordinate j (clamped to the box)
/// instead of zeroing it: z^2 - (z - clamp(z))^2. Zero for z <= 0 and
/// increasing in z on (0, inf).
inline double clamped_gain(double z) noexcept {
    const double c = clamp01(z);
    return z * z - (z - c) * (z - c);
}

/// Super support of the sparse-box projection of z: the s coordinates with
/// the largest clamped gain, ties to the lowest index. Returned sorted.
inline std::vector<std::size_t> super_support(std::span<const double> z, std::size_t s) {
    if (s < 1 || s > z.size())
        throw std::invalid_argument("sparsity level " + std::to_string(s) + " outside [1, " +
                                    std::to_string(z.size()) + "]");
    std::vector<std::size_t> idx(z.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    auto better = [&](std::size_t a, std::size_t b) {
        const double ga = clamped_gain(z[a]);
        const double gb = clamped_gain(z[b]);
        return ga != gb ? ga > gb : a < b;
    };
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(s), idx.end(), better);
    idx.resize(s);
    std::sort(idx.begin(), idx.end());
    return idx;
}

/// A minimizer of ||x - z|| over [0,1]^n with at most s nonzeros: clamp the
/// super support to the box and zero everything else.
inline Vector project_sparse_box(std::span<const double> z, std::size_t s) {
    Vector x(z.size(), 0.0);
    for (std::size_t j : super_support(z, s)) x[j] = clamp01(z[j]);
    return x;
}

struct CappedSimplexProjection {
    Vector x;
    double shift; // multiplier lambda with x = clamp(z + lambda)
};

/// Projection onto {x in [0,1]^n : sum x = s} with its multiplier.
///
/// x_j = clamp(z_j + lambda) where lambda solves the monotone piecewise-linear
/// equation sum_j clamp(z_j + lambda) = s. Lambda is bracketed by bisection and
/// then solved exactly on the active segment.
inline CappedSimplexProjection project_capped_simplex_with_shift(std::span<const double> z, std::size_t s) {
    const std::size_t n = z.size();
    if (s < 1) throw std::invalid_argument("sparsity level must be positive");
    if (s > n)
        throw InfeasibleSetError("capped simplex is empty: s = " + std::to_string(s) +
                                 " exceeds n = " + std::to_string(n));
    const double target = static_cast<double>(s);
    auto mass = [&](double lambda) {
        double acc = 0.0;
        for (double zj : z) acc += clamp01(zj + lambda);
        return acc;
    };

    const auto [zmin, zmax] = std::minmax_element(z.begin(), z.end());
    double lo = -*zmax; // mass(lo) = 0
    double hi = 1.0 - *zmin; // mass(hi) = n
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        (mass(mid) < target ? lo : hi) = mid;
    }
    double lambda = lo + 0.5 * (hi - lo);

    // Exact solve on the segment that contains lambda.
    double fixed = 0.0;
    double free_sum = 0.0;
    std::size_t n_free = 0;
    for (double zj : z) {
        const double v = zj + lambda;
        if (v >= 1.0) fixed += 1.0;
        else if (v > 0.0) {
            free_sum += zj;
            ++n_free;
        }
    }
    if (n_free > 0) {
        const double exact = (target - fixed - free_sum) / static_cast<double>(n_free);
        if (std::abs(mass(exact) - target) <= std::abs(mass(lambda) - target)) lambda = exact;
    }

    CappedSimplexProjection out{Vector(n), lambda};
    for (std::size_t j = 0; j < n; ++j) out.x[j] = clamp01(z[j] + lambda);
    return out;
}

inline Vector project_capped_simplex(std::span<const double> z, std::size_t s) {
    return project_capped_simplex_with_shift(z, s).x;
}

} // namespace udgp
