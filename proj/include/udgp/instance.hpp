#pragma once

// Problem instances (sampling, noise, binning) and recovery scoring
// (clustering of a solver iterate, alignment, correct-point count).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "udgp/model.hpp"
#include "udgp/rng.hpp"

namespace udgp {

/// Grid spacing denominator: bin j sits at j/(n-1) on the segment and at j/n
/// on the unit circle.
inline double grid_scale(std::size_t n, Geometry g) noexcept {
    return g == Geometry::Turnpike ? static_cast<double>(n - 1) : static_cast<double>(n);
}

struct Instance {
    Geometry geometry = Geometry::Turnpike;
    std::size_t n = 0;
    std::size_t s = 0;
    Vector y;                     // counts per lag 1..n-1
    Vector true_positions;        // ascending, in [0,1)
    double noise_sigma = 0.0;     // xi
    std::uint64_t seed = 0;

    LagOperator lag_operator() const { return LagOperator(n, geometry); }

    /// Occupancy vector of the grid bins holding the true points.
    Vector true_indicator() const {
        Vector x(n, 0.0);
        const double scale = grid_scale(n, geometry);
        for (double p : true_positions) {
            auto j = static_cast<std::size_t>(std::llround(p * scale));
            x[j % n] = 1.0;
        }
        return x;
    }
};

/// Pair distance on the segment or the unit circle.
inline double point_distance(double a, double b, Geometry g) noexcept {
    const double d = std::abs(a - b);
    if (g == Geometry::Turnpike) return d;
    const double w = std::fmod(d, 1.0);
    return std::min(w, 1.0 - w);
}

/// Histogram of distances binned to the nearest lag (round half up).
///
/// Turnpike: lag = round(d (n-1)) clipped to [1, n-1].
/// Beltway:  lag = round(d n) mod n clipped to >= 1; both the lag and its
///           complement n - lag are incremented, as in circular
///           autocorrelation.
inline Vector bin_distances(std::span<const double> distances, std::size_t n, Geometry g) {
    if (n < 2) throw std::invalid_argument("bin_distances: grid size must be at least 2");
    const double upper = g == Geometry::Turnpike ? 1.0 : 0.5;
    const double scale = grid_scale(n, g);
    Vector y(n - 1, 0.0);
    for (double d : distances) {
        if (!(d >= 0.0 && d <= upper))
            throw std::invalid_argument("distance " + std::to_string(d) + " outside [0, " +
                                        std::to_string(upper) + "]");
        auto lag = static_cast<std::size_t>(std::floor(d * scale + 0.5));
        if (g == Geometry::Turnpike) {
            lag = std::clamp<std::size_t>(lag, 1, n - 1);
            y[lag - 1] += 1.0;
        } else {
            lag %= n;
            lag = std::max<std::size_t>(lag, 1);
            y[lag - 1] += 1.0;
            y[n - lag - 1] += 1.0;
        }
    }
    return y;
}

/// Instance for a known point set: pairwise distances (segment or circle),
/// N(0, xi^2) noise drawn from the stream keyed by seed, nearest-lag binning.
inline Instance instance_from_positions(Geometry g, std::size_t n, std::span<const double> positions, double xi,
                                        std::uint64_t seed) {
    if (!(xi >= 0.0) || !std::isfinite(xi)) throw std::invalid_argument("instance: xi must be >= 0");
    Instance inst;
    inst.geometry = g;
    inst.n = n;
    inst.s = positions.size();
    inst.noise_sigma = xi;
    inst.seed = seed;
    inst.true_positions.assign(positions.begin(), positions.end());
    std::sort(inst.true_positions.begin(), inst.true_positions.end());

    Engine noise = make_engine(seed, {1});
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double upper = g == Geometry::Turnpike ? 1.0 : 0.5;
    const std::size_t s = inst.s;
    Vector dist;
    dist.reserve(s * (s - 1) / 2);
    for (std::size_t a = 0; a < s; ++a) {
        for (std::size_t b = a + 1; b < s; ++b) {
            double d = point_distance(inst.true_positions[a], inst.true_positions[b], g);
            if (xi > 0.0) d += xi * gauss(noise);
            dist.push_back(std::clamp(d, 0.0, upper));
        }
    }
    inst.y = bin_distances(dist, n, g);
    return inst;
}

/// Samples s distinct grid points, forms all pairwise distances, perturbs
/// them with N(0, xi^2) noise and bins them into a histogram.
///
/// Points are drawn uniformly in [0,1) and snapped down to the grid
/// (j/(n-1) or j/n), so that at xi = 0 the histogram equals the forward map
/// of the true occupancy vector exactly.
inline Instance generate_instance(Geometry g, std::size_t s, std::size_t n, double xi, std::uint64_t seed) {
    if (s < 2) throw std::invalid_argument("generate_instance: need at least 2 points");
    if (n < 2 * s)
        throw std::invalid_argument("generate_instance: grid size " + std::to_string(n) +
                                    " is below 2s = " + std::to_string(2 * s));
    if (!(xi >= 0.0) || !std::isfinite(xi)) throw std::invalid_argument("generate_instance: xi must be >= 0");

    Engine points = make_engine(seed, {0});
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    const double scale = grid_scale(n, g);
    const auto slots = static_cast<std::size_t>(scale); // bins 0..slots-1 map into [0,1)
    std::unordered_set<std::size_t> used;
    std::vector<std::size_t> bins;
    while (bins.size() < s) {
        auto j = static_cast<std::size_t>(std::floor(unif(points) * scale));
        j = std::min(j, slots - 1);
        if (used.insert(j).second) bins.push_back(j);
    }
    std::sort(bins.begin(), bins.end());

    Vector positions;
    for (std::size_t j : bins) positions.push_back(static_cast<double>(j) / scale);
    return instance_from_positions(g, n, positions, xi, seed);
}

struct ClusterOptions {
    double entry_floor = 0.05; // entries below are treated as zero
    double min_mass = 0.5;     // clusters lighter than this are dropped
};

/// Groups consecutive occupied bins (wrapping on the circle) and returns the
/// mass-weighted centroid of each sufficiently heavy cluster, ascending.
inline Vector extract_positions(std::span<const double> x, std::size_t n, Geometry g,
                                const ClusterOptions& opt = {}) {
    if (x.size() != n) throw std::invalid_argument("extract_positions: length mismatch");
    const double scale = grid_scale(n, g);
    auto occupied = [&](std::size_t j) { return x[j] >= opt.entry_floor; };

    // On the circle, start scanning just after an empty bin so no cluster is split.
    std::size_t start = 0;
    if (g == Geometry::Beltway) {
        std::size_t k = 0;
        while (k < n && occupied((n - 1 + n - k) % n)) ++k;
        if (k == n) {
            // Every bin occupied: one cluster around the whole circle has no
            // meaningful centroid; report nothing.
            return {};
        }
        start = (n - k) % n; // first bin of a run that follows an empty bin
    }

    Vector out;
    double mass = 0.0;
    double moment = 0.0;
    auto flush = [&] {
        if (mass >= opt.min_mass) {
            double c = moment / mass / scale;
            if (g == Geometry::Beltway) c = std::fmod(c, 1.0);
            out.push_back(c);
        }
        mass = 0.0;
        moment = 0.0;
    };
    for (std::size_t step = 0; step < n; ++step) {
        const std::size_t j = (start + step) % n;
        if (occupied(j)) {
            // Unwrapped index keeps wrapped clusters contiguous.
            const double pos = static_cast<double>(start + step);
            mass += x[j];
            moment += x[j] * pos;
        } else if (mass > 0.0) {
            flush();
        }
    }
    if (mass > 0.0) flush();
    std::sort(out.begin(), out.end());
    return out;
}

enum class AlignmentKind { Identity, Reflected, Shifted, ShiftedReflected };

inline std::string_view to_string(AlignmentKind k) {
    switch (k) {
    case AlignmentKind::Identity: return "identity";
    case AlignmentKind::Reflected: return "reflected";
    case AlignmentKind::Shifted: return "shifted";
    case AlignmentKind::ShiftedReflected: return "shifted_reflected";
    }
    return "unknown";
}

/// Symmetry applied to the estimate before matching: p -> (reflect ? -p : p) + shift
/// (taken mod 1 on the circle).
struct Alignment {
    AlignmentKind kind = AlignmentKind::Identity;
    double shift = 0.0;
    long shift_bins = 0; // rotation in bins (beltway only)
};

struct RecoveryReport {
    Vector estimated_positions;
    std::size_t co_p = 0;
    Alignment alignment;
    double threshold = 0.0;
};

/// Smallest distance between two true points in the instance geometry.
inline double min_gap(std::span<const double> pts, Geometry g) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < pts.size(); ++a)
        for (std::size_t b = a + 1; b < pts.size(); ++b) best = std::min(best, point_distance(pts[a], pts[b], g));
    return best;
}

namespace detail {

/// Greedy matching by increasing pair distance; counts pairs closer than threshold.
inline std::size_t count_matches(std::span<const double> truth, std::span<const double> est, Geometry g,
                                 double threshold) {
    struct Pair {
        double d;
        std::size_t t, e;
    };
    std::vector<Pair> pairs;
    for (std::size_t t = 0; t < truth.size(); ++t)
        for (std::size_t e = 0; e < est.size(); ++e) {
            const double d = point_distance(truth[t], est[e], g);
            if (d < threshold) pairs.push_back({d, t, e});
        }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        return a.d != b.d ? a.d < b.d : (a.t != b.t ? a.t < b.t : a.e < b.e);
    });
    std::vector<bool> t_used(truth.size(), false), e_used(est.size(), false);
    std::size_t count = 0;
    for (const auto& p : pairs) {
        if (t_used[p.t] || e_used[p.e]) continue;
        t_used[p.t] = e_used[p.e] = true;
        ++count;
    }
    return count;
}

inline Vector apply_alignment(std::span<const double> est, bool reflect, double shift, Geometry g) {
    Vector out(est.size());
    for (std::size_t i = 0; i < est.size(); ++i) {
        double p = (reflect ? -est[i] : est[i]) + shift;
        if (g == Geometry::Beltway) {
            p = std::fmod(p, 1.0);
            if (p < 0.0) p += 1.0;
        }
        out[i] = p;
    }
    return out;
}

} // namespace detail

/// Counts true points recovered within half the minimum true gap, maximized
/// over the symmetries that leave the distance histogram unchanged.
///
/// Turnpike: identity, and identity or reflection followed by the translation
/// that aligns centroids. Beltway: all n grid rotations, with and without
/// reflection.
inline RecoveryReport score_recovery(std::span<const double> estimated, const Instance& inst) {
    RecoveryReport rep;
    rep.estimated_positions.assign(estimated.begin(), estimated.end());
    const auto& truth = inst.true_positions;
    rep.threshold = truth.size() >= 2 ? 0.5 * min_gap(truth, inst.geometry) : 0.5;
    if (estimated.empty() || truth.empty()) return rep;

    const Geometry g = inst.geometry;
    std::size_t best = 0;
    Alignment best_align;
    bool have = false;
    auto consider = [&](bool reflect, double shift, long bins) {
        const Vector e = detail::apply_alignment(estimated, reflect, shift, g);
        const std::size_t c = detail::count_matches(truth, e, g, rep.threshold);
        if (!have || c > best) {
            have = true;
            best = c;
            const bool moved = g == Geometry::Beltway ? bins != 0 : std::abs(shift) > 1e-12;
            AlignmentKind kind = reflect ? (g == Geometry::Beltway && moved ? AlignmentKind::ShiftedReflected
                                                                           : AlignmentKind::Reflected)
                                         : (moved ? AlignmentKind::Shifted : AlignmentKind::Identity);
            best_align = {kind, shift, bins};
        }
    };

    if (g == Geometry::Turnpike) {
        const double t_mean = std::accumulate(truth.begin(), truth.end(), 0.0) / static_cast<double>(truth.size());
        for (bool reflect : {false, true}) {
            const Vector base = detail::apply_alignment(estimated, reflect, 0.0, g);
            const double e_mean = std::accumulate(base.begin(), base.end(), 0.0) / static_cast<double>(base.size());
            if (!reflect) consider(false, 0.0, 0);
            consider(reflect, t_mean - e_mean, 0);
            // Centroids are not comparable when the cluster count is off;
            // fall back to translations that pin one estimate onto one truth.
            if (base.size() != truth.size())
                for (double t : truth)
                    for (double e : base) consider(reflect, t - e, 0);
        }
    } else {
        const double scale = grid_scale(inst.n, g);
        for (bool reflect : {false, true})
            for (std::size_t k = 0; k < inst.n; ++k) consider(reflect, static_cast<double>(k) / scale, static_cast<long>(k));
    }
    rep.co_p = best;
    rep.alignment = best_align;
    return rep;
}

} // namespace udgp
