#pragma once

// Shared builders for tests: canonical states with hand-derived invariants,
// and deterministic random-state generators.

#include <cmath>
#include <vector>

#include "nbodylab/equilibria.hpp"
#include "nbodylab/rng.hpp"
#include "nbodylab/system.hpp"

namespace nbodylab::testing {

/// Unit masses at (-0.5, 0), (0.5, 0) with tangential speeds sqrt(2)/2 under
/// the Newtonian kernel: force balance gives omega^2 = 2, period pi*sqrt(2),
/// I = 0.5, E = -0.5, c1 = 2, c2 = -2.
inline std::pair<Bodies, PhaseState> circular_two_body() {
    Bodies b{.dim = 2, .masses = {1.0, 1.0}};
    PhaseState s;
    s.dim = 2;
    s.q = {-0.5, 0.0, 0.5, 0.0};
    const double omega = std::sqrt(2.0);
    s.v = {0.0, -0.5 * omega, 0.0, 0.5 * omega};
    return {b, s};
}

inline constexpr double kTwoBodyPeriod = 4.442882938158366;  // pi * sqrt(2)

/// Barycentric state with masses in [0.1, 10], positions in a box, and a
/// minimum-separation guard.
inline std::pair<Bodies, PhaseState> random_barycentric_state(std::uint64_t seed, int n, int d) {
    Rng rng(seed);
    Bodies b{.dim = d, .masses = {}};
    for (int k = 0; k < n; ++k) b.masses.push_back(rng.uniform(0.1, 10.0));
    PhaseState s;
    s.dim = d;
    s.q.resize(static_cast<std::size_t>(n) * d);
    s.v.resize(static_cast<std::size_t>(n) * d);
    for (int attempt = 0;; ++attempt) {
        for (auto& x : s.q) x = rng.uniform(-2.0, 2.0);
        double closest = 1e300;
        for (const auto& pd : pairwise_distances(s)) closest = std::min(closest, pd.r);
        if (closest > 0.1 || attempt > 200) break;
    }
    for (auto& x : s.v) x = rng.uniform(-1.0, 1.0);
    return {b, reduce_to_barycenter(s, b)};
}

/// Bounded three-body start: ring positions with tangential-biased speeds.
/// Seeds 1, 12, 13, 14, 15 stay above separation 0.6 through t = 2 under the
/// Newtonian kernel, keeping finite-difference audits away from the steep
/// near-collision regime.
inline std::pair<Bodies, PhaseState> ring_three_body(std::uint64_t seed) {
    Rng rng(seed);
    Bodies b{.dim = 2, .masses = {}};
    for (int k = 0; k < 3; ++k) b.masses.push_back(rng.uniform(0.5, 2.0));
    PhaseState s;
    s.dim = 2;
    s.q.resize(6);
    s.v.resize(6);
    for (int k = 0; k < 3; ++k) {
        const double phi = 2.0 * M_PI * k / 3 + rng.uniform(-0.3, 0.3);
        const double r = rng.uniform(0.8, 1.3);
        s.q[2 * k] = r * std::cos(phi);
        s.q[2 * k + 1] = r * std::sin(phi);
        const double vt = rng.uniform(0.4, 0.7);
        s.v[2 * k] = -vt * std::sin(phi) + rng.uniform(-0.1, 0.1);
        s.v[2 * k + 1] = vt * std::cos(phi) + rng.uniform(-0.1, 0.1);
    }
    return {b, reduce_to_barycenter(s, b)};
}

/// Equilateral triangle of the given side, unit masses unless overridden.
inline std::vector<double> triangle_positions(double side = 1.0) {
    return polygon_positions(3, side / std::sqrt(3.0));
}

}  // namespace nbodylab::testing
