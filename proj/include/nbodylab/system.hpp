#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "nbodylab/errors.hpp"
#include "nbodylab/forcelaw.hpp"

namespace nbodylab {

/// Distances at or below this guard abort force evaluation.
inline constexpr double kCollisionEps = 1e-10;

/// Masses and spatial dimension; positions live in the phase state.
template <class Real = double>
struct BasicBodies {
    int dim = 0;
    std::vector<Real> masses;

    int count() const { return static_cast<int>(masses.size()); }

    Real total_mass() const {
        Real m = 0;
        for (Real mk : masses) m += mk;
        return m;
    }

    template <class Other>
    BasicBodies<Other> cast() const {
        BasicBodies<Other> out;
        out.dim = dim;
        out.masses.assign(masses.begin(), masses.end());
        return out;
    }

    void validate() const {
        if (count() < 2) throw ValidationError("need at least 2 bodies");
        if (dim < 1) throw ValidationError("spatial dimension must be >= 1");
        for (Real m : masses)
            if (!(m > Real(0)) || !std::isfinite(m)) throw ValidationError("masses must be positive and finite");
    }
};

using Bodies = BasicBodies<double>;

/// Positions and velocities of all bodies at one instant, body-major layout.
template <class Real = double>
struct BasicPhaseState {
    Real t = 0;
    int dim = 0;
    std::vector<Real> q;  // n*dim
    std::vector<Real> v;  // n*dim

    int count() const { return dim > 0 ? static_cast<int>(q.size()) / dim : 0; }

    template <class Other>
    BasicPhaseState<Other> cast() const {
        BasicPhaseState<Other> out;
        out.t = static_cast<Other>(t);
        out.dim = dim;
        out.q.assign(q.begin(), q.end());
        out.v.assign(v.begin(), v.end());
        return out;
    }

    void validate(const BasicBodies<Real>& bodies) const {
        if (dim != bodies.dim) throw ValidationError("state dimension does not match bodies");
        const auto expect = static_cast<std::size_t>(bodies.count()) * dim;
        if (q.size() != expect || v.size() != expect) throw ValidationError("state arrays have wrong shape");
        for (Real x : q)
            if (!std::isfinite(x)) throw ValidationError("non-finite position entry");
        for (Real x : v)
            if (!std::isfinite(x)) throw ValidationError("non-finite velocity entry");
        const int n = count();
        for (int j = 0; j < n; ++j)
            for (int k = j + 1; k < n; ++k) {
                Real rr = 0;
                for (int a = 0; a < dim; ++a) {
                    const Real dx = q[k * dim + a] - q[j * dim + a];
                    rr += dx * dx;
                }
                if (!(rr > Real(0)))
                    throw ValidationError("bodies " + std::to_string(j) + " and " + std::to_string(k) +
                                          " coincide");
            }
    }
};

using PhaseState = BasicPhaseState<double>;

template <class Real>
Real squared_separation(const BasicPhaseState<Real>& s, int j, int k) {
    Real rr = 0;
    for (int a = 0; a < s.dim; ++a) {
        const Real dx = s.q[k * s.dim + a] - s.q[j * s.dim + a];
        rr += dx * dx;
    }
    return rr;
}

/// Net force on every body. Each unordered pair is evaluated once and applied
/// with opposite signs, so the two contributions cancel exactly in floating
/// point. Throws CollisionApproach when a separation hits the guard.
template <class Real>
std::vector<Real> net_forces(const BasicPhaseState<Real>& s, const BasicBodies<Real>& bodies,
                             const BasicForceLaw<Real>& law, double collision_eps = kCollisionEps) {
    const int n = s.count();
    const int d = s.dim;
    const Real guard_sq = static_cast<Real>(collision_eps) * static_cast<Real>(collision_eps);
    std::vector<Real> force(static_cast<std::size_t>(n) * d, Real(0));
    for (int j = 0; j < n; ++j) {
        for (int k = j + 1; k < n; ++k) {
            const Real rr = squared_separation(s, j, k);
            if (rr <= guard_sq)
                throw CollisionApproach(j, k, static_cast<double>(std::sqrt(rr)));
            const Real w = bodies.masses[j] * bodies.masses[k] * law.f(rr);
            for (int a = 0; a < d; ++a) {
                // force on k points from k toward j (attraction for f > 0)
                const Real p = w * (s.q[j * d + a] - s.q[k * d + a]);
                force[k * d + a] += p;
                force[j * d + a] -= p;
            }
        }
    }
    return force;
}

/// Right side of the equations of motion: a_k = sum_{j != k} m_j (q_j - q_k) f(|q_j - q_k|^2).
template <class Real>
std::vector<Real> accelerations(const BasicPhaseState<Real>& s, const BasicBodies<Real>& bodies,
                                const BasicForceLaw<Real>& law, double collision_eps = kCollisionEps) {
    std::vector<Real> a = net_forces(s, bodies, law, collision_eps);
    const int n = s.count();
    for (int k = 0; k < n; ++k)
        for (int axis = 0; axis < s.dim; ++axis) a[k * s.dim + axis] /= bodies.masses[k];
    return a;
}

/// I = sum m_k |q_k|^2.
template <class Real>
Real moment_of_inertia(const BasicPhaseState<Real>& s, const BasicBodies<Real>& bodies) {
    Real sum = 0;
    for (int k = 0; k < s.count(); ++k) {
        Real qq = 0;
        for (int a = 0; a < s.dim; ++a) qq += s.q[k * s.dim + a] * s.q[k * s.dim + a];
        sum += bodies.masses[k] * qq;
    }
    return sum;
}

/// dI/dt = 2 sum m_k q_k . v_k.
template <class Real>
Real inertia_rate(const BasicPhaseState<Real>& s, const BasicBodies<Real>& bodies) {
    Real sum = 0;
    for (int k = 0; k < s.count(); ++k) {
        Real qv = 0;
        for (int a = 0; a < s.dim; ++a) qv += s.q[k * s.dim + a] * s.v[k * s.dim + a];
        sum += bodies.masses[k] * qv;
    }
    return Real(2) * sum;
}

template <class Real>
Real kinetic_energy(const BasicPhaseState<Real>& s, const BasicBodies<Real>& bodies) {
    Real sum = 0;
    for (int k = 0; k < s.count(); ++k) {
        Real vv = 0;
        for (int a = 0; a < s.dim; ++a) vv += s.v[k * s.dim + a] * s.v[k * s.dim + a];
        sum += bodies.masses[k] * vv;
    }
    return sum / Real(2);
}

/// (1/4) sum_{j != k} m_j m_k F(|q_j - q_k|^2).
template <class Real>
Real potential_energy(const BasicPhaseState<Real>& s, const BasicBodies<Real>& bodies,
                      const BasicForceLaw<Real>& law, double collision_eps = kCollisionEps) {
    const int n = s.count();
    const Real guard_sq = static_cast<Real>(collision_eps) * static_cast<Real>(collision_eps);
    Real sum = 0;
    for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k) {
            const Real rr = squared_separation(s, j, k);
            if (rr <= guard_sq) throw CollisionApproach(j, k, static_cast<double>(std::sqrt(rr)));
            sum += bodies.masses[j] * bodies.masses[k] * law.antiderivative(rr);
        }
    return sum / Real(2);
}

/// First integral of the motion: E = T + (1/4) sum sum m_j m_k F(r_jk^2).
template <class Real>
Real total_energy(const BasicPhaseState<Real>& s, const BasicBodies<Real>& bodies,
                  const BasicForceLaw<Real>& law, double collision_eps = kCollisionEps) {
    return kinetic_energy(s, bodies) + potential_energy(s, bodies, law, collision_eps);
}

/// sum_{j != k} m_j m_k |q_j - q_k|^2. Equals 2 I M at barycentric states.
template <class Real>
Real c1_sum(const BasicPhaseState<Real>& s, const BasicBodies<Real>& bodies) {
    const int n = s.count();
    Real sum = 0;
    for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k) sum += bodies.masses[j] * bodies.masses[k] * squared_separation(s, j, k);
    return Real(2) * sum;
}

/// sum_{j != k} m_j m_k g(|q_j - q_k|^2). Constant along constant-inertia
/// flows; identically zero for the degenerate inverse-cube family.
template <class Real>
Real c2_sum(const BasicPhaseState<Real>& s, const BasicBodies<Real>& bodies, const BasicForceLaw<Real>& law,
            double collision_eps = kCollisionEps) {
    const int n = s.count();
    const Real guard_sq = static_cast<Real>(collision_eps) * static_cast<Real>(collision_eps);
    Real sum = 0;
    for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k) {
            const Real rr = squared_separation(s, j, k);
            if (rr <= guard_sq) throw CollisionApproach(j, k, static_cast<double>(std::sqrt(rr)));
            sum += bodies.masses[j] * bodies.masses[k] * law.g(rr);
        }
    return Real(2) * sum;
}

/// Analytic second time-derivative of the moment of inertia:
/// d^2I/dt^2 = 2 sum m_k |v_k|^2 - sum_{j != k} m_j m_k r_jk^2 f(r_jk^2).
template <class Real>
Real lagrange_jacobi_rhs(const BasicPhaseState<Real>& s, const BasicBodies<Real>& bodies,
                         const BasicForceLaw<Real>& law, double collision_eps = kCollisionEps) {
    const int n = s.count();
    const Real guard_sq = static_cast<Real>(collision_eps) * static_cast<Real>(collision_eps);
    Real pair_sum = 0;
    for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k) {
            const Real rr = squared_separation(s, j, k);
            if (rr <= guard_sq) throw CollisionApproach(j, k, static_cast<double>(std::sqrt(rr)));
            pair_sum += bodies.masses[j] * bodies.masses[k] * rr * law.f(rr);
        }
    return Real(4) * kinetic_energy(s, bodies) - Real(2) * pair_sum;
}

/// Shifts positions and velocities so that sum m q = 0 and sum m v = 0.
/// Pairwise separations are untouched.
template <class Real>
BasicPhaseState<Real> reduce_to_barycenter(const BasicPhaseState<Real>& s, const BasicBodies<Real>& bodies) {
    const int n = s.count();
    const int d = s.dim;
    const Real M = bodies.total_mass();
    BasicPhaseState<Real> out = s;
    for (int a = 0; a < d; ++a) {
        Real cq = 0, cv = 0;
        for (int k = 0; k < n; ++k) {
            cq += bodies.masses[k] * s.q[k * d + a];
            cv += bodies.masses[k] * s.v[k * d + a];
        }
        cq /= M;
        cv /= M;
        for (int k = 0; k < n; ++k) {
            out.q[k * d + a] -= cq;
            out.v[k * d + a] -= cv;
        }
    }
    return out;
}

struct PairDistance {
    int j;
    int k;
    double r;
};

template <class Real>
std::vector<PairDistance> pairwise_distances(const BasicPhaseState<Real>& s) {
    const int n = s.count();
    std::vector<PairDistance> out;
    out.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k)
            out.push_back({j, k, static_cast<double>(std::sqrt(squared_separation(s, j, k)))});
    return out;
}

/// P = sum m_k v_k.
template <class Real>
std::vector<Real> total_momentum(const BasicPhaseState<Real>& s, const BasicBodies<Real>& bodies) {
    std::vector<Real> p(s.dim, Real(0));
    for (int k = 0; k < s.count(); ++k)
        for (int a = 0; a < s.dim; ++a) p[a] += bodies.masses[k] * s.v[k * s.dim + a];
    return p;
}

/// The d(d-1)/2 independent components of sum m (q v^T - v q^T), listed in
/// lexicographic (a, b) order with a < b. Works in any dimension.
template <class Real>
std::vector<Real> angular_momentum(const BasicPhaseState<Real>& s, const BasicBodies<Real>& bodies) {
    const int d = s.dim;
    std::vector<Real> L(static_cast<std::size_t>(d) * (d - 1) / 2, Real(0));
    for (int k = 0; k < s.count(); ++k) {
        int idx = 0;
        for (int a = 0; a < d; ++a)
            for (int b = a + 1; b < d; ++b, ++idx)
                L[idx] += bodies.masses[k] * (s.q[k * d + a] * s.v[k * d + b] - s.q[k * d + b] * s.v[k * d + a]);
    }
    return L;
}

/// Every monitored quantity at one instant.
template <class Real = double>
struct BasicInvariantSample {
    Real t = 0;
    Real inertia = 0;
    Real energy = 0;
    Real c1 = 0;
    Real c2 = 0;
    Real iddot = 0;
    std::vector<Real> momentum;      // d entries
    std::vector<Real> ang_momentum;  // d(d-1)/2 entries
    Real r_min = 0;
    Real r_max = 0;
};

using InvariantSample = BasicInvariantSample<double>;

template <class Real>
BasicInvariantSample<Real> measure_invariants(const BasicPhaseState<Real>& s, const BasicBodies<Real>& bodies,
                                              const BasicForceLaw<Real>& law,
                                              double collision_eps = kCollisionEps) {
    BasicInvariantSample<Real> sample;
    sample.t = s.t;
    sample.inertia = moment_of_inertia(s, bodies);
    sample.energy = total_energy(s, bodies, law, collision_eps);
    sample.c1 = c1_sum(s, bodies);
    sample.c2 = c2_sum(s, bodies, law, collision_eps);
    sample.iddot = lagrange_jacobi_rhs(s, bodies, law, collision_eps);
    sample.momentum = total_momentum(s, bodies);
    sample.ang_momentum = angular_momentum(s, bodies);
    const int n = s.count();
    Real r_min = std::numeric_limits<Real>::infinity();
    Real r_max = 0;
    for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k) {
            const Real r = std::sqrt(squared_separation(s, j, k));
            r_min = std::min(r_min, r);
            r_max = std::max(r_max, r);
        }
    sample.r_min = r_min;
    sample.r_max = r_max;
    return sample;
}

}  // namespace nbodylab
