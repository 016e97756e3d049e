#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "nbodylab/errors.hpp"
#include "nbodylab/forcelaw.hpp"
#include "nbodylab/system.hpp"

namespace nbodylab {

/// Gauge choices for the balance-equation solver. Translation is pinned by
/// barycenter rows, rotation by forcing the chosen body onto the x-axis, and
/// scale by holding the moment of inertia at a target (the seed's by default).
struct GaugeSpec {
    int pinned_body = -1;        // -1: pick the seed body farthest from the origin
    double inertia_target = 0.0;  // <= 0: use the seed's moment of inertia
};

/// A planar configuration whose uniform rotation at rate sqrt(omega2) solves
/// the equations of motion.
template <class Real = double>
struct BasicCentralConfiguration {
    std::vector<Real> q;  // n x 2, barycentric
    Real omega2 = 0;
    Real residual_norm = 0;
    BasicBodies<Real> bodies;  // dim == 2
    BasicForceLaw<Real> law;
};

using CentralConfiguration = BasicCentralConfiguration<double>;

/// Balance residual R_k = sum_{j != k} m_j (q_j - q_k) f(r_jk^2) + omega2 q_k.
/// Zero exactly when rigid rotation of q at rate sqrt(omega2) is a solution.
template <class Real>
std::vector<Real> ce_residual(std::span<const Real> q, Real omega2, const BasicBodies<Real>& bodies,
                              const BasicForceLaw<Real>& law, double collision_eps = kCollisionEps) {
    const int n = bodies.count();
    BasicPhaseState<Real> s;
    s.dim = 2;
    s.q.assign(q.begin(), q.end());
    s.v.assign(q.size(), Real(0));
    std::vector<Real> r = accelerations(s, bodies, law, collision_eps);
    for (int k = 0; k < n; ++k) {
        r[2 * k] += omega2 * q[2 * k];
        r[2 * k + 1] += omega2 * q[2 * k + 1];
    }
    return r;
}

template <class Real>
Real inf_norm(std::span<const Real> x) {
    Real m = 0;
    for (Real xi : x) m = std::max(m, std::abs(xi));
    return m;
}

namespace detail {

/// Residual plus gauge rows: 2n balance equations, then sum m q_x, sum m q_y,
/// the pinned body's y-coordinate, and I(q) - I_target.
template <class Real>
Eigen::Vector<Real, Eigen::Dynamic> augmented_residual(const Eigen::Vector<Real, Eigen::Dynamic>& u,
                                                       const BasicBodies<Real>& bodies,
                                                       const BasicForceLaw<Real>& law, int pinned,
                                                       Real inertia_target) {
    const int n = bodies.count();
    std::span<const Real> q(u.data(), static_cast<std::size_t>(2 * n));
    const Real omega2 = u[2 * n];
    const std::vector<Real> r = ce_residual(q, omega2, bodies, law);
    Eigen::Vector<Real, Eigen::Dynamic> F(2 * n + 4);
    for (int i = 0; i < 2 * n; ++i) F[i] = r[i];
    Real cx = 0, cy = 0, inertia = 0;
    for (int k = 0; k < n; ++k) {
        cx += bodies.masses[k] * u[2 * k];
        cy += bodies.masses[k] * u[2 * k + 1];
        inertia += bodies.masses[k] * (u[2 * k] * u[2 * k] + u[2 * k + 1] * u[2 * k + 1]);
    }
    F[2 * n] = cx;
    F[2 * n + 1] = cy;
    F[2 * n + 2] = u[2 * pinned + 1];
    F[2 * n + 3] = inertia - inertia_target;
    return F;
}

}  // namespace detail

/// Damped Gauss-Newton on (q, omega2) with a central finite-difference
/// Jacobian and the GaugeSpec constraint rows appended. Converged when the
/// augmented residual infinity-norm drops below tol (1e-11 in double; scaled
/// down for wider types).
template <class Real>
BasicCentralConfiguration<Real> solve_ce(std::span<const Real> seed, const BasicBodies<Real>& bodies,
                                         const BasicForceLaw<Real>& law, GaugeSpec gauge = {}) {
    using Vec = Eigen::Vector<Real, Eigen::Dynamic>;
    using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

    bodies.validate();
    if (bodies.dim != 2) throw ValidationError("balance solver is planar; bodies.dim must be 2");
    const int n = bodies.count();
    if (static_cast<int>(seed.size()) != 2 * n) throw ValidationError("seed has wrong shape");

    // Barycentric seed; the gauge rows keep it there.
    BasicPhaseState<Real> s0;
    s0.dim = 2;
    s0.q.assign(seed.begin(), seed.end());
    s0.v.assign(seed.size(), Real(0));
    s0 = reduce_to_barycenter(s0, bodies);

    int pinned = gauge.pinned_body;
    if (pinned < 0) {
        Real best = -1;
        for (int k = 0; k < n; ++k) {
            const Real rr = s0.q[2 * k] * s0.q[2 * k] + s0.q[2 * k + 1] * s0.q[2 * k + 1];
            if (rr > best) {
                best = rr;
                pinned = k;
            }
        }
    }
    if (pinned >= n) throw ValidationError("pinned body index out of range");

    const Real inertia_target = gauge.inertia_target > 0.0 ? static_cast<Real>(gauge.inertia_target)
                                                           : moment_of_inertia(s0, bodies);

    // Rotate the seed so the pinned body starts on the positive x-axis.
    {
        const Real px = s0.q[2 * pinned], py = s0.q[2 * pinned + 1];
        const Real r = std::hypot(px, py);
        if (r > Real(0)) {
            const Real c = px / r, s = py / r;
            for (int k = 0; k < n; ++k) {
                const Real x = s0.q[2 * k], y = s0.q[2 * k + 1];
                s0.q[2 * k] = c * x + s * y;
                s0.q[2 * k + 1] = -s * x + c * y;
            }
        }
    }

    const int dof = 2 * n + 1;
    Vec u(dof);
    for (int i = 0; i < 2 * n; ++i) u[i] = s0.q[i];

    // Least-squares fit of a = -omega2 q as the initial spin guess.
    {
        const std::vector<Real> a = accelerations(s0, bodies, law);
        Real num = 0, den = 0;
        for (int i = 0; i < 2 * n; ++i) {
            num -= a[i] * s0.q[i];
            den += s0.q[i] * s0.q[i];
        }
        u[2 * n] = std::max(num / den, Real(1e-6));
    }

    const Real tol = Real(1e-11);
    const int max_iters = 200;
    Vec F = detail::augmented_residual<Real>(u, bodies, law, pinned, inertia_target);
    Real fnorm = F.template lpNorm<Eigen::Infinity>();

    auto newton_step = [&]() -> bool {
        Mat J(F.size(), dof);
        for (int i = 0; i < dof; ++i) {
            const Real step = Real(1e-7) * (Real(1) + std::abs(u[i]));
            Vec up = u, um = u;
            up[i] += step;
            um[i] -= step;
            J.col(i) = (detail::augmented_residual<Real>(up, bodies, law, pinned, inertia_target) -
                        detail::augmented_residual<Real>(um, bodies, law, pinned, inertia_target)) /
                       (Real(2) * step);
        }
        Eigen::ColPivHouseholderQR<Mat> qr(J);
        qr.setThreshold(Real(1e-10));
        if (qr.rank() < dof) throw SingularJacobian(static_cast<int>(qr.rank()));
        const Vec delta = qr.solve(-F);

        Real lambda = 1;
        for (int halving = 0; halving <= 30; ++halving) {
            const Vec u_try = u + lambda * delta;
            Vec F_try;
            try {
                F_try = detail::augmented_residual<Real>(u_try, bodies, law, pinned, inertia_target);
            } catch (const CollisionApproach&) {
                lambda /= 2;
                continue;
            }
            const Real f_try = F_try.template lpNorm<Eigen::Infinity>();
            if (f_try < fnorm) {
                u = u_try;
                F = F_try;
                fnorm = f_try;
                return true;
            }
            lambda /= 2;
        }
        return false;
    };

    int iter = 0;
    for (; iter < max_iters && fnorm >= tol; ++iter) {
        if (!newton_step()) throw NoConvergence(iter + 1, static_cast<double>(fnorm), "backtracking stalled");
    }
    if (fnorm >= tol) throw NoConvergence(iter, static_cast<double>(fnorm));

    // Polish to stagnation: instability of the emitted equilibrium amplifies
    // any leftover configuration error exponentially along the flow, so drive
    // the residual to the arithmetic floor rather than stopping at tol.
    for (int extra = 0; extra < 8 && fnorm > Real(0); ++extra) {
        if (!newton_step()) break;
    }
    if (!(u[2 * n] > Real(0)))
        throw NoConvergence(iter, static_cast<double>(fnorm), "converged to non-positive omega2");

    BasicCentralConfiguration<Real> cc{.q = std::vector<Real>(u.data(), u.data() + 2 * n),
                                       .omega2 = u[2 * n],
                                       .residual_norm = 0,
                                       .bodies = bodies,
                                       .law = law};
    cc.residual_norm = inf_norm<Real>(ce_residual<Real>(cc.q, cc.omega2, bodies, law));
    return cc;
}

template <class Real>
std::vector<Real> ce_residual(const std::vector<Real>& q, Real omega2, const BasicBodies<Real>& bodies,
                              const BasicForceLaw<Real>& law, double collision_eps = kCollisionEps) {
    return ce_residual(std::span<const Real>(q), omega2, bodies, law, collision_eps);
}

template <class Real>
BasicCentralConfiguration<Real> solve_ce(const std::vector<Real>& seed, const BasicBodies<Real>& bodies,
                                         const BasicForceLaw<Real>& law, GaugeSpec gauge = {}) {
    return solve_ce(std::span<const Real>(seed), bodies, law, gauge);
}

/// Initial condition whose exact flow is rigid rotation: v_k is omega times
/// q_k rotated a quarter turn, so q . v vanishes body by body and dI/dt = 0.
template <class Real>
BasicPhaseState<Real> make_rotating_state(const BasicCentralConfiguration<Real>& cc) {
    if (!(cc.omega2 > Real(0))) throw ValidationError("central configuration must carry positive omega2");
    const Real omega = std::sqrt(cc.omega2);
    const int n = cc.bodies.count();
    BasicPhaseState<Real> s;
    s.t = 0;
    s.dim = 2;
    s.q = cc.q;
    s.v.resize(2 * n);
    for (int k = 0; k < n; ++k) {
        s.v[2 * k] = -omega * cc.q[2 * k + 1];
        s.v[2 * k + 1] = omega * cc.q[2 * k];
    }
    return s;
}

/// Regular n-gon on a circle of the given circumradius.
inline std::vector<double> polygon_positions(int n, double circumradius = 1.0) {
    if (n < 2) throw ValidationError("polygon needs n >= 2");
    std::vector<double> q(2 * n);
    for (int k = 0; k < n; ++k) {
        const double phi = 2.0 * M_PI * k / n;
        q[2 * k] = circumradius * std::cos(phi);
        q[2 * k + 1] = circumradius * std::sin(phi);
    }
    return q;
}

/// Evenly spaced points on the x-axis, centered at the origin.
inline std::vector<double> collinear_positions(int n, double spacing = 1.0) {
    if (n < 2) throw ValidationError("collinear seed needs n >= 2");
    std::vector<double> q(2 * n, 0.0);
    for (int k = 0; k < n; ++k) q[2 * k] = spacing * (k - 0.5 * (n - 1));
    return q;
}

}  // namespace nbodylab
