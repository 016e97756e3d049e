#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "nbodylab/errors.hpp"
#include "nbodylab/system.hpp"

namespace nbodylab {

enum class Method { RK4Fixed, AdaptiveEmbedded, Leapfrog };

struct IntegratorConfig {
    Method method = Method::AdaptiveEmbedded;
    double rel_tol = 1e-12;
    double abs_tol = 1e-12;
    double h = 0.0;  // fixed-step size; required for RK4Fixed and Leapfrog
    double t_end = 0.0;
    std::uint64_t max_steps = 2'000'000;
    std::uint64_t sample_every = 1;
    double collision_eps = kCollisionEps;

    void validate() const {
        if (method == Method::AdaptiveEmbedded) {
            if (!(rel_tol >= 1e-14 && rel_tol <= 1e-2)) throw ValidationError("rel_tol outside [1e-14, 1e-2]");
            if (!(abs_tol >= 1e-14 && abs_tol <= 1e-2)) throw ValidationError("abs_tol outside [1e-14, 1e-2]");
        } else if (!(h > 0.0)) {
            throw ValidationError("fixed-step methods need h > 0");
        }
        if (max_steps < 1) throw ValidationError("max_steps must be >= 1");
        if (sample_every < 1) throw ValidationError("sample_every must be >= 1");
        if (!std::isfinite(t_end)) throw ValidationError("t_end must be finite");
    }
};

/// Accepted-step states with the invariant series sampled at the same instants.
/// Samples are taken at accepted steps only, never interpolated.
template <class Real = double>
struct BasicTrajectory {
    std::vector<BasicPhaseState<Real>> states;
    std::vector<BasicInvariantSample<Real>> samples;
    std::uint64_t accepted_steps = 0;

    const BasicInvariantSample<Real>& first_sample() const { return samples.front(); }
    const BasicInvariantSample<Real>& last_sample() const { return samples.back(); }
};

using Trajectory = BasicTrajectory<double>;

namespace detail {

template <class Real>
void rk4_step(BasicPhaseState<Real>& s, const BasicBodies<Real>& bodies, const BasicForceLaw<Real>& law,
              Real h, double eps) {
    const std::size_t m = s.q.size();
    const std::vector<Real> q0 = s.q, v0 = s.v;

    const std::vector<Real> a1 = accelerations(s, bodies, law, eps);
    for (std::size_t i = 0; i < m; ++i) {
        s.q[i] = q0[i] + h / Real(2) * v0[i];
        s.v[i] = v0[i] + h / Real(2) * a1[i];
    }
    const std::vector<Real> k2q = s.v;
    const std::vector<Real> a2 = accelerations(s, bodies, law, eps);
    for (std::size_t i = 0; i < m; ++i) {
        s.q[i] = q0[i] + h / Real(2) * k2q[i];
        s.v[i] = v0[i] + h / Real(2) * a2[i];
    }
    const std::vector<Real> k3q = s.v;
    const std::vector<Real> a3 = accelerations(s, bodies, law, eps);
    for (std::size_t i = 0; i < m; ++i) {
        s.q[i] = q0[i] + h * k3q[i];
        s.v[i] = v0[i] + h * a3[i];
    }
    const std::vector<Real> k4q = s.v;
    const std::vector<Real> a4 = accelerations(s, bodies, law, eps);

    for (std::size_t i = 0; i < m; ++i) {
        s.q[i] = q0[i] + h / Real(6) * (v0[i] + Real(2) * k2q[i] + Real(2) * k3q[i] + k4q[i]);
        s.v[i] = v0[i] + h / Real(6) * (a1[i] + Real(2) * a2[i] + Real(2) * a3[i] + a4[i]);
    }
}

/// Kick-drift-kick: valid because accelerations depend on positions only,
/// which holds for every law of this family.
template <class Real>
void leapfrog_step(BasicPhaseState<Real>& s, const BasicBodies<Real>& bodies, const BasicForceLaw<Real>& law,
                   Real h, double eps, std::vector<Real>& accel_cache, bool& cache_valid) {
    const std::size_t m = s.q.size();
    if (!cache_valid) {
        accel_cache = accelerations(s, bodies, law, eps);
        cache_valid = true;
    }
    for (std::size_t i = 0; i < m; ++i) s.v[i] += h / Real(2) * accel_cache[i];
    for (std::size_t i = 0; i < m; ++i) s.q[i] += h * s.v[i];
    accel_cache = accelerations(s, bodies, law, eps);
    for (std::size_t i = 0; i < m; ++i) s.v[i] += h / Real(2) * accel_cache[i];
}

// Dormand-Prince 5(4) coefficients.
inline constexpr long double dp_a[7][6] = {
    {},
    {1.0L / 5},
    {3.0L / 40, 9.0L / 40},
    {44.0L / 45, -56.0L / 15, 32.0L / 9},
    {19372.0L / 6561, -25360.0L / 2187, 64448.0L / 6561, -212.0L / 729},
    {9017.0L / 3168, -355.0L / 33, 46732.0L / 5247, 49.0L / 176, -5103.0L / 18656},
    {35.0L / 384, 0.0L, 500.0L / 1113, 125.0L / 192, -2187.0L / 6784, 11.0L / 84},
};
// b - bhat: weights of the embedded error estimate.
inline constexpr long double dp_e[7] = {71.0L / 57600,      0.0L,       -71.0L / 16695, 71.0L / 1920,
                                        -17253.0L / 339200, 22.0L / 525, -1.0L / 40};

}  // namespace detail

/// Integrates the equations of motion from state0 (at its own t) to t_end and
/// records the invariant series at sampled accepted steps. sample_every = k
/// keeps the initial state, every k-th accepted step, and the final step.
template <class Real>
BasicTrajectory<Real> integrate(const BasicPhaseState<Real>& state0, const BasicBodies<Real>& bodies,
                                const BasicForceLaw<Real>& law, const IntegratorConfig& cfg) {
    cfg.validate();
    bodies.validate();
    state0.validate(bodies);

    BasicTrajectory<Real> traj;
    auto record = [&](const BasicPhaseState<Real>& s) {
        traj.states.push_back(s);
        traj.samples.push_back(measure_invariants(s, bodies, law, cfg.collision_eps));
        const auto& smp = traj.samples.back();
        if (!std::isfinite(smp.inertia) || !std::isfinite(smp.energy))
            throw NonFiniteState(static_cast<double>(s.t));
    };
    record(state0);
    const Real t_end = static_cast<Real>(cfg.t_end);
    if (t_end <= state0.t) return traj;

    BasicPhaseState<Real> s = state0;
    std::uint64_t accepted = 0;
    auto on_accept = [&](bool final_step) {
        ++accepted;
        if (accepted % cfg.sample_every == 0 || final_step) record(s);
    };

    if (cfg.method == Method::RK4Fixed || cfg.method == Method::Leapfrog) {
        const Real h_cfg = static_cast<Real>(cfg.h);
        const Real t0 = s.t;
        const Real span = t_end - t0;
        // Nominal step times are t0 + i*h, never accumulated sums: otherwise
        // rounding creates a sliver step at the end and the sample grid stops
        // being uniform.
        auto nsteps = static_cast<std::uint64_t>(std::ceil(static_cast<double>(span / h_cfg) * (1.0 - 1e-14)));
        if (nsteps == 0) nsteps = 1;
        std::vector<Real> accel_cache;
        bool cache_valid = false;
        for (std::uint64_t i = 0; i < nsteps; ++i) {
            if (accepted >= cfg.max_steps) throw MaxStepsExceeded(cfg.max_steps);
            const bool final_step = (i + 1 == nsteps);
            const Real h = final_step ? t_end - s.t : h_cfg;
            if (cfg.method == Method::RK4Fixed) {
                detail::rk4_step(s, bodies, law, h, cfg.collision_eps);
            } else {
                detail::leapfrog_step(s, bodies, law, h, cfg.collision_eps, accel_cache, cache_valid);
            }
            s.t = final_step ? t_end : t0 + static_cast<Real>(i + 1) * h_cfg;
            on_accept(final_step);
        }
        traj.accepted_steps = accepted;
        return traj;
    }

    // Adaptive Dormand-Prince 5(4), FSAL, elementary step controller:
    // safety 0.9, growth factor clamped to [0.2, 5].
    const std::size_t m = s.q.size();
    const Real h_min = Real(1e-14) * std::abs(t_end);
    Real h = (t_end - s.t) * Real(1e-3);
    const Real rel_tol = static_cast<Real>(cfg.rel_tol);
    const Real abs_tol = static_cast<Real>(cfg.abs_tol);

    std::vector<Real> kq[7], kv[7];
    for (auto& k : kq) k.resize(m);
    for (auto& k : kv) k.resize(m);
    std::vector<Real> qs(m), vs(m), q_new(m), v_new(m);

    // First-same-as-last pair: kq[0]/kv[0] always hold the derivative at the
    // current state, refreshed from stage 7 on every accepted step.
    kq[0] = s.v;
    kv[0] = accelerations(s, bodies, law, cfg.collision_eps);

    while (s.t < t_end) {
        if (accepted >= cfg.max_steps) throw MaxStepsExceeded(cfg.max_steps);
        bool final_step = false;
        if (s.t + h >= t_end) {
            h = t_end - s.t;
            final_step = true;
        } else if (h < h_min) {
            throw StepUnderflow(static_cast<double>(h));
        }

        BasicPhaseState<Real> stage = s;
        for (int st = 1; st < 7; ++st) {
            for (std::size_t i = 0; i < m; ++i) {
                Real dq = 0, dv = 0;
                for (int p = 0; p < st; ++p) {
                    const Real a = static_cast<Real>(detail::dp_a[st][p]);
                    dq += a * kq[p][i];
                    dv += a * kv[p][i];
                }
                qs[i] = s.q[i] + h * dq;
                vs[i] = s.v[i] + h * dv;
            }
            stage.q = qs;
            stage.v = vs;
            kq[st] = vs;
            kv[st] = accelerations(stage, bodies, law, cfg.collision_eps);
        }
        // Stage 7 was evaluated at the 5th-order solution itself (FSAL).
        q_new = qs;
        v_new = vs;
        Real err_sq = 0;
        for (std::size_t i = 0; i < m; ++i) {
            Real eq = 0, ev = 0;
            for (int p = 0; p < 7; ++p) {
                const Real e = static_cast<Real>(detail::dp_e[p]);
                eq += e * kq[p][i];
                ev += e * kv[p][i];
            }
            const Real sc_q = abs_tol + rel_tol * std::max(std::abs(s.q[i]), std::abs(q_new[i]));
            const Real sc_v = abs_tol + rel_tol * std::max(std::abs(s.v[i]), std::abs(v_new[i]));
            const Real rq = h * eq / sc_q;
            const Real rv = h * ev / sc_v;
            err_sq += rq * rq + rv * rv;
        }
        const Real err = std::sqrt(err_sq / (Real(2) * static_cast<Real>(m)));

        Real factor = (err > Real(0)) ? Real(0.9) * std::pow(err, Real(-0.2)) : Real(5);
        factor = std::clamp(factor, Real(0.2), Real(5));

        if (err <= Real(1)) {
            s.q = q_new;
            s.v = v_new;
            s.t = final_step ? t_end : s.t + h;
            kq[0] = kq[6];
            kv[0] = kv[6];
            on_accept(final_step);
            h *= factor;
        } else {
            h *= std::min(factor, Real(1));
        }
    }
    traj.accepted_steps = accepted;
    return traj;
}

/// Result of an empirical order fit. Not applicable when the method is exact
/// on the given solution and errors sit at the rounding floor.
struct OrderFit {
    bool applicable = false;
    double order = 0.0;
    std::vector<double> errors;
};

/// Integrates with each fixed step in h_list to t_end and fits the slope of
/// log(final-state error) against log h. The reference solution is adaptive at
/// tolerance 1e-13. h_list must be geometric with ratio 2 and >= 4 entries.
inline OrderFit convergence_order(const PhaseState& state0, const Bodies& bodies, const ForceLaw& law,
                                  Method method, std::span<const double> h_list, double t_end) {
    if (h_list.size() < 4) throw ValidationError("need at least 4 step sizes");
    std::vector<double> hs(h_list.begin(), h_list.end());
    std::sort(hs.begin(), hs.end(), std::greater<>());
    for (std::size_t i = 0; i + 1 < hs.size(); ++i) {
        const double ratio = hs[i] / hs[i + 1];
        if (std::abs(ratio - 2.0) > 0.02) throw ValidationError("h_list must be geometric with ratio 2");
    }
    if (method == Method::AdaptiveEmbedded) throw ValidationError("order fit targets fixed-step methods");

    IntegratorConfig ref_cfg;
    ref_cfg.method = Method::AdaptiveEmbedded;
    ref_cfg.rel_tol = ref_cfg.abs_tol = 1e-13;
    ref_cfg.t_end = t_end;
    ref_cfg.sample_every = std::numeric_limits<std::uint64_t>::max();
    const Trajectory ref = integrate(state0, bodies, law, ref_cfg);
    const PhaseState& sref = ref.states.back();

    OrderFit fit;
    for (double h : hs) {
        IntegratorConfig cfg;
        cfg.method = method;
        cfg.h = h;
        cfg.t_end = t_end;
        cfg.sample_every = std::numeric_limits<std::uint64_t>::max();
        const Trajectory t = integrate(state0, bodies, law, cfg);
        const PhaseState& sf = t.states.back();
        double e = 0.0;
        for (std::size_t i = 0; i < sf.q.size(); ++i) {
            e = std::max(e, std::abs(sf.q[i] - sref.q[i]));
            e = std::max(e, std::abs(sf.v[i] - sref.v[i]));
        }
        fit.errors.push_back(e);
    }

    // Errors at or near the reference tolerance carry no order information.
    const double floor = 1e-11;
    double emin = std::numeric_limits<double>::infinity();
    for (double e : fit.errors) emin = std::min(emin, e);
    if (emin <= floor) {
        fit.applicable = false;
        return fit;
    }

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(hs.size());
    for (std::size_t i = 0; i < hs.size(); ++i) {
        const double x = std::log(hs[i]);
        const double y = std::log(fit.errors[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    fit.order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.applicable = true;
    return fit;
}

}  // namespace nbodylab
