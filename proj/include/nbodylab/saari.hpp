#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "nbodylab/errors.hpp"
#include "nbodylab/forcelaw.hpp"
#include "nbodylab/integrate.hpp"
#include "nbodylab/rng.hpp"
#include "nbodylab/scenario.hpp"
#include "nbodylab/system.hpp"

namespace nbodylab {

enum class Verdict { Rigid, ConstantInertiaRigid, ConstantInertiaNonRigid, VariableInertia };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Rigid: return "Rigid";
        case Verdict::ConstantInertiaRigid: return "ConstantInertiaRigid";
        case Verdict::ConstantInertiaNonRigid: return "ConstantInertiaNonRigid";
        case Verdict::VariableInertia: return "VariableInertia";
    }
    return "VariableInertia";
}

/// Per-trajectory classification of inertia constancy against distance
/// rigidity, with the relative variations that drove the verdict.
struct SaariReport {
    double inertia_rel_variation = 0.0;
    double rigidity_rel_variation = 0.0;
    double c1_rel_variation = 0.0;
    double c2_rel_variation = 0.0;
    Verdict verdict = Verdict::VariableInertia;
    double tol_inertia = 0.0;
    double tol_rigidity = 0.0;
};

namespace detail {

/// (max - min) / |mean| over a series; 0 for a constant series.
template <class Real>
double rel_variation(const std::vector<Real>& xs) {
    if (xs.empty()) return 0.0;
    Real lo = xs[0], hi = xs[0], sum = 0;
    for (Real x : xs) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
        sum += x;
    }
    if (hi == lo) return 0.0;
    const Real mean = std::abs(sum / static_cast<Real>(xs.size()));
    return static_cast<double>((hi - lo) / std::max(mean, std::numeric_limits<Real>::min()));
}

}  // namespace detail

/// Classifies a sampled trajectory. Rigidity is the worst relative variation
/// of any pairwise distance; inertia constancy is the relative variation of I.
template <class Real>
SaariReport analyze(const BasicTrajectory<Real>& traj, double tol_inertia = 1e-6,
                    double tol_rigidity = 1e-3) {
    if (traj.samples.size() < 10) throw TooFewSamples(traj.samples.size());
    if (!(tol_inertia > 0.0 && tol_inertia < 0.1) || !(tol_rigidity > 0.0 && tol_rigidity < 0.1))
        throw ValidationError("analysis tolerances must lie in (0, 0.1)");

    SaariReport rep;
    rep.tol_inertia = tol_inertia;
    rep.tol_rigidity = tol_rigidity;

    const std::size_t m = traj.samples.size();
    std::vector<Real> series(m);
    for (std::size_t i = 0; i < m; ++i) series[i] = traj.samples[i].inertia;
    rep.inertia_rel_variation = detail::rel_variation(series);
    for (std::size_t i = 0; i < m; ++i) series[i] = traj.samples[i].c1;
    rep.c1_rel_variation = detail::rel_variation(series);
    for (std::size_t i = 0; i < m; ++i) series[i] = traj.samples[i].c2;
    rep.c2_rel_variation = detail::rel_variation(series);

    const int n = traj.states.front().count();
    Real worst = 0;
    for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k) {
            Real lo = std::numeric_limits<Real>::infinity(), hi = 0, sum = 0;
            for (const BasicPhaseState<Real>& s : traj.states) {
                const Real r = std::sqrt(squared_separation(s, j, k));
                lo = std::min(lo, r);
                hi = std::max(hi, r);
                sum += r;
            }
            const Real mean = sum / static_cast<Real>(traj.states.size());
            worst = std::max(worst, (hi - lo) / mean);
        }
    rep.rigidity_rel_variation = static_cast<double>(worst);

    const bool constant_inertia = rep.inertia_rel_variation < tol_inertia;
    const bool rigid = rep.rigidity_rel_variation < tol_rigidity;
    if (constant_inertia)
        rep.verdict = rigid ? Verdict::ConstantInertiaRigid : Verdict::ConstantInertiaNonRigid;
    else
        rep.verdict = rigid ? Verdict::Rigid : Verdict::VariableInertia;
    return rep;
}

/// Projects and rescales the velocity seed so that total momentum, dI/dt and
/// the total energy all vanish. For a law with g identically zero the
/// Lagrange-Jacobi identity then pins I to its initial value along the exact
/// flow, with no rigidity implied - the boundary the admissibility condition
/// draws.
template <class Real>
BasicPhaseState<Real> make_constant_inertia_state(std::span<const Real> positions,
                                                  const BasicBodies<Real>& bodies,
                                                  const BasicForceLaw<Real>& law,
                                                  std::span<const Real> velocity_seed) {
    bodies.validate();
    if (classify_admissibility(law).cls != AdmissibilityClass::DegenerateInverseCube)
        throw LawNotDegenerate();

    const int n = bodies.count();
    const int d = bodies.dim;
    if (static_cast<int>(positions.size()) != n * d || static_cast<int>(velocity_seed.size()) != n * d)
        throw ValidationError("positions/velocity seed have wrong shape");

    BasicPhaseState<Real> s;
    s.t = 0;
    s.dim = d;
    s.q.assign(positions.begin(), positions.end());
    s.v.assign(velocity_seed.begin(), velocity_seed.end());
    s = reduce_to_barycenter(s, bodies);

    // Remove the radial component so dI/dt = 2 sum m q.v = 0; this leaves
    // sum m v untouched because the positions are barycentric.
    const Real inertia = moment_of_inertia(s, bodies);
    const Real rate = inertia_rate(s, bodies) / Real(2);
    const Real lambda = rate / inertia;
    for (int k = 0; k < n; ++k)
        for (int a = 0; a < d; ++a) s.v[k * d + a] -= lambda * s.q[k * d + a];

    Real speed_sq = 0;
    for (Real vi : s.v) speed_sq += vi * vi;
    if (speed_sq < Real(1e-24)) throw DegenerateSeed();

    const Real potential = potential_energy(s, bodies, law);
    if (!(potential < Real(0))) throw NonNegativePotential(static_cast<double>(potential));

    // Scale velocities so kinetic energy equals -potential, making E = 0.
    const Real kinetic = kinetic_energy(s, bodies);
    const Real scale = std::sqrt(-potential / kinetic);
    for (Real& vi : s.v) vi *= scale;
    return s;
}

/// Outcome of the constant-inertia counterexample search.
template <class Real = double>
struct BasicCounterexampleSearch {
    BasicPhaseState<Real> initial;
    BasicTrajectory<Real> trajectory;
    SaariReport report;
    int attempts = 0;
};

using CounterexampleSearch = BasicCounterexampleSearch<double>;

/// Draws random velocity seeds until the constructed zero-energy state
/// integrates into a visibly non-rigid trajectory with constant inertia.
/// Seeds whose flow stays rigid (or collides) are discarded and retried.
template <class Real>
BasicCounterexampleSearch<Real> find_constant_inertia_nonrigid(std::span<const Real> positions,
                                                               const BasicBodies<Real>& bodies,
                                                               const BasicForceLaw<Real>& law,
                                                               double t_end = 5.0, int retries = 100,
                                                               std::uint64_t rng_seed = 0,
                                                               double rigidity_goal = 0.05,
                                                               double inertia_tol = 1e-6) {
    Rng rng(rng_seed);
    const int n = bodies.count();
    const int d = bodies.dim;
    std::string last_failure = "no attempt made";
    for (int attempt = 1; attempt <= retries; ++attempt) {
        std::vector<Real> seed(static_cast<std::size_t>(n) * d);
        for (Real& x : seed) x = static_cast<Real>(rng.uniform(-1.0, 1.0));
        try {
            BasicPhaseState<Real> s0 = make_constant_inertia_state<Real>(positions, bodies, law, seed);
            IntegratorConfig cfg;
            cfg.method = Method::AdaptiveEmbedded;
            cfg.rel_tol = cfg.abs_tol = 1e-12;
            cfg.t_end = t_end;
            BasicTrajectory<Real> traj = integrate(s0, bodies, law, cfg);
            const SaariReport rep = analyze(traj, inertia_tol, 1e-3);
            if (rep.inertia_rel_variation < inertia_tol && rep.rigidity_rel_variation > rigidity_goal) {
                return {.initial = std::move(s0),
                        .trajectory = std::move(traj),
                        .report = rep,
                        .attempts = attempt};
            }
            last_failure = "trajectory stayed rigid or inertia drifted";
        } catch (const LawNotDegenerate&) {
            throw;  // retrying cannot fix the law
        } catch (const NonNegativePotential&) {
            throw;  // depends on positions only, retrying cannot fix it
        } catch (const Error& e) {
            last_failure = e.what();
        }
    }
    throw NoConvergence(retries, 0.0, "no constant-inertia non-rigid trajectory found: " + last_failure);
}

template <class Real>
BasicPhaseState<Real> make_constant_inertia_state(const std::vector<Real>& positions,
                                                  const BasicBodies<Real>& bodies,
                                                  const BasicForceLaw<Real>& law,
                                                  const std::vector<Real>& velocity_seed) {
    return make_constant_inertia_state(std::span<const Real>(positions), bodies, law,
                                       std::span<const Real>(velocity_seed));
}

template <class Real>
BasicCounterexampleSearch<Real> find_constant_inertia_nonrigid(const std::vector<Real>& positions,
                                                               const BasicBodies<Real>& bodies,
                                                               const BasicForceLaw<Real>& law,
                                                               double t_end = 5.0, int retries = 100,
                                                               std::uint64_t rng_seed = 0,
                                                               double rigidity_goal = 0.05,
                                                               double inertia_tol = 1e-6) {
    return find_constant_inertia_nonrigid(std::span<const Real>(positions), bodies, law, t_end, retries,
                                          rng_seed, rigidity_goal, inertia_tol);
}

/// A ConstantInertiaNonRigid verdict under an admissible (fixed-sign-g) law
/// would contradict the rigidity theorem; flag it.
inline bool is_anomaly(const SaariReport& rep, AdmissibilityClass cls) {
    return rep.verdict == Verdict::ConstantInertiaNonRigid && is_admissible(cls);
}

struct BatteryEntry {
    std::string name;
    std::optional<SaariReport> report;
    AdmissibilityClass law_class = AdmissibilityClass::Indefinite;
    std::string error;  // empty on success
    bool anomaly = false;
};

struct BatteryResult {
    std::vector<BatteryEntry> entries;
    std::map<std::string, int> verdict_counts;
    int anomalies = 0;
    int failures = 0;
};

/// Runs every scenario and aggregates verdicts. Scenario errors are recorded
/// per entry, never fatal. Scenarios run concurrently; entries keep scenario
/// order, so the result is deterministic.
inline BatteryResult run_battery(const std::vector<Scenario>& scenarios, int workers = 0) {
    BatteryResult result;
    result.entries.resize(scenarios.size());
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    workers = std::min(workers, static_cast<int>(std::max<std::size_t>(scenarios.size(), 1)));

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= scenarios.size()) return;
            const Scenario& sc = scenarios[i];
            BatteryEntry& entry = result.entries[i];
            entry.name = sc.name;
            try {
                entry.law_class = classify_admissibility(sc.law).cls;
                const Trajectory traj = integrate(sc.initial, sc.bodies, sc.law, sc.integrator);
                entry.report = analyze(traj, sc.analysis.tol_inertia, sc.analysis.tol_rigidity);
                entry.anomaly = is_anomaly(*entry.report, entry.law_class);
            } catch (const std::exception& e) {
                entry.error = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    for (const BatteryEntry& entry : result.entries) {
        if (!entry.error.empty()) {
            ++result.failures;
            continue;
        }
        ++result.verdict_counts[to_string(entry.report->verdict)];
        if (entry.anomaly) ++result.anomalies;
    }
    return result;
}

}  // namespace nbodylab
