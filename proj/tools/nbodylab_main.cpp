// Command-line surface: scenario simulation, balance-equation solving, the
// inertia-vs-rigidity harness, the constancy-constraint probe, and force-law
// classification. Every subcommand prints a single JSON document to stdout.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "nbodylab/nbodylab.hpp"

namespace fs = std::filesystem;
using namespace nbodylab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitIntegration = 3;
constexpr int kExitAnomaly = 4;

/// "newtonian", "invcube", or "power:alpha[:C]".
ForceLaw parse_law_string(const std::string& spec) {
    if (spec == "newtonian") return ForceLaw::newtonian();
    if (spec == "invcube") return ForceLaw::inverse_cube();
    if (spec.rfind("power:", 0) == 0) {
        const std::string rest = spec.substr(6);
        const auto colon = rest.find(':');
        try {
            const double alpha = std::stod(rest.substr(0, colon));
            const double c = colon == std::string::npos ? 1.0 : std::stod(rest.substr(colon + 1));
            return ForceLaw::power_law(alpha, c);
        } catch (const std::invalid_argument&) {
            throw ValidationError("bad power-law spec: " + spec);
        }
    }
    throw ValidationError("unknown law spec: " + spec + " (expected newtonian|invcube|power:alpha[:C])");
}

ProbeLaw parse_probe_law_string(const std::string& spec) {
    if (spec == "newtonian") return newtonian_probe_law();
    if (spec == "zero") return zero_probe_law();
    if (spec.rfind("power:", 0) == 0) {
        try {
            return power_probe_law(std::stod(spec.substr(6)));
        } catch (const std::invalid_argument&) {
            throw ValidationError("bad probe-law spec: " + spec);
        }
    }
    throw ValidationError("unknown probe law: " + spec + " (expected newtonian|power:alpha|zero)");
}

struct IntegratorOverrides {
    std::string method;
    double rtol = -1.0, atol = -1.0, h = -1.0, t_end = std::numeric_limits<double>::quiet_NaN();
    long long max_steps = -1, sample_every = -1;

    void add_flags(CLI::App* cmd) {
        cmd->set_help_flag("--help", "print help");  // frees the name "h" for the step size
        cmd->add_option("--method", method, "integrator: adaptive|rk4|leapfrog");
        cmd->add_option("--rtol", rtol, "adaptive relative tolerance");
        cmd->add_option("--atol", atol, "adaptive absolute tolerance");
        cmd->add_option("--h", h, "fixed step size");
        cmd->add_option("--t-end", t_end, "integration end time");
        cmd->add_option("--max-steps", max_steps, "accepted-step budget");
        cmd->add_option("--sample-every", sample_every, "record every k-th accepted step");
    }

    void apply(IntegratorConfig& cfg) const {
        if (!method.empty()) {
            if (method == "adaptive")
                cfg.method = Method::AdaptiveEmbedded;
            else if (method == "rk4")
                cfg.method = Method::RK4Fixed;
            else if (method == "leapfrog")
                cfg.method = Method::Leapfrog;
            else
                throw ValidationError("unknown integrator method: " + method);
        }
        if (rtol > 0.0) cfg.rel_tol = rtol;
        if (atol > 0.0) cfg.abs_tol = atol;
        if (h > 0.0) cfg.h = h;
        if (!std::isnan(t_end)) cfg.t_end = t_end;
        if (max_steps > 0) cfg.max_steps = static_cast<std::uint64_t>(max_steps);
        if (sample_every > 0) cfg.sample_every = static_cast<std::uint64_t>(sample_every);
        cfg.validate();
    }
};

double series_drift(const Trajectory& traj, double (*pick)(const InvariantSample&)) {
    const double ref = pick(traj.samples.front());
    double worst = 0.0;
    for (const InvariantSample& s : traj.samples) worst = std::max(worst, std::abs(pick(s) - ref));
    return worst / (1.0 + std::abs(ref));
}

JsonValue report_json(const SaariReport& rep) {
    JsonValue j = JsonValue::object();
    j.set("verdict", to_string(rep.verdict));
    j.set("inertia_rel_variation", rep.inertia_rel_variation);
    j.set("rigidity_rel_variation", rep.rigidity_rel_variation);
    j.set("c1_rel_variation", rep.c1_rel_variation);
    j.set("c2_rel_variation", rep.c2_rel_variation);
    j.set("tol_i", rep.tol_inertia);
    j.set("tol_r", rep.tol_rigidity);
    return j;
}

int classify_exception(const std::exception& e) {
    if (dynamic_cast<const ValidationError*>(&e)) return kExitValidation;
    if (dynamic_cast<const CollisionApproach*>(&e)) return kExitIntegration;
    if (dynamic_cast<const StepUnderflow*>(&e)) return kExitIntegration;
    if (dynamic_cast<const MaxStepsExceeded*>(&e)) return kExitIntegration;
    if (dynamic_cast<const NonFiniteState*>(&e)) return kExitIntegration;
    return 1;
}

/// simulate: integrate a scenario file, write series.csv + summary.json.
int simulate_one(const std::string& path, const fs::path& out_dir, const IntegratorOverrides& overrides,
                 bool quiet) {
    try {
        Scenario sc = load_scenario_file(path);
        overrides.apply(sc.integrator);

        const AdmissibilityClass cls = classify_admissibility(sc.law).cls;
        Trajectory traj = integrate(sc.initial, sc.bodies, sc.law, sc.integrator);
        SaariReport rep;
        const bool analyzable = traj.samples.size() >= 10;
        if (analyzable) rep = analyze(traj, sc.analysis.tol_inertia, sc.analysis.tol_rigidity);
        const bool anomaly = analyzable && is_anomaly(rep, cls);

        fs::create_directories(out_dir);
        {
            std::ofstream csv(out_dir / "series.csv", std::ios::binary);
            write_series_csv(csv, traj, sc.bodies.dim);
        }
        JsonValue j = JsonValue::object();
        j.set("scenario", sc.name);
        j.set("law_class", to_string(cls));
        if (analyzable) {
            j.set("verdict", to_string(rep.verdict));
            j.set("inertia_rel_variation", rep.inertia_rel_variation);
            j.set("rigidity_rel_variation", rep.rigidity_rel_variation);
            j.set("c1_rel_variation", rep.c1_rel_variation);
            j.set("c2_rel_variation", rep.c2_rel_variation);
        } else {
            // too few samples to classify; keep the summary key set stable
            j.set("verdict", nullptr);
            j.set("inertia_rel_variation", nullptr);
            j.set("rigidity_rel_variation", nullptr);
            j.set("c1_rel_variation", nullptr);
            j.set("c2_rel_variation", nullptr);
        }
        j.set("energy_drift", series_drift(traj, [](const InvariantSample& s) { return s.energy; }));
        j.set("anomaly", anomaly);
        j.set("samples", static_cast<long long>(traj.samples.size()));
        j.set("accepted_steps", static_cast<long long>(traj.accepted_steps));
        j.set("t_end", sc.integrator.t_end);
        const std::string doc = j.dump();
        {
            std::ofstream summary(out_dir / "summary.json", std::ios::binary);
            summary << doc << '\n';
        }
        if (!quiet) std::cout << doc << std::endl;
        return anomaly ? kExitAnomaly : kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << path << ": " << e.what() << std::endl;
        return classify_exception(e);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"n-body dynamics laboratory: conservation identities, relative equilibria, "
                 "and inertia-vs-rigidity experiments"};
    app.require_subcommand(1);

    // ---- simulate ----
    std::vector<std::string> scenario_paths;
    std::string out_dir = "out";
    bool batch = false;
    IntegratorOverrides sim_overrides;
    auto* sim = app.add_subcommand("simulate", "integrate a scenario and write series.csv + summary.json");
    sim->add_option("scenario", scenario_paths, "scenario JSON file(s)")->required();
    sim->add_option("--out", out_dir, "output directory");
    sim->add_flag("--batch", batch, "treat inputs as a batch; one output subdirectory per scenario");
    sim_overrides.add_flags(sim);

    // ---- central-config ----
    std::string cc_seed = "polygon";
    int cc_n = 3;
    std::string cc_law = "newtonian";
    std::string cc_masses;
    std::string cc_file;
    double cc_radius = 1.0, cc_spacing = 1.0, cc_perturb = 0.0;
    std::uint64_t cc_rng_seed = 0;
    auto* ccmd = app.add_subcommand("central-config", "solve the planar balance equations");
    ccmd->add_option("--seed", cc_seed, "seed shape: polygon|collinear|file");
    ccmd->add_option("--n", cc_n, "number of bodies");
    ccmd->add_option("--law", cc_law, "force law (newtonian|invcube|power:alpha[:C])");
    ccmd->add_option("--alpha", [&cc_law](const std::vector<std::string>& vals) {
        cc_law = "power:" + vals.front();
        return true;
    }, "shorthand for --law power:alpha");
    ccmd->add_option("--masses", cc_masses, "comma-separated masses (default: all 1)");
    ccmd->add_option("--file", cc_file, "JSON file with {\"q\": [[x,y],...]} when --seed file");
    ccmd->add_option("--radius", cc_radius, "polygon circumradius");
    ccmd->add_option("--spacing", cc_spacing, "collinear spacing");
    ccmd->add_option("--perturb", cc_perturb, "uniform position noise added to the seed");
    ccmd->add_option("--rng-seed", cc_rng_seed, "noise seed");

    // ---- saari-check ----
    std::string sk_scenario;
    double sk_tol_i = -1.0, sk_tol_r = -1.0;
    IntegratorOverrides sk_overrides;
    auto* skcmd = app.add_subcommand("saari-check", "classify a scenario's trajectory");
    skcmd->add_option("--scenario", sk_scenario, "scenario JSON file")->required();
    skcmd->add_option("--tol-i", sk_tol_i, "inertia-constancy threshold");
    skcmd->add_option("--tol-r", sk_tol_r, "rigidity threshold");
    sk_overrides.add_flags(skcmd);

    // ---- counterexample ----
    int cx_n = 3;
    double cx_t_end = 5.0, cx_coeff = 1.0, cx_side = 3.0;
    int cx_retries = 100;
    std::uint64_t cx_rng_seed = 0;
    std::string cx_out;
    auto* cxcmd = app.add_subcommand(
        "counterexample", "constant-inertia non-rigid trajectory under the inverse-cube law");
    cxcmd->add_option("--n", cx_n, "number of bodies (regular polygon seed)");
    cxcmd->add_option("--side", cx_side, "polygon side length; small polygons collide before t_end");
    cxcmd->add_option("--t-end", cx_t_end, "integration horizon");
    cxcmd->add_option("--retries", cx_retries, "velocity-seed budget");
    cxcmd->add_option("--rng-seed", cx_rng_seed, "velocity-seed rng");
    cxcmd->add_option("--coeff", cx_coeff, "inverse-cube coefficient C");
    cxcmd->add_option("--out", cx_out, "directory for the trajectory CSV");

    // ---- probe ----
    int pb_n = 3, pb_k = 2, pb_restarts = 50, pb_grid = 256;
    double pb_rho = 0.1, pb_margin = 0.1;
    std::string pb_law = "newtonian";
    std::uint64_t pb_rng_seed = 0;
    auto* pbcmd = app.add_subcommand("probe", "search for non-constant solutions of the two "
                                              "constancy constraints");
    pbcmd->add_option("--n-funcs", pb_n, "number of component functions");
    pbcmd->add_option("--degree", pb_k, "harmonic degree");
    pbcmd->add_option("--law", pb_law, "kernel family: newtonian|power:alpha|zero");
    pbcmd->add_option("--rho", pb_rho, "nonconstancy level (equality constraint)");
    pbcmd->add_option("--restarts", pb_restarts, "multi-start budget");
    pbcmd->add_option("--rng-seed", pb_rng_seed, "restart rng seed");
    pbcmd->add_option("--grid", pb_grid, "grid points per period");
    pbcmd->add_option("--margin", pb_margin, "positivity margin");

    // ---- lawcheck ----
    std::string lc_law;
    auto* lccmd = app.add_subcommand("lawcheck", "classify a force law's admissibility");
    lccmd->add_option("--law", lc_law, "law spec (newtonian|invcube|power:alpha[:C])")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim) {
            if (!batch) {
                if (scenario_paths.size() != 1)
                    throw ValidationError("simulate expects one scenario unless --batch is given");
                return simulate_one(scenario_paths.front(), out_dir, sim_overrides, false);
            }
            // Batch: isolated output directory per scenario, worker pool over files.
            std::vector<int> codes(scenario_paths.size(), 0);
            std::atomic<std::size_t> cursor{0};
            auto work = [&]() {
                for (;;) {
                    const std::size_t i = cursor.fetch_add(1);
                    if (i >= scenario_paths.size()) return;
                    fs::path stem = fs::path(scenario_paths[i]).stem();
                    codes[i] = simulate_one(scenario_paths[i], fs::path(out_dir) / stem, sim_overrides,
                                            true);
                }
            };
            unsigned workers = std::max(1u, std::thread::hardware_concurrency());
            workers = std::min<unsigned>(workers, scenario_paths.size());
            std::vector<std::thread> pool;
            for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
            work();
            for (auto& th : pool) th.join();
            JsonValue j = JsonValue::object();
            int worst = 0;
            JsonValue per = JsonValue::array();
            for (std::size_t i = 0; i < scenario_paths.size(); ++i) {
                worst = std::max(worst, codes[i]);
                JsonValue e = JsonValue::object();
                e.set("scenario", scenario_paths[i]);
                e.set("exit_code", codes[i]);
                per.push_back(std::move(e));
            }
            j.set("batch", std::move(per));
            std::cout << j.dump() << std::endl;
            return worst;
        }

        if (*ccmd) {
            ForceLaw law = parse_law_string(cc_law);
            Bodies bodies;
            bodies.dim = 2;
            if (cc_masses.empty()) {
                bodies.masses.assign(cc_n, 1.0);
            } else {
                std::string token;
                for (std::size_t i = 0; i <= cc_masses.size(); ++i) {
                    if (i == cc_masses.size() || cc_masses[i] == ',') {
                        if (!token.empty()) {
                            try {
                                bodies.masses.push_back(std::stod(token));
                            } catch (const std::invalid_argument&) {
                                throw ValidationError("bad mass entry: " + token);
                            }
                        }
                        token.clear();
                    } else {
                        token += cc_masses[i];
                    }
                }
                cc_n = bodies.count();
            }
            std::vector<double> seed;
            if (cc_seed == "polygon") {
                seed = polygon_positions(cc_n, cc_radius);
            } else if (cc_seed == "collinear") {
                seed = collinear_positions(cc_n, cc_spacing);
            } else if (cc_seed == "file") {
                std::ifstream in(cc_file);
                if (!in) throw ValidationError("cannot open seed file: " + cc_file);
                nlohmann::json j;
                in >> j;
                for (const auto& row : j.at("q")) {
                    seed.push_back(row.at(0).get<double>());
                    seed.push_back(row.at(1).get<double>());
                }
                cc_n = static_cast<int>(seed.size()) / 2;
                if (bodies.count() != cc_n) bodies.masses.assign(cc_n, 1.0);
            } else {
                throw ValidationError("unknown seed shape: " + cc_seed);
            }
            if (cc_perturb > 0.0) {
                Rng rng(cc_rng_seed);
                for (double& x : seed) x += cc_perturb * rng.uniform(-1.0, 1.0);
            }
            const CentralConfiguration cc = solve_ce(seed, bodies, law);
            JsonValue j = JsonValue::object();
            j.set("q", matrix_json(cc.q, 2));
            j.set("omega2", cc.omega2);
            j.set("residual_norm", cc.residual_norm);
            j.set("law", law.name());
            std::cout << j.dump() << std::endl;
            return kExitOk;
        }

        if (*skcmd) {
            Scenario sc = load_scenario_file(sk_scenario);
            sk_overrides.apply(sc.integrator);
            if (sk_tol_i > 0.0) sc.analysis.tol_inertia = sk_tol_i;
            if (sk_tol_r > 0.0) sc.analysis.tol_rigidity = sk_tol_r;
            sc.analysis.validate();
            const AdmissibilityClass cls = classify_admissibility(sc.law).cls;
            const Trajectory traj = integrate(sc.initial, sc.bodies, sc.law, sc.integrator);
            const SaariReport rep = analyze(traj, sc.analysis.tol_inertia, sc.analysis.tol_rigidity);
            JsonValue j = report_json(rep);
            j.set("law_class", to_string(cls));
            j.set("anomaly", is_anomaly(rep, cls));
            j.set("scenario", sc.name);
            std::cout << j.dump() << std::endl;
            return is_anomaly(rep, cls) ? kExitAnomaly : kExitOk;
        }

        if (*cxcmd) {
            Bodies bodies;
            bodies.dim = 2;
            bodies.masses.assign(cx_n, 1.0);
            const double circumradius = cx_side * 0.5 / std::sin(M_PI / cx_n);
            const std::vector<double> positions = polygon_positions(cx_n, circumradius);
            const ForceLaw law = ForceLaw::inverse_cube(cx_coeff);
            const CounterexampleSearch found =
                find_constant_inertia_nonrigid(positions, bodies, law, cx_t_end, cx_retries, cx_rng_seed);
            if (!cx_out.empty()) {
                fs::create_directories(cx_out);
                std::ofstream csv(fs::path(cx_out) / "series.csv", std::ios::binary);
                write_series_csv(csv, found.trajectory, bodies.dim);
            }
            JsonValue j = report_json(found.report);
            j.set("law_class", to_string(AdmissibilityClass::DegenerateInverseCube));
            j.set("anomaly", false);
            j.set("attempts", found.attempts);
            j.set("initial_q", matrix_json(found.initial.q, bodies.dim));
            j.set("initial_v", matrix_json(found.initial.v, bodies.dim));
            std::cout << j.dump() << std::endl;
            return kExitOk;
        }

        if (*pbcmd) {
            const ProbeLaw law = parse_probe_law_string(pb_law);
            const std::vector<ProbeLaw> laws(pb_n, law);
            const ProbeResult result =
                probe_minimize(pb_n, pb_k, laws, pb_rho, pb_restarts, pb_rng_seed, pb_grid, pb_margin);
            JsonValue j = JsonValue::object();
            j.set("min_residual", result.min_residual);
            j.set("nonconstancy", result.nonconstancy);
            j.set("restarts", result.restarts);
            j.set("grid_size", result.grid_size);
            j.set("laws_diverge_at_zero", result.laws_diverge_at_zero);
            j.set("law", law.name);
            JsonValue params = JsonValue::object();
            params.set("offsets", JsonValue::array_of(result.at_params.offsets));
            params.set("cos_coef", JsonValue::array_of(result.at_params.cos_coef));
            params.set("sin_coef", JsonValue::array_of(result.at_params.sin_coef));
            j.set("at_params", std::move(params));
            std::cout << j.dump() << std::endl;
            return kExitOk;
        }

        if (*lccmd) {
            const ForceLaw law = parse_law_string(lc_law);
            const Admissibility adm = classify_admissibility(law);
            double max_abs_g = 0.0;
            for (const auto& [x, gx] : adm.evidence) max_abs_g = std::max(max_abs_g, std::abs(gx));
            JsonValue j = JsonValue::object();
            j.set("class", to_string(adm.cls));
            j.set("law", law.name());
            j.set("max_abs_g", max_abs_g);
            j.set("grid_points", static_cast<long long>(adm.evidence.size()));
            std::cout << j.dump() << std::endl;
            return kExitOk;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return classify_exception(e);
    }
    return kExitOk;
}
