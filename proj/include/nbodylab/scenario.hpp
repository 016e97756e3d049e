#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nbodylab/equilibria.hpp"
#include "nbodylab/errors.hpp"
#include "nbodylab/forcelaw.hpp"
#include "nbodylab/integrate.hpp"
#include "nbodylab/rng.hpp"
#include "nbodylab/system.hpp"

namespace nbodylab {

struct AnalysisConfig {
    double tol_inertia = 1e-6;
    double tol_rigidity = 1e-3;

    void validate() const {
        if (!(tol_inertia > 0.0 && tol_inertia < 0.1)) throw ValidationError("tol_i outside (0, 0.1)");
        if (!(tol_rigidity > 0.0 && tol_rigidity < 0.1)) throw ValidationError("tol_r outside (0, 0.1)");
    }
};

/// A fully resolved experiment: bodies, law, initial state (barycentric),
/// integration settings, and analysis thresholds.
struct Scenario {
    std::string name;
    Bodies bodies;
    ForceLaw law;
    PhaseState initial;
    IntegratorConfig integrator;
    AnalysisConfig analysis;
};

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j, const std::string& key) {
    if (!j.contains(key)) throw ValidationError("missing field: " + key);
    return j.at(key);
}

inline double require_number(const nlohmann::json& j, const std::string& key) {
    const auto& v = require_field(j, key);
    if (!v.is_number()) throw ValidationError("field must be a number: " + key);
    return v.get<double>();
}

inline std::vector<double> parse_matrix(const nlohmann::json& j, int n, int d, const std::string& key) {
    if (!j.is_array() || static_cast<int>(j.size()) != n)
        throw ValidationError("field " + key + " must be an array of " + std::to_string(n) + " rows");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n) * d);
    for (const auto& row : j) {
        if (!row.is_array() || static_cast<int>(row.size()) != d)
            throw ValidationError("each row of " + key + " must have " + std::to_string(d) + " entries");
        for (const auto& x : row) {
            if (!x.is_number()) throw ValidationError("non-numeric entry in " + key);
            out.push_back(x.get<double>());
        }
    }
    return out;
}

}  // namespace detail

inline ForceLaw parse_law(const nlohmann::json& j) {
    const std::string type = detail::require_field(j, "type").get<std::string>();
    if (type != "power") throw ValidationError("unknown law type: " + type);
    const double alpha = detail::require_number(j, "alpha");
    const double c = detail::require_number(j, "C");
    if (!(c > 0.0)) throw ValidationError("law coefficient C must be positive");
    return ForceLaw::power_law(alpha, c);
}

inline IntegratorConfig parse_integrator(const nlohmann::json& j) {
    IntegratorConfig cfg;
    const std::string method = detail::require_field(j, "method").get<std::string>();
    if (method == "adaptive") {
        cfg.method = Method::AdaptiveEmbedded;
    } else if (method == "rk4") {
        cfg.method = Method::RK4Fixed;
    } else if (method == "leapfrog") {
        cfg.method = Method::Leapfrog;
    } else {
        throw ValidationError("unknown integrator method: " + method);
    }
    cfg.rel_tol = detail::require_number(j, "rtol");
    cfg.abs_tol = detail::require_number(j, "atol");
    if (j.contains("h")) cfg.h = j.at("h").get<double>();
    cfg.t_end = detail::require_number(j, "t_end");
    const auto& se = detail::require_field(j, "sample_every");
    if (!se.is_number_integer() || se.get<long long>() < 1)
        throw ValidationError("sample_every must be a positive integer");
    cfg.sample_every = se.get<std::uint64_t>();
    if (j.contains("max_steps")) cfg.max_steps = j.at("max_steps").get<std::uint64_t>();
    cfg.validate();
    return cfg;
}

/// Builds the initial state from a generator spec. All generators emit
/// barycentric states and are deterministic in rng_seed.
inline PhaseState generate_initial_state(const nlohmann::json& gen, const Bodies& bodies) {
    const std::string type = detail::require_field(gen, "type").get<std::string>();
    const nlohmann::json params = gen.contains("params") ? gen.at("params") : nlohmann::json::object();
    const std::uint64_t seed =
        gen.contains("rng_seed") ? gen.at("rng_seed").get<std::uint64_t>() : 0;
    Rng rng(seed);

    const int n = bodies.count();
    const int d = bodies.dim;
    PhaseState s;
    s.t = 0.0;
    s.dim = d;
    s.q.assign(static_cast<std::size_t>(n) * d, 0.0);
    s.v.assign(static_cast<std::size_t>(n) * d, 0.0);

    if (type == "polygon") {
        if (d != 2) throw ValidationError("polygon generator needs d = 2");
        const double radius = params.contains("radius") ? params.at("radius").get<double>() : 1.0;
        const double omega = params.contains("omega") ? params.at("omega").get<double>() : 0.0;
        const double jitter = params.contains("jitter") ? params.at("jitter").get<double>() : 0.0;
        s.q = polygon_positions(n, radius);
        for (int k = 0; k < n; ++k) {
            s.v[2 * k] = -omega * s.q[2 * k + 1];
            s.v[2 * k + 1] = omega * s.q[2 * k];
        }
        for (auto& x : s.q) x += jitter * rng.uniform(-1.0, 1.0);
    } else if (type == "collinear") {
        const double spacing = params.contains("spacing") ? params.at("spacing").get<double>() : 1.0;
        const double jitter = params.contains("jitter") ? params.at("jitter").get<double>() : 0.0;
        for (int k = 0; k < n; ++k) s.q[k * d] = spacing * (k - 0.5 * (n - 1));
        for (auto& x : s.q) x += jitter * rng.uniform(-1.0, 1.0);
    } else if (type == "random") {
        const double box = params.contains("box") ? params.at("box").get<double>() : 1.0;
        const double vscale = params.contains("vscale") ? params.at("vscale").get<double>() : 0.5;
        const double min_sep = params.contains("min_sep") ? params.at("min_sep").get<double>() : 0.1 * box;
        for (int attempt = 0; attempt < 1000; ++attempt) {
            for (auto& x : s.q) x = rng.uniform(-box, box);
            double closest = std::numeric_limits<double>::infinity();
            for (const auto& pd : pairwise_distances(s)) closest = std::min(closest, pd.r);
            if (closest > min_sep) break;
            if (attempt == 999) throw ValidationError("random generator failed to separate bodies");
        }
        for (auto& x : s.v) x = rng.uniform(-vscale, vscale);
    } else {
        throw ValidationError("unknown generator type: " + type);
    }
    return reduce_to_barycenter(s, bodies);
}

/// Parses and validates a scenario document. The initial state is reduced to
/// the barycentric zero-momentum frame, the convention every invariant
/// identity here is phrased in.
inline Scenario parse_scenario(const nlohmann::json& j, const std::string& name = "") {
    Bodies bodies;
    const auto& masses = detail::require_field(j, "masses");
    if (!masses.is_array() || masses.size() < 2) throw ValidationError("masses must list at least 2 bodies");
    for (const auto& m : masses) {
        if (!m.is_number()) throw ValidationError("non-numeric mass");
        bodies.masses.push_back(m.get<double>());
    }
    const auto& dim = detail::require_field(j, "d");
    if (!dim.is_number_integer()) throw ValidationError("d must be an integer");
    bodies.dim = dim.get<int>();
    bodies.validate();

    ForceLaw law = parse_law(detail::require_field(j, "law"));

    PhaseState initial;
    const auto& init = detail::require_field(j, "init");
    if (init.contains("generator")) {
        initial = generate_initial_state(init.at("generator"), bodies);
    } else {
        const int n = bodies.count();
        initial.t = 0.0;
        initial.dim = bodies.dim;
        initial.q = detail::parse_matrix(detail::require_field(init, "q"), n, bodies.dim, "init.q");
        initial.v = detail::parse_matrix(detail::require_field(init, "v"), n, bodies.dim, "init.v");
        initial = reduce_to_barycenter(initial, bodies);
    }
    initial.validate(bodies);

    Scenario sc{.name = name,
                .bodies = bodies,
                .law = law,
                .initial = initial,
                .integrator = parse_integrator(detail::require_field(j, "integrator")),
                .analysis = {}};
    const auto& analysis = detail::require_field(j, "analysis");
    sc.analysis.tol_inertia = detail::require_number(analysis, "tol_i");
    sc.analysis.tol_rigidity = detail::require_number(analysis, "tol_r");
    sc.analysis.validate();
    return sc;
}

inline Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open scenario file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("scenario file " + path + " is not valid JSON: " + e.what());
    }
    std::string name = path;
    if (const auto slash = name.find_last_of('/'); slash != std::string::npos) name = name.substr(slash + 1);
    if (const auto dot = name.find_last_of('.'); dot != std::string::npos) name = name.substr(0, dot);
    return parse_scenario(j, name);
}

}  // namespace nbodylab
