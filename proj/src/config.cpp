#include "equilibra/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace equilibra {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& context, const std::string& what) {
    throw ConfigError(context + ": " + what);
}

void check_keys(const json& j, const std::string& context,
                const std::set<std::string>& allowed) {
    if (!j.is_object()) fail(context, "expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            fail(context, "unknown key \"" + it.key() + "\"");
}

double get_number(const json& j, const std::string& context, const std::string& key) {
    if (!j.contains(key)) fail(context, "missing key \"" + key + "\"");
    if (!j[key].is_number()) fail(context, "\"" + key + "\" must be a number");
    return j[key].get<double>();
}

double get_number_or(const json& j, const std::string& context, const std::string& key,
                     double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) fail(context, "\"" + key + "\" must be a number");
    return j[key].get<double>();
}

int get_int_or(const json& j, const std::string& context, const std::string& key,
               int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_integer()) fail(context, "\"" + key + "\" must be an integer");
    return j[key].get<int>();
}

std::string get_string(const json& j, const std::string& context, const std::string& key) {
    if (!j.contains(key)) fail(context, "missing key \"" + key + "\"");
    if (!j[key].is_string()) fail(context, "\"" + key + "\" must be a string");
    return j[key].get<std::string>();
}

std::vector<double> get_number_array(const json& j, const std::string& context) {
    if (!j.is_array()) fail(context, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) fail(context, "expected an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

Eigen::VectorXd get_vector(const json& j, const std::string& context) {
    std::vector<double> v = get_number_array(j, context);
    return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<int>(v.size()));
}

Eigen::MatrixXd get_matrix(const json& j, const std::string& context) {
    if (!j.is_array() || j.empty()) fail(context, "expected an array of rows");
    const int rows = static_cast<int>(j.size());
    std::vector<double> first = get_number_array(j[0], context);
    const int cols = static_cast<int>(first.size());
    Eigen::MatrixXd M(rows, cols);
    for (int r = 0; r < rows; ++r) {
        std::vector<double> row = get_number_array(j[r], context);
        if (static_cast<int>(row.size()) != cols) fail(context, "ragged matrix rows");
        for (int c = 0; c < cols; ++c) M(r, c) = row[c];
    }
    return M;
}

}  // namespace

SpaceForm space_from_json(const json& j) {
    check_keys(j, "space", {"kind", "k"});
    std::string kind = get_string(j, "space", "kind");
    int k = get_int_or(j, "space", "k", 2);
    if (kind == "flat") return SpaceForm::flat(k);
    if (kind == "sphere") return SpaceForm::sphere(k);
    if (kind == "hyperboloid") return SpaceForm::hyperboloid(k);
    fail("space", "kind must be flat, sphere or hyperboloid");
}

json space_to_json(const SpaceForm& space) {
    return json{{"kind", to_string(space.kind)}, {"k", space.k}};
}

namespace {

ForceLaw custom_law_by_name(const std::string& name) {
    if (name == "sin_inv_x") {
        return ForceLaw::custom(
            "sin_inv_x", [](double x) { return std::sin(1.0 / x); },
            [](double x) { return -std::cos(1.0 / x) / (x * x); },
            /*limit_sign_hint=*/+1, /*compactness_hint=*/false);
    }
    fail("law", "unknown custom law \"" + name + "\"");
}

}  // namespace

ForceLaw law_from_json(const json& j) {
    check_keys(j, "law", {"kind", "a", "alpha", "b", "beta", "name"});
    std::string kind = get_string(j, "law", "kind");
    if (kind == "newtonian") return ForceLaw::newtonian();
    if (kind == "paper_classical") return ForceLaw::paper_classical();
    if (kind == "quasi_homogeneous") {
        return ForceLaw::quasi_homogeneous(
            get_number(j, "law", "a"), get_number(j, "law", "alpha"),
            get_number_or(j, "law", "b", 0.0), get_number_or(j, "law", "beta", 1.0));
    }
    if (kind == "custom") return custom_law_by_name(get_string(j, "law", "name"));
    fail("law", "kind must be newtonian, paper_classical, quasi_homogeneous or custom");
}

json law_to_json(const ForceLaw& law) {
    switch (law.kind()) {
        case LawKind::Newtonian:
            return json{{"kind", "newtonian"}};
        case LawKind::PaperClassical:
            return json{{"kind", "paper_classical"}};
        case LawKind::QuasiHomogeneous:
            return json{{"kind", "quasi_homogeneous"},
                        {"a", law.a()},
                        {"alpha", law.alpha()},
                        {"b", law.b()},
                        {"beta", law.beta()}};
        case LawKind::Custom:
            return json{{"kind", "custom"}, {"name", law.name()}};
    }
    fail("law", "unserializable law kind");
}

SeedResult build_seed(const std::string& name, const json& params,
                      const std::optional<ForceLaw>& law) {
    const json p = params.is_null() ? json::object() : params;
    ForceLaw flat_law = law.value_or(ForceLaw::newtonian());
    if (name == "two_body") {
        check_keys(p, "seed_params", {"m1", "m2", "omega"});
        return seed_two_body(get_number_or(p, "seed_params", "m1", 1.0),
                             get_number_or(p, "seed_params", "m2", 1.0),
                             get_number_or(p, "seed_params", "omega", 1.0), flat_law);
    }
    if (name == "lagrange") {
        check_keys(p, "seed_params", {"m1", "m2", "m3", "side"});
        return seed_lagrange(get_number_or(p, "seed_params", "m1", 1.0),
                             get_number_or(p, "seed_params", "m2", 1.0),
                             get_number_or(p, "seed_params", "m3", 1.0),
                             get_number_or(p, "seed_params", "side", 1.0), flat_law);
    }
    if (name == "euler_collinear") {
        check_keys(p, "seed_params", {"m1", "m2", "m3", "r12"});
        if (law.has_value() && law->kind() != LawKind::Newtonian)
            fail("seed", "euler_collinear is built for the inverse-cube kernel");
        return seed_euler_collinear(get_number_or(p, "seed_params", "m1", 1.0),
                                    get_number_or(p, "seed_params", "m2", 1.0),
                                    get_number_or(p, "seed_params", "m3", 1.0),
                                    get_number_or(p, "seed_params", "r12", 1.0));
    }
    if (name == "sphere_lagrange") {
        check_keys(p, "seed_params", {"mass", "z0"});
        return seed_sphere_lagrange(get_number_or(p, "seed_params", "mass", 1.0),
                                    get_number_or(p, "seed_params", "z0", 0.5));
    }
    if (name == "hyperbolic_pair") {
        check_keys(p, "seed_params", {"mass", "x"});
        return seed_hyperbolic_pair(get_number_or(p, "seed_params", "mass", 1.0),
                                    get_number_or(p, "seed_params", "x", 0.5));
    }
    fail("seed", "unknown seed \"" + name + "\" (two_body, lagrange, euler_collinear, "
                 "sphere_lagrange, hyperbolic_pair)");
}

namespace {

SweepConfig parse_sweep(const json& j) {
    check_keys(j, "sweep",
               {"parameter", "mass_index", "from", "to", "points", "boundedness",
                "trust_radius"});
    SweepConfig sw;
    std::string param = get_string(j, "sweep", "parameter");
    if (param == "omega")
        sw.parameter.kind = ContinuationParameterKind::Omega;
    else if (param == "mass") {
        sw.parameter.kind = ContinuationParameterKind::MassIndex;
        sw.parameter.index = get_int_or(j, "sweep", "mass_index", -1);
        if (sw.parameter.index < 0) fail("sweep", "mass sweeps need \"mass_index\" (0-based)");
    } else if (param == "alpha")
        sw.parameter.kind = ContinuationParameterKind::ExponentAlpha;
    else if (param == "beta")
        sw.parameter.kind = ContinuationParameterKind::ExponentBeta;
    else
        fail("sweep", "parameter must be omega, mass, alpha or beta");
    sw.from = get_number(j, "sweep", "from");
    sw.to = get_number(j, "sweep", "to");
    sw.points = get_int_or(j, "sweep", "points", 0);
    if (sw.points < 1) fail("sweep", "\"points\" must be a positive integer");
    if (j.contains("boundedness")) {
        if (!j["boundedness"].is_boolean()) fail("sweep", "\"boundedness\" must be a boolean");
        sw.boundedness = j["boundedness"].get<bool>();
    }
    sw.trust_radius = get_number_or(j, "sweep", "trust_radius", 1.0);
    return sw;
}

ProbeConfig parse_probe(const json& j) {
    check_keys(j, "probe",
               {"kind", "s_min", "s_max", "points", "omega", "masses", "far_bodies",
                "epsilon", "space", "count", "n_max"});
    ProbeConfig pr;
    pr.kind = get_string(j, "probe", "kind");
    if (pr.kind != "divergence_flat" && pr.kind != "cluster_identity" &&
        pr.kind != "cluster_divergence")
        fail("probe",
             "kind must be divergence_flat, cluster_identity or cluster_divergence");
    // the cluster floor keeps the pair denominator (~ s^2) clear of the
    // 1e-14 singularity guard while still reaching gaps below 1e-5
    pr.s_min = get_number_or(j, "probe", "s_min", pr.kind == "cluster_divergence" ? 2e-7 : 1e-4);
    pr.s_max = get_number_or(j, "probe", "s_max", 1e-1);
    pr.points = get_int_or(j, "probe", "points", 25);
    pr.omega = get_number_or(j, "probe", "omega", 1.0);
    if (j.contains("masses")) pr.masses = get_number_array(j["masses"], "probe.masses");
    if (j.contains("far_bodies")) {
        if (!j["far_bodies"].is_array()) fail("probe", "\"far_bodies\" must be an array");
        for (const auto& fb : j["far_bodies"])
            pr.far_bodies.push_back(get_vector(fb, "probe.far_bodies"));
    }
    pr.epsilon = get_number_or(j, "probe", "epsilon", 0.1);
    if (j.contains("space")) {
        pr.space = get_string(j, "probe", "space");
        if (pr.space != "sphere" && pr.space != "hyperboloid")
            fail("probe", "space must be sphere or hyperboloid");
    }
    pr.count = get_int_or(j, "probe", "count", 100);
    pr.n_max = get_int_or(j, "probe", "n_max", 6);
    return pr;
}

SimulateConfig parse_simulate(const json& j) {
    check_keys(j, "simulate",
               {"periods", "rel_tol", "n_samples", "drift_bound",
                "constraint_drift_bound"});
    SimulateConfig sim;
    sim.periods = get_number_or(j, "simulate", "periods", 10.0);
    if (!(sim.periods > 0)) fail("simulate", "periods must be positive");
    sim.rel_tol = get_number_or(j, "simulate", "rel_tol", 1e-10);
    sim.n_samples = get_int_or(j, "simulate", "n_samples", 201);
    sim.drift_bound = get_number_or(j, "simulate", "drift_bound", 1e-6);
    sim.constraint_drift_bound =
        get_number_or(j, "simulate", "constraint_drift_bound", 1e-9);
    return sim;
}

}  // namespace

RunConfig parse_config(const json& j) {
    check_keys(j, "config",
               {"space", "law", "admissibility", "masses", "generator", "seed",
                "seed_params", "positions", "scale_positions", "solver", "sweep", "probe",
                "simulate", "solution", "rng_seed"});

    RunConfig cfg;
    if (j.contains("space")) cfg.space = space_from_json(j["space"]);
    if (j.contains("law")) cfg.law = law_from_json(j["law"]);
    if (j.contains("admissibility")) {
        const json& a = j["admissibility"];
        check_keys(a, "admissibility", {"delta", "x_max", "grid_size"});
        AdmissibilityOptions opt;
        opt.delta = get_number_or(a, "admissibility", "delta", opt.delta);
        opt.x_max = get_number_or(a, "admissibility", "x_max", opt.x_max);
        opt.grid_size = get_int_or(a, "admissibility", "grid_size", opt.grid_size);
        cfg.admissibility = opt;
    }
    if (j.contains("masses")) cfg.masses = get_number_array(j["masses"], "masses");
    if (j.contains("generator")) {
        const json& g = j["generator"];
        check_keys(g, "generator", {"omega", "matrix"});
        if (g.contains("omega") == g.contains("matrix"))
            fail("generator", "give exactly one of \"omega\" or \"matrix\"");
        if (g.contains("omega")) cfg.generator_omega = get_number(g, "generator", "omega");
        if (g.contains("matrix")) cfg.generator_matrix = get_matrix(g["matrix"], "generator.matrix");
    }
    if (j.contains("seed")) cfg.seed_name = get_string(j, "config", "seed");
    if (j.contains("seed_params")) {
        if (!j["seed_params"].is_object()) fail("seed_params", "expected a JSON object");
        cfg.seed_params = j["seed_params"];
    }
    if (j.contains("positions")) {
        std::vector<Eigen::VectorXd> pos;
        if (!j["positions"].is_array()) fail("positions", "expected an array of vectors");
        for (const auto& p : j["positions"]) pos.push_back(get_vector(p, "positions"));
        cfg.positions = std::move(pos);
    }
    cfg.scale_positions = get_number_or(j, "config", "scale_positions", 1.0);
    if (j.contains("solver")) {
        const json& s = j["solver"];
        check_keys(s, "solver", {"tol", "max_iter", "damping"});
        cfg.solver.tol = get_number_or(s, "solver", "tol", cfg.solver.tol);
        cfg.solver.max_iter = get_int_or(s, "solver", "max_iter", cfg.solver.max_iter);
        cfg.solver.damping = get_number_or(s, "solver", "damping", cfg.solver.damping);
    }
    if (j.contains("sweep")) cfg.sweep = parse_sweep(j["sweep"]);
    if (j.contains("probe")) cfg.probe = parse_probe(j["probe"]);
    if (j.contains("simulate")) cfg.simulate = parse_simulate(j["simulate"]);
    if (j.contains("solution")) cfg.solution_path = get_string(j, "config", "solution");
    if (j.contains("rng_seed")) {
        if (!j["rng_seed"].is_number_unsigned() && !j["rng_seed"].is_number_integer())
            fail("config", "\"rng_seed\" must be an integer");
        cfg.rng_seed = j["rng_seed"].get<std::uint64_t>();
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

}  // namespace equilibra
