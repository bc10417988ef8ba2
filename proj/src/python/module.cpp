#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include "equilibra/certify.hpp"
#include "equilibra/dynamics.hpp"
#include "equilibra/reports.hpp"
#include "equilibra/seeds.hpp"

namespace py = pybind11;
using namespace equilibra;

namespace {

py::object json_to_py(const nlohmann::json& j) {
    using nlohmann::json;
    switch (j.type()) {
        case json::value_t::null: return py::none();
        case json::value_t::boolean: return py::bool_(j.get<bool>());
        case json::value_t::number_integer: return py::int_(j.get<long long>());
        case json::value_t::number_unsigned: return py::int_(j.get<unsigned long long>());
        case json::value_t::number_float: return py::float_(j.get<double>());
        case json::value_t::string: return py::str(j.get<std::string>());
        case json::value_t::array: {
            py::list out;
            for (const auto& item : j) out.append(json_to_py(item));
            return out;
        }
        case json::value_t::object: {
            py::dict out;
            for (auto it = j.begin(); it != j.end(); ++it)
                out[py::str(it.key())] = json_to_py(it.value());
            return out;
        }
        default: return py::none();
    }
}

ContinuationParameter make_param(const std::string& name, int mass_index) {
    if (name == "omega") return {ContinuationParameterKind::Omega, 0};
    if (name == "mass") return {ContinuationParameterKind::MassIndex, mass_index};
    if (name == "alpha") return {ContinuationParameterKind::ExponentAlpha, 0};
    if (name == "beta") return {ContinuationParameterKind::ExponentBeta, 0};
    throw ConfigError("unknown continuation parameter '" + name +
                      "' (use omega, mass, alpha or beta)");
}

py::tuple seed_tuple(SeedResult sr) {
    return py::make_tuple(std::move(sr.problem), std::move(sr.positions));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() =
        "solver and certifier for relative equilibria of flat and curved n-body problems";
    m.attr("__version__") = "0.1.0";

    py::register_exception<Error>(m, "EquilibraError");

    py::class_<SpaceForm>(m, "SpaceForm")
        .def_static("flat", &SpaceForm::flat, py::arg("k"))
        .def_static("sphere", &SpaceForm::sphere, py::arg("k"))
        .def_static("hyperboloid", &SpaceForm::hyperboloid, py::arg("k"))
        .def_property_readonly(
            "kind", [](const SpaceForm& s) { return std::string(to_string(s.kind)); })
        .def_readonly("k", &SpaceForm::k)
        .def_readonly("sigma", &SpaceForm::sigma)
        .def("curved", &SpaceForm::curved)
        .def("ambient_dim", &SpaceForm::ambient_dim)
        .def("metric", &SpaceForm::metric)
        .def("__repr__", [](const SpaceForm& s) {
            std::ostringstream os;
            os << "SpaceForm(" << to_string(s.kind) << ", k=" << s.k << ")";
            return os.str();
        });

    m.def("inner", &inner, py::arg("x"), py::arg("y"), py::arg("space"));
    m.def("on_manifold", &on_manifold, py::arg("x"), py::arg("space"),
          py::arg("tol") = 1e-10);

    py::class_<RotationGenerator>(m, "RotationGenerator")
        .def_property_readonly("G", &RotationGenerator::G)
        .def_property_readonly("A", &RotationGenerator::A)
        .def_property_readonly("space", &RotationGenerator::space)
        .def_property_readonly("c1", &RotationGenerator::c1)
        .def_property_readonly("c2", &RotationGenerator::c2)
        .def_property_readonly("restricted", &RotationGenerator::restricted);
    m.def("validate_generator", &validate_generator, py::arg("G"), py::arg("space"),
          py::arg("allow_singular") = false);
    m.def("planar_rotation", &planar_rotation, py::arg("omega"), py::arg("space"));
    m.def("group_element", &group_element, py::arg("gen"), py::arg("t"));

    py::class_<ForceLaw>(m, "ForceLaw")
        .def_static("newtonian", &ForceLaw::newtonian)
        .def_static("paper_classical", &ForceLaw::paper_classical)
        .def_static("quasi_homogeneous", &ForceLaw::quasi_homogeneous, py::arg("a"),
                    py::arg("alpha"), py::arg("b") = 0.0, py::arg("beta") = 1.0)
        .def_property_readonly("name", &ForceLaw::name)
        .def_property_readonly("compactness_flag", &ForceLaw::compactness_flag)
        .def_property_readonly("dominant_exponent", &ForceLaw::dominant_exponent)
        .def("__call__", [](const ForceLaw& law, double x) { return law.eval(x); },
             py::arg("x"))
        .def("xfprime", [](const ForceLaw& law, double x) { return law.eval_xfprime(x); },
             py::arg("x"));

    m.def(
        "admissibility_check",
        [](const ForceLaw& law) {
            return json_to_py(to_json(admissibility_check(law, AdmissibilityOptions{})));
        },
        py::arg("law"));

    py::class_<REProblem>(m, "REProblem")
        .def(py::init([](const SpaceForm& space, std::vector<double> masses,
                         std::optional<ForceLaw> law, const RotationGenerator& gen) {
                 REProblem p{space, std::move(masses), std::move(law), gen};
                 p.validate();
                 return p;
             }),
             py::arg("space"), py::arg("masses"), py::arg("law"), py::arg("gen"))
        .def_readonly("space", &REProblem::space)
        .def_readonly("masses", &REProblem::masses)
        .def_readonly("gen", &REProblem::gen)
        .def_property_readonly("law", [](const REProblem& p) { return p.law; });

    m.def(
        "seed_two_body",
        [](double m1, double m2, double omega, std::optional<ForceLaw> law) {
            return seed_tuple(law ? seed_two_body(m1, m2, omega, *law)
                                  : seed_two_body(m1, m2, omega));
        },
        py::arg("m1") = 1.0, py::arg("m2") = 1.0, py::arg("omega") = 1.0,
        py::arg("law") = std::nullopt);
    m.def(
        "seed_lagrange",
        [](double m1, double m2, double m3, double side, std::optional<ForceLaw> law) {
            return seed_tuple(law ? seed_lagrange(m1, m2, m3, side, *law)
                                  : seed_lagrange(m1, m2, m3, side));
        },
        py::arg("m1") = 1.0, py::arg("m2") = 1.0, py::arg("m3") = 1.0,
        py::arg("side") = 1.0, py::arg("law") = std::nullopt);
    m.def(
        "seed_euler_collinear",
        [](double m1, double m2, double m3, double r12) {
            return seed_tuple(seed_euler_collinear(m1, m2, m3, r12));
        },
        py::arg("m1") = 1.0, py::arg("m2") = 1.0, py::arg("m3") = 1.0,
        py::arg("r12") = 1.0);
    m.def(
        "seed_sphere_lagrange",
        [](double mass, double z0) { return seed_tuple(seed_sphere_lagrange(mass, z0)); },
        py::arg("mass") = 1.0, py::arg("z0") = 0.5);
    m.def(
        "seed_hyperbolic_pair",
        [](double mass, double x) { return seed_tuple(seed_hyperbolic_pair(mass, x)); },
        py::arg("mass") = 1.0, py::arg("x") = 0.5);

    py::class_<RESolution>(m, "RESolution")
        .def_readonly("positions", &RESolution::positions)
        .def_readonly("residual_norm", &RESolution::residual_norm)
        .def_readonly("newton_iterations", &RESolution::newton_iterations)
        .def_readonly("gauge", &RESolution::gauge)
        .def_readonly("jacobian_condition", &RESolution::jacobian_condition)
        .def_property_readonly(
            "centroid_residual", [](const RESolution& s) { return s.centroid_residual; })
        .def("to_dict", [](const RESolution& s) { return json_to_py(to_json(s)); });

    m.def(
        "newton_solve",
        [](const REProblem& problem, const std::vector<Eigen::VectorXd>& positions,
           double tol, int max_iter, double damping) {
            SolveOptions o;
            o.tol = tol;
            o.max_iter = max_iter;
            o.damping = damping;
            return newton_solve(problem, positions, o);
        },
        py::arg("problem"), py::arg("positions"), py::arg("tol") = 1e-12,
        py::arg("max_iter") = 100, py::arg("damping") = 1e-3);

    m.def(
        "verify",
        [](const std::vector<Eigen::VectorXd>& Q, const REProblem& problem, double tol) {
            return json_to_py(to_json(verify(Q, problem, tol)));
        },
        py::arg("positions"), py::arg("problem"), py::arg("tol") = 1e-12);

    m.def(
        "residual",
        [](const REProblem& problem, const std::vector<Eigen::VectorXd>& Q) {
            return residual(Q, problem);
        },
        py::arg("problem"), py::arg("positions"));

    py::class_<ContinuationFamily>(m, "ContinuationFamily")
        .def_readonly("grid", &ContinuationFamily::grid)
        .def_readonly("complete", &ContinuationFamily::complete)
        .def_readonly("abort_reason", &ContinuationFamily::abort_reason)
        .def_property_readonly(
            "n_steps", [](const ContinuationFamily& f) { return f.steps.size(); })
        .def("step_positions",
             [](const ContinuationFamily& f, size_t k) {
                 return f.steps.at(k).solution.positions;
             },
             py::arg("step"))
        .def("to_dict", [](const ContinuationFamily& f) { return json_to_py(to_json(f)); });

    m.def(
        "continue_family",
        [](const REProblem& problem, const std::vector<Eigen::VectorXd>& seed,
           const std::string& parameter, const std::vector<double>& grid, int mass_index,
           double tol, double trust_radius) {
            ContinuationOptions o;
            o.solve.tol = tol;
            o.trust_radius = trust_radius;
            return continue_family(problem, seed, make_param(parameter, mass_index), grid,
                                   o);
        },
        py::arg("problem"), py::arg("seed"), py::arg("parameter"), py::arg("grid"),
        py::arg("mass_index") = 0, py::arg("tol") = 1e-12, py::arg("trust_radius") = 1.0);

    m.def(
        "separation_scan",
        [](const ContinuationFamily& f) { return json_to_py(to_json(separation_scan(f))); },
        py::arg("family"));
    m.def(
        "boundedness_scan",
        [](const ContinuationFamily& f, const ForceLaw& law) {
            return json_to_py(to_json(boundedness_scan(f, law)));
        },
        py::arg("family"), py::arg("law"));

    m.def(
        "collision_divergence_probe",
        [](const std::vector<double>& masses, const RotationGenerator& gen,
           const ForceLaw& law, const ShrinkPath& path, const std::vector<double>& s_grid) {
            return json_to_py(to_json(collision_divergence_probe(masses, gen, law, path,
                                                                 s_grid)));
        },
        py::arg("masses"), py::arg("gen"), py::arg("law"), py::arg("path"),
        py::arg("s_grid"));

    m.def(
        "curved_cluster_identity",
        [](const std::vector<Eigen::VectorXd>& Q, const std::vector<double>& masses,
           const SpaceForm& space, const std::vector<int>& cluster) {
            return json_to_py(to_json(curved_cluster_identity(Q, masses, space, cluster)));
        },
        py::arg("positions"), py::arg("masses"), py::arg("space"), py::arg("cluster"));

    m.def(
        "curved_cluster_divergence",
        [](const std::vector<double>& masses, const RotationGenerator& gen,
           const std::vector<int>& cluster, const ClusterPath& path, double epsilon,
           const std::vector<double>& s_grid) {
            return json_to_py(
                to_json(curved_cluster_divergence(masses, gen, cluster, path, epsilon,
                                                  s_grid)));
        },
        py::arg("masses"), py::arg("gen"), py::arg("cluster"), py::arg("path"),
        py::arg("epsilon"), py::arg("s_grid"));

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("max_constraint_drift", &Trajectory::max_constraint_drift)
        .def_readonly("max_tangency_drift", &Trajectory::max_tangency_drift)
        .def_readonly("steps_accepted", &Trajectory::steps_accepted)
        .def_readonly("steps_rejected", &Trajectory::steps_rejected)
        .def_readonly("projections", &Trajectory::projections)
        .def_property_readonly("n_samples",
                               [](const Trajectory& t) { return t.samples.size(); })
        .def("sample",
             [](const Trajectory& t, size_t k) {
                 const auto& s = t.samples.at(k);
                 return py::make_tuple(s.t, s.positions, s.velocities);
             },
             py::arg("k"));

    m.def(
        "integrate",
        [](const SpaceForm& space, const std::vector<double>& masses,
           const std::vector<Eigen::VectorXd>& positions,
           const std::vector<Eigen::VectorXd>& velocities, double t_end, double rel_tol,
           std::optional<ForceLaw> law, int n_samples) {
            PhaseState state0{Configuration{space, masses, positions}, velocities};
            IntegrateOptions io;
            io.n_samples = n_samples;
            if (space.curved()) return integrate(state0, t_end, rel_tol, io);
            if (!law) throw ConfigError("flat integration needs a force law");
            return integrate(state0, *law, t_end, rel_tol, io);
        },
        py::arg("space"), py::arg("masses"), py::arg("positions"), py::arg("velocities"),
        py::arg("t_end"), py::arg("rel_tol") = 1e-10, py::arg("law") = std::nullopt,
        py::arg("n_samples") = 201);

    m.def("rigidity_report", &rigidity_report, py::arg("trajectory"));
}
