#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "magnomech/checks.hpp"

namespace py = pybind11;
namespace mm = magnomech;

namespace {

// Scenario plus its built objects, the unit the Python surface works with.
struct PyScenario {
    mm::Scenario meta;
    mm::BuiltScenario built;

    static PyScenario load(const std::string& name_or_path) {
        PyScenario s;
        s.meta = mm::load_scenario(name_or_path);
        s.built = mm::build_scenario(s.meta);
        return s;
    }

    static PyScenario from_json(const std::string& text) {
        PyScenario s;
        s.meta = mm::parse_scenario_text(text, "<string>");
        s.built = mm::build_scenario(s.meta);
        return s;
    }
};

py::dict record_to_dict(const mm::CheckRecord& r) {
    py::dict d;
    d["id"] = r.id;
    d["anchor"] = r.anchor;
    d["max_residual"] = r.max_residual;
    d["tol"] = r.tol;
    d["samples"] = r.samples;
    d["flags"] = r.flags;
    d["verdict"] = r.verdict == mm::CheckRecord::Verdict::pass   ? "pass"
                   : r.verdict == mm::CheckRecord::Verdict::fail ? "fail"
                                                                 : "skipped";
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Residual checks and simulation for controlled magnetic Hamiltonian systems";

    py::register_exception<mm::ParseError>(m, "ExpressionParseError", PyExc_ValueError);
    py::register_exception<mm::SchemaError>(m, "ScenarioSchemaError", PyExc_ValueError);
    py::register_exception<mm::ContractError>(m, "ContractViolation", PyExc_ValueError);
    py::register_exception<mm::DegeneracyError>(m, "DegeneracyFailure", PyExc_RuntimeError);
    py::register_exception<mm::NumericError>(m, "NumericFailure", PyExc_ArithmeticError);

    m.def("list_scenarios", &mm::builtin_scenario_names, "Names of compiled-in scenarios");

    m.def("gradient",
          [](const std::string& expr, const std::vector<std::string>& vars, const mm::Vec& x) {
              auto f = mm::make_scalar_field(expr, vars);
              return mm::DerivativeEngine::dual().gradient(f, x);
          },
          py::arg("expr"), py::arg("variables"), py::arg("at"),
          "Exact forward-dual gradient of an expression");

    m.def("jacobian",
          [](const std::vector<std::string>& exprs, const std::vector<std::string>& vars,
             const mm::Vec& x) {
              auto g = mm::make_vector_map(exprs, vars);
              mm::Mat j = mm::DerivativeEngine::dual().jacobian(g, x);
              std::vector<mm::Vec> rows;
              for (int i = 0; i < j.rows(); ++i) {
                  mm::Vec row(j.cols());
                  for (int c = 0; c < j.cols(); ++c) row[c] = j(i, c);
                  rows.push_back(row);
              }
              return rows;
          },
          py::arg("exprs"), py::arg("variables"), py::arg("at"));

    m.def("null_space",
          [](const std::vector<mm::Vec>& rows) {
              if (rows.empty()) throw mm::ContractError("null_space: empty matrix");
              mm::Mat a(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
              for (int i = 0; i < a.rows(); ++i)
                  for (int j = 0; j < a.cols(); ++j) a(i, j) = rows[i][j];
              mm::Mat n = mm::null_space(a);
              std::vector<mm::Vec> cols;
              for (int j = 0; j < n.cols(); ++j) cols.push_back(n.col(j));
              return cols;
          },
          py::arg("matrix_rows"), "Orthonormal basis of the null space, as columns");

    py::class_<PyScenario>(m, "Scenario")
        .def_static("load", &PyScenario::load, py::arg("name_or_path"))
        .def_static("from_json", &PyScenario::from_json, py::arg("text"))
        .def_property_readonly("name", [](const PyScenario& s) { return s.meta.name; })
        .def_property_readonly("n", [](const PyScenario& s) { return s.meta.n; })
        .def_property_readonly("constrained",
                               [](const PyScenario& s) { return s.built.nh && s.built.nh->k() > 0; })
        .def("hamiltonian",
             [](const PyScenario& s, const mm::Vec& z) {
                 return s.built.system().H(std::span<const double>(z));
             })
        .def("canonical_vf",
             [](const PyScenario& s, const mm::Vec& z) { return mm::canonical_vf(s.built.system(), z); })
        .def("magnetic_vf",
             [](const PyScenario& s, const mm::Vec& z) { return mm::magnetic_vf(s.built.system(), z); })
        .def("cmh_vf",
             [](const PyScenario& s, const mm::Vec& z) { return mm::cmh_vf(s.built.system(), z); })
        .def("magnetic_vanishing_residual",
             [](const PyScenario& s, const mm::Vec& z) {
                 return mm::magnetic_vanishing_residual(s.built.system(), z);
             })
        .def("omega",
             [](const PyScenario& s, const mm::Vec& z, const mm::Vec& v, const mm::Vec& w) {
                 return mm::omega_B(s.built.system().beta, z, v, w);
             })
        .def("constraint_values",
             [](const PyScenario& s, const mm::Vec& z) {
                 if (!s.built.nh) throw mm::ContractError("scenario has no constraints");
                 return mm::constraint_functions(*s.built.nh, z);
             })
        .def("project_to_constraints",
             [](const PyScenario& s, const mm::Vec& z) {
                 if (!s.built.nh) throw mm::ContractError("scenario has no constraints");
                 return mm::project_to_M(*s.built.nh, z);
             })
        .def("constrained_vf",
             [](const PyScenario& s, const mm::Vec& z) {
                 if (!s.built.nh) throw mm::ContractError("scenario has no constraints");
                 return mm::multiplier_oracle_vf(*s.built.nh, z);
             })
        .def("type1_residual",
             [](const PyScenario& s, const mm::Vec& q) {
                 if (!s.built.gamma) throw mm::ContractError("scenario has no gamma");
                 return mm::hj1_residual(*s.built.gamma, s.built.system(), q);
             })
        .def("run_checks",
             [](const PyScenario& s, const std::string& suite, py::object seed, double tol) {
                 mm::CheckOptions opts;
                 if (!seed.is_none()) opts.seed = seed.cast<std::uint64_t>();
                 if (tol > 0) opts.tol_override = tol;
                 mm::Report rep = mm::run_checks(s.built, mm::suite_from_string(suite), opts);
                 py::dict d;
                 d["scenario"] = rep.scenario;
                 d["suite"] = rep.suite;
                 d["seed"] = rep.seed;
                 d["body"] = rep.body();
                 d["any_fail"] = rep.any_fail();
                 py::list recs;
                 for (const auto& r : rep.records) recs.append(record_to_dict(r));
                 d["records"] = recs;
                 return d;
             },
             py::arg("suite") = "all", py::arg("seed") = py::none(), py::arg("tol") = -1.0)
        .def("simulate",
             [](const PyScenario& s, double t_end, double dt) {
                 long long steps = std::llround(t_end / dt);
                 if (steps < 1) throw mm::ContractError("simulate: dt must divide t-end");
                 const int n = s.meta.n;
                 mm::Vec z0(2 * n, 0.0);
                 z0[n] = 1.0;
                 mm::Trajectory traj;
                 if (s.built.nh && s.built.nh->k() > 0) {
                     traj = mm::integrate_constrained(*s.built.nh, z0, dt,
                                                      static_cast<int>(steps));
                 } else {
                     const mm::CmhSystem& sys = s.built.system();
                     mm::FieldFn field = [&sys](std::span<const double> z) {
                         return mm::cmh_vf(sys, z);
                     };
                     traj = mm::integrate(field, z0, dt, static_cast<int>(steps));
                 }
                 return py::make_tuple(traj.times, traj.states);
             },
             py::arg("t_end"), py::arg("dt"));
}
