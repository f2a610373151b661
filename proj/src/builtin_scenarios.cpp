#include <map>

#include "magnomech/scenario.hpp"

namespace magnomech {

namespace {

// Compiled-in corpus. Pairing convention: the "magnetic" matrix is the skew
// pairing beta with B(x, y) = x' beta(q) y, so the induced force term is
// dp = -H_q + beta H_p.
const std::map<std::string, std::string>& registry() {
    static const std::map<std::string, std::string> reg = {
        {"lorentz2d", R"json({
  "schema_version": 1,
  "name": "lorentz2d",
  "n": 2,
  "hamiltonian": "0.5*(p1^2 + p2^2)",
  "magnetic": {"constant": [[0, -1], [1, 0]]},
  "gamma": ["q2", "0"],
  "epsilon": {"type": "flow", "time": 0.1, "substeps": 100},
  "sampling": {"seed": 42, "count": 100, "box": 2.0}
})json"},

        {"lorentz3d", R"json({
  "schema_version": 1,
  "name": "lorentz3d",
  "n": 3,
  "hamiltonian": "0.5*(p1^2 + p2^2 + p3^2)",
  "magnetic": {"constant": [[0, -1, 0], [1, 0, -0.5], [0, 0.5, 0]]},
  "gamma": ["q2^2", "0", "q1*q3"],
  "epsilon": {"type": "flow", "time": 0.1, "substeps": 100},
  "sampling": {"seed": 42, "count": 100, "box": 2.0}
})json"},

        {"poly_beta3d", R"json({
  "schema_version": 1,
  "name": "poly_beta3d",
  "n": 3,
  "hamiltonian": "0.5*(p1^2 + p2^2 + p3^2) + 0.1*q3^2",
  "magnetic": {"entries": [["0", "-(1 + q1^2)", "0"],
                            ["1 + q1^2", "0", "0"],
                            ["0", "0", "0"]]},
  "gamma": ["sin(q2)", "q1*q3", "0"],
  "epsilon": {"type": "flow", "time": 0.1, "substeps": 100},
  "sampling": {"seed": 42, "count": 100, "box": 2.0}
})json"},

        {"lorentz2d_hj", R"json({
  "schema_version": 1,
  "name": "lorentz2d_hj",
  "n": 2,
  "hamiltonian": "0.5*(p1^2 + p2^2) + 1 - 0.125*(q1^2 + q2^2)",
  "magnetic": {"constant": [[0, -1], [1, 0]]},
  "gamma": ["-0.5*q2", "0.5*q1"],
  "epsilon": {"type": "flow", "time": 0.1, "substeps": 100},
  "force": ["p1 + 0.05*q2", "p2"],
  "control": ["p1", "p2 - 0.05*q1"],
  "sampling": {"seed": 42, "count": 100, "box": 2.0}
})json"},

        {"classical1d", R"json({
  "schema_version": 1,
  "name": "classical1d",
  "n": 1,
  "hamiltonian": "0.5*p1^2 + 0.5*q1^2",
  "gamma": ["(2 - q1^2)^0.5"],
  "epsilon": {"type": "flow", "time": 0.1, "substeps": 100},
  "sampling": {"seed": 42, "count": 100, "box": 0.9}
})json"},

        {"knife_edge", R"json({
  "schema_version": 1,
  "name": "knife_edge",
  "n": 3,
  "lagrangian": {"mass": "identity", "potential": "0"},
  "constraints": [["sin(q3)", "-cos(q3)", "0"]],
  "symmetry": {"cyclic": [1, 2]},
  "sampling": {"seed": 42, "count": 100, "box": 2.0}
})json"},

        {"knife_edge_hj", R"json({
  "schema_version": 1,
  "name": "knife_edge_hj",
  "n": 3,
  "lagrangian": {"mass": "identity",
                  "potential": "1 - 0.5*(0.49 + (0.4 + 0.2*sin(q3))^2)"},
  "constraints": [["sin(q3)", "-cos(q3)", "0"]],
  "symmetry": {"cyclic": [1, 2]},
  "gamma": ["0.7*cos(q3)", "0.7*sin(q3)", "0.4 + 0.2*sin(q3)"],
  "epsilon": {"type": "translation", "shift": [0.5, -0.3, 0.0]},
  "force": ["p1", "p2", "p3 + 0.1*sin(q3)"],
  "control": ["p1", "p2", "p3 - 0.05*cos(q3)"],
  "sampling": {"seed": 42, "count": 100, "box": 2.0}
})json"},

        {"knife_edge_magnetic", R"json({
  "schema_version": 1,
  "name": "knife_edge_magnetic",
  "n": 3,
  "lagrangian": {"mass": "identity",
                  "potential": "1 - 0.5*(0.09*sin(q3)^2 + 0.04*cos(q3)^2)"},
  "constraints": [["sin(q3)", "-cos(q3)", "0"]],
  "symmetry": {"cyclic": [1, 2]},
  "magnetic": {"entries": [["0", "0", "0.3*(cos(q3)^2 - sin(q3)^2)"],
                            ["0", "0", "0.6*sin(q3)*cos(q3)"],
                            ["-0.3*(cos(q3)^2 - sin(q3)^2)", "-0.6*sin(q3)*cos(q3)", "0"]]},
  "gamma": ["0.3*sin(q3)*cos(q3)", "0.3*sin(q3)^2", "0.2*cos(q3)"],
  "epsilon": {"type": "translation", "shift": [-0.4, 0.25, 0.0]},
  "sampling": {"seed": 42, "count": 100, "box": 2.0}
})json"},

        {"free3d_sym", R"json({
  "schema_version": 1,
  "name": "free3d_sym",
  "n": 3,
  "lagrangian": {"mass": "identity", "potential": "0"},
  "symmetry": {"cyclic": [1, 2, 3]},
  "sampling": {"seed": 42, "count": 100, "box": 2.0}
})json"},

        {"equiv_pair", R"json({
  "schema_version": 1,
  "name": "equiv_pair",
  "n": 2,
  "hamiltonian": "0.5*(p1^2 + p2^2) + 1 - 0.125*(q1^2 + q2^2)",
  "magnetic": {"constant": [[0, -1], [1, 0]]},
  "gamma": ["-0.5*q2", "0.5*q1"],
  "epsilon": {"type": "flow", "time": 0.1, "substeps": 100},
  "force": ["p1 + 0.05*q2", "p2"],
  "control": ["p1", "p2 - 0.05*q1"],
  "phi": {"forward": ["2*q1 + q2", "q2"],
           "inverse": ["0.5*q1 - 0.5*q2", "q2"]},
  "sampling": {"seed": 42, "count": 50, "box": 2.0}
})json"},
    };
    return reg;
}

}  // namespace

std::vector<std::string> builtin_scenario_names() {
    std::vector<std::string> names;
    for (const auto& [name, text] : registry()) names.push_back(name);
    return names;
}

bool is_builtin_scenario(const std::string& name) { return registry().count(name) > 0; }

const std::string& builtin_scenario_text(const std::string& name) {
    auto it = registry().find(name);
    if (it == registry().end())
        throw SchemaError("unknown builtin scenario '" + name + "'", "name");
    return it->second;
}

}  // namespace magnomech
