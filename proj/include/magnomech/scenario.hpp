#pragma once

#include <optional>
#include <string>
#include <vector>

#include "magnomech/equivalence.hpp"
#include "magnomech/expression.hpp"
#include "magnomech/reduction.hpp"

namespace magnomech {

// Serializable description of a system plus candidate objects for the checks.
// Functions enter as expressions over q1..qn (configuration data) or
// q1..qn,p1..pn (phase data); see the expression module for the whitelist.
struct Scenario {
    std::string name;
    int n = 0;

    std::optional<std::string> hamiltonian;          // over phase vars
    std::optional<Mat> magnetic_constant;            // pairing matrix
    std::vector<std::vector<std::string>> magnetic_entries;  // n x n over config vars
    std::vector<std::vector<std::string>> constraints;       // k rows, n entries each

    struct LagrangianSpec {
        std::vector<std::vector<std::string>> mass;  // n x n entries, over config vars
        std::string potential;
    };
    std::optional<LagrangianSpec> lagrangian;

    std::optional<std::vector<std::string>> force;    // n fiber outputs over phase vars
    std::optional<std::vector<std::string>> control;  // n fiber outputs over phase vars

    std::vector<int> cyclic;  // 0-based cyclic coordinate indices

    std::optional<std::vector<std::string>> gamma;  // n entries over config vars

    struct EpsilonSpec {
        enum class Type { map, flow, constrained_flow, translation };
        Type type = Type::map;
        std::vector<std::string> components;  // for map: 2n entries over phase vars
        double time = 0.0;
        int substeps = 0;
        Vec shift;  // for translation
    };
    std::optional<EpsilonSpec> epsilon;

    struct DiffeoSpec {
        std::vector<std::string> forward;
        std::vector<std::string> inverse;
    };
    std::optional<DiffeoSpec> phi;

    std::uint64_t seed = 42;
    int sample_count = 100;
    double box = 2.0;
};

// Executable form of a scenario.
struct BuiltScenario {
    Scenario meta;
    CmhSystem sys;
    std::optional<NonholonomicCmhSystem> nh;  // present when constraints/lagrangian given
    std::optional<OneFormSection> gamma;
    std::optional<PhaseMap> epsilon;
    bool epsilon_is_flow = false;
    std::optional<TranslationSymmetry> symmetry;
    std::optional<ConfigDiffeo> phi;

    const CmhSystem& system() const { return nh ? nh->sys : sys; }
    int n() const { return meta.n; }
};

// Throws ParseError (bad JSON / bad expression) or SchemaError (naming the
// offending field) on invalid input.
Scenario parse_scenario_text(const std::string& json_text, const std::string& origin);
Scenario parse_scenario_file(const std::string& path);

BuiltScenario build_scenario(const Scenario& scn, DerivativeEngine eng = DerivativeEngine::dual());

// Compiled-in scenario registry.
std::vector<std::string> builtin_scenario_names();
bool is_builtin_scenario(const std::string& name);
const std::string& builtin_scenario_text(const std::string& name);

// Resolves a builtin name or a filesystem path.
Scenario load_scenario(const std::string& name_or_path);

}  // namespace magnomech
