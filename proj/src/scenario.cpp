#include "magnomech/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace magnomech {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& msg, const std::string& field) {
    throw SchemaError(msg, field);
}

int require_int(const json& j, const std::string& field) {
    if (!j.is_number_integer()) bad("expected an integer", field);
    return j.get<int>();
}

double require_num(const json& j, const std::string& field) {
    if (!j.is_number()) bad("expected a number", field);
    return j.get<double>();
}

std::string require_str(const json& j, const std::string& field) {
    if (!j.is_string()) bad("expected a string", field);
    return j.get<std::string>();
}

std::vector<std::string> require_expr_list(const json& j, int expected, const std::string& field) {
    if (!j.is_array()) bad("expected an array of expressions", field);
    if (expected >= 0 && static_cast<int>(j.size()) != expected)
        bad("expected " + std::to_string(expected) + " entries, found " +
                std::to_string(j.size()),
            field);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(require_str(j[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<std::vector<std::string>> require_expr_matrix(const json& j, int rows, int cols,
                                                          const std::string& field) {
    if (!j.is_array()) bad("expected an array of rows", field);
    if (rows >= 0 && static_cast<int>(j.size()) != rows)
        bad("expected " + std::to_string(rows) + " rows, found " + std::to_string(j.size()),
            field);
    std::vector<std::vector<std::string>> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(require_expr_list(j[i], cols, field + "[" + std::to_string(i) + "]"));
    return out;
}

// Check an expression parses against the given variables; rethrow with the
// field name attached.
void check_expr(const std::string& src, const std::vector<std::string>& vars,
                const std::string& field) {
    try {
        Expr::parse(src, vars);
    } catch (const ParseError& e) {
        bad(std::string("bad expression: ") + e.what(), field);
    }
}

}  // namespace

Scenario parse_scenario_text(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        // byte offset -> line/column for the diagnostic
        int line = 1, col = 1;
        for (std::size_t i = 0; i < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') { ++line; col = 1; }
            else ++col;
        }
        throw ParseError(origin + ": " + e.what(), line, col);
    }
    if (!j.is_object()) bad("scenario must be a JSON object", "$");
    if (!j.contains("schema_version")) bad("missing required field", "schema_version");
    if (require_int(j["schema_version"], "schema_version") != 1)
        bad("unsupported schema version (supported: 1)", "schema_version");

    Scenario s;
    if (!j.contains("name")) bad("missing required field", "name");
    s.name = require_str(j["name"], "name");
    if (!j.contains("n")) bad("missing required field", "n");
    s.n = require_int(j["n"], "n");
    if (s.n < 1) bad("dimension must be at least 1", "n");
    const int n = s.n;
    auto qv = config_vars(n);
    auto pv = phase_vars(n);

    if (j.contains("hamiltonian")) {
        s.hamiltonian = require_str(j["hamiltonian"], "hamiltonian");
        check_expr(*s.hamiltonian, pv, "hamiltonian");
    }

    if (j.contains("magnetic")) {
        const json& m = j["magnetic"];
        if (!m.is_object()) bad("expected an object with 'constant' or 'entries'", "magnetic");
        if (m.contains("constant")) {
            const json& c = m["constant"];
            if (!c.is_array() || static_cast<int>(c.size()) != n)
                bad("expected an " + std::to_string(n) + "x" + std::to_string(n) + " matrix",
                    "magnetic.constant");
            Mat beta(n, n);
            for (int i = 0; i < n; ++i) {
                const json& row = c[i];
                if (!row.is_array() || static_cast<int>(row.size()) != n)
                    bad("expected " + std::to_string(n) + " entries",
                        "magnetic.constant[" + std::to_string(i) + "]");
                for (int k = 0; k < n; ++k)
                    beta(i, k) = require_num(row[k], "magnetic.constant[" + std::to_string(i) +
                                                         "][" + std::to_string(k) + "]");
            }
            s.magnetic_constant = beta;
        } else if (m.contains("entries")) {
            s.magnetic_entries = require_expr_matrix(m["entries"], n, n, "magnetic.entries");
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < n; ++k)
                    check_expr(s.magnetic_entries[i][k], qv,
                               "magnetic.entries[" + std::to_string(i) + "][" +
                                   std::to_string(k) + "]");
        } else {
            bad("expected 'constant' or 'entries'", "magnetic");
        }
    }

    if (j.contains("constraints")) {
        s.constraints = require_expr_matrix(j["constraints"], -1, n, "constraints");
        for (std::size_t i = 0; i < s.constraints.size(); ++i)
            for (int k = 0; k < n; ++k)
                check_expr(s.constraints[i][k], qv,
                           "constraints[" + std::to_string(i) + "][" + std::to_string(k) + "]");
    }

    if (j.contains("lagrangian")) {
        const json& l = j["lagrangian"];
        if (!l.is_object()) bad("expected an object with 'mass' and 'potential'", "lagrangian");
        Scenario::LagrangianSpec spec;
        if (!l.contains("mass")) bad("missing required field", "lagrangian.mass");
        if (l["mass"].is_string() && l["mass"].get<std::string>() == "identity") {
            for (int i = 0; i < n; ++i) {
                std::vector<std::string> row(n, "0");
                row[i] = "1";
                spec.mass.push_back(row);
            }
        } else {
            spec.mass = require_expr_matrix(l["mass"], n, n, "lagrangian.mass");
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < n; ++k)
                    check_expr(spec.mass[i][k], qv,
                               "lagrangian.mass[" + std::to_string(i) + "][" +
                                   std::to_string(k) + "]");
        }
        if (!l.contains("potential")) bad("missing required field", "lagrangian.potential");
        spec.potential = require_str(l["potential"], "lagrangian.potential");
        check_expr(spec.potential, qv, "lagrangian.potential");
        s.lagrangian = std::move(spec);
    }

    if (!s.hamiltonian && !s.lagrangian)
        bad("scenario needs a hamiltonian or a lagrangian", "hamiltonian");
    if (!s.constraints.empty() && !s.lagrangian)
        bad("constrained scenarios need a lagrangian", "lagrangian");

    for (const char* which : {"force", "control"}) {
        if (!j.contains(which)) continue;
        auto lst = require_expr_list(j[which], n, which);
        for (int i = 0; i < n; ++i)
            check_expr(lst[i], pv, std::string(which) + "[" + std::to_string(i) + "]");
        if (std::string(which) == "force") s.force = std::move(lst);
        else s.control = std::move(lst);
    }

    if (j.contains("symmetry")) {
        const json& sym = j["symmetry"];
        if (!sym.is_object() || !sym.contains("cyclic"))
            bad("expected an object with 'cyclic'", "symmetry");
        const json& cyc = sym["cyclic"];
        if (!cyc.is_array()) bad("expected an array of 1-based indices", "symmetry.cyclic");
        for (std::size_t i = 0; i < cyc.size(); ++i) {
            int idx = require_int(cyc[i], "symmetry.cyclic[" + std::to_string(i) + "]");
            if (idx < 1 || idx > n)
                bad("index out of range 1.." + std::to_string(n),
                    "symmetry.cyclic[" + std::to_string(i) + "]");
            s.cyclic.push_back(idx - 1);
        }
    }

    if (j.contains("gamma")) {
        s.gamma = require_expr_list(j["gamma"], n, "gamma");
        for (int i = 0; i < n; ++i)
            check_expr((*s.gamma)[i], qv, "gamma[" + std::to_string(i) + "]");
    }

    if (j.contains("epsilon")) {
        const json& e = j["epsilon"];
        if (!e.is_object() || !e.contains("type")) bad("expected an object with 'type'", "epsilon");
        Scenario::EpsilonSpec spec;
        std::string type = require_str(e["type"], "epsilon.type");
        if (type == "map") {
            spec.type = Scenario::EpsilonSpec::Type::map;
            if (!e.contains("components")) bad("missing required field", "epsilon.components");
            spec.components = require_expr_list(e["components"], 2 * n, "epsilon.components");
            for (int i = 0; i < 2 * n; ++i)
                check_expr(spec.components[i], pv, "epsilon.components[" + std::to_string(i) + "]");
        } else if (type == "flow" || type == "constrained_flow") {
            spec.type = type == "flow" ? Scenario::EpsilonSpec::Type::flow
                                       : Scenario::EpsilonSpec::Type::constrained_flow;
            if (!e.contains("time")) bad("missing required field", "epsilon.time");
            spec.time = require_num(e["time"], "epsilon.time");
            spec.substeps = e.contains("substeps") ? require_int(e["substeps"], "epsilon.substeps")
                                                   : 100;
            if (spec.substeps < 1) bad("substeps must be positive", "epsilon.substeps");
        } else if (type == "translation") {
            spec.type = Scenario::EpsilonSpec::Type::translation;
            if (!e.contains("shift")) bad("missing required field", "epsilon.shift");
            const json& sh = e["shift"];
            if (!sh.is_array() || static_cast<int>(sh.size()) != n)
                bad("expected " + std::to_string(n) + " entries", "epsilon.shift");
            for (int i = 0; i < n; ++i)
                spec.shift.push_back(require_num(sh[i], "epsilon.shift[" + std::to_string(i) + "]"));
        } else {
            bad("unknown type '" + type + "'", "epsilon.type");
        }
        s.epsilon = std::move(spec);
    }

    if (j.contains("phi")) {
        const json& p = j["phi"];
        if (!p.is_object() || !p.contains("forward") || !p.contains("inverse"))
            bad("expected an object with 'forward' and 'inverse'", "phi");
        Scenario::DiffeoSpec spec;
        spec.forward = require_expr_list(p["forward"], n, "phi.forward");
        spec.inverse = require_expr_list(p["inverse"], n, "phi.inverse");
        for (int i = 0; i < n; ++i) {
            check_expr(spec.forward[i], qv, "phi.forward[" + std::to_string(i) + "]");
            check_expr(spec.inverse[i], qv, "phi.inverse[" + std::to_string(i) + "]");
        }
        s.phi = std::move(spec);
    }

    if (j.contains("sampling")) {
        const json& sp = j["sampling"];
        if (!sp.is_object()) bad("expected an object", "sampling");
        if (sp.contains("seed")) s.seed = static_cast<std::uint64_t>(require_int(sp["seed"], "sampling.seed"));
        if (sp.contains("count")) s.sample_count = require_int(sp["count"], "sampling.count");
        if (sp.contains("box")) s.box = require_num(sp["box"], "sampling.box");
        if (s.sample_count < 1) bad("count must be positive", "sampling.count");
        if (s.box <= 0) bad("box must be positive", "sampling.box");
    }
    return s;
}

Scenario parse_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open scenario file '" + path + "'", "path");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str(), path);
}

BuiltScenario build_scenario(const Scenario& scn, DerivativeEngine eng) {
    const int n = scn.n;
    auto qv = config_vars(n);
    auto pv = phase_vars(n);

    MagneticField beta = MagneticField::zero(n);
    if (scn.magnetic_constant) {
        beta = MagneticField::constant(*scn.magnetic_constant);
    } else if (!scn.magnetic_entries.empty()) {
        std::vector<std::string> flat;
        for (const auto& row : scn.magnetic_entries)
            for (const auto& e : row) flat.push_back(e);
        beta = MagneticField(n, make_vector_map(flat, qv));
    }

    std::optional<FiberMap> force, control;
    if (scn.force) force = FiberMap(n, make_vector_map(*scn.force, pv));
    if (scn.control) control = FiberMap(n, make_vector_map(*scn.control, pv));

    BuiltScenario bs;
    bs.meta = scn;

    std::optional<ScalarField> h_expr;
    if (scn.hamiltonian) h_expr = make_scalar_field(*scn.hamiltonian, pv);

    if (scn.lagrangian) {
        std::vector<std::string> mass_flat;
        for (const auto& row : scn.lagrangian->mass)
            for (const auto& e : row) mass_flat.push_back(e);
        MechanicalLagrangian lag(n, make_vector_map(mass_flat, qv),
                                 make_scalar_field(scn.lagrangian->potential, qv));
        int k = static_cast<int>(scn.constraints.size());
        std::vector<std::string> rows_flat;
        for (const auto& row : scn.constraints)
            for (const auto& e : row) rows_flat.push_back(e);
        PfaffianDistribution dist(
            n, k,
            k > 0 ? make_vector_map(rows_flat, qv) : VectorMap(n, 0, [](auto x) {
                using T = std::decay_t<decltype(x[0])>;
                return std::vector<T>{};
            }));
        bs.nh = NonholonomicCmhSystem(lag, dist, beta, force, control, h_expr, eng);
        bs.sys = bs.nh->sys;
    } else {
        bs.sys = CmhSystem(n, *h_expr, beta, force, control, eng);
    }

    if (scn.gamma) bs.gamma = OneFormSection(n, make_vector_map(*scn.gamma, qv));

    if (scn.epsilon) {
        using Type = Scenario::EpsilonSpec::Type;
        switch (scn.epsilon->type) {
            case Type::map:
                bs.epsilon = make_vector_map(scn.epsilon->components, pv);
                break;
            case Type::flow:
                bs.epsilon = make_flow_map(bs.system().H, bs.system().beta, eng,
                                           scn.epsilon->time, scn.epsilon->substeps);
                bs.epsilon_is_flow = true;
                break;
            case Type::constrained_flow:
                if (!bs.nh)
                    throw SchemaError("constrained_flow needs constraints", "epsilon.type");
                bs.epsilon =
                    make_constrained_flow_map(*bs.nh, scn.epsilon->time, scn.epsilon->substeps);
                bs.epsilon_is_flow = true;
                break;
            case Type::translation:
                bs.epsilon = make_translation_map(n, scn.epsilon->shift);
                break;
        }
    }

    if (!scn.cyclic.empty()) bs.symmetry = TranslationSymmetry(n, scn.cyclic);

    if (scn.phi)
        bs.phi = ConfigDiffeo(n, make_vector_map(scn.phi->forward, qv),
                              make_vector_map(scn.phi->inverse, qv));
    return bs;
}

Scenario load_scenario(const std::string& name_or_path) {
    if (is_builtin_scenario(name_or_path))
        return parse_scenario_text(builtin_scenario_text(name_or_path), name_or_path);
    if (!std::filesystem::exists(name_or_path))
        throw SchemaError("no builtin scenario or file named '" + name_or_path + "'", "path");
    return parse_scenario_file(name_or_path);
}

}  // namespace magnomech
