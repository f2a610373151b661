#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "magnomech/checks.hpp"

namespace mm = magnomech;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitInvalid = 2;

mm::DerivativeEngine engine_from_env() {
    const char* env = std::getenv("MAGNOMECH_DERIV");
    if (!env || std::string(env) == "dual") return mm::DerivativeEngine::dual();
    if (std::string(env) == "fd") return mm::DerivativeEngine::finite_difference();
    std::cerr << "MAGNOMECH_DERIV must be 'dual' or 'fd'\n";
    std::exit(kExitInvalid);
}

int cmd_check(const std::string& path, const std::string& suite_name, long long seed,
              double tol, const std::string& report_path) {
    mm::Scenario scn = mm::load_scenario(path);
    mm::BuiltScenario bs = mm::build_scenario(scn, engine_from_env());
    mm::Suite suite = mm::suite_from_string(suite_name);
    mm::CheckOptions opts;
    if (seed >= 0) opts.seed = static_cast<std::uint64_t>(seed);
    if (tol > 0) opts.tol_override = tol;
    mm::Report rep = mm::run_checks(bs, suite, opts);
    std::string body = rep.body();
    std::cout << body << rep.timing();
    if (!report_path.empty()) {
        std::ofstream out(report_path, std::ios::binary);
        if (!out) {
            std::cerr << "cannot write report to '" << report_path << "'\n";
            return kExitInvalid;
        }
        out << body;
    }
    return rep.any_fail() ? kExitFail : kExitPass;
}

int cmd_simulate(const std::string& path, double t_end, double dt, const std::string& out_path,
                 const std::string& method_name) {
    mm::Scenario scn = mm::load_scenario(path);
    mm::BuiltScenario bs = mm::build_scenario(scn, engine_from_env());
    if (dt <= 0 || t_end <= 0) {
        std::cerr << "simulate: t-end and dt must be positive\n";
        return kExitInvalid;
    }
    double ratio = t_end / dt;
    long long steps = std::llround(ratio);
    if (steps < 1 || std::abs(ratio - static_cast<double>(steps)) > 1e-9 * std::max(1.0, ratio)) {
        std::cerr << "simulate: dt must divide t-end\n";
        return kExitInvalid;
    }
    mm::IntegrationMethod method = mm::IntegrationMethod::rk4;
    if (method_name == "euler") method = mm::IntegrationMethod::euler;
    else if (method_name != "rk4") {
        std::cerr << "simulate: method must be rk4 or euler\n";
        return kExitInvalid;
    }

    const int n = bs.n();
    mm::Vec z0(2 * n, 0.0);
    // Deterministic non-trivial start: unit momentum along q1.
    z0[n] = 1.0;

    mm::Trajectory traj;
    if (bs.nh && bs.nh->k() > 0) {
        traj = mm::integrate_constrained(*bs.nh, z0, dt, static_cast<int>(steps), method);
    } else {
        const mm::CmhSystem& sys = bs.system();
        mm::FieldFn field = [&sys](std::span<const double> z) { return mm::cmh_vf(sys, z); };
        traj = mm::integrate(field, z0, dt, static_cast<int>(steps), method);
    }

    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        std::cerr << "cannot write trajectory to '" << out_path << "'\n";
        return kExitInvalid;
    }
    out << "t";
    for (int i = 1; i <= n; ++i) out << ",q" << i;
    for (int i = 1; i <= n; ++i) out << ",p" << i;
    out << ",constraint_norm,H\n";
    char buf[64];
    auto put = [&](double x) {
        std::snprintf(buf, sizeof(buf), "%.17g", x);
        out << buf;
    };
    double h0 = 0.0, cmax = 0.0, hdrift = 0.0;
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        const mm::Vec& z = traj.states[i];
        double c = 0.0;
        if (bs.nh && bs.nh->k() > 0) c = mm::norm(bs.nh->constraint_map()(z));
        double h = bs.system().H(std::span<const double>(z));
        if (i == 0) h0 = h;
        cmax = std::max(cmax, c);
        hdrift = std::max(hdrift, std::abs(h - h0));
        put(traj.times[i]);
        for (double x : z) { out << ","; put(x); }
        out << ","; put(c);
        out << ","; put(h);
        out << "\n";
    }
    out << "# summary constraint_drift_max=";
    std::snprintf(buf, sizeof(buf), "%.17g", cmax);
    out << buf << " energy_drift_max=";
    std::snprintf(buf, sizeof(buf), "%.17g", hdrift);
    out << buf << "\n";
    return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"magnomech: residual checks and simulation for controlled magnetic "
                 "Hamiltonian systems"};
    app.require_subcommand(1);

    std::string file, suite = "all", report_path, out_path, method = "rk4";
    long long seed = -1;
    double tol = -1, t_end = 0, dt = 0;

    CLI::App* check = app.add_subcommand("check", "Run a verification suite on a scenario");
    check->add_option("file", file, "Scenario file or builtin name")->required();
    check->add_option("--suite", suite, "lemma34|hj1|hj2|dist|reduced|equivalence|all");
    check->add_option("--seed", seed, "Override the scenario sampling seed");
    check->add_option("--tol", tol, "Override every check tolerance");
    check->add_option("--report", report_path, "Write the deterministic report body to a file");

    CLI::App* simulate = app.add_subcommand("simulate", "Integrate a scenario and write a CSV");
    simulate->add_option("file", file, "Scenario file or builtin name")->required();
    simulate->add_option("--t-end", t_end, "Final time")->required();
    simulate->add_option("--dt", dt, "Step size")->required();
    simulate->add_option("--out", out_path, "Output CSV path")->required();
    simulate->add_option("--method", method, "rk4|euler");

    CLI::App* list = app.add_subcommand("list-scenarios", "List builtin scenarios");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitPass : kExitInvalid;
    }

    try {
        if (check->parsed()) return cmd_check(file, suite, seed, tol, report_path);
        if (simulate->parsed()) return cmd_simulate(file, t_end, dt, out_path, method);
        if (list->parsed()) {
            for (const auto& name : mm::builtin_scenario_names()) std::cout << name << "\n";
            return kExitPass;
        }
    } catch (const mm::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const mm::SchemaError& e) {
        std::cerr << "invalid scenario: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const mm::ContractError& e) {
        std::cerr << "invalid request: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const mm::Error& e) {
        std::cerr << "runtime failure: " << e.what() << "\n";
        return kExitFail;
    }
    return kExitInvalid;
}
