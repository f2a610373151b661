#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "magnomech/scenario.hpp"

namespace magnomech {

enum class Suite { lemma34, hj1, hj2, dist, reduced, equivalence, all };

Suite suite_from_string(const std::string& name);
std::string suite_name(Suite s);

struct CheckRecord {
    std::string id;
    std::string anchor;  // human-readable claim the check exercises
    double max_residual = 0.0;
    double tol = 0.0;
    int samples = 0;
    std::vector<std::string> flags;
    enum class Verdict { pass, fail, skipped } verdict = Verdict::skipped;
    double wall_ms = 0.0;
};

struct Report {
    std::string scenario;
    std::string suite;
    std::uint64_t seed = 0;
    std::vector<CheckRecord> records;

    bool any_fail() const;
    int count(CheckRecord::Verdict v) const;
    // Deterministic given scenario + seed; excludes wall times.
    std::string body() const;
    std::string timing() const;
};

struct CheckOptions {
    std::optional<std::uint64_t> seed;  // overrides the scenario seed
    double tol_override = -1.0;         // > 0 replaces every check tolerance
};

Report run_checks(const BuiltScenario& bs, Suite suite, const CheckOptions& opts = {});

}  // namespace magnomech
