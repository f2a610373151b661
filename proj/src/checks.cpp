#include "magnomech/checks.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>

#include "magnomech/rng.hpp"

namespace magnomech {

Suite suite_from_string(const std::string& name) {
    if (name == "lemma34") return Suite::lemma34;
    if (name == "hj1") return Suite::hj1;
    if (name == "hj2") return Suite::hj2;
    if (name == "dist") return Suite::dist;
    if (name == "reduced") return Suite::reduced;
    if (name == "equivalence") return Suite::equivalence;
    if (name == "all") return Suite::all;
    throw ContractError("unknown suite '" + name +
                        "' (expected lemma34|hj1|hj2|dist|reduced|equivalence|all)");
}

std::string suite_name(Suite s) {
    switch (s) {
        case Suite::lemma34: return "lemma34";
        case Suite::hj1: return "hj1";
        case Suite::hj2: return "hj2";
        case Suite::dist: return "dist";
        case Suite::reduced: return "reduced";
        case Suite::equivalence: return "equivalence";
        case Suite::all: return "all";
    }
    return "?";
}

bool Report::any_fail() const {
    for (const auto& r : records)
        if (r.verdict == CheckRecord::Verdict::fail) return true;
    return false;
}

int Report::count(CheckRecord::Verdict v) const {
    int c = 0;
    for (const auto& r : records)
        if (r.verdict == v) ++c;
    return c;
}

namespace {

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3e", x);
    return buf;
}

}  // namespace

std::string Report::body() const {
    std::ostringstream os;
    os << "# magnomech check report\n";
    os << "scenario: " << scenario << "\n";
    os << "suite: " << suite << "\n";
    os << "seed: " << seed << "\n";
    os << "checks:\n";
    for (const auto& r : records) {
        const char* v = r.verdict == CheckRecord::Verdict::pass   ? "PASS"
                        : r.verdict == CheckRecord::Verdict::fail ? "FAIL"
                                                                  : "SKIP";
        os << "[" << v << "] " << r.id << " | " << r.anchor << " | max=" << fmt(r.max_residual)
           << " tol=" << fmt(r.tol) << " samples=" << r.samples << " flags=";
        if (r.flags.empty()) {
            os << "-";
        } else {
            for (std::size_t i = 0; i < r.flags.size(); ++i)
                os << (i ? "," : "") << r.flags[i];
        }
        os << "\n";
    }
    os << "summary: " << count(CheckRecord::Verdict::pass) << " pass, "
       << count(CheckRecord::Verdict::fail) << " fail, " << count(CheckRecord::Verdict::skipped)
       << " skipped\n";
    return os.str();
}

std::string Report::timing() const {
    std::ostringstream os;
    os << "# timing (ms)\n";
    for (const auto& r : records) os << r.id << ": " << fmt(r.wall_ms) << "\n";
    return os.str();
}

namespace {

struct Outcome {
    double max_residual = 0.0;
    int samples = 0;
    std::vector<std::string> flags;
    bool skipped = false;
};

Outcome missing_input(const std::string& what) {
    Outcome o;
    o.skipped = true;
    o.flags.push_back("skipped-missing-input:" + what);
    return o;
}

Outcome hypothesis_violation(const std::string& what, double residual) {
    Outcome o;
    o.skipped = true;
    o.max_residual = residual;
    o.flags.push_back("hypothesis-not-satisfied:" + what);
    return o;
}

class Runner {
public:
    Runner(Report& rep, const BuiltScenario& bs, std::uint64_t seed, double tol_override)
        : rep_(rep), bs_(bs), seed_(seed), tol_override_(tol_override) {}

    void add(const std::string& id, const std::string& anchor, double tol,
             const std::function<Outcome(Rng&)>& body) {
        CheckRecord rec;
        rec.id = id;
        rec.anchor = anchor;
        rec.tol = tol_override_ > 0.0 ? tol_override_ : tol;
        Rng rng(seed_ * 0x100000001b3ULL + hash_id(id));
        auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = body(rng);
        } catch (const Error& e) {
            out.flags.push_back(std::string("error:") + e.what());
            out.max_residual = std::numeric_limits<double>::infinity();
        }
        auto t1 = std::chrono::steady_clock::now();
        rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        rec.max_residual = out.max_residual;
        rec.samples = out.samples;
        rec.flags = out.flags;
        if (out.skipped)
            rec.verdict = CheckRecord::Verdict::skipped;
        else
            rec.verdict = out.max_residual <= rec.tol ? CheckRecord::Verdict::pass
                                                      : CheckRecord::Verdict::fail;
        rep_.records.push_back(std::move(rec));
    }

    const BuiltScenario& bs() const { return bs_; }

private:
    static std::uint64_t hash_id(const std::string& s) {
        std::uint64_t h = 1469598103934665603ULL;
        for (char c : s) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
        return h;
    }

    Report& rep_;
    const BuiltScenario& bs_;
    std::uint64_t seed_;
    double tol_override_;
};

Vec sample_vec(Rng& rng, int dim, double box) {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = rng.uniform(-box, box);
    return v;
}

Vec sample_on_M(const NonholonomicCmhSystem& nh, Rng& rng, double box) {
    Vec z = sample_vec(rng, 2 * nh.n(), box);
    return project_to_M(nh, z);
}

// ---------------------------------------------------------------------------
// lemma34 suite
// ---------------------------------------------------------------------------

void run_lemma34(Runner& r) {
    const BuiltScenario& bs = r.bs();
    const CmhSystem& sys = bs.system();
    const int n = sys.n;
    const int count = bs.meta.sample_count;
    const double box = bs.meta.box;
    const DerivativeEngine& eng = sys.engine;

    r.add("beta-skewness", "magnetic pairing matrix stays skew", 1e-12, [&](Rng& rng) {
        Outcome o;
        o.samples = count;
        for (int i = 0; i < count; ++i) {
            Vec q = sample_vec(rng, n, box);
            o.max_residual = std::max(o.max_residual, sys.beta.skewness_residual(q));
        }
        return o;
    });

    r.add("beta-closedness", "magnetic two-form is closed", 1e-10, [&](Rng& rng) {
        Outcome o;
        o.samples = count;
        for (int i = 0; i < count; ++i) {
            Vec q = sample_vec(rng, n, box);
            o.max_residual = std::max(o.max_residual, closedness_residual(sys.beta, eng, q));
        }
        return o;
    });

    r.add("omega-antisymmetry", "twisted pairing is antisymmetric and bilinear", 1e-12,
          [&](Rng& rng) {
              Outcome o;
              o.samples = count;
              for (int i = 0; i < count; ++i) {
                  Vec z = sample_vec(rng, 2 * n, box);
                  Vec v = sample_vec(rng, 2 * n, 1.0);
                  Vec w = sample_vec(rng, 2 * n, 1.0);
                  Vec u = sample_vec(rng, 2 * n, 1.0);
                  double a = rng.uniform(-2.0, 2.0), b = rng.uniform(-2.0, 2.0);
                  double anti = std::abs(omega_B(sys.beta, z, v, w) + omega_B(sys.beta, z, w, v));
                  Vec lin = add(scale(a, v), scale(b, u));
                  double bil = std::abs(omega_B(sys.beta, z, lin, w) -
                                        a * omega_B(sys.beta, z, v, w) -
                                        b * omega_B(sys.beta, z, u, w));
                  o.max_residual = std::max({o.max_residual, anti, bil});
                  o.max_residual =
                      std::max(o.max_residual, std::abs(omega_B(sys.beta, z, v, v)));
              }
              return o;
          });

    r.add("pullback-section-i",
          "pullback along the one-form section equals minus the twisted base pairing", 1e-8,
          [&](Rng& rng) {
              if (!bs.gamma) return missing_input("gamma");
              Outcome o;
              o.samples = count;
              PhaseMap lam = section_as_phase_map(*bs.gamma);
              for (int i = 0; i < count; ++i) {
                  Vec z = sample_vec(rng, 2 * n, box);
                  Vec v = sample_vec(rng, 2 * n, 1.0);
                  Vec w = sample_vec(rng, 2 * n, 1.0);
                  double lhs = pullback_two_form(lam, sys.beta, eng, z, v, w);
                  Mat pairing = exterior_derivative_matrix(*bs.gamma, eng,
                                                           std::span<const double>(z.data(), n));
                  if (!sys.beta.is_zero())
                      pairing = pairing + sys.beta.pairing(std::span<const double>(z.data(), n));
                  double rhs = 0.0;
                  for (int a = 0; a < n; ++a)
                      for (int b = 0; b < n; ++b) rhs += v[a] * pairing(a, b) * w[b];
                  o.max_residual = std::max(o.max_residual, std::abs(lhs + rhs));
              }
              return o;
          });

    r.add("pullback-section-ii",
          "pairing a section push-forward splits into a vertical part and the base pairing", 1e-8,
          [&](Rng& rng) {
              if (!bs.gamma) return missing_input("gamma");
              Outcome o;
              o.samples = count;
              for (int i = 0; i < count; ++i) {
                  Vec z = sample_vec(rng, 2 * n, box);
                  Vec v = sample_vec(rng, 2 * n, 1.0);
                  Vec w = sample_vec(rng, 2 * n, 1.0);
                  std::span<const double> q(z.data(), n);
                  Mat j = eng.jacobian(bs.gamma->gammabar, q);
                  auto t_lambda = [&](const Vec& x) {
                      Vec out(2 * n, 0.0);
                      Vec xq(x.begin(), x.begin() + n);
                      Vec jx = j.apply(xq);
                      for (int a = 0; a < n; ++a) {
                          out[a] = xq[a];
                          out[n + a] = jx[a];
                      }
                      return out;
                  };
                  Vec lam_z = bs.gamma->section_point(q);
                  Vec lv = t_lambda(v);
                  Vec lw = t_lambda(w);
                  double lhs = omega_B(sys.beta, lam_z, lv, w);
                  double term1 = omega_B(sys.beta, z, v, sub(w, lw));
                  Mat pairing = exterior_derivative_matrix(*bs.gamma, eng, q);
                  if (!sys.beta.is_zero()) pairing = pairing + sys.beta.pairing(q);
                  double term2 = 0.0;
                  for (int a = 0; a < n; ++a)
                      for (int b = 0; b < n; ++b) term2 += v[a] * pairing(a, b) * w[b];
                  o.max_residual = std::max(o.max_residual, std::abs(lhs - term1 + term2));
              }
              return o;
          });

    r.add("hamilton-defining-canonical", "canonical field satisfies its defining equation",
          1e-10, [&](Rng& rng) {
              Outcome o;
              o.samples = count;
              MagneticField zero = MagneticField::zero(n);
              for (int i = 0; i < count; ++i) {
                  Vec z = sample_vec(rng, 2 * n, box);
                  Vec w = sample_vec(rng, 2 * n, 1.0);
                  Vec x = canonical_vf(sys, z);
                  Vec g = eng.gradient(sys.H, z);
                  o.max_residual =
                      std::max(o.max_residual, std::abs(omega_B(zero, z, x, w) - dot(g, w)));
              }
              return o;
          });

    r.add("hamilton-defining-magnetic", "magnetic field satisfies its defining equation", 1e-10,
          [&](Rng& rng) {
              Outcome o;
              o.samples = count;
              for (int i = 0; i < count; ++i) {
                  Vec z = sample_vec(rng, 2 * n, box);
                  Vec w = sample_vec(rng, 2 * n, 1.0);
                  Vec x = magnetic_vf(sys, z);
                  Vec g = eng.gradient(sys.H, z);
                  o.max_residual =
                      std::max(o.max_residual, std::abs(omega_B(sys.beta, z, x, w) - dot(g, w)));
              }
              return o;
          });

    r.add("magnetic-deviation-equation",
          "deviation field pairs with the canonical form like the magnetic term", 1e-10,
          [&](Rng& rng) {
              Outcome o;
              o.samples = count;
              MagneticField zero = MagneticField::zero(n);
              for (int i = 0; i < count; ++i) {
                  Vec z = sample_vec(rng, 2 * n, box);
                  Vec w = sample_vec(rng, 2 * n, 1.0);
                  Vec x0 = magnetic_deviation_vf(sys, z);
                  Vec xb = magnetic_vf(sys, z);
                  std::span<const double> q(z.data(), n);
                  Mat beta = sys.beta.pairing(q);
                  double rhs = 0.0;
                  for (int a = 0; a < n; ++a)
                      for (int b = 0; b < n; ++b) rhs += xb[a] * beta(a, b) * w[b];
                  double lhs = omega_B(zero, z, x0, w);
                  o.max_residual = std::max(o.max_residual, std::abs(lhs - rhs));
              }
              return o;
          });

    r.add("field-decomposition",
          "closed-loop field splits into canonical, deviation, and lift parts", 1e-12,
          [&](Rng& rng) {
              Outcome o;
              o.samples = count;
              for (int i = 0; i < count; ++i) {
                  Vec z = sample_vec(rng, 2 * n, box);
                  Vec lhs = cmh_vf(sys, z);
                  Vec rhs = add(canonical_vf(sys, z), magnetic_vanishing_residual(sys, z));
                  o.max_residual = std::max(o.max_residual, max_abs(sub(lhs, rhs)));
              }
              return o;
          });

    r.add("vanishing-identity",
          "closed-loop field minus the canonical field equals the vanishing residual", 1e-12,
          [&](Rng& rng) {
              Outcome o;
              o.samples = count;
              for (int i = 0; i < count; ++i) {
                  Vec z = sample_vec(rng, 2 * n, box);
                  Vec diff = sub(cmh_vf(sys, z), canonical_vf(sys, z));
                  Vec res = magnetic_vanishing_residual(sys, z);
                  o.max_residual = std::max(o.max_residual, max_abs(sub(diff, res)));
              }
              return o;
          });

    r.add("vertical-lifts", "lift contributions and the deviation field are vertical", 1e-12,
          [&](Rng& rng) {
              Outcome o;
              o.samples = count;
              for (int i = 0; i < count; ++i) {
                  Vec z = sample_vec(rng, 2 * n, box);
                  Vec x0 = magnetic_deviation_vf(sys, z);
                  for (int a = 0; a < n; ++a)
                      o.max_residual = std::max(o.max_residual, std::abs(x0[a]));
                  Vec xt = cmh_vf(sys, z);
                  Vec xb = magnetic_vf(sys, z);
                  for (int a = 0; a < n; ++a)
                      o.max_residual = std::max(o.max_residual, std::abs(xt[a] - xb[a]));
              }
              return o;
          });
}

// ---------------------------------------------------------------------------
// hj1 suite
// ---------------------------------------------------------------------------

void run_hj1(Runner& r) {
    const BuiltScenario& bs = r.bs();
    const CmhSystem& sys = bs.system();
    const int n = sys.n;
    const int count = bs.meta.sample_count;
    const double box = bs.meta.box;
    const DerivativeEngine& eng = sys.engine;

    r.add("type1-solution",
          "closed stationary candidates transport the dynamics onto the magnetic field", 1e-8,
          [&](Rng& rng) {
              if (!bs.gamma) return missing_input("gamma");
              double hyp_closed = 0.0, hyp_energy = 0.0;
              std::vector<Vec> qs;
              for (int i = 0; i < count; ++i) qs.push_back(sample_vec(rng, n, box));
              for (const Vec& q : qs) {
                  hyp_closed =
                      std::max(hyp_closed, dgamma_plus_B_residual(*bs.gamma, sys.beta, eng, q));
                  hyp_energy =
                      std::max(hyp_energy, section_energy_residual(*bs.gamma, sys.H, eng, q));
              }
              if (hyp_closed > 1e-8)
                  return hypothesis_violation("dgamma-plus-B", hyp_closed);
              if (hyp_energy > 1e-8)
                  return hypothesis_violation("section-stationarity", hyp_energy);
              Outcome o;
              o.samples = count;
              for (const Vec& q : qs)
                  o.max_residual = std::max(o.max_residual, max_abs(hj1_residual(*bs.gamma, sys, q)));
              return o;
          });

    r.add("compensating-field-closed", "field rebuilt from the candidate stays closed", 1e-10,
          [&](Rng& rng) {
              if (!bs.gamma) return missing_input("gamma");
              MagneticField comp = compensating_magnetic_field(*bs.gamma, eng);
              Outcome o;
              o.samples = count;
              for (int i = 0; i < count; ++i) {
                  Vec q = sample_vec(rng, n, box);
                  o.max_residual = std::max(o.max_residual, closedness_residual(comp, eng, q));
                  o.max_residual = std::max(o.max_residual, comp.skewness_residual(q));
              }
              return o;
          });

    r.add("compensated-type1",
          "rebuilding the magnetic form from the candidate makes it a transport solution", 1e-8,
          [&](Rng& rng) {
              if (!bs.gamma) return missing_input("gamma");
              MagneticField comp = compensating_magnetic_field(*bs.gamma, eng);
              CmhSystem rebuilt(sys.n, sys.H, comp, sys.force, sys.control, eng);
              std::vector<Vec> qs;
              for (int i = 0; i < count; ++i) qs.push_back(sample_vec(rng, n, box));
              double hyp_energy = 0.0;
              for (const Vec& q : qs)
                  hyp_energy =
                      std::max(hyp_energy, section_energy_residual(*bs.gamma, sys.H, eng, q));
              if (hyp_energy > 1e-8)
                  return hypothesis_violation("section-stationarity", hyp_energy);
              Outcome o;
              o.samples = count;
              for (const Vec& q : qs) {
                  double closed = dgamma_plus_B_residual(*bs.gamma, comp, eng, q);
                  o.max_residual = std::max(o.max_residual, closed);
                  o.max_residual =
                      std::max(o.max_residual, max_abs(hj1_residual(*bs.gamma, rebuilt, q)));
              }
              return o;
          });
}

// ---------------------------------------------------------------------------
// hj2 suite
// ---------------------------------------------------------------------------

void run_hj2(Runner& r) {
    const BuiltScenario& bs = r.bs();
    const CmhSystem& sys = bs.system();
    const int n = sys.n;
    const int count = bs.meta.sample_count;
    const double box = bs.meta.box;
    const DerivativeEngine& eng = sys.engine;

    r.add("symplectic-candidate", "candidate phase map preserves the twisted form", 1e-6,
          [&](Rng& rng) {
              if (!bs.epsilon) return missing_input("epsilon");
              Outcome o;
              int reps = std::min(count, 20);
              o.samples = reps;
              for (int i = 0; i < reps; ++i) {
                  Vec z = sample_vec(rng, 2 * n, box);
                  Vec v = sample_vec(rng, 2 * n, 1.0);
                  Vec w = sample_vec(rng, 2 * n, 1.0);
                  o.max_residual = std::max(
                      o.max_residual, symplectic_residual(*bs.epsilon, sys.beta, eng, z, v, w));
              }
              return o;
          });

    r.add("type2-biconditional", "the two transport equations pass or fail together", 0.0,
          [&](Rng& rng) {
              if (!bs.gamma) return missing_input("gamma");
              if (!bs.epsilon) return missing_input("epsilon");
              const double tol = 1e-6;
              Outcome o;
              int reps = std::min(count, 50);
              o.samples = reps;
              int disagreements = 0;
              for (int i = 0; i < reps; ++i) {
                  Vec z = sample_vec(rng, 2 * n, box);
                  auto [r1, r2] = hj2_residuals(*bs.gamma, *bs.epsilon, sys, z);
                  bool p1 = max_abs(r1) <= tol;
                  bool p2 = max_abs(r2) <= tol;
                  if (p1 != p2) ++disagreements;
              }
              o.max_residual = disagreements;
              return o;
          });

    r.add("type2-solution", "solution pair satisfies both transport equations on the section",
          1e-6, [&](Rng& rng) {
              if (!bs.gamma) return missing_input("gamma");
              if (!bs.epsilon) return missing_input("epsilon");
              std::vector<Vec> qs;
              int reps = std::min(count, 50);
              for (int i = 0; i < reps; ++i) qs.push_back(sample_vec(rng, n, box));
              double hyp_closed = 0.0, hyp_energy = 0.0, hyp_sympl = 0.0;
              for (const Vec& q : qs) {
                  hyp_closed =
                      std::max(hyp_closed, dgamma_plus_B_residual(*bs.gamma, sys.beta, eng, q));
                  hyp_energy =
                      std::max(hyp_energy, section_energy_residual(*bs.gamma, sys.H, eng, q));
              }
              if (hyp_closed > 1e-8) return hypothesis_violation("dgamma-plus-B", hyp_closed);
              if (hyp_energy > 1e-8)
                  return hypothesis_violation("section-stationarity", hyp_energy);
              for (int i = 0; i < 5; ++i) {
                  Vec z = sample_vec(rng, 2 * n, box);
                  Vec v = sample_vec(rng, 2 * n, 1.0);
                  Vec w = sample_vec(rng, 2 * n, 1.0);
                  hyp_sympl = std::max(hyp_sympl,
                                       symplectic_residual(*bs.epsilon, sys.beta, eng, z, v, w));
              }
              if (hyp_sympl > 1e-6) return hypothesis_violation("epsilon-symplectic", hyp_sympl);
              Outcome o;
              o.samples = static_cast<int>(qs.size());
              for (const Vec& q : qs) {
                  Vec z = bs.gamma->section_point(q);
                  auto [r1, r2] = hj2_residuals(*bs.gamma, *bs.epsilon, sys, z);
                  o.max_residual = std::max({o.max_residual, max_abs(r1), max_abs(r2)});
              }
              return o;
          });
}

// ---------------------------------------------------------------------------
// dist suite
// ---------------------------------------------------------------------------

void run_dist(Runner& r) {
    const BuiltScenario& bs = r.bs();
    if (!bs.nh) {
        r.add("dist-suite", "constrained machinery", 0.0,
              [&](Rng&) { return missing_input("lagrangian/constraints"); });
        return;
    }
    const NonholonomicCmhSystem& nh = *bs.nh;
    const int n = nh.n();
    const int count = bs.meta.sample_count;
    const double box = bs.meta.box;
    const DerivativeEngine& eng = nh.sys.engine;

    r.add("frame-projector", "restriction projector is idempotent with the right range and kernel",
          1e-10, [&](Rng& rng) {
              Outcome o;
              int reps = std::min(count, 30);
              o.samples = reps;
              for (int i = 0; i < reps; ++i) {
                  Vec z = sample_on_M(nh, rng, box);
                  ConstraintFrame fr = frame_at(nh, z);
                  if (!fr.compatible) return hypothesis_violation("compatibility", 1.0);
                  Mat tt = fr.tau * fr.tau - fr.tau;
                  o.max_residual = std::max(o.max_residual, max_abs(tt));
                  Mat range = fr.tau * fr.basis_K - fr.basis_K;
                  o.max_residual = std::max(o.max_residual, max_abs(range));
                  Mat kernel = fr.tau * fr.basis_Kperp;
                  o.max_residual = std::max(o.max_residual, max_abs(kernel));
              }
              return o;
          });

    r.add("frame-pairing", "the twisted form pairs the distribution and its complement to zero",
          1e-10, [&](Rng& rng) {
              Outcome o;
              int reps = std::min(count, 30);
              o.samples = reps;
              for (int i = 0; i < reps; ++i) {
                  Vec z = sample_on_M(nh, rng, box);
                  ConstraintFrame fr = frame_at(nh, z);
                  for (int a = 0; a < fr.basis_K.cols(); ++a) {
                      Vec sk = fr.s.apply(fr.basis_K.col(a));
                      for (int b = 0; b < fr.basis_Kperp.cols(); ++b)
                          o.max_residual = std::max(
                              o.max_residual, std::abs(dot(fr.basis_Kperp.col(b), sk)));
                  }
              }
              return o;
          });

    r.add("frame-flags", "admissibility and compatibility hold on the sampled membrane", 0.0,
          [&](Rng& rng) {
              Outcome o;
              int reps = std::min(count, 30);
              o.samples = reps;
              for (int i = 0; i < reps; ++i) {
                  Vec z = sample_on_M(nh, rng, box);
                  ConstraintFrame fr = frame_at(nh, z);
                  if (!fr.admissible || !fr.compatible) o.max_residual += 1.0;
              }
              return o;
          });

    r.add("tau-reconstruction", "the constrained field is the projection of the magnetic field",
          1e-9, [&](Rng& rng) {
              Outcome o;
              o.samples = count;
              for (int i = 0; i < count; ++i) {
                  Vec z = sample_on_M(nh, rng, box);
                  ConstraintFrame fr = frame_at(nh, z);
                  Vec xk = distributional_vf(nh, fr);
                  Vec proj = fr.project(magnetic_vf(nh.sys, z));
                  o.max_residual = std::max(o.max_residual, max_abs(sub(xk, proj)));
              }
              return o;
          });

    r.add("oracle-agreement", "Gram-system and multiplier routes agree on the constrained field",
          1e-8, [&](Rng& rng) {
              Outcome o;
              o.samples = count;
              for (int i = 0; i < count; ++i) {
                  Vec z = sample_on_M(nh, rng, box);
                  ConstraintFrame fr = frame_at(nh, z);
                  Vec a = distributional_vf(nh, fr);
                  Vec b = multiplier_oracle_vf(nh, z);
                  o.max_residual = std::max(o.max_residual, max_abs(sub(a, b)));
              }
              return o;
          });

    r.add("dist-decomposition",
          "constrained closed-loop field splits into canonical, deviation, and lift parts", 1e-10,
          [&](Rng& rng) {
              Outcome o;
              int reps = std::min(count, 50);
              o.samples = reps;
              for (int i = 0; i < reps; ++i) {
                  Vec z = sample_on_M(nh, rng, box);
                  ConstraintFrame fr = frame_at(nh, z);
                  Vec xt = distributional_cmh_vf(nh, fr);
                  Vec xk_can = fr.project(canonical_vf(nh.sys, z));
                  Vec rk = dist_magnetic_vanishing_residual(nh, fr);
                  o.max_residual = std::max(o.max_residual, max_abs(sub(xt, add(xk_can, rk))));
                  // the vanishing residual itself stays inside the distribution
                  o.max_residual = std::max(o.max_residual, max_abs(sub(fr.project(rk), rk)));
              }
              return o;
          });

    r.add("energy-orthogonality", "the constrained field does no work on the Hamiltonian", 1e-10,
          [&](Rng& rng) {
              Outcome o;
              int reps = std::min(count, 50);
              o.samples = reps;
              for (int i = 0; i < reps; ++i) {
                  Vec z = sample_on_M(nh, rng, box);
                  ConstraintFrame fr = frame_at(nh, z);
                  Vec xk = distributional_vf(nh, fr);
                  Vec g = eng.gradient(nh.sys.H, z);
                  o.max_residual = std::max(o.max_residual, std::abs(dot(g, xk)));
              }
              return o;
          });

    r.add("bracket-generating", "the constraint distribution is completely nonholonomic", 0.0,
          [&](Rng& rng) {
              Outcome o;
              o.samples = 1;
              Vec q0 = sample_vec(rng, n, 0.5);
              BracketResult br = bracket_generating_check(nh.dist, eng, q0, 4);
              o.max_residual = n - br.achieved_rank;
              return o;
          });

    r.add("fiber-membership-gamma", "the magnetic field stays over the constraint distribution "
          "along candidates into the membrane", 1e-8, [&](Rng& rng) {
              if (!bs.gamma) return missing_input("gamma");
              std::vector<Vec> qs;
              int reps = std::min(count, 50);
              for (int i = 0; i < reps; ++i) qs.push_back(sample_vec(rng, n, box));
              Lemma63Result res = lemma63_gamma_check(*bs.gamma, nh, qs, 1e-8);
              if (!res.hypothesis_ok)
                  return hypothesis_violation("image-in-membrane", res.hypothesis_residual);
              Outcome o;
              o.samples = reps;
              o.max_residual = res.max_residual;
              return o;
          });

    r.add("fiber-membership-eps", "the magnetic field stays over the constraint distribution "
          "along membrane-preserving phase maps", 1e-8, [&](Rng& rng) {
              if (!bs.epsilon) return missing_input("epsilon");
              std::vector<Vec> zs;
              int reps = std::min(count, 50);
              for (int i = 0; i < reps; ++i) zs.push_back(sample_on_M(nh, rng, box));
              Lemma63Result res = lemma63_eps_check(*bs.epsilon, nh, zs, 1e-8);
              if (!res.hypothesis_ok)
                  return hypothesis_violation("eps-preserves-membrane", res.hypothesis_residual);
              Outcome o;
              o.samples = reps;
              o.max_residual = res.max_residual;
              return o;
          });

    r.add("type1-dist", "closed-on-distribution candidates transport the constrained dynamics",
          1e-7, [&](Rng& rng) {
              if (!bs.gamma) return missing_input("gamma");
              std::vector<Vec> qs;
              int reps = std::min(count, 50);
              for (int i = 0; i < reps; ++i) qs.push_back(sample_vec(rng, n, box));
              double hyp_closed = 0.0, hyp_energy = 0.0, hyp_img = 0.0, hyp_tan = 0.0;
              for (const Vec& q : qs) {
                  hyp_closed = std::max(hyp_closed, dgamma_plus_B_on_D_residual(
                                                        *bs.gamma, nh.sys.beta, nh.dist, eng, q));
                  ScalarField h_sec = nh.sys.H.compose(section_map(*bs.gamma));
                  Vec g = eng.gradient(h_sec, q);
                  Mat d = nh.dist.kernel_basis(q);
                  for (int c = 0; c < d.cols(); ++c)
                      hyp_energy = std::max(hyp_energy, std::abs(dot(d.col(c), g)));
              }
              if (hyp_closed > 1e-8)
                  return hypothesis_violation("dgamma-plus-B-on-D", hyp_closed);
              if (hyp_energy > 1e-8)
                  return hypothesis_violation("stationarity-on-D", hyp_energy);
              Outcome o;
              o.samples = reps;
              for (const Vec& q : qs) {
                  DistHj1Result res = hj1_dist_residual(*bs.gamma, nh, q);
                  hyp_img = std::max(hyp_img, res.image_residual);
                  hyp_tan = std::max(hyp_tan, res.tangent_residual);
                  o.max_residual = std::max(o.max_residual, max_abs(res.residual));
              }
              if (hyp_img > 1e-8) return hypothesis_violation("image-in-membrane", hyp_img);
              if (hyp_tan > 1e-8) return hypothesis_violation("tangent-in-K", hyp_tan);
              return o;
          });

    const double type2_tol = bs.epsilon_is_flow ? 1e-5 : 1e-7;
    r.add("type2-dist", "solution pairs satisfy both constrained transport equations", type2_tol,
          [&](Rng& rng) {
              if (!bs.gamma) return missing_input("gamma");
              if (!bs.epsilon) return missing_input("epsilon");
              std::vector<Vec> qs;
              int reps = std::min(count, 30);
              for (int i = 0; i < reps; ++i) qs.push_back(sample_vec(rng, n, box));
              double hyp_closed = 0.0;
              for (const Vec& q : qs)
                  hyp_closed = std::max(hyp_closed, dgamma_plus_B_on_D_residual(
                                                        *bs.gamma, nh.sys.beta, nh.dist, eng, q));
              if (hyp_closed > 1e-8)
                  return hypothesis_violation("dgamma-plus-B-on-D", hyp_closed);
              Outcome o;
              o.samples = reps;
              double hyp_mem = 0.0;
              for (const Vec& q : qs) {
                  Vec z = bs.gamma->section_point(q);
                  DistHj2Result res = hj2_dist_residuals(*bs.gamma, *bs.epsilon, nh, z);
                  hyp_mem = std::max(hyp_mem, res.eps_membership_residual);
                  o.max_residual = std::max({o.max_residual, max_abs(res.r1), max_abs(res.r2)});
              }
              if (hyp_mem > 1e-8)
                  return hypothesis_violation("eps-preserves-membrane", hyp_mem);
              return o;
          });

    r.add("type2-dist-biconditional",
          "the two constrained transport equations pass or fail together", 0.0, [&](Rng& rng) {
              if (!bs.gamma) return missing_input("gamma");
              if (!bs.epsilon) return missing_input("epsilon");
              const double tol = 1e-6;
              Outcome o;
              int reps = std::min(count, 30);
              o.samples = reps;
              int disagreements = 0;
              for (int i = 0; i < reps; ++i) {
                  Vec z = sample_on_M(nh, rng, box);
                  DistHj2Result res = hj2_dist_residuals(*bs.gamma, *bs.epsilon, nh, z);
                  bool p1 = max_abs(res.r1) <= tol;
                  bool p2 = max_abs(res.r2) <= tol;
                  if (p1 != p2) ++disagreements;
              }
              o.max_residual = disagreements;
              return o;
          });

    r.add("constraint-drift", "re-projected integration keeps the trajectory on the membrane",
          1e-6, [&](Rng& rng) {
              Outcome o;
              Vec z0 = sample_on_M(nh, rng, 1.0);
              Trajectory traj = integrate_constrained(nh, z0, 1e-3, 2000);
              o.samples = static_cast<int>(traj.states.size());
              for (const Vec& z : traj.states)
                  o.max_residual = std::max(o.max_residual, norm(nh.constraint_map()(z)));
              return o;
          });

    r.add("constrained-energy-drift", "the uncontrolled constrained flow conserves energy", 1e-6,
          [&](Rng& rng) {
              Outcome o;
              Vec z0 = sample_on_M(nh, rng, 1.0);
              FieldFn field = [&nh](std::span<const double> z) {
                  return multiplier_field_t<double>(nh, z);
              };
              Trajectory traj = integrate(field, z0, 1e-3, 2000);
              o.samples = static_cast<int>(traj.states.size());
              double h0 = nh.sys.H(std::span<const double>(traj.states.front()));
              for (const Vec& z : traj.states)
                  o.max_residual = std::max(
                      o.max_residual, std::abs(nh.sys.H(std::span<const double>(z)) - h0));
              return o;
          });
}

// ---------------------------------------------------------------------------
// reduced suite
// ---------------------------------------------------------------------------

void run_reduced(Runner& r) {
    const BuiltScenario& bs = r.bs();
    if (!bs.nh || !bs.symmetry) {
        r.add("reduced-suite", "translation-symmetry reduction", 0.0, [&](Rng&) {
            return missing_input(bs.nh ? "symmetry" : "lagrangian/constraints");
        });
        return;
    }
    const NonholonomicCmhSystem& nh = *bs.nh;
    const TranslationSymmetry& sym = *bs.symmetry;
    const int n = nh.n();
    const int count = bs.meta.sample_count;
    const double box = bs.meta.box;

    auto make_shifts = [&](Rng& rng, int how_many) {
        std::vector<Vec> shifts;
        for (int i = 0; i < how_many; ++i) shifts.push_back(sample_vec(rng, sym.s(), 2.0));
        return shifts;
    };

    r.add("group-invariance", "system data is invariant under cyclic translations", 1e-12,
          [&](Rng& rng) {
              Outcome o;
              int reps = std::min(count, 30);
              o.samples = reps;
              std::vector<Vec> zs;
              for (int i = 0; i < reps; ++i) zs.push_back(sample_vec(rng, 2 * n, box));
              o.max_residual = invariance_residual(nh, sym, zs, make_shifts(rng, 5));
              return o;
          });

    r.add("reduced-frame-pairing",
          "the reduced carrier is twisted-orthogonal to the vertical overlap", 1e-10,
          [&](Rng& rng) {
              Outcome o;
              int reps = std::min(count, 20);
              o.samples = reps;
              for (int i = 0; i < reps; ++i) {
                  Vec z = sample_on_M(nh, rng, box);
                  ReducedFrame rf = reduced_frame_at(nh, sym, z);
                  for (int a = 0; a < rf.basis_U.cols(); ++a) {
                      Vec su = rf.full.s.apply(rf.basis_U.col(a));
                      for (int b = 0; b < rf.basis_VK.cols(); ++b)
                          o.max_residual =
                              std::max(o.max_residual, std::abs(dot(rf.basis_VK.col(b), su)));
                  }
                  if (!rf.reduced_compatible)
                      return hypothesis_violation("reduced-compatibility", 1.0);
              }
              return o;
          });

    r.add("pairing-descent", "the reduced pairing matches the unreduced pairing of lifts", 1e-10,
          [&](Rng& rng) {
              Outcome o;
              int reps = std::min(count, 20);
              o.samples = reps;
              for (int i = 0; i < reps; ++i) {
                  Vec z = sample_on_M(nh, rng, box);
                  ReducedFrame rf = reduced_frame_at(nh, sym, z);
                  Mat d = sym.drop_matrix();
                  for (int a = 0; a < rf.basis_U.cols(); ++a)
                      for (int b = 0; b < rf.basis_U.cols(); ++b) {
                          Vec ua = rf.basis_U.col(a);
                          Vec ub = rf.basis_U.col(b);
                          double big = dot(ua, rf.full.s.apply(ub));
                          Vec da = d.apply(ua);
                          Vec db = d.apply(ub);
                          // coordinates in the reduced basis
                          Vec ca(rf.basis_Kbar.cols()), cb(rf.basis_Kbar.cols());
                          for (int c = 0; c < rf.basis_Kbar.cols(); ++c) {
                              ca[c] = dot(rf.basis_Kbar.col(c), da);
                              cb[c] = dot(rf.basis_Kbar.col(c), db);
                          }
                          double red = 0.0;
                          for (int x = 0; x < rf.basis_Kbar.cols(); ++x)
                              for (int y = 0; y < rf.basis_Kbar.cols(); ++y)
                                  red += ca[x] * rf.gram_Kbar(x, y) * cb[y];
                          o.max_residual = std::max(o.max_residual, std::abs(big - red));
                      }
              }
              return o;
          });

    r.add("lift-independence", "the reduced pairing does not depend on the chosen lifts", 1e-9,
          [&](Rng& rng) {
              Outcome o;
              int reps = std::min(count, 20);
              o.samples = reps;
              for (int i = 0; i < reps; ++i) {
                  Vec z = sample_on_M(nh, rng, box);
                  ReducedFrame rf = reduced_frame_at(nh, sym, z);
                  o.max_residual =
                      std::max(o.max_residual, lift_independence_residual(nh, sym, rf, rng));
              }
              return o;
          });

    r.add("relatedness-plain", "the reduced constrained field matches the dropped full field",
          1e-8, [&](Rng& rng) {
              Outcome o;
              int reps = std::min(count, 50);
              o.samples = reps;
              for (int i = 0; i < reps; ++i) {
                  Vec z = sample_on_M(nh, rng, box);
                  o.max_residual = std::max(
                      o.max_residual, relatedness_residual(nh, sym, z, RelatednessKind::plain));
              }
              return o;
          });

    r.add("relatedness-cmh", "the reduced closed-loop field matches the dropped full field",
          1e-8, [&](Rng& rng) {
              Outcome o;
              int reps = std::min(count, 50);
              o.samples = reps;
              for (int i = 0; i < reps; ++i) {
                  Vec z = sample_on_M(nh, rng, box);
                  o.max_residual = std::max(
                      o.max_residual, relatedness_residual(nh, sym, z, RelatednessKind::cmh));
              }
              return o;
          });

    r.add("reduced-decomposition",
          "the reduced closed-loop field splits against the reduced canonical part", 1e-9,
          [&](Rng& rng) {
              Outcome o;
              int reps = std::min(count, 30);
              o.samples = reps;
              for (int i = 0; i < reps; ++i) {
                  Vec z = sample_on_M(nh, rng, box);
                  ReducedFrame rf = reduced_frame_at(nh, sym, z);
                  ReducedVanishing rv = reduced_magnetic_vanishing_residual(nh, sym, rf);
                  o.max_residual = std::max(o.max_residual, rv.identity_residual);
              }
              return o;
          });

    r.add("reduced-vanishing-drop",
          "the reduced vanishing residual is the projected drop of the full one", 1e-8,
          [&](Rng& rng) {
              Outcome o;
              int reps = std::min(count, 30);
              o.samples = reps;
              for (int i = 0; i < reps; ++i) {
                  Vec z = sample_on_M(nh, rng, box);
                  ReducedFrame rf = reduced_frame_at(nh, sym, z);
                  ReducedVanishing rv = reduced_magnetic_vanishing_residual(nh, sym, rf);
                  o.max_residual = std::max(o.max_residual, rv.drop_consistency);
              }
              return o;
          });

    r.add("type1-reduced", "invariant solutions transport the reduced constrained dynamics",
          1e-7, [&](Rng& rng) {
              if (!bs.gamma) return missing_input("gamma");
              Outcome o;
              int reps = std::min(count, 30);
              o.samples = reps;
              double hyp = 0.0;
              for (int i = 0; i < reps; ++i) {
                  Vec q = sample_vec(rng, n, box);
                  ReducedHj1Result res = reduced_hj1_residual(*bs.gamma, nh, sym, q);
                  if (!res.hypotheses_ok) {
                      hyp = std::max({res.image_residual, res.invariance_residual,
                                      res.tangent_residual});
                      return hypothesis_violation("type1-reduced-hypotheses", hyp);
                  }
                  o.max_residual = std::max(o.max_residual, max_abs(res.residual));
              }
              return o;
          });

    const double type2_tol = bs.epsilon_is_flow ? 1e-5 : 1e-7;
    r.add("type2-reduced", "invariant solution pairs satisfy both reduced transport equations",
          type2_tol, [&](Rng& rng) {
              if (!bs.gamma) return missing_input("gamma");
              if (!bs.epsilon) return missing_input("epsilon");
              Outcome o;
              int reps = std::min(count, 20);
              o.samples = reps;
              for (int i = 0; i < reps; ++i) {
                  Vec q = sample_vec(rng, n, box);
                  Vec z = bs.gamma->section_point(q);
                  ReducedHj2Result res = reduced_hj2_residuals(*bs.gamma, *bs.epsilon, nh, sym, z);
                  if (!res.hypotheses_ok)
                      return hypothesis_violation(
                          "type2-reduced-hypotheses",
                          std::max(res.eps_membership_residual, res.eps_invariance_residual));
                  o.max_residual = std::max({o.max_residual, max_abs(res.r1), max_abs(res.r2)});
              }
              return o;
          });

    r.add("reduction-correspondence",
          "unreduced and reduced transport verdicts agree at every sample", 0.0, [&](Rng& rng) {
              if (!bs.gamma) return missing_input("gamma");
              if (!bs.epsilon) return missing_input("epsilon");
              std::vector<Vec> zs;
              int reps = std::min(count, 20);
              for (int i = 0; i < reps; ++i) zs.push_back(sample_on_M(nh, rng, box));
              CorrespondenceReport rep =
                  hj2_reduction_correspondence(*bs.gamma, *bs.epsilon, nh, sym, zs, 1e-6);
              Outcome o;
              o.samples = rep.samples;
              o.max_residual = rep.samples - rep.agreements;
              return o;
          });
}

// ---------------------------------------------------------------------------
// equivalence suite
// ---------------------------------------------------------------------------

void run_equivalence(Runner& r) {
    const BuiltScenario& bs = r.bs();
    if (!bs.phi) {
        r.add("equivalence-suite", "system transport across a diffeomorphism", 0.0,
              [&](Rng&) { return missing_input("phi"); });
        return;
    }
    const CmhSystem& sys2 = bs.system();
    const ConfigDiffeo& phi = *bs.phi;
    const int n = sys2.n;
    const int count = std::min(bs.meta.sample_count, 50);
    const double box = bs.meta.box;
    const DerivativeEngine& eng = sys2.engine;
    SystemPair pair = make_conjugated_pair(sys2, phi);

    r.add("diffeo-inverse", "the declared inverse really inverts the diffeomorphism", 1e-10,
          [&](Rng& rng) {
              Outcome o;
              o.samples = count;
              for (int i = 0; i < count; ++i) {
                  Vec q = sample_vec(rng, n, box);
                  o.max_residual = std::max(o.max_residual, phi.inverse_residual(eng, q));
              }
              return o;
          });

    r.add("lift-functoriality", "lifting a composition reverses the composition of lifts",
          1e-10, [&](Rng& rng) {
              Outcome o;
              o.samples = count;
              ConfigDiffeo composed = ConfigDiffeo::compose(phi, phi);
              PhaseMap lift_comp = cotangent_lift_map(composed, eng);
              PhaseMap lift_phi = cotangent_lift_map(phi, eng);
              for (int i = 0; i < count; ++i) {
                  Vec z = sample_vec(rng, 2 * n, box);
                  Vec a = lift_comp(z);
                  Vec b = lift_phi(lift_phi(z));
                  o.max_residual = std::max(o.max_residual, max_abs(sub(a, b)));
              }
              return o;
          });

    r.add("lift-symplecticity", "the cotangent lift intertwines the two twisted forms", 1e-8,
          [&](Rng& rng) {
              Outcome o;
              o.samples = count;
              PhaseMap lift = cotangent_lift_map(phi, eng);
              for (int i = 0; i < count; ++i) {
                  Vec z2 = sample_vec(rng, 2 * n, box);
                  Vec v = sample_vec(rng, 2 * n, 1.0);
                  Vec w = sample_vec(rng, 2 * n, 1.0);
                  Vec z1 = lift(z2);
                  Mat t = eng.jacobian(lift, z2);
                  double pulled = omega_B(pair.sys1.beta, z1, t.apply(v), t.apply(w));
                  double base = omega_B(sys2.beta, z2, v, w);
                  o.max_residual = std::max(o.max_residual, std::abs(pulled - base));
              }
              return o;
          });

    r.add("cmh2", "the conjugated pair produces the same closed-loop dynamics", 1e-6,
          [&](Rng& rng) {
              Outcome o;
              o.samples = count;
              for (int i = 0; i < count; ++i) {
                  Vec z2 = sample_vec(rng, 2 * n, box);
                  o.max_residual = std::max(o.max_residual, cmh2_residual(pair, z2));
              }
              return o;
          });

    r.add("vanishing-correspondence",
          "the vanishing residual transports along the lift across the pair", 1e-8,
          [&](Rng& rng) {
              Outcome o;
              o.samples = count;
              PhaseMap lift = cotangent_lift_map(phi, eng);
              for (int i = 0; i < count; ++i) {
                  Vec z2 = sample_vec(rng, 2 * n, box);
                  Vec z1 = lift(z2);
                  Vec r1 = magnetic_vanishing_residual(pair.sys1, z1);
                  Mat t = eng.jacobian(lift, z2);
                  Vec r2 = t.apply(magnetic_vanishing_residual(pair.sys2, z2));
                  o.max_residual = std::max(o.max_residual, max_abs(sub(r1, r2)));
              }
              return o;
          });

    r.add("transport-type1", "transported one-form solutions keep their verdict", 0.0,
          [&](Rng& rng) {
              if (!bs.gamma) return missing_input("gamma");
              std::vector<Vec> qs, zs;
              for (int i = 0; i < count; ++i) {
                  qs.push_back(sample_vec(rng, n, box));
                  zs.push_back(sample_vec(rng, 2 * n, box));
              }
              TransportReport rep =
                  solution_transport_check(pair, *bs.gamma, std::nullopt, qs, zs, 1e-6);
              if (!rep.hypothesis_ok)
                  return hypothesis_violation("pair-equivalence", rep.hypothesis_residual);
              Outcome o;
              o.samples = count;
              o.max_residual = rep.verdicts_match ? 0.0 : 1.0;
              return o;
          });

    r.add("transport-type2", "transported phase-map solutions keep their verdict", 0.0,
          [&](Rng& rng) {
              if (!bs.gamma) return missing_input("gamma");
              if (!bs.epsilon) return missing_input("epsilon");
              std::vector<Vec> qs, zs;
              int reps = std::min(count, 20);
              for (int i = 0; i < reps; ++i) {
                  Vec q = sample_vec(rng, n, box);
                  qs.push_back(q);
                  zs.push_back(bs.gamma->section_point(q));
              }
              TransportReport rep =
                  solution_transport_check(pair, *bs.gamma, bs.epsilon, qs, zs, 1e-5);
              if (!rep.hypothesis_ok)
                  return hypothesis_violation("pair-equivalence", rep.hypothesis_residual);
              Outcome o;
              o.samples = reps;
              o.max_residual = rep.verdicts_match ? 0.0 : 1.0;
              return o;
          });
}

}  // namespace

Report run_checks(const BuiltScenario& bs, Suite suite, const CheckOptions& opts) {
    Report rep;
    rep.scenario = bs.meta.name;
    rep.suite = suite_name(suite);
    rep.seed = opts.seed ? *opts.seed : bs.meta.seed;
    Runner runner(rep, bs, rep.seed, opts.tol_override);
    if (suite == Suite::lemma34 || suite == Suite::all) run_lemma34(runner);
    if (suite == Suite::hj1 || suite == Suite::all) run_hj1(runner);
    if (suite == Suite::hj2 || suite == Suite::all) run_hj2(runner);
    if (suite == Suite::dist || suite == Suite::all) run_dist(runner);
    if (suite == Suite::reduced || suite == Suite::all) run_reduced(runner);
    if (suite == Suite::equivalence || suite == Suite::all) run_equivalence(runner);
    return rep;
}

}  // namespace magnomech
