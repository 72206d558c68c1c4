// Acceptance run: one PASS/FAIL line per criterion.
//
//   qds_acceptance [--known-failure k]...
//
// Exit status is 0 when the set of failing criteria equals the set passed via
// --known-failure (empty by default).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qds/bounds.hpp"
#include "qds/criteria.hpp"
#include "qds/errors.hpp"
#include "qds/models.hpp"
#include "qds/semigroup.hpp"

using namespace qds;

namespace {

// Tolerances.
constexpr double kAssumptionATol = 1e-11;
constexpr double kAnalyticQTol = 1e-9;
constexpr double kQuadratureQTol = 1e-6;
constexpr double kSeriesDirectTol = 1e-4;
constexpr double kPartitionTol = 1e-9;
constexpr double kMonotoneSlack = 1e-10;
constexpr double kConservativeDeficiency = 1e-6;
constexpr double kSurvivalRelTol = 0.01;
constexpr double kMeanTimeRelTol = 0.05;
constexpr double kMeanTimeClaimed = 1.0;
constexpr double kMeanTimeLambda = 1e-4;
constexpr double kExtrapolatedFloor = 0.1;
constexpr double kFitStabilityRel = 0.10;
constexpr double kFitStabilityAbs = 1e-9;
constexpr double kCommutatorTol = 1e-9;
constexpr double kResolventBoundMargin = -1e-6;
constexpr double kExponentTol = 1e-12;

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back(std::string(ok ? "  ok   " : "  FAIL ") + what);
  }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt2(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

// Traces collected across criteria; criterion 5 inspects all of them.
std::vector<std::pair<std::string, DiagnosticTrace>> g_traces;

void keep_trace(const std::string& label, DiagnosticTrace tr) { g_traces.emplace_back(label, std::move(tr)); }

LindbladModel exact_heavy_ion(std::size_t n) {
  HeavyIonParams p;
  p.n = n;
  p.mode = TruncationMode::exact;
  return heavy_ion(p).model;
}

std::vector<std::pair<std::string, std::function<LindbladModel(std::size_t)>>> exact_library() {
  return {{"damped_oscillator", [](std::size_t n) { return damped_oscillator(1.0, 0.5, n).model; }},
          {"heavy_ion", exact_heavy_ion}};
}

Outcome criterion1() {
  Outcome o;
  for (const auto& [name, make] : exact_library())
    for (std::size_t n : {16u, 32u, 64u}) {
      const LindbladModel m = make(n);
      const double scale = 1.0 + operator_norm(m.loss());
      const double literal = operator_norm(hermitian_part(m.g() + m.g().adjoint() + m.loss()));
      const double residual = assumption_a_residual(m);
      o.require(literal <= kAssumptionATol * scale && residual <= kAssumptionATol * scale,
                name + " N=" + std::to_string(n) + fmt2(": |G+G'+M| = %.2e, |G+G'+sum L'L| = %.2e", literal, residual));
    }
  return o;
}

Outcome criterion2() {
  Outcome o;
  const std::size_t n = 16;
  const LindbladModel m = damped_oscillator(1.0, 0.0, n).model;
  const ResolventMaps maps(m);
  const auto dim = static_cast<Eigen::Index>(n);
  const ComplexMatrix id = ComplexMatrix::Identity(dim, dim);
  for (double lambda : {0.5, 1.0, 2.0}) {
    const ComplexMatrix q = maps.q_lambda(id, lambda);
    ComplexMatrix analytic = ComplexMatrix::Zero(dim, dim);
    for (Eigen::Index k = 0; k < dim; ++k) analytic(k, k) = double(k) / (lambda + double(k));
    const double err_a = max_abs(q - analytic);

    // ∫₀^T e^{−λs} P(s)† Φ(I) P(s) ds by Simpson, with the tail below 1e-10.
    const ComplexMatrix phi = jump_map(m, id);
    const double horizon = std::log(operator_norm(phi) / (lambda * 1e-10)) / lambda;
    const ComplexMatrix quad = oracle::sylvester_simpson(lambda, m.g(), phi, horizon, 40000);
    const double err_q = max_abs(q - quad);
    o.require(err_a <= kAnalyticQTol && err_q <= kQuadratureQTol,
              fmt("lambda=%.1f", lambda) + fmt2(": analytic err %.2e, quadrature err %.2e", err_a, err_q));
  }
  return o;
}

Outcome criterion3() {
  Outcome o;
  const std::size_t n = 32;
  HeavyIonParams hp;
  hp.n = n;
  hp.mode = TruncationMode::exact;
  const HeavyIonModel hi = heavy_ion(hp);
  const ModelBundle osc = damped_oscillator(1.0, 0.5, n);
  const auto dim = static_cast<Eigen::Index>(n);
  const ComplexMatrix id = ComplexMatrix::Identity(dim, dim);
  const double lambda = 1.0;
  struct Case {
    std::string name;
    const LindbladModel* model;
    ComplexMatrix x;
  };
  const std::vector<Case> cases{{"damped_oscillator X=I", &osc.model, id},
                                {"damped_oscillator X=C", &osc.model, osc.c},
                                {"heavy_ion X=I", &hi.model, id},
                                {"heavy_ion X=C", &hi.model, hi.c}};
  for (const auto& c : cases) {
    const ResolventMaps maps(*c.model);
    for (std::size_t level : {0u, 1u, 5u}) {
      const ComplexVector u = basis_vector(n, level);
      const SeriesResult s = maps.series(c.x, lambda, 1.0, u);
      const double direct = resolvent_direct(*c.model, c.x, lambda, u);
      const double err = std::abs(s.value - direct);
      o.require(s.converged && err <= kSeriesDirectTol * std::max(1.0, std::abs(direct)),
                c.name + " u=|" + std::to_string(level) + ">" + fmt2(": series %.8f, direct %.8f", s.value, direct));
    }
    keep_trace(c.name, maps.trace(lambda, basis_vector(n, 5), 200));
  }
  return o;
}

Outcome criterion4() {
  Outcome o;
  oracle::Random rnd(20240601);
  const std::size_t n = 24;
  const auto dim = static_cast<Eigen::Index>(n);
  const ComplexMatrix id = ComplexMatrix::Identity(dim, dim);
  for (const auto& [name, make] : exact_library()) {
    const LindbladModel m = make(n);
    const ResolventMaps maps(m);
    for (double lambda : {0.5, 1.0, 2.0, 5.0}) {
      const ComplexMatrix p = maps.p_lambda(id, lambda);
      const ComplexMatrix q = maps.q_lambda(id, lambda);
      double worst = 0.0;
      for (int trial = 0; trial < 50; ++trial) {
        const ComplexVector u = rnd.complex_vector(dim);
        const double lhs = lambda * expectation(p, u) + expectation(q, u);
        worst = std::max(worst, std::abs(lhs - u.squaredNorm()) / std::max(1.0, u.squaredNorm()));
      }
      o.require(worst <= kPartitionTol, name + fmt2(" lambda=%.1f: worst residual %.2e", lambda, worst));
    }
  }
  return o;
}

Outcome criterion5() {
  Outcome o;
  // Extra traces on every library model, including the absorbing pump.
  const std::size_t n = 48;
  const ResolventMaps pump(quadratic_pump(n).model);
  const ResolventMaps osc(damped_oscillator(1.0, 0.5, n).model);
  const ResolventMaps hi(exact_heavy_ion(n));
  for (double lambda : {0.5, 1.0, 2.0})
    for (std::size_t level : {0u, 3u, 10u}) {
      const ComplexVector u = basis_vector(n, level);
      const std::string tag = fmt(" lambda=%.1f", lambda) + " u=|" + std::to_string(level) + ">";
      keep_trace("quadratic_pump" + tag, pump.trace(lambda, u, 200));
      keep_trace("damped_oscillator" + tag, osc.trace(lambda, u, 200));
      keep_trace("heavy_ion" + tag, hi.trace(lambda, u, 200));
    }
  double worst = 0.0;
  std::size_t longest = 0;
  for (const auto& [label, tr] : g_traces) {
    const double v = monotonicity_violation(tr);
    worst = std::max(worst, v);
    longest = std::max(longest, tr.values.size());
    if (v > kMonotoneSlack) o.require(false, label + fmt(": violation %.2e", v));
  }
  o.require(worst <= kMonotoneSlack, std::to_string(g_traces.size()) + " traces up to k=" +
                                         std::to_string(longest - 1) + fmt(", worst violation %.2e", worst));
  return o;
}

Outcome criterion6() {
  Outcome o;
  const ModelFactory family = [](std::size_t n) {
    return damped_oscillator(1.0, 0.0, n, TruncationMode::absorbing).model;
  };
  const VerdictReport rep = verdict(family, {16, 32, 64}, 1.0, [](std::size_t n) { return basis_vector(n, 1); });
  for (std::size_t i = 0; i < rep.n_ladder.size(); ++i) {
    o.require(std::abs(rep.deficiency[i]) <= kConservativeDeficiency,
              "N=" + std::to_string(rep.n_ladder[i]) + fmt(": deficiency %.2e", rep.deficiency[i]));
    keep_trace("verdict damped_oscillator N=" + std::to_string(rep.n_ladder[i]), rep.traces[i]);
  }
  o.require(rep.verdict == Verdict::conservative_consistent, std::string("verdict ") + to_string(rep.verdict));
  return o;
}

Outcome criterion7() {
  Outcome o;
  const std::size_t n = 128;
  const LindbladModel pump = quadratic_pump(n).model;
  const ComplexVector u0 = basis_vector(n, 0);

  const std::vector<double> ts{0.5, 1.0, 2.0};
  const std::vector<double> leak = leakage_curve(pump, u0, ts);
  const std::vector<double> survival = oracle::birth_chain_survival(ts);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double s = 1.0 - leak[i];
    const double rel = std::abs(s - survival[i]) / survival[i];
    o.require(rel <= kSurvivalRelTol,
              fmt("t=%.1f", ts[i]) + fmt2(": survival %.6f vs chain %.6f", s, survival[i]) + fmt(" (rel %.2e)", rel));
  }

  // Mean explosion time: ∫₀^∞ ⟨0, T_t(I) 0⟩ dt = lim_{λ→0} ⟨0, R_λ(I) 0⟩; the bias at
  // kMeanTimeLambda is about λ·E[τ²]/2.
  const auto dim = static_cast<Eigen::Index>(n);
  SeriesOptions so;
  so.k_max = 4096;
  const SeriesResult r0 = ResolventMaps(pump).series(ComplexMatrix::Identity(dim, dim), kMeanTimeLambda, 1.0, u0, so);
  const double mean = r0.value;
  const double rel_mean = std::abs(mean - kMeanTimeClaimed) / kMeanTimeClaimed;
  o.require(rel_mean <= kMeanTimeRelTol, fmt("mean explosion time %.6f vs claimed 1", mean) +
                                             fmt(" (rel %.2e)", rel_mean) +
                                             fmt("; series over visited levels gives %.6f", oracle::mean_explosion_time()));

  const ModelFactory family = [](std::size_t m) { return quadratic_pump(m).model; };
  const VerdictReport rep = verdict(family, {32, 64, 128}, 1.0, [](std::size_t m) { return basis_vector(m, 0); });
  bool increasing = true;
  std::string ladder;
  for (std::size_t i = 0; i < rep.n_ladder.size(); ++i) {
    if (i > 0 && !(rep.deficiency[i] > rep.deficiency[i - 1])) increasing = false;
    ladder += " N=" + std::to_string(rep.n_ladder[i]) + fmt(":%.6f", rep.deficiency[i]);
    keep_trace("verdict quadratic_pump N=" + std::to_string(rep.n_ladder[i]), rep.traces[i]);
  }
  o.require(increasing, "deficiency increasing along the ladder:" + ladder);
  o.require(rep.extrapolated.value >= kExtrapolatedFloor,
            fmt2("extrapolated deficiency %.6f +- %.2e", rep.extrapolated.value, rep.extrapolated.uncertainty) +
                " (" + rep.extrapolated.method + ")");
  o.require(rep.verdict == Verdict::non_conservative_consistent, std::string("verdict ") + to_string(rep.verdict));
  return o;
}

// Shared between criteria 8 and 9.
Constants g_fitted;
bool g_fitted_ok = false;

bool stable(double a, double b) {
  return std::abs(a - b) <= kFitStabilityRel * std::max(std::abs(a), std::abs(b)) + kFitStabilityAbs;
}

Outcome criterion8() {
  Outcome o;
  const auto grid = dyadic_eps_grid(8);
  std::vector<FitResult> fits;
  for (std::size_t n : {32u, 64u}) {
    HeavyIonParams p;
    p.n = n;
    const HeavyIonModel m = heavy_ion(p);
    const std::string tag = "N=" + std::to_string(n);
    const CriterionCertificate phi = check_phi_domination(m.model, m.c, 1.0);
    o.require(phi.pass, tag + fmt(": phi domination margin %.2e", phi.worst_margin()));
    const FitResult fit = fit_constants(m.model, m.c, grid);
    o.require(fit.feasible && fit.constants.p > 0.0 && fit.constants.p < 1.0,
              tag + ": fitted a=" + fmt("%.4g", fit.constants.a) + fmt2(" b=%.4g p=%.2f", fit.constants.b, fit.constants.p));
    const CriterionCertificate ac = check_assumption_c(m.model, m.c, fit.constants, grid);
    o.require(ac.pass, tag + fmt2(": assumption C worst margin %.2e (slack %.2e)", ac.worst_margin(), ac.slack));
    const FockBasis inner{m.model.basis().size, m.model.basis().buffer + 2};
    const ComplexMatrix& l = m.model.jumps()[0];
    const double alpha = p.alpha, w = p.w;
    const double comm = max_abs(interior_block(m.c * l - l * m.c + 2.0 * w * w * alpha * l, inner));
    o.require(comm <= kCommutatorTol, tag + fmt(": commutator residual %.2e", comm));
    fits.push_back(fit);
  }
  const Constants& k32 = fits[0].constants;
  const Constants& k64 = fits[1].constants;
  o.require(stable(k32.a, k64.a) && stable(k32.b, k64.b) && stable(k32.p, k64.p),
            "fitted constants stable between N=32 and N=64");
  g_fitted = k32;
  g_fitted_ok = fits[0].feasible;

  const ModelFactory family = [](std::size_t n) {
    HeavyIonParams p;
    p.n = n;
    return heavy_ion(p).model;
  };
  const VerdictReport rep = verdict(family, {16, 32, 64}, 1.0, [](std::size_t n) { return basis_vector(n, 1); });
  for (std::size_t i = 0; i < rep.n_ladder.size(); ++i)
    keep_trace("verdict heavy_ion N=" + std::to_string(rep.n_ladder[i]), rep.traces[i]);
  o.require(rep.verdict == Verdict::conservative_consistent,
            std::string("verdict ") + to_string(rep.verdict) + fmt(", extrapolated deficiency %.2e", rep.extrapolated.value));
  return o;
}

Outcome criterion9() {
  Outcome o;
  if (!g_fitted_ok) {
    o.require(false, "no feasible constants from criterion 8");
    return o;
  }
  HeavyIonParams p;
  p.n = 32;
  const HeavyIonModel m = heavy_ion(p);
  const double lambda = std::max(g_fitted.b, 1.0) + 1.0;
  for (std::size_t level : {0u, 1u}) {
    for (double x : {0.25, 0.5, 0.75}) {
      const ResolventBoundResult r =
          check_resolvent_bound(m.model, m.c, g_fitted, basis_vector(32, level), lambda, x, 1e-3);
      const std::string tag = "u=|" + std::to_string(level) + ">" + fmt(" x=%.2f", x);
      if (level == 0)
        o.require(r.margin >= kResolventBoundMargin,
                  tag + fmt2(": lhs %.6e rhs %.6e", r.lhs, r.rhs) + fmt(" margin %.2e", r.margin));
      else
        o.notes.push_back("  info " + tag + fmt2(": lhs %.6e rhs %.6e", r.lhs, r.rhs) + fmt(" margin %.2e", r.margin));
    }
  }
  return o;
}

Outcome criterion10() {
  Outcome o;
  const double p = lemma41_exponent(1, 0.0);
  o.require(std::abs(p - 1.0 / 3.0) <= kExponentTol, fmt("p = %.15f", p));
  const GridBasis grid{512, 20.0, 1};
  const RealVector w = sample_on_grid(grid, [](const RealVector& x) { return 1.0 / (1.0 + x.squaredNorm()); });
  const Lemma41Constants k = lemma41_constants(w, grid, 0.0);
  const auto eps = dyadic_eps_grid(10);
  const RelativeBoundCertificate cert = verify_relative_bound(w, grid, eps, k.a, k.p);
  double worst = 1e300;
  for (double m : cert.margins) worst = std::min(worst, m);
  o.require(cert.pass, fmt2("a = %.6f, worst margin %.3e", k.a, worst) + fmt(" (slack %.1e)", cert.slack));
  bool gated = false;
  try {
    lemma41_exponent(3, 0.5);
  } catch (const HypothesisViolation&) {
    gated = true;
  }
  o.require(gated, "hypothesis gate rejects n=3, alpha=0.5");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> known;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--known-failure") == 0 && i + 1 < argc) {
      known.insert(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: %s [--known-failure k]...\n", argv[0]);
      return 2;
    }
  }

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"Assumption A identity", criterion1},
      {"Q_lambda(I) vs analytic and quadrature", criterion2},
      {"resolvent series vs direct integration", criterion3},
      {"partition identity", criterion4},
      {"monotone decay of traces", criterion5},
      {"conservative control", criterion6},
      {"non-conservative control", criterion7},
      {"heavy-ion certificates", criterion8},
      {"resolvent bound", criterion9},
      {"relative bound at desk scale", criterion10}};

  std::set<int> failed;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2d %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, secs);
    for (const auto& n : o.notes) std::printf("%s\n", n.c_str());
    std::fflush(stdout);
    if (!o.pass) failed.insert(id);
  }

  std::printf("%zu of %zu criteria passed\n", criteria.size() - failed.size(), criteria.size());
  if (!known.empty()) {
    std::string s;
    for (int k : known) s += " " + std::to_string(k);
    std::printf("expected failures:%s -> %s\n", s.c_str(), failed == known ? "matched" : "MISMATCH");
  }
  return failed == known ? 0 : 1;
}
