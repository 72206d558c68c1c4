#include "qds/criteria.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "qds/errors.hpp"

namespace qds {

const char* to_string(CertificateKind kind) {
  switch (kind) {
    case CertificateKind::cf: return "CF";
    case CertificateKind::assumption_c: return "AssumptionC";
    case CertificateKind::phi_domination: return "PhiDomination";
    case CertificateKind::resolvent_bound: return "ResolventBound";
    case CertificateKind::relative_bound: return "RelativeBound";
  }
  return "?";
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::conservative_consistent: return "conservative-consistent";
    case Verdict::non_conservative_consistent: return "non-conservative-consistent";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

double CriterionCertificate::worst_margin() const {
  double w = -std::numeric_limits<double>::infinity();
  for (const auto& m : margins) w = std::max(w, m.value);
  return w;
}

double certificate_slack(const ComplexMatrix& c) {
  const double norm = operator_norm(c);
  return 1e-8 * (1.0 + norm * norm);
}

std::vector<double> dyadic_eps_grid(int k) {
  std::vector<double> grid;
  for (int j = 1; j <= k; ++j) grid.push_back(std::ldexp(1.0, -j));
  return grid;
}

ComplexVector basis_vector(std::size_t n, std::size_t k) {
  if (k >= n) throw InputError("basis_vector: index out of range");
  ComplexVector u = ComplexVector::Zero(static_cast<Eigen::Index>(n));
  u[static_cast<Eigen::Index>(k)] = 1.0;
  return u;
}

namespace {

FockBasis resolve_basis(const LindbladModel& model, std::optional<std::size_t> buffer) {
  FockBasis b = model.basis();
  if (buffer) b.buffer = *buffer;
  b.validate();
  return b;
}

void require_psd(const ComplexMatrix& c, const LindbladModel& model, const char* what) {
  const auto n = static_cast<Eigen::Index>(model.dim());
  if (c.rows() != n || c.cols() != n) throw InputError(std::string(what) + ": C dimension mismatch");
  require_hermitian(c, what);
  if (min_eig(c) < -1e-12 * (1.0 + operator_norm(c)))
    throw InputError(std::string(what) + ": C must be positive semidefinite");
}

double interior_max_eig(const ComplexMatrix& d, const FockBasis& basis) {
  return max_eig(hermitian_part(interior_block(d, basis)));
}

CriterionCertificate new_certificate(CertificateKind kind, const LindbladModel& model, const FockBasis& basis,
                                     const ComplexMatrix& c) {
  CriterionCertificate cert;
  cert.kind = kind;
  cert.n = model.dim();
  cert.buffer = basis.buffer;
  cert.slack = certificate_slack(c);
  cert.model_hash = model_fingerprint(model);
  return cert;
}

void finish(CriterionCertificate& cert) {
  cert.pass = std::all_of(cert.margins.begin(), cert.margins.end(),
                          [&](const Margin& m) { return m.value <= cert.slack; });
}

// Pieces of the Assumption C defects that do not depend on (a, b, p).
struct DefectParts {
  ComplexMatrix base;     // CG + G†C
  ComplexMatrix c2;       // C²
  ComplexMatrix phi_c;    // Σ L†CL
};

DefectParts defect_parts(const LindbladModel& model, const ComplexMatrix& c) {
  DefectParts d;
  d.base = c * model.g() + model.g().adjoint() * c;
  d.c2 = c * c;
  d.phi_c = jump_map(model, c);
  return d;
}

void check_eps_grid(const std::vector<double>& eps_grid, const char* what) {
  if (eps_grid.empty()) throw InputError(std::string(what) + ": empty ε grid");
  for (double e : eps_grid)
    if (!(e > 0.0 && e < 1.0)) throw InputError(std::string(what) + ": ε values must lie in (0, 1)");
}

}  // namespace

CriterionCertificate check_cf(const LindbladModel& model, const ComplexMatrix& c, double b,
                              std::optional<std::size_t> buffer) {
  require_psd(c, model, "check_cf");
  if (!(b >= 0.0)) throw InputError("check_cf: b must be non-negative");
  const FockBasis basis = resolve_basis(model, buffer);
  CriterionCertificate cert = new_certificate(CertificateKind::cf, model, basis, c);
  cert.constants.b = b;
  const ComplexMatrix d = c * model.g() + model.g().adjoint() * c + jump_map(model, c) - b * c;
  cert.margins.push_back({"form", 0.0, interior_max_eig(d, basis)});
  cert.margins.push_back({"M<=C", 0.0, interior_max_eig(model.loss() - c, basis)});
  cert.analytic_hypotheses = {"C^{1/2} core condition for the generator domain",
                              "domain inclusion of G in the form domain of C"};
  finish(cert);
  return cert;
}

CriterionCertificate check_assumption_c(const LindbladModel& model, const ComplexMatrix& c, const Constants& k,
                                        const std::vector<double>& eps_grid, std::optional<std::size_t> buffer) {
  if (!(k.p > 0.0 && k.p < 1.0)) throw InputError("check_assumption_c: p must lie in (0, 1)");
  if (!(k.a >= 0.0) || !(k.b >= 0.0)) throw InputError("check_assumption_c: a and b must be non-negative");
  check_eps_grid(eps_grid, "check_assumption_c");
  require_psd(c, model, "check_assumption_c");
  const FockBasis basis = resolve_basis(model, buffer);
  CriterionCertificate cert = new_certificate(CertificateKind::assumption_c, model, basis, c);
  cert.constants = k;
  cert.eps_grid = eps_grid;

  const DefectParts parts = defect_parts(model, c);
  const auto n = static_cast<Eigen::Index>(model.dim());
  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  for (double eps : eps_grid) {
    const double shift = k.a * std::pow(eps, -k.p);
    const ComplexMatrix d1 = parts.base + (1.0 - eps) * parts.c2 - k.b * c - shift * id;
    const ComplexMatrix d2 = parts.base + parts.phi_c - eps * parts.c2 - k.b * c - shift * id;
    cert.margins.push_back({"D1", eps, interior_max_eig(d1, basis)});
    cert.margins.push_back({"D2", eps, interior_max_eig(d2, basis)});
  }
  cert.analytic_hypotheses = {"inequalities checked on the listed finite ε grid only"};
  finish(cert);
  return cert;
}

CriterionCertificate check_phi_domination(const LindbladModel& model, const ComplexMatrix& c, double delta,
                                          std::optional<std::size_t> buffer) {
  if (!(delta > 0.0)) throw InputError("check_phi_domination: delta must be positive");
  require_psd(c, model, "check_phi_domination");
  const FockBasis basis = resolve_basis(model, buffer);
  CriterionCertificate cert = new_certificate(CertificateKind::phi_domination, model, basis, c);
  cert.constants.delta = delta;
  cert.margins.push_back({"deltaM<=C", 0.0, interior_max_eig(delta * model.loss() - c, basis)});
  cert.analytic_hypotheses = {"-2Re<u,Gu> = sum ||L u||^2 on a core"};
  finish(cert);
  return cert;
}

std::vector<double> default_p_candidates() {
  std::vector<double> p;
  for (int k = 1; k <= 9; ++k) p.push_back(0.1 * k);
  return p;
}

std::vector<double> default_b_grid() {
  std::vector<double> b{0.0};
  for (int k = 0; k <= 28; ++k) b.push_back(std::pow(10.0, -3.0 + 0.25 * k));
  return b;
}

FitResult fit_constants(const LindbladModel& model, const ComplexMatrix& c, const std::vector<double>& eps_grid,
                        const std::vector<double>& p_candidates, std::optional<std::size_t> buffer,
                        const std::vector<double>& b_grid) {
  if (p_candidates.empty() || b_grid.empty()) throw InputError("fit_constants: empty candidate grid");
  for (double p : p_candidates)
    if (!(p > 0.0 && p < 1.0)) throw InputError("fit_constants: p candidates must lie in (0, 1)");
  for (double b : b_grid)
    if (!(b >= 0.0)) throw InputError("fit_constants: b candidates must be non-negative");
  check_eps_grid(eps_grid, "fit_constants");
  require_psd(c, model, "fit_constants");
  const FockBasis basis = resolve_basis(model, buffer);

  const DefectParts parts = defect_parts(model, c);
  const ComplexMatrix c_int = interior_block(c, basis);
  std::vector<ComplexMatrix> e1, e2;
  for (double eps : eps_grid) {
    e1.push_back(hermitian_part(interior_block(parts.base + (1.0 - eps) * parts.c2, basis)));
    e2.push_back(hermitian_part(interior_block(parts.base + parts.phi_c - eps * parts.c2, basis)));
  }

  struct Candidate {
    double a, b, p;
  };
  std::optional<Candidate> best;
  auto better = [](const Candidate& x, const Candidate& y) {
    const double tol = 1e-12 * std::max(1.0, std::max(std::abs(x.a), std::abs(y.a)));
    if (std::abs(x.a - y.a) > tol) return x.a < y.a;
    if (x.b != y.b) return x.b < y.b;
    return x.p < y.p;
  };

  for (double b : b_grid) {
    std::vector<double> excess;  // per (ε, defect)
    for (std::size_t j = 0; j < eps_grid.size(); ++j) {
      excess.push_back(std::max(0.0, max_eig(e1[j] - b * c_int)));
      excess.push_back(std::max(0.0, max_eig(e2[j] - b * c_int)));
    }
    for (double p : p_candidates) {
      double a = 0.0;
      for (std::size_t j = 0; j < eps_grid.size(); ++j) {
        const double w = std::pow(eps_grid[j], p);
        a = std::max({a, w * excess[2 * j], w * excess[2 * j + 1]});
      }
      const Candidate cand{a, b, p};
      if (!best || better(cand, *best)) best = cand;
    }
  }

  FitResult r;
  r.constants = {best->a, best->b, best->p, 0.0};
  r.certificate = check_assumption_c(model, c, r.constants, eps_grid, basis.buffer);
  r.feasible = r.certificate.pass;
  return r;
}

ResolventBoundResult check_resolvent_bound(const LindbladModel& model, const ComplexMatrix& c, const Constants& k,
                                           const ComplexVector& u, double lambda, double x_weight, double eps) {
  if (!(lambda > std::max(k.b, 1.0))) throw InputError("check_resolvent_bound: lambda must exceed max(b, 1)");
  if (!(x_weight > 0.0 && x_weight < 1.0)) throw InputError("check_resolvent_bound: x must lie in (0, 1)");
  if (!(k.p > 0.0 && k.p < 1.0)) throw InputError("check_resolvent_bound: p must lie in (0, 1)");
  if (!(eps >= 0.0)) throw InputError("check_resolvent_bound: eps must be non-negative");
  require_psd(c, model, "check_resolvent_bound");
  if (!is_interior(u, model.basis())) throw InputError("check_resolvent_bound: u must lie in the interior subspace");

  ResolventBoundResult r;
  SeriesOptions opts;
  opts.tol = 1e-12;
  r.series = ResolventMaps(model).series(regularize(c, eps), lambda, x_weight, u, opts);
  r.lhs = (lambda - k.b) * r.series.value;
  r.rhs = expectation(c, u) + 2.0 * k.a * std::pow(1.0 - x_weight, -k.p) * u.squaredNorm();
  r.margin = r.rhs - r.lhs;
  return r;
}

Extrapolation extrapolate_geometric(const std::vector<std::size_t>& ladder, const std::vector<double>& d) {
  if (ladder.size() < 3 || d.size() != ladder.size()) throw InputError("extrapolate: need at least three points");
  const std::size_t m = ladder.size();
  const double n1 = static_cast<double>(ladder[m - 3]);
  const double n2 = static_cast<double>(ladder[m - 2]);
  const double n3 = static_cast<double>(ladder[m - 1]);
  const double d1 = d[m - 3], d2 = d[m - 2], d3 = d[m - 1];
  const double s1 = d2 - d1, s2 = d3 - d2;
  const double g1 = n2 - n1, g2 = n3 - n2;
  const double scale = std::max({std::abs(d1), std::abs(d2), std::abs(d3)});

  Extrapolation e;
  if (std::max(std::abs(s1), std::abs(s2)) <= 1e-12 * (1.0 + scale)) {
    e.method = "constant";
    e.value = d3;
    e.uncertainty = std::max(std::abs(s1), std::abs(s2));
    return e;
  }
  const double rho = s2 / s1;
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    e.method = "non-monotone";
    e.value = d3;
    e.uncertainty = std::abs(s1) + std::abs(s2);
    return e;
  }
  auto ratio = [&](double r) { return std::pow(r, g1) * (std::pow(r, g2) - 1.0) / (std::pow(r, g1) - 1.0); };
  if (rho >= (g2 / g1) * (1.0 - 1e-12)) {
    e.method = "no-geometric-decay";
    e.value = d3;
    e.uncertainty = std::abs(s2);
    return e;
  }
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ratio(mid) < rho ? lo : hi) = mid;
  }
  const double r = 0.5 * (lo + hi);
  const double rg2 = std::pow(r, g2);
  e.method = "geometric";
  e.rate = r;
  e.value = d3 - s2 * rg2 / (rg2 - 1.0);
  const double c = (d3 - e.value) / std::pow(r, n3);
  double residual = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double model_value = e.value + c * std::pow(r, static_cast<double>(ladder[i]));
    if (std::isfinite(model_value)) residual = std::max(residual, std::abs(d[i] - model_value));
  }
  e.uncertainty = residual + std::abs(d3 - e.value);
  return e;
}

VerdictReport verdict(const ModelFactory& family, const std::vector<std::size_t>& ladder, double lambda,
                      const VectorSelector& u_selector, const VerdictOptions& options) {
  if (ladder.size() < 3) throw InputError("verdict: ladder needs at least three truncation sizes");
  for (std::size_t i = 1; i < ladder.size(); ++i)
    if (ladder[i] <= ladder[i - 1]) throw InputError("verdict: ladder must be strictly ascending");
  if (!(lambda > 0.0)) throw InputError("verdict: lambda must be positive");

  VerdictReport rep;
  rep.n_ladder = ladder;
  rep.lambda = lambda;
  rep.theta = options.theta;
  const std::size_t m = ladder.size();
  rep.deficiency.resize(m);
  rep.weighted_series.resize(m);
  rep.weighted_converged.resize(m);
  rep.traces.resize(m);

  auto cell = [&](std::size_t i) {
    const std::size_t n = ladder[i];
    const LindbladModel model = family(n);
    if (model.mode() != TruncationMode::absorbing)
      throw ContractViolation("verdict: ladder models must use absorbing truncation");
    const ComplexVector u = u_selector(n);
    const ResolventMaps maps(model);
    const auto dim = static_cast<Eigen::Index>(model.dim());
    SeriesOptions so;
    so.k_max = options.k_max;
    const SeriesResult s = maps.series(ComplexMatrix::Identity(dim, dim), lambda, 1.0, u, so);
    rep.deficiency[i] = u.squaredNorm() - lambda * s.value;
    DiagnosticTrace tr = maps.trace(lambda, u, options.k_max, options.weighted_tol);
    rep.weighted_series[i] = tr.weighted_partial_sums.back();
    rep.weighted_converged[i] = tr.values.size() <= options.k_max;
    rep.traces[i] = std::move(tr);
  };

  const std::size_t workers = std::clamp<std::size_t>(options.jobs, 1, m);
  if (workers == 1) {
    for (std::size_t i = 0; i < m; ++i) cell(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(m);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i; (i = next++) < m;) {
          try {
            cell(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  bool up = true, down = true;
  for (std::size_t i = 1; i < rep.deficiency.size(); ++i) {
    const double step = rep.deficiency[i] - rep.deficiency[i - 1];
    if (step < -1e-12) up = false;
    if (step > 1e-12) down = false;
  }
  rep.monotone = up || down;
  rep.extrapolated = extrapolate_geometric(ladder, rep.deficiency);
  const double d_inf = rep.extrapolated.value;
  if (d_inf <= options.theta)
    rep.verdict = Verdict::conservative_consistent;
  else if (d_inf >= 10.0 * options.theta && rep.monotone)
    rep.verdict = Verdict::non_conservative_consistent;
  else
    rep.verdict = Verdict::inconclusive;
  return rep;
}

}  // namespace qds
