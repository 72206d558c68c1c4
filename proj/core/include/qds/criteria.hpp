#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qds/generator.hpp"
#include "qds/semigroup.hpp"

namespace qds {

enum class CertificateKind { cf, assumption_c, phi_domination, resolvent_bound, relative_bound };

const char* to_string(CertificateKind kind);

struct Constants {
  double a = 0.0;
  double b = 0.0;
  double p = 0.0;
  double delta = 0.0;
};

struct Margin {
  std::string label;
  double eps = 0.0;
  double value = 0.0;
};

/// One inequality family evaluated at one truncation. Margins are the largest
/// eigenvalue of the interior-projected defect (negative means satisfied).
struct CriterionCertificate {
  CertificateKind kind = CertificateKind::cf;
  std::size_t n = 0;
  std::size_t buffer = 0;
  Constants constants;
  std::vector<double> eps_grid;
  std::vector<Margin> margins;
  double slack = 0.0;
  bool pass = false;
  /// Hypotheses with no finite-dimensional content, recorded rather than checked.
  std::vector<std::string> analytic_hypotheses;
  std::string model_hash;

  double worst_margin() const;
};

/// τ = 1e-8·(1 + ‖C‖²).
double certificate_slack(const ComplexMatrix& c);

/// ε ∈ {2⁻¹, …, 2⁻ᵏ}.
std::vector<double> dyadic_eps_grid(int k);

/// D = CG + G†C + Σ L†CL − bC ⪯ τ on the interior, and M ⪯ C.
CriterionCertificate check_cf(const LindbladModel& model, const ComplexMatrix& c, double b,
                              std::optional<std::size_t> buffer = std::nullopt);

/// D₁(ε) = CG + G†C + (1−ε)C² − bC − aε^{−p}
/// D₂(ε) = CG + G†C + Σ L†CL − εC² − bC − aε^{−p}
CriterionCertificate check_assumption_c(const LindbladModel& model, const ComplexMatrix& c, const Constants& k,
                                        const std::vector<double>& eps_grid,
                                        std::optional<std::size_t> buffer = std::nullopt);

/// δM ⪯ C on the interior; margin = max_eig(δM − C).
CriterionCertificate check_phi_domination(const LindbladModel& model, const ComplexMatrix& c, double delta,
                                          std::optional<std::size_t> buffer = std::nullopt);

struct FitResult {
  Constants constants;
  bool feasible = false;
  CriterionCertificate certificate;
};

std::vector<double> default_p_candidates();
/// {0} ∪ {10^{-3 + k/4} : k = 0..28}.
std::vector<double> default_b_grid();

/// Smallest (a, then b, then p) making the Assumption C defects ⪯ 0 on the grid.
FitResult fit_constants(const LindbladModel& model, const ComplexMatrix& c, const std::vector<double>& eps_grid,
                        const std::vector<double>& p_candidates = default_p_candidates(),
                        std::optional<std::size_t> buffer = std::nullopt,
                        const std::vector<double>& b_grid = default_b_grid());

struct ResolventBoundResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  SeriesResult series;
};

/// (λ − b)⟨u, R_{λ,x}(C_ε) u⟩ ≤ ⟨u, C u⟩ + 2a(1 − x)^{−p}‖u‖²; margin = rhs − lhs.
ResolventBoundResult check_resolvent_bound(const LindbladModel& model, const ComplexMatrix& c, const Constants& k,
                                           const ComplexVector& u, double lambda, double x_weight, double eps);

enum class Verdict { conservative_consistent, non_conservative_consistent, inconclusive };

const char* to_string(Verdict v);

struct Extrapolation {
  double value = 0.0;
  double uncertainty = 0.0;
  double rate = 0.0;
  std::string method;
};

/// Fits d_N = d_∞ + c·r^N through the last three ladder points.
Extrapolation extrapolate_geometric(const std::vector<std::size_t>& ladder, const std::vector<double>& d);

struct VerdictReport {
  std::vector<std::size_t> n_ladder;
  double lambda = 0.0;
  double theta = 0.0;
  std::vector<double> deficiency;
  std::vector<double> weighted_series;
  std::vector<bool> weighted_converged;
  std::vector<DiagnosticTrace> traces;
  Extrapolation extrapolated;
  bool monotone = false;
  Verdict verdict = Verdict::inconclusive;
};

struct VerdictOptions {
  double theta = 1e-3;
  std::size_t k_max = 512;
  double weighted_tol = 1e-10;
  /// Ladder sizes evaluated concurrently; results do not depend on it.
  unsigned jobs = 1;
};

using ModelFactory = std::function<LindbladModel(std::size_t)>;
using VectorSelector = std::function<ComplexVector(std::size_t)>;

VerdictReport verdict(const ModelFactory& family, const std::vector<std::size_t>& ladder, double lambda,
                      const VectorSelector& u_selector, const VerdictOptions& options = {});

/// Basis vector |k⟩ of dimension n.
ComplexVector basis_vector(std::size_t n, std::size_t k);

}  // namespace qds
