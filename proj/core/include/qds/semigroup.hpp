#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "qds/generator.hpp"

namespace qds {

/// P(t) = e^{tG}.
ComplexMatrix propagate(const LindbladModel& model, double t);

struct EvolveOptions {
  double tol = 1e-9;
  double initial_step = 1e-3;
  double min_step = 1e-13;
  std::size_t max_steps = 20'000'000;
};

/// Integrates dX/dt = L(X) with RK4 and step doubling. Steps are accepted when
/// the doubling error estimate is ≤ tol·max(1, ‖X‖_max).
class HeisenbergIntegrator {
 public:
  HeisenbergIntegrator(const LindbladModel& model, ComplexMatrix x0, EvolveOptions options = {});

  /// Advances the state to time t ≥ time().
  const ComplexMatrix& advance_to(double t);

  double time() const { return t_; }
  const ComplexMatrix& state() const { return x_; }
  std::size_t steps() const { return steps_; }
  std::size_t rejected() const { return rejected_; }

 private:
  const LindbladModel* model_;
  ComplexMatrix x_;
  EvolveOptions opt_;
  double t_ = 0.0;
  double h_;
  std::size_t steps_ = 0;
  std::size_t rejected_ = 0;
};

/// T_t(X).
ComplexMatrix evolve_heisenberg(const LindbladModel& model, const ComplexMatrix& x, double t,
                                const EvolveOptions& options = {});

/// T_t(X) on an ascending time grid.
std::vector<ComplexMatrix> evolve_heisenberg_grid(const LindbladModel& model, const ComplexMatrix& x,
                                                  const std::vector<double>& t_grid,
                                                  const EvolveOptions& options = {});

struct MinimalIterateOptions {
  std::size_t order = 32;
  /// Iteration stops once ‖T⁽ⁿ⁺¹⁾ − T⁽ⁿ⁾‖_max ≤ tol.
  double tol = 1e-7;
};

/// T⁽⁰⁾_t, T⁽¹⁾_t, … of the minimal-solution iteration, evaluated with
/// Gauss–Legendre quadrature in s and barycentric interpolation of T⁽ⁿ⁾_s.
std::vector<ComplexMatrix> minimal_iterate(const LindbladModel& model, const ComplexMatrix& x, double t,
                                           std::size_t n_max, const MinimalIterateOptions& options = {});

struct DiagnosticTrace {
  double lambda = 0.0;
  double x_weight = 1.0;
  std::vector<double> values;
  std::vector<double> weighted_partial_sums;
  std::string u_label;
};

/// Largest violation of values[k+1] ≤ values[k] (and values ≥ 0); ≤ slack
/// means the trace is monotone.
double monotonicity_violation(const DiagnosticTrace& trace);

struct SeriesOptions {
  double tol = 1e-10;
  std::size_t k_min = 4;
  std::size_t k_max = 512;
};

struct SeriesResult {
  double value = 0.0;
  std::size_t k_used = 0;
  double tail_bound = 0.0;
  bool converged = true;
};

/// P_λ, Q_λ and the resolvent series with one cached Schur factorization of G.
class ResolventMaps {
 public:
  explicit ResolventMaps(const LindbladModel& model);

  /// P_λ(X): solves λY − G†Y − YG = X.
  ComplexMatrix p_lambda(const ComplexMatrix& x, double lambda) const;
  /// Q_λ(X) = P_λ(Σ L†XL).
  ComplexMatrix q_lambda(const ComplexMatrix& x, double lambda) const;

  /// k ↦ ⟨u, Q_λᵏ(I) u⟩ for k ≤ k_max. With stop_tol > 0 the trace ends once
  /// the weighted increment values[k]/(k+1) falls below stop_tol.
  DiagnosticTrace trace(double lambda, const ComplexVector& u, std::size_t k_max, double stop_tol = 0.0) const;

  /// ⟨u, Σ_k xᵏ Q_λᵏ(P_λ(X)) u⟩.
  SeriesResult series(const ComplexMatrix& x, double lambda, double x_weight, const ComplexVector& u,
                      const SeriesOptions& options = {}) const;

  std::size_t dim() const { return solver_.dim(); }

 private:
  ComplexMatrix phi_schur(const ComplexMatrix& y) const;

  SylvesterSolver solver_;
  std::vector<ComplexMatrix> ls_;
  std::vector<ComplexMatrix> ls_adj_;
};

ComplexMatrix p_lambda(const LindbladModel& model, const ComplexMatrix& x, double lambda);
ComplexMatrix q_lambda(const LindbladModel& model, const ComplexMatrix& x, double lambda);

SeriesResult resolvent_series(const LindbladModel& model, const ComplexMatrix& x, double lambda, double x_weight,
                              const ComplexVector& u, const SeriesOptions& options = {});

/// ∫₀^∞ e^{−λs} ⟨u, T_s(X) u⟩ ds, integrated alongside the Heisenberg
/// evolution up to the horizon where the remaining tail is ≤ tail_tol.
double resolvent_direct(const LindbladModel& model, const ComplexMatrix& x, double lambda, const ComplexVector& u,
                        double tail_tol = 1e-10, const EvolveOptions& options = {});

/// 1 − ⟨u, T_t(I) u⟩ on an ascending grid. Absorbing models only.
std::vector<double> leakage_curve(const LindbladModel& model, const ComplexVector& u,
                                  const std::vector<double>& t_grid, const EvolveOptions& options = {});

struct LeakageReport {
  std::vector<std::size_t> n_ladder;
  std::vector<double> t_grid;
  std::vector<std::vector<double>> leakage;
  std::vector<double> deficiency;
  double extrapolated_deficiency = 0.0;
  double uncertainty = 0.0;
};

/// ⟨u, A u⟩ (real part).
double expectation(const ComplexMatrix& a, const ComplexVector& u);

}  // namespace qds
