#include "qds/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "qds/errors.hpp"

namespace qds {

double expectation(const ComplexMatrix& a, const ComplexVector& u) { return u.dot(a * u).real(); }

ComplexMatrix propagate(const LindbladModel& model, double t) { return expm(model.g(), t); }

namespace {

// Generic RK4 with step doubling. State must support +, scalar * and a max
// norm supplied by the caller.
template <typename State, typename Rhs, typename Norm>
struct DoublingStepper {
  Rhs rhs;
  Norm norm;
  EvolveOptions opt;
  std::size_t steps = 0;
  std::size_t rejected = 0;

  State rk4(const State& y, double t, double h) const {
    const State k1 = rhs(t, y);
    const State k2 = rhs(t + 0.5 * h, y + (0.5 * h) * k1);
    const State k3 = rhs(t + 0.5 * h, y + (0.5 * h) * k2);
    const State k4 = rhs(t + h, y + h * k3);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  void advance(State& y, double& t, double& h, double t_end) {
    while (t < t_end) {
      if (steps + rejected >= opt.max_steps) throw NumericError("evolve: step budget exhausted");
      const bool clipped = t + h >= t_end;
      const double hs = clipped ? t_end - t : h;
      const State full = rk4(y, t, hs);
      const State mid = rk4(y, t, 0.5 * hs);
      const State half = rk4(mid, t + 0.5 * hs, 0.5 * hs);
      const double err = norm(half + (-1.0) * full) / 15.0;
      const double scale = opt.tol * std::max(1.0, norm(half));
      if (!std::isfinite(err)) throw NumericError("evolve: non-finite state");
      const double factor = err == 0.0 ? 4.0 : std::clamp(0.9 * std::pow(scale / err, 0.2), 0.1, 4.0);
      if (err <= scale) {
        y = half;
        t = clipped ? t_end : t + hs;
        ++steps;
        if (!clipped || factor < 1.0) h = hs * factor;
      } else {
        ++rejected;
        h = hs * factor;
        if (h < opt.min_step) {
          char msg[200];
          std::snprintf(msg, sizeof msg,
                        "evolve: step size underflow at t=%.6g (h=%.3g, error %.3g vs %.3g, %zu steps, %zu rejected)",
                        t, h, err, scale, steps, rejected);
          throw NumericError(msg);
        }
      }
    }
  }
};

template <typename State, typename Rhs, typename Norm>
DoublingStepper<State, Rhs, Norm> make_stepper(Rhs rhs, Norm norm, const EvolveOptions& opt) {
  return DoublingStepper<State, Rhs, Norm>{rhs, norm, opt};
}

void check_options(const EvolveOptions& opt) {
  if (!(opt.tol > 0.0) || !(opt.initial_step > 0.0) || !(opt.min_step > 0.0))
    throw InputError("evolve: tolerances and step sizes must be positive");
}

}  // namespace

HeisenbergIntegrator::HeisenbergIntegrator(const LindbladModel& model, ComplexMatrix x0, EvolveOptions options)
    : model_(&model), x_(std::move(x0)), opt_(options), h_(options.initial_step) {
  check_options(opt_);
  const auto n = static_cast<Eigen::Index>(model.dim());
  if (x_.rows() != n || x_.cols() != n) throw InputError("evolve: dimension mismatch");
}

const ComplexMatrix& HeisenbergIntegrator::advance_to(double t) {
  if (!(t >= t_)) throw InputError("evolve: target time precedes the current time");
  const LindbladModel& m = *model_;
  auto stepper = make_stepper<ComplexMatrix>(
      [&m](double, const ComplexMatrix& y) { return ComplexMatrix(lindblad_apply(m, y)); },
      [](const ComplexMatrix& y) { return max_abs(y); }, opt_);
  stepper.advance(x_, t_, h_, t);
  steps_ += stepper.steps;
  rejected_ += stepper.rejected;
  return x_;
}

ComplexMatrix evolve_heisenberg(const LindbladModel& model, const ComplexMatrix& x, double t,
                                const EvolveOptions& options) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InputError("evolve_heisenberg: t must be finite and non-negative");
  HeisenbergIntegrator integrator(model, x, options);
  return integrator.advance_to(t);
}

std::vector<ComplexMatrix> evolve_heisenberg_grid(const LindbladModel& model, const ComplexMatrix& x,
                                                  const std::vector<double>& t_grid, const EvolveOptions& options) {
  HeisenbergIntegrator integrator(model, x, options);
  std::vector<ComplexMatrix> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    if (!(t >= integrator.time())) throw InputError("evolve_heisenberg_grid: time grid must be ascending and ≥ 0");
    out.push_back(integrator.advance_to(t));
  }
  return out;
}

namespace {

// Barycentric Lagrange weights of `target` with respect to `nodes`.
RealVector lagrange_row(const RealVector& nodes, const RealVector& bary, double target) {
  const Eigen::Index q = nodes.size();
  RealVector row = RealVector::Zero(q);
  for (Eigen::Index i = 0; i < q; ++i)
    if (target == nodes[i]) {
      row[i] = 1.0;
      return row;
    }
  double denom = 0.0;
  for (Eigen::Index i = 0; i < q; ++i) {
    row[i] = bary[i] / (target - nodes[i]);
    denom += row[i];
  }
  return row / denom;
}

}  // namespace

std::vector<ComplexMatrix> minimal_iterate(const LindbladModel& model, const ComplexMatrix& x, double t,
                                           std::size_t n_max, const MinimalIterateOptions& options) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InputError("minimal_iterate: t must be finite and non-negative");
  const auto n = static_cast<Eigen::Index>(model.dim());
  if (x.rows() != n || x.cols() != n) throw InputError("minimal_iterate: dimension mismatch");
  require_hermitian(x, "minimal_iterate: X");
  if (min_eig(x) < -1e-12 * (1.0 + max_abs(x))) throw InputError("minimal_iterate: X must be positive semidefinite");
  if (options.order < 2) throw InputError("minimal_iterate: quadrature order must be at least 2");
  if (t == 0.0) return {x};

  const QuadratureRule outer = gauss_legendre(options.order, 0.0, t);
  const QuadratureRule unit = gauss_legendre(options.order, 0.0, 1.0);
  const Eigen::Index q = outer.nodes.size();

  RealVector bary(q);
  for (Eigen::Index i = 0; i < q; ++i) {
    double prod = 1.0;
    for (Eigen::Index j = 0; j < q; ++j)
      if (j != i) prod *= (outer.nodes[i] - outer.nodes[j]) / t;
    bary[i] = 1.0 / prod;
  }

  // Evaluation times: the outer nodes, then t itself.
  std::vector<double> taus(outer.nodes.data(), outer.nodes.data() + q);
  taus.push_back(t);
  const std::size_t ne = taus.size();

  auto sandwich = [](const ComplexMatrix& p, const ComplexMatrix& y) { return ComplexMatrix(p.adjoint() * y * p); };

  std::vector<ComplexMatrix> t0(ne);
  for (std::size_t e = 0; e < ne; ++e) t0[e] = sandwich(propagate(model, taus[e]), x);

  struct Cell {
    double weight;
    RealVector interp;
    std::vector<ComplexMatrix> kernels;  // L_l P(τ − σ)
  };
  std::vector<std::vector<Cell>> cells(ne);
  const double x_scale = 1e-8 * (1.0 + max_abs(x));
  for (std::size_t e = 0; e < ne; ++e) {
    for (Eigen::Index j = 0; j < q; ++j) {
      const double sigma = taus[e] * unit.nodes[j];
      Cell cell{taus[e] * unit.weights[j], lagrange_row(outer.nodes, bary, sigma), {}};
      const ComplexMatrix p = propagate(model, taus[e] - sigma);
      for (const auto& l : model.jumps()) cell.kernels.push_back(l * p);

      ComplexMatrix approx = ComplexMatrix::Zero(n, n);
      for (Eigen::Index i = 0; i < q; ++i) approx += cell.interp[i] * t0[static_cast<std::size_t>(i)];
      if (max_abs(approx - sandwich(propagate(model, sigma), x)) > x_scale)
        throw NumericError("minimal_iterate: time quadrature did not resolve the propagator; raise the order");
      cells[e].push_back(std::move(cell));
    }
  }

  std::vector<ComplexMatrix> out{t0.back()};
  std::vector<ComplexMatrix> cur = t0;
  for (std::size_t it = 0; it < n_max; ++it) {
    std::vector<ComplexMatrix> next(ne);
    for (std::size_t e = 0; e < ne; ++e) {
      ComplexMatrix acc = t0[e];
      for (const Cell& cell : cells[e]) {
        ComplexMatrix ts = ComplexMatrix::Zero(n, n);
        for (Eigen::Index i = 0; i < q; ++i) ts += cell.interp[i] * cur[static_cast<std::size_t>(i)];
        for (const auto& k : cell.kernels) acc.noalias() += cell.weight * (k.adjoint() * ts * k);
      }
      next[e] = hermitian_part(acc);
    }
    const double step = max_abs(next.back() - cur.back());
    cur = std::move(next);
    out.push_back(cur.back());
    if (step <= options.tol) break;
  }
  return out;
}

double monotonicity_violation(const DiagnosticTrace& trace) {
  double worst = 0.0;
  for (std::size_t k = 0; k < trace.values.size(); ++k) {
    worst = std::max(worst, -trace.values[k]);
    if (k + 1 < trace.values.size()) worst = std::max(worst, trace.values[k + 1] - trace.values[k]);
  }
  return worst;
}

ResolventMaps::ResolventMaps(const LindbladModel& model) : solver_(model.g()) {
  for (const auto& l : model.jumps()) {
    ls_.push_back(solver_.to_schur_basis(l));
    ls_adj_.push_back(ls_.back().adjoint());
  }
}

ComplexMatrix ResolventMaps::phi_schur(const ComplexMatrix& y) const {
  const auto n = static_cast<Eigen::Index>(dim());
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  for (std::size_t k = 0; k < ls_.size(); ++k) out.noalias() += ls_adj_[k] * (y * ls_[k]);
  return out;
}

ComplexMatrix ResolventMaps::p_lambda(const ComplexMatrix& x, double lambda) const {
  return solver_.solve(lambda, x);
}

ComplexMatrix ResolventMaps::q_lambda(const ComplexMatrix& x, double lambda) const {
  return solver_.from_schur_basis(solver_.solve_in_schur_basis(lambda, phi_schur(solver_.to_schur_basis(x))));
}

DiagnosticTrace ResolventMaps::trace(double lambda, const ComplexVector& u, std::size_t k_max,
                                     double stop_tol) const {
  const auto n = static_cast<Eigen::Index>(dim());
  if (u.size() != n) throw InputError("trace: vector dimension mismatch");
  const ComplexVector ut = solver_.schur_vectors().adjoint() * u;
  DiagnosticTrace tr;
  tr.lambda = lambda;
  tr.x_weight = 1.0;
  ComplexMatrix y = ComplexMatrix::Identity(n, n);
  double partial = 0.0;
  for (std::size_t k = 0;; ++k) {
    const double v = expectation(y, ut);
    tr.values.push_back(v);
    partial += v / static_cast<double>(k + 1);
    tr.weighted_partial_sums.push_back(partial);
    if (k == k_max) break;
    if (stop_tol > 0.0 && std::abs(v) / static_cast<double>(k + 1) < stop_tol) break;
    y = hermitian_part(solver_.solve_in_schur_basis(lambda, phi_schur(y)));
  }
  return tr;
}

SeriesResult ResolventMaps::series(const ComplexMatrix& x, double lambda, double x_weight, const ComplexVector& u,
                                   const SeriesOptions& options) const {
  if (!(x_weight >= 0.0 && x_weight <= 1.0)) throw InputError("resolvent_series: x weight must lie in [0, 1]");
  const auto n = static_cast<Eigen::Index>(dim());
  if (u.size() != n) throw InputError("resolvent_series: vector dimension mismatch");
  const ComplexVector ut = solver_.schur_vectors().adjoint() * u;
  ComplexMatrix term = solver_.solve_in_schur_basis(lambda, solver_.to_schur_basis(x));
  SeriesResult r;
  const double v0 = expectation(term, ut);
  r.value = v0;
  if (x_weight == 0.0) return r;

  if (x_weight < 1.0) {
    const double bound0 = operator_norm(term) * ut.squaredNorm() / (1.0 - x_weight);
    std::size_t k_stop = 0;
    double tail = bound0 * x_weight;
    while (tail > options.tol && k_stop < options.k_max) {
      ++k_stop;
      tail *= x_weight;
    }
    r.converged = tail <= options.tol;
    for (std::size_t k = 1; k <= k_stop; ++k) {
      term = x_weight * solver_.solve_in_schur_basis(lambda, phi_schur(term));
      r.value += expectation(term, ut);
    }
    r.k_used = k_stop;
    r.tail_bound = tail;
    return r;
  }

  r.converged = false;
  for (std::size_t k = 1; k <= options.k_max; ++k) {
    term = solver_.solve_in_schur_basis(lambda, phi_schur(term));
    const double inc = expectation(term, ut);
    r.value += inc;
    r.k_used = k;
    r.tail_bound = std::abs(inc);
    if ((k >= options.k_min && std::abs(inc) <= options.tol * std::abs(v0)) || max_abs(term) == 0.0) {
      r.converged = true;
      break;
    }
  }
  return r;
}

ComplexMatrix p_lambda(const LindbladModel& model, const ComplexMatrix& x, double lambda) {
  return ResolventMaps(model).p_lambda(x, lambda);
}

ComplexMatrix q_lambda(const LindbladModel& model, const ComplexMatrix& x, double lambda) {
  return ResolventMaps(model).q_lambda(x, lambda);
}

SeriesResult resolvent_series(const LindbladModel& model, const ComplexMatrix& x, double lambda, double x_weight,
                              const ComplexVector& u, const SeriesOptions& options) {
  return ResolventMaps(model).series(x, lambda, x_weight, u, options);
}

namespace {

struct Augmented {
  ComplexMatrix y;
  Complex acc;
};

Augmented operator+(const Augmented& a, const Augmented& b) { return {a.y + b.y, a.acc + b.acc}; }
Augmented operator*(double s, const Augmented& a) { return {s * a.y, s * a.acc}; }

}  // namespace

double resolvent_direct(const LindbladModel& model, const ComplexMatrix& x, double lambda, const ComplexVector& u,
                        double tail_tol, const EvolveOptions& options) {
  if (!(lambda > 0.0)) throw InputError("resolvent_direct: lambda must be positive");
  if (!(tail_tol > 0.0)) throw InputError("resolvent_direct: tail tolerance must be positive");
  const auto n = static_cast<Eigen::Index>(model.dim());
  if (x.rows() != n || x.cols() != n || u.size() != n) throw InputError("resolvent_direct: dimension mismatch");
  check_options(options);
  const double mass = operator_norm(x) * u.squaredNorm();
  if (mass == 0.0) return 0.0;
  const double horizon = std::max(0.0, std::log(mass / (lambda * tail_tol)) / lambda);

  auto stepper = make_stepper<Augmented>(
      [&model, &u, lambda](double s, const Augmented& a) {
        return Augmented{lindblad_apply(model, a.y), std::exp(-lambda * s) * u.dot(a.y * u)};
      },
      [](const Augmented& a) { return std::max(max_abs(a.y), std::abs(a.acc)); }, options);
  Augmented state{x, 0.0};
  double s = 0.0;
  double h = options.initial_step;
  stepper.advance(state, s, h, horizon);
  return state.acc.real();
}

std::vector<double> leakage_curve(const LindbladModel& model, const ComplexVector& u,
                                  const std::vector<double>& t_grid, const EvolveOptions& options) {
  if (model.mode() != TruncationMode::absorbing)
    throw ContractViolation("leakage_curve: requires an absorbing-mode model");
  if (u.size() != static_cast<Eigen::Index>(model.dim())) throw InputError("leakage_curve: dimension mismatch");
  if (std::abs(u.norm() - 1.0) > 1e-12) throw InputError("leakage_curve: u must be a unit vector");
  const auto n = static_cast<Eigen::Index>(model.dim());
  HeisenbergIntegrator integrator(model, ComplexMatrix::Identity(n, n), options);
  std::vector<double> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    if (!(t >= integrator.time())) throw InputError("leakage_curve: time grid must be ascending and ≥ 0");
    out.push_back(1.0 - expectation(integrator.advance_to(t), u));
  }
  return out;
}

}  // namespace qds
