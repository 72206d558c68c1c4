#pragma once

// Test-side reference computations. Nothing here calls the library's own
// solvers: Sylvester uses the Kronecker form, exponentials come from Eigen's
// MatrixFunctions module, quadrature is composite Simpson.

#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace oracle {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline Mat vec_to_mat(const Vec& v, Eigen::Index n) { return Eigen::Map<const Mat>(v.data(), n, n); }
inline Vec mat_to_vec(const Mat& m) { return Eigen::Map<const Vec>(m.data(), m.size()); }

inline Mat exp(const Mat& a) { return a.exp(); }

// (λ − I⊗G† − Gᵀ⊗I) vec Y = vec R
inline Mat sylvester_kron(double lambda, const Mat& g, const Mat& r) {
  const auto n = g.rows();
  const Mat id = Mat::Identity(n, n);
  Mat k = lambda * Mat::Identity(n * n, n * n);
  k -= Eigen::kroneckerProduct(id, g.adjoint()).eval();
  k -= Eigen::kroneckerProduct(g.transpose(), id).eval();
  return vec_to_mat(k.fullPivLu().solve(mat_to_vec(r)), n);
}

// Composite Simpson for ∫₀^T e^{−λs} e^{sG†} R e^{sG} ds, with e^{hG} powers.
inline Mat sylvester_simpson(double lambda, const Mat& g, const Mat& r, double horizon, int intervals) {
  if (intervals % 2) ++intervals;
  const double h = horizon / intervals;
  const Mat step = (h * g).exp();
  Mat p = Mat::Identity(g.rows(), g.cols());
  Mat acc = Mat::Zero(g.rows(), g.cols());
  for (int k = 0; k <= intervals; ++k) {
    const double s = k * h;
    const double w = (k == 0 || k == intervals) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    acc += w * std::exp(-lambda * s) * (p.adjoint() * r * p);
    p = p * step;
  }
  return acc * (h / 3.0);
}

inline double simpson(const std::function<double(double)>& f, double lo, double hi, int intervals) {
  if (intervals % 2) ++intervals;
  const double h = (hi - lo) / intervals;
  double acc = f(lo) + f(hi);
  for (int k = 1; k < intervals; ++k) acc += (k % 2 ? 4.0 : 2.0) * f(lo + k * h);
  return acc * h / 3.0;
}

// Fock-space matrices written out entry by entry.
inline Mat annihilation(int n) {
  Mat a = Mat::Zero(n, n);
  for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(double(k));
  return a;
}

// Normalized Hermite function φ_k(x) by direct three-term recurrence.
inline double hermite_function(int k, double x) {
  double prev = 0.0, cur = std::pow(M_PI, -0.25) * std::exp(-0.5 * x * x);
  for (int j = 0; j < k; ++j) {
    const double next = std::sqrt(2.0 / (j + 1)) * x * cur - std::sqrt(double(j) / (j + 1)) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

// Classical pure-birth chain on the even states 0, 2, 4, … with rates
// r_n = (n+1)(n+2). Exponential time differencing with linear inflow, which is
// stable for arbitrarily large rates. Returns the survival P(τ > t) at the
// requested ascending times.
inline std::vector<double> birth_chain_survival(const std::vector<double>& times, int states = 4000,
                                                double dt = 1e-4) {
  std::vector<double> p(states, 0.0), rate(states), decay(states), phi1(states), phi2(states);
  for (int k = 0; k < states; ++k) {
    const double r = (2.0 * k + 1.0) * (2.0 * k + 2.0);
    rate[k] = r;
    decay[k] = std::exp(-r * dt);
    phi1[k] = -std::expm1(-r * dt) / r;
    phi2[k] = (dt - phi1[k]) / (r * dt);
  }
  p[0] = 1.0;
  std::vector<double> out;
  double t = 0.0;
  std::size_t next = 0;
  auto record = [&] {
    while (next < times.size() && std::abs(times[next] - t) < 0.5 * dt) {
      double s = 0.0;
      for (double v : p) s += v;
      out.push_back(s);
      ++next;
    }
  };
  record();
  while (next < times.size()) {
    double inflow_old = 0.0, inflow_new = 0.0;
    for (int k = 0; k < states; ++k) {
      const double old = p[k];
      p[k] = old * decay[k] + inflow_old * phi1[k] + (inflow_new - inflow_old) * phi2[k];
      inflow_old = rate[k] * old;
      inflow_new = rate[k] * p[k];
    }
    t += dt;
    record();
  }
  return out;
}

// Σ_{n even} 1/((n+1)(n+2)), the mean explosion time of the chain above.
inline double mean_explosion_time(int terms = 2000000) {
  double s = 0.0;
  for (int k = terms - 1; k >= 0; --k) s += 1.0 / ((2.0 * k + 1.0) * (2.0 * k + 2.0));
  return s;
}

// Hand-rolled generators for property tests.
struct Random {
  std::mt19937_64 rng;
  explicit Random(std::uint64_t seed) : rng(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

  Mat complex_matrix(Eigen::Index n, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    Mat m(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) m(i, j) = Complex(nd(rng), nd(rng));
    return m;
  }
  Vec complex_vector(Eigen::Index n) {
    std::normal_distribution<double> nd(0.0, 1.0);
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = Complex(nd(rng), nd(rng));
    return v;
  }
  Vec unit_vector(Eigen::Index n) {
    Vec v = complex_vector(n);
    return v / v.norm();
  }
  Mat hermitian(Eigen::Index n, double scale = 1.0) {
    const Mat a = complex_matrix(n, scale);
    return 0.5 * (a + a.adjoint());
  }
  Mat psd(Eigen::Index n, double scale = 1.0) {
    const Mat a = complex_matrix(n, scale);
    return a * a.adjoint();
  }
  // G = −iH − ½K†K − δ, so G + G† ⪯ −2δ.
  Mat stable_generator(Eigen::Index n, double shift = 0.1) {
    const Mat k = complex_matrix(n, 0.5);
    return Complex(0.0, -1.0) * hermitian(n) - 0.5 * k.adjoint() * k - shift * Mat::Identity(n, n);
  }
};

}  // namespace oracle
