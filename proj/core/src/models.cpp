#include "qds/models.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qds/errors.hpp"

namespace qds {

std::size_t default_buffer(std::size_t bandwidth) { return std::max<std::size_t>(4, bandwidth + 2); }

namespace {

double potential(const HeavyIonParams& p, double x) {
  const double c = 0.25 * p.w * p.w;
  if (p.nu == 2.0) return c * x * x;
  return c * std::pow(std::abs(x), p.nu);
}

std::vector<double> sample_points(std::size_t n) {
  const QuadratureRule gh = gauss_hermite(2 * n + 8);
  std::vector<double> xs(gh.nodes.data(), gh.nodes.data() + gh.nodes.size());
  for (int k = -4000; k <= 4000; ++k) xs.push_back(0.005 * k);
  return xs;
}

}  // namespace

PotentialWitnesses heavy_ion_witnesses(const HeavyIonParams& p) {
  PotentialWitnesses wit;
  const double c = 0.25 * p.w * p.w * p.nu;
  wit.beta = p.nu >= 1.0 ? 2.0 : 0.5 * (1.0 + 1.0 / (1.0 - p.nu));
  wit.u1_l_beta_norm = std::pow(2.0 * std::pow(c, wit.beta) / (wit.beta * (p.nu - 1.0) + 1.0), 1.0 / wit.beta);
  wit.b2 = c;
  wit.b3 = 1.0;
  wit.u2_ratio = 0.0;
  for (double x : sample_points(p.n)) {
    const double ax = std::abs(x);
    if (ax > 1.0) {
      const double u2 = c * std::pow(ax, p.nu - 1.0);
      wit.u2_ratio = std::max(wit.u2_ratio, u2 / (wit.b2 * (ax + wit.b3)));
    }
    const double growth = 0.25 * p.w * p.w * (x * x + p.b1);
    wit.growth_ratio = std::max(wit.growth_ratio, std::abs(potential(p, x)) / growth);
  }
  return wit;
}

void validate_heavy_ion(const HeavyIonParams& p) {
  if (!std::isfinite(p.w) || p.w == 0.0) throw ValidationError("heavy_ion: w must be finite and non-zero");
  if (!std::isfinite(p.alpha) || p.alpha == 0.0) throw ValidationError("heavy_ion: alpha must be finite and non-zero");
  if (!(p.nu > 0.0 && p.nu <= 2.0)) throw ValidationError("heavy_ion: nu must lie in (0, 2]");
  if (!(p.b1 > 0.0) || !std::isfinite(p.b1)) throw ValidationError("heavy_ion: b1 must be positive");
  if (p.n < 8) throw ValidationError("heavy_ion: truncation size must be at least 8");
  if (p.w * p.w * p.alpha * p.alpha < 2.0 * (1.0 - 1e-12))
    throw ValidationError("heavy_ion: condition (1) violated: w^2 alpha^2 >= 2 is required");
  const PotentialWitnesses wit = heavy_ion_witnesses(p);
  if (wit.growth_ratio > 1.0 + 1e-12)
    throw ValidationError("heavy_ion: condition (2) violated: |V(x)| <= w^2 (x^2 + b1) / 4 fails on sampled nodes");
  if (!(wit.beta > wit.beta_threshold) || !std::isfinite(wit.u1_l_beta_norm) || wit.u2_ratio > 1.0 + 1e-12)
    throw ValidationError("heavy_ion: condition (3) violated: no admissible U1 + U2 split for V'");
}

HeavyIonModel heavy_ion(const HeavyIonParams& p) {
  validate_heavy_ion(p);
  // L spans one band either side of the diagonal, −Δ spans two.
  const FockBasis basis{p.n, p.buffer == 0 ? default_buffer(2) : p.buffer};
  basis.validate();

  const double w = p.w;
  const double alpha = p.alpha;
  const BandOperator l{[w, alpha](std::size_t size) {
                         const FockBasis b{size, 0};
                         return ComplexMatrix(w * (position_op(b) + alpha * derivative_op(b)));
                       },
                       alpha == 1.0 ? 0u : 1u};
  const CompressedChannels ch = compress_product({l}, basis, p.mode);

  PotentialQuadrature quad;
  if (p.nu != 2.0) quad.breakpoints = {0.0};
  const ComplexMatrix kinetic = kinetic_op(basis);
  const ComplexMatrix h = 0.5 * kinetic + potential_op([&p](double x) { return potential(p, x); }, basis, quad);

  HeavyIonModel out{assemble(h, ch.jumps, basis, p.mode, ch.loss), {}, {}, 0.0, heavy_ion_witnesses(p)};
  const auto n = static_cast<Eigen::Index>(p.n);
  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  out.b6 = w * w * (std::abs(alpha) - alpha);
  out.c = ch.loss + out.b6 * id;
  const ComplexMatrix x2 = potential_op([](double x) { return x * x; }, basis);
  out.c_assembled = w * w * (alpha * alpha * kinetic + x2) + (out.b6 - w * w * alpha) * id;
  return out;
}

ModelBundle damped_oscillator(double gamma, double omega, std::size_t n, TruncationMode mode, std::size_t buffer) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InputError("damped_oscillator: gamma must be positive");
  if (!(omega >= 0.0) || !std::isfinite(omega)) throw InputError("damped_oscillator: omega must be non-negative");
  if (n < 4) throw InputError("damped_oscillator: truncation size must be at least 4");
  const FockBasis basis{n, buffer == 0 ? default_buffer(1) : buffer};
  basis.validate();
  const double s = std::sqrt(gamma);
  const BandOperator l{[s](std::size_t size) { return ComplexMatrix(s * ladder({size, 0})); }, 0};
  const CompressedChannels ch = compress_product({l}, basis, mode);
  const ComplexMatrix h = omega * number_op(basis);
  return {assemble(h, ch.jumps, basis, mode, ch.loss), ch.loss};
}

ModelBundle quadratic_pump(std::size_t n, TruncationMode mode, std::size_t buffer) {
  if (mode != TruncationMode::absorbing)
    throw ContractViolation("quadratic_pump: only the absorbing truncation is meaningful");
  if (n < 8) throw InputError("quadratic_pump: truncation size must be at least 8");
  const FockBasis basis{n, buffer == 0 ? default_buffer(2) : buffer};
  basis.validate();
  const BandOperator l{[](std::size_t size) {
                         const ComplexMatrix ad = ladder({size, 0}).adjoint();
                         return ComplexMatrix(ad * ad);
                       },
                       2};
  const CompressedChannels ch = compress_product({l}, basis, mode);
  const auto dim = static_cast<Eigen::Index>(n);
  return {assemble(ComplexMatrix::Zero(dim, dim), ch.jumps, basis, mode, ch.loss), ch.loss};
}

}  // namespace qds
