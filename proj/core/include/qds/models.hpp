#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "qds/generator.hpp"
#include "qds/hilbert.hpp"

namespace qds {

/// One-coordinate heavy-ion collision model: L = w(x + α∂),
/// H = −½Δ + V with V = ¼w²|x|^ν.
struct HeavyIonParams {
  double w = std::sqrt(2.0);
  double alpha = 1.0;
  double nu = 2.0;
  double b1 = 1.0;
  std::size_t n = 32;
  /// 0 selects max(4, band width + 2).
  std::size_t buffer = 0;
  TruncationMode mode = TruncationMode::absorbing;
};

/// Witnesses for the potential-derivative split |V'| ≤ U₁ + U₂ with
/// U₁ = |V'|·1{|x| ≤ 1} ∈ L^β and U₂ = |V'|·1{|x| > 1} ≤ b₂(|x| + b₃).
struct PotentialWitnesses {
  double beta = 0.0;
  /// Threshold β must exceed in one dimension.
  double beta_threshold = 1.0;
  double u1_l_beta_norm = 0.0;
  double b2 = 0.0;
  double b3 = 1.0;
  /// max over sampled |x| > 1 of U₂ / (b₂(|x| + b₃)); ≤ 1 when the bound holds.
  double u2_ratio = 0.0;
  /// max over sampled nodes of |V| / (¼w²(x² + b₁)).
  double growth_ratio = 0.0;
};

struct ModelBundle {
  LindbladModel model;
  /// Reference operator used by the certificates.
  ComplexMatrix c;
};

struct HeavyIonModel {
  LindbladModel model;
  /// C = Σ L†L + b₆.
  ComplexMatrix c;
  /// C = w²(−α²Δ + x² − α) + b₆, built from the kinetic and potential routes.
  ComplexMatrix c_assembled;
  double b6 = 0.0;
  PotentialWitnesses witnesses;
};

/// Throws ValidationError naming the failed condition.
void validate_heavy_ion(const HeavyIonParams& p);
PotentialWitnesses heavy_ion_witnesses(const HeavyIonParams& p);
HeavyIonModel heavy_ion(const HeavyIonParams& p);

/// Buffer used when a model does not specify one.
std::size_t default_buffer(std::size_t bandwidth);

/// H = ω a†a, L = √γ a, C = M.
ModelBundle damped_oscillator(double gamma, double omega, std::size_t n,
                              TruncationMode mode = TruncationMode::exact, std::size_t buffer = 0);

/// H = 0, L = a†², absorbing only; C = M.
ModelBundle quadratic_pump(std::size_t n, TruncationMode mode = TruncationMode::absorbing, std::size_t buffer = 0);

}  // namespace qds
