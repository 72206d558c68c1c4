#include <catch2/catch.hpp>

#include <cmath>
#include <string>

#include "oracles.hpp"
#include "qds/criteria.hpp"
#include "qds/errors.hpp"
#include "qds/models.hpp"
#include "qds/semigroup.hpp"

using namespace qds;

namespace {

std::string validation_message(const HeavyIonParams& p) {
  try {
    validate_heavy_ion(p);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) { return a * b - b * a; }

}  // namespace

TEST_CASE("heavy-ion defaults sit on the boundary of condition (1)") {
  const HeavyIonParams p;
  CHECK(p.w * p.w * p.alpha * p.alpha == Approx(2.0));
  CHECK_NOTHROW(validate_heavy_ion(p));
  const HeavyIonModel m = heavy_ion(p);
  CHECK(m.b6 == 0.0);
  // x + ∂ = √2 a, so L = 2a.
  CHECK(max_abs(m.model.jumps()[0] - 2.0 * oracle::annihilation(32)) < 1e-12);
}

TEST_CASE("heavy-ion validation names the failed condition") {
  HeavyIonParams p;
  p.w = 1.0;
  CHECK(validation_message(p).find("condition (1)") != std::string::npos);
  p = HeavyIonParams{};
  p.nu = 1.0;
  p.b1 = 0.1;
  CHECK(validation_message(p).find("condition (2)") != std::string::npos);
  p.b1 = 1.0;
  CHECK(validation_message(p).empty());
  p.nu = 2.5;
  CHECK_THROWS_AS(validate_heavy_ion(p), ValidationError);
  CHECK_THROWS_AS(heavy_ion(HeavyIonParams{1.0}), ValidationError);
}

TEST_CASE("heavy-ion operator identities on the interior") {
  for (const auto& [w, alpha] : std::vector<std::pair<double, double>>{{std::sqrt(2.0), 1.0}, {1.0, 2.0}, {1.5, -1.2}}) {
    HeavyIonParams p;
    p.w = w;
    p.alpha = alpha;
    p.n = 40;
    p.mode = TruncationMode::absorbing;
    const HeavyIonModel m = heavy_ion(p);
    const FockBasis basis = m.model.basis();
    const ComplexMatrix& l = m.model.jumps()[0];
    const double scale = 1.0 + max_abs(interior_block(m.c, basis));
    CAPTURE(w, alpha);
    CHECK(m.b6 == Approx(w * w * (std::abs(alpha) - alpha)));
    CHECK(max_abs(interior_block(m.c - m.c_assembled, basis)) <= 1e-10 * scale);
    // Commutators need one extra band of room beyond the interior.
    const FockBasis inner{basis.size, basis.buffer + 2};
    const ComplexMatrix cl = commutator(m.c, l);
    CHECK(max_abs(interior_block(cl + 2.0 * w * w * alpha * l, inner)) <= 1e-9 * scale);
    const ComplexMatrix lhs = l.adjoint() * cl;
    const ComplexMatrix rhs = -2.0 * w * w * alpha * (m.c - m.b6 * ComplexMatrix::Identity(40, 40));
    CHECK(max_abs(interior_block(lhs - rhs, inner)) <= 1e-9 * scale);
  }
}

TEST_CASE("quadratic potential matches the ladder form") {
  HeavyIonParams p;
  p.n = 24;
  const HeavyIonModel m = heavy_ion(p);
  const FockBasis basis = m.model.basis();
  const ComplexMatrix x = position_op(basis);
  const ComplexMatrix expected = 0.5 * kinetic_op(basis) + 0.25 * p.w * p.w * x * x;
  CHECK(max_abs(interior_block(m.model.hamiltonian() - expected, basis)) < 1e-10);
}

TEST_CASE("potential witnesses") {
  for (double nu : {0.5, 1.0, 1.5, 2.0}) {
    HeavyIonParams p;
    p.nu = nu;
    p.b1 = 4.0;
    const PotentialWitnesses wit = heavy_ion_witnesses(p);
    CAPTURE(nu);
    CHECK(wit.beta > wit.beta_threshold);
    CHECK(std::isfinite(wit.u1_l_beta_norm));
    CHECK(wit.u2_ratio <= 1.0 + 1e-12);
    CHECK(wit.growth_ratio <= 1.0 + 1e-12);
    // ‖U₁‖_β by direct quadrature of c|x|^{(ν−1)β} on [−1, 1].
    const double c = 0.25 * p.w * p.w * nu;
    const double s = (nu - 1.0) * wit.beta;
    const double ref = std::pow(2.0 * std::pow(c, wit.beta) / (s + 1.0), 1.0 / wit.beta);
    CHECK(wit.u1_l_beta_norm == Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("heavy-ion with a kinked potential assembles") {
  HeavyIonParams p;
  p.nu = 1.0;
  p.n = 16;
  const HeavyIonModel m = heavy_ion(p);
  CHECK(is_hermitian(m.model.hamiltonian()));
  CHECK(max_eig(hermitian_part(m.model.g() + m.model.g().adjoint())) <= 1e-10);
}

TEST_CASE("damped oscillator") {
  const double gamma = 0.8;
  const ModelBundle osc = damped_oscillator(gamma, 1.1, 10);
  for (int n = 0; n < 10; ++n) CHECK(std::abs(osc.model.loss()(n, n) - gamma * n) < 1e-13);
  CHECK(max_abs(commutator(osc.model.hamiltonian(), osc.model.loss())) == 0.0);
  CHECK(max_abs(osc.c - osc.model.loss()) == 0.0);
  CHECK_THROWS_AS(damped_oscillator(0.0, 1.0, 10), InputError);
  CHECK_THROWS_AS(damped_oscillator(1.0, 1.0, 3), InputError);
}

TEST_CASE("quadratic pump") {
  const ModelBundle pump = quadratic_pump(16);
  CHECK(pump.model.loss()(0, 0).real() == Approx(2.0));
  CHECK(pump.model.loss()(1, 1).real() == Approx(6.0));
  CHECK(pump.model.loss()(2, 2).real() == Approx(12.0));
  CHECK(pump.model.mode() == TruncationMode::absorbing);
  CHECK_THROWS_AS(quadratic_pump(16, TruncationMode::exact), ContractViolation);
  CHECK_THROWS_AS(quadratic_pump(6), InputError);
}

TEST_CASE("birth-chain series") {
  // Summing over every level telescopes to 1; from |0⟩ only even levels are visited.
  double all = 0.0;
  for (int n = 0; n < 1000000; ++n) all += 1.0 / ((n + 1.0) * (n + 2.0));
  CHECK(all == Approx(1.0).epsilon(1e-5));
  CHECK(oracle::mean_explosion_time() == Approx(std::log(2.0)).epsilon(1e-6));
}

TEST_CASE("pump leakage is positive and settles as N grows") {
  const std::vector<double> ts{2.0};
  const double exact = 1.0 - oracle::birth_chain_survival(ts)[0];
  REQUIRE(exact > 0.1);
  double prev = 2.0;
  for (std::size_t n : {16u, 32u, 64u}) {
    const double leak = leakage_curve(quadratic_pump(n).model, basis_vector(n, 0), ts)[0];
    CAPTURE(n, leak, exact);
    CHECK(leak > 0.0);
    CHECK(leak >= exact - 1e-3);
    CHECK(leak <= prev + 1e-12);
    prev = leak;
  }
}
