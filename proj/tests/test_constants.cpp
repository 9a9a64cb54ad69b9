#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fracvar/assembly.hpp"
#include "fracvar/constants.hpp"
#include "fracvar/error.hpp"
#include "oracles.hpp"

using namespace fracvar;

TEST_SUITE("constants") {
  TEST_CASE("sharp constant oracles") {
    CHECK(std::abs(sharp_constant(2, 0.5) - std::sqrt(std::numbers::pi)) <= 1e-12);
    CHECK(sharp_constant(2, 0.3) == doctest::Approx(oracle::kSharp_2_03).epsilon(1e-13));
    CHECK(sharp_constant(1, 0.25) == doctest::Approx(oracle::kSharp_1_025).epsilon(1e-13));
    CHECK(sharp_constant(3, 0.4) == doctest::Approx(oracle::kSharp_3_04).epsilon(1e-13));
    for (int n = 1; n <= 3; ++n) CHECK(sharp_constant(n, 1e-9) == doctest::Approx(1.0).epsilon(1e-7));
  }

  TEST_CASE("sharp constant is finite on a grid") {
    for (int n = 1; n <= 3; ++n) {
      for (double s = 0.02; s < std::min(1.0, 0.5 * n); s += 0.02) {
        const double v = sharp_constant(n, s);
        CHECK(std::isfinite(v));
        CHECK(v > 0.0);
      }
    }
    CHECK_THROWS_AS(sharp_constant(1, 0.5), ValidationError);
  }

  TEST_CASE("lambda star") {
    const double S = sharp_constant(2, 0.3);
    CHECK(lambda_star(S, 0.5, 2, 0.3) == doctest::Approx(S).epsilon(1e-15));
    CHECK(lambda_star(S, std::numbers::pi, 2, 0.3) ==
          doctest::Approx(S / std::pow(2 * std::numbers::pi, 0.3)).epsilon(1e-14));
    CHECK(lambda_star(S, 2.0, 2, 0.3) / lambda_star(S, 4.0, 2, 0.3) ==
          doctest::Approx(std::pow(2.0, 0.3)).epsilon(1e-14));
  }

  TEST_CASE("whole-space bubble quotient") {
    const BubbleQuotient a = bubble_rayleigh_global(2, 0.3);
    CHECK(a.converged);
    CHECK(std::abs(a.value / sharp_constant(2, 0.3) - 1.0) < 0.02);
    const BubbleQuotient b = bubble_rayleigh_global(1, 0.25);
    CHECK(b.converged);
    CHECK(std::abs(b.value / 0.8472 - 1.0) < 0.02);
  }

  TEST_CASE("bubble solves the critical equation") {
    for (double r : {0.0, 0.5, 2.0}) {
      const double U = std::pow(1 + r * r, -0.7);
      const double lhs = bubble_fractional_laplacian(2, 0.3, r);
      CHECK(lhs == doctest::Approx(bubble_eigen_factor(2, 0.3) * std::pow(U, critical_exponent(2, 0.3))).epsilon(1e-5));
    }
  }

  TEST_CASE("asymptotic constants") {
    const AsymptoticConstants c = asymptotic_constants(2, 0.3);
    CHECK(c.L2 == doctest::Approx(oracle::kL2_2_03).epsilon(1e-13));
    CHECK(c.L2 == doctest::Approx(std::pow(std::numbers::pi, 0.7)).epsilon(1e-13));
    CHECK(c.L3 == doctest::Approx(oracle::kL3_2_03).epsilon(1e-12));
    CHECK(c.L1 / c.L2 == doctest::Approx(sharp_constant(2, 0.3)).epsilon(1e-14));
    CHECK(std::abs(c.L1_quadrature / c.L2 / sharp_constant(2, 0.3) - 1.0) < 0.02);
    CHECK(std::abs(c.L2_quadrature - c.L2) <= 1e-6 * c.L2);
    CHECK(l3_closed(3, 0.4) == doctest::Approx(oracle::kL3_3_04).epsilon(1e-12));
    CHECK(l3_closed(1, 0.1) == doctest::Approx(oracle::kL3_1_01).epsilon(1e-12));
    CHECK_THROWS_AS(asymptotic_constants(1, 0.25), ValidationError);
  }

  TEST_CASE("constant table") {
    const ConstantTable t = constant_table(2, 0.3, 1.0);
    CHECK(t.S_half == doctest::Approx(t.S / std::pow(2.0, 0.3)).epsilon(1e-15));
    CHECK(t.c_ns == doctest::Approx(normalizing_constant_closed(2, 0.3)).epsilon(1e-12));
    CHECK(t.lambda_star == doctest::Approx(t.S / std::pow(2.0, 0.3)).epsilon(1e-15));
    CHECK(t.L1 > 0.0);
    CHECK(constant_table(1, 0.3).L1 == 0.0);
  }
}
