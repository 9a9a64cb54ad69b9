#include <doctest.h>

#include <cmath>

#include "fracvar/bubbles.hpp"
#include "fracvar/constants.hpp"
#include "fracvar/error.hpp"
#include "fracvar/solver.hpp"

using namespace fracvar;

TEST_SUITE("bubbles") {
  TEST_CASE("cutoff plateau, support and monotonicity") {
    for (CutoffProfile p : {CutoffProfile::Smooth, CutoffProfile::Quintic}) {
      CHECK(cutoff(0.0, 1.0, p) == 1.0);
      CHECK(cutoff(0.25, 1.0, p) == 1.0);
      CHECK(cutoff(0.5, 1.0, p) == 0.0);
      CHECK(cutoff(0.7, 1.0, p) == 0.0);
      double prev = 1.0;
      for (double r = 0.25; r <= 0.5; r += 0.005) {
        const double v = cutoff(r, 1.0, p);
        CHECK(v <= prev);
        CHECK(v >= 0.0);
        prev = v;
      }
    }
  }

  TEST_CASE("samples") {
    const Mesh m = build_mesh(DomainSpec::box({0, 0}, {1, 1}), 1.0 / 16, 4.0);
    BubbleSpec spec;
    spec.R = 0.8;
    spec.center = boundary_anchor(m);
    spec.epsilon = 0.01;
    const DiscreteField u = sample_bubble(m, spec, 0.3);
    const DiscreteField v = [&] {
      BubbleSpec t = spec;
      t.epsilon = 0.04;
      return sample_bubble(m, t, 0.3);
    }();
    int at_center = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double dx = m.centroids[i][0] - spec.center[0];
      const double dy = m.centroids[i][1] - spec.center[1];
      const double r = std::sqrt(dx * dx + dy * dy);
      if (r == 0.0) {
        ++at_center;
        CHECK(u.values[i] == doctest::Approx(std::pow(0.01, -0.7)).epsilon(1e-14));
      }
      if (r > 0.4) CHECK(u.values[i] == 0.0);
      CHECK(u.values[i] >= v.values[i]);
    }
    CHECK(at_center == 1);
    BubbleSpec bad = spec;
    bad.epsilon = 0.0;
    CHECK_THROWS_AS(sample_bubble(m, bad, 0.3), ValidationError);
    bad = spec;
    bad.center = {0.5, 0.5, 0.0};
    CHECK_THROWS_AS(sample_bubble(m, bad, 0.3), ValidationError);
  }

  TEST_CASE("default ladder") {
    const std::vector<double> e = default_ladder(1.0);
    REQUIRE(e.size() == 6);
    CHECK(e[0] == doctest::Approx(1.0 / 16));
    for (std::size_t k = 1; k < e.size(); ++k) CHECK(e[k] == doctest::Approx(e[k - 1] / 4).epsilon(1e-15));
  }

  TEST_CASE("power-law fit recovers synthetic data") {
    std::vector<double> eps, vals;
    for (int k = 0; k < 5; ++k) {
      eps.push_back(0.1 * std::pow(0.25, k));
      vals.push_back(2.5 * std::pow(eps.back(), -0.7) - 3.0);
    }
    const AsymptoticFit f = fit_power_law(eps, vals);
    CHECK(f.fitted_exponent == doctest::Approx(0.7).epsilon(1e-10));
    CHECK(f.fitted_coefficient == doctest::Approx(2.5).epsilon(1e-10));
    CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));
    std::vector<double> uneven = eps;
    uneven[2] *= 1.3;
    CHECK_THROWS_AS(fit_power_law(uneven, vals), ValidationError);
  }

  TEST_CASE("fit guards") {
    const Mesh m = build_mesh(DomainSpec::box({-0.5, -0.5}, {0.5, 0.5}), 1.0 / 32, 4.0);
    const ProblemParams p = make_params(2, 0.3, 1.0);
    BubbleSpec b;
    b.R = 1.0;
    b.boundary = false;
    b.center = interior_anchor(m);
    CHECK_THROWS_AS(fit_asymptotics(m, p, b, default_ladder(1.0, 3)), ValidationError);
    CHECK_THROWS_AS(fit_asymptotics(m, p, b, {0.01, 0.005, 0.0025}), ValidationError);
    CHECK_THROWS_AS(fit_asymptotics(m, make_params(1, 0.3, 1.0), b, {0.1, 0.025, 0.00625}), ValidationError);
  }

  TEST_CASE("exponents do not depend on the cutoff profile") {
    const Mesh m = build_mesh(DomainSpec::box({-0.5, -0.5}, {0.5, 0.5}), 1.0 / 64, 4.0);
    const ProblemParams p = make_params(2, 0.3, 1.0);
    BubbleSpec b;
    b.R = 1.0;
    b.boundary = false;
    b.center = interior_anchor(m);
    const AsymptoticStudy a = fit_asymptotics(m, p, b, {0.0625, 0.015625, 0.00390625});
    b.profile = CutoffProfile::Quintic;
    const AsymptoticStudy q = fit_asymptotics(m, p, b, {0.0625, 0.015625, 0.00390625});
    CHECK(std::abs(a.lp1.fitted_exponent / q.lp1.fitted_exponent - 1.0) < 0.01);
    CHECK(std::abs(a.l2.fitted_exponent / q.l2.fitted_exponent - 1.0) < 0.01);
    CHECK(std::abs(a.seminorm.fitted_exponent / q.seminorm.fitted_exponent - 1.0) < 0.01);
  }

  TEST_CASE("evaluator agrees with the dense form on the interior part") {
    const Mesh m = build_mesh(DomainSpec::ball({0.0, 0.0}, 0.5), 1.0 / 20, 3.0);
    const ProblemParams p = make_params(2, 0.3, 1.0);
    const NonlocalForm f = assemble(m, p);
    BubbleSpec b;
    b.R = 1.0;
    b.center = boundary_anchor(m);
    b.epsilon = 0.02;
    const BubbleMeasures bm = BubbleEvaluator(m, p).evaluate(b);
    const Eigen::VectorXd v = as_vector(sample_bubble(m, b, 0.3));
    CHECK(bm.seminorm_interior == doctest::Approx(interior_form(f, v)).epsilon(1e-12));
    CHECK(bm.l2_norm_sq == doctest::Approx(v.cwiseProduct(f.M).dot(v)).epsilon(1e-12));
    // Zero extension is one admissible exterior: it bounds the eliminated form.
    CHECK(bm.seminorm >= reduced_form(f, v));
  }

  TEST_CASE("quotient probe: homogeneity and margins") {
    const Mesh m = build_mesh(DomainSpec::ball({0.0, 0.0}, 0.5642), 0.05, 4.0);
    const ProblemParams p = make_params(2, 0.3, 1.0);
    const NonlocalForm f = assemble(m, p);
    BubbleSpec b;
    b.R = m.diameter;
    b.center = boundary_anchor(m);
    b.epsilon = 0.01;
    const Eigen::VectorXd v = as_vector(sample_bubble(m, b, 0.3));
    CHECK(k_lambda(f, p, 7.5 * v) == doctest::Approx(k_lambda(f, p, v)).epsilon(1e-12));
    const std::vector<ProbeRow> rows = bubble_quotient_probe(f, m, p, b, {0.04, 0.01});
    for (const ProbeRow& r : rows) {
      CHECK(r.margin == doctest::Approx(r.S_half - r.K_lambda).epsilon(1e-15));
      CHECK(r.quarter_ratio == doctest::Approx(r.K_lambda / (0.25 * sharp_constant(2, 0.3))).epsilon(1e-14));
    }
  }
}
