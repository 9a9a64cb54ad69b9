#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fracvar/error.hpp"
#include "fracvar/model.hpp"
#include "fracvar/quadrature.hpp"

using namespace fracvar;

TEST_SUITE("model") {
  TEST_CASE("gauss-legendre integrates polynomials exactly") {
    for (int order : {1, 3, 8, 24}) {
      const auto& r = quad::gauss_legendre(order);
      double sum = 0.0;
      for (std::size_t k = 0; k < r.size(); ++k) sum += r.weights[k] * std::pow(r.nodes[k], 2 * order - 2);
      CHECK(sum == doctest::Approx(2.0 / (2 * order - 1)).epsilon(1e-13));
    }
    CHECK(quad::integrate_graded([](double x) { return std::pow(x, -0.4); }, 0.0, 1.0, 16, 60) ==
          doctest::Approx(1.0 / 0.6).epsilon(1e-9));
  }

  TEST_CASE("make_params examples") {
    const ProblemParams a = make_params(1, 0.1, 1.0);
    CHECK(a.p() == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(a.admissible);
    const ProblemParams b = make_params(2, 0.3, 5.0);
    CHECK(b.p() == doctest::Approx(2.6 / 1.4).epsilon(1e-15));
    CHECK(b.admissible);
    CHECK(b.discretization_valid);
    CHECK_THROWS_AS(make_params(1, 0.5, 1.0), ValidationError);
    CHECK_THROWS_AS(make_params(2, 0.3, 0.0), ValidationError);
    CHECK_THROWS_AS(make_params(2, 1.0, 1.0), ValidationError);
    CHECK_THROWS_AS(make_params(2, std::nan(""), 1.0), ValidationError);
  }

  TEST_CASE("flags follow their definitions") {
    CHECK_FALSE(make_params(1, 0.2, 1.0).admissible);
    CHECK_FALSE(make_params(1, 0.2, 1.0).displayed_regime);
    CHECK(make_params(1, 0.1, 1.0).displayed_regime);
    CHECK_FALSE(make_params(3, 0.6, 1.0).discretization_valid);
    CHECK(make_params(3, 0.6, 1.0).admissible);
  }

  TEST_CASE("p is strictly increasing in s") {
    for (int n = 1; n <= 3; ++n) {
      double prev = 0.0;
      for (double s = 0.01; s < 0.5 * n && s < 1.0; s += 0.01) {
        const double p = critical_exponent(n, s);
        CHECK(p > prev);
        prev = p;
      }
    }
  }

  TEST_CASE("interval mesh") {
    const Mesh m = build_mesh(DomainSpec::interval(0.0, 1.0), 0.25, 2.0);
    REQUIRE(m.size() == 4);
    for (double v : m.measures) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(m.domain_measure == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(m.centroids[0][0] == doctest::Approx(0.125));
  }

  TEST_CASE("ball area within 5 percent") {
    const Mesh m = build_mesh(DomainSpec::ball({0.0, 0.0}, 1.0), 0.1, 4.0);
    CHECK(std::abs(m.domain_measure - std::numbers::pi) < 0.05 * std::numbers::pi);
  }

  TEST_CASE("measures sum to the domain measure") {
    for (const DomainSpec& d : {DomainSpec::ball({0.0, 0.0}, 0.5), DomainSpec::box({0, 0, 0}, {1, 0.5, 0.5}),
                                DomainSpec::annulus({0.0, 0.0}, 0.2, 0.5)}) {
      const Mesh m = build_mesh(d, 0.1, 4.0 * d.diameter());
      double acc = 0.0;
      for (double v : m.measures) acc += v;
      CHECK(acc == m.domain_measure);
    }
  }

  TEST_CASE("scaled mesh is the image of the reference mesh") {
    DomainSpec d = DomainSpec::interval(0.0, 1.0);
    d.eta = 0.5;
    const Mesh m = build_mesh(d, 0.125, 1.0);
    REQUIRE(m.size() == 4);
    CHECK(m.domain_measure == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(m.centroids[1][0] == doctest::Approx(0.5 * 0.375).epsilon(1e-15));

    const DomainSpec b = DomainSpec::ball({0.0, 0.0}, 0.6);
    const Mesh ref = build_mesh(b, 0.1, 3.0);
    DomainSpec bh = b;
    bh.eta = 0.25;
    const Mesh img = build_mesh(bh, 0.025, 0.75);
    REQUIRE(img.size() == ref.size());
    REQUIRE(img.exterior_size() == ref.exterior_size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
      CHECK(img.centroids[i][0] == doctest::Approx(0.25 * ref.centroids[i][0]).epsilon(1e-14));
    }
    for (std::size_t z = 0; z < ref.exterior_size(); ++z) {
      CHECK(img.exterior[z].weight == doctest::Approx(ref.exterior[z].weight * 0.0625).epsilon(1e-13));
    }
  }

  TEST_CASE("mesh validation") {
    CHECK_THROWS_AS(build_mesh(DomainSpec::interval(0.0, 1.0), 2.0, 4.0), ValidationError);
    CHECK_THROWS_AS(build_mesh(DomainSpec::interval(0.0, 1.0), 0.1, 1.5), ValidationError);
    CHECK_THROWS_AS(build_mesh(DomainSpec::interval(0.0, 1.0), -0.1, 4.0), ValidationError);
    CHECK_THROWS_AS(DomainSpec::annulus({0.0, 0.0}, 0.5, 0.2).validate(), ValidationError);
    CHECK_THROWS_AS(DomainSpec::ball({0.0, 0.0}, 0.0).validate(), ValidationError);
  }

  TEST_CASE("fields are checked against the mesh") {
    const Mesh m = build_mesh(DomainSpec::interval(0.0, 1.0), 0.25, 2.0);
    CHECK_NOTHROW(check_field(m, DiscreteField(std::vector<double>(4, 1.0))));
    CHECK_THROWS_AS(check_field(m, DiscreteField(std::vector<double>(3, 1.0))), ValidationError);
    CHECK_THROWS_AS(check_field(m, DiscreteField({1.0, 2.0, INFINITY, 0.0})), ValidationError);
  }
}
