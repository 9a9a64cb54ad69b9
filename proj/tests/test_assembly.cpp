#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fracvar/assembly.hpp"
#include "fracvar/bubbles.hpp"
#include "fracvar/error.hpp"
#include "fracvar/ibp.hpp"
#include "oracles.hpp"

using namespace fracvar;

namespace {

Eigen::VectorXd random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = std::uniform_real_distribution<double>(-1, 1)(rng);
  return v;
}

DiscreteField field(const Eigen::VectorXd& v) {
  return DiscreteField(std::vector<double>(v.data(), v.data() + v.size()));
}

}  // namespace

TEST_SUITE("assembly") {
  TEST_CASE("normalizing constant: both routes and the oracle") {
    const double grid[3][3] = {{oracle::kCns_1_025, oracle::kCns_1_05, oracle::kCns_1_075},
                               {oracle::kCns_2_025, oracle::kCns_2_05, oracle::kCns_2_075},
                               {oracle::kCns_3_025, oracle::kCns_3_05, oracle::kCns_3_075}};
    const double ss[3] = {0.25, 0.5, 0.75};
    for (int n = 1; n <= 3; ++n) {
      for (int k = 0; k < 3; ++k) {
        const double q = normalizing_constant(n, ss[k]);
        const double c = normalizing_constant_closed(n, ss[k]);
        CHECK(q > 0.0);
        CHECK(std::abs(q - c) <= 1e-6 * c);
        CHECK(c == doctest::Approx(grid[n - 1][k]).epsilon(1e-12));
      }
    }
    CHECK(normalizing_constant(1, 0.5) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-9));
    CHECK(sphere_measure(3) == doctest::Approx(4.0 * std::numbers::pi).epsilon(1e-14));
  }

  TEST_CASE("two-cell interior form") {
    const Mesh m = build_mesh(DomainSpec::interval(0.0, 1.0), 0.5, 8.0);
    const ProblemParams p = make_params(1, 0.2, 1.0);
    const NonlocalForm f = assemble(m, p);
    Eigen::VectorXd u(2);
    u << 1.0, -0.5;
    const double I = interval_pair_integral(0, 0.5, 0.5, 1.0, 0.2);
    CHECK(interior_form(f, u) == doctest::Approx(f.cns * I * 2.25).epsilon(1e-13));
  }

  TEST_CASE("invariants on assorted meshes") {
    const DomainSpec domains[] = {DomainSpec::interval(0.0, 1.0), DomainSpec::ball({0.0, 0.0}, 0.56),
                                  DomainSpec::annulus({0.0, 0.0}, 0.15, 0.5),
                                  DomainSpec::box({0, 0, 0}, {1, 1, 1})};
    const double hs[] = {0.05, 0.08, 0.07, 0.25};
    for (int k = 0; k < 4; ++k) {
      const Mesh m = build_mesh(domains[k], hs[k], 4.0 * domains[k].diameter());
      const ProblemParams p = make_params(domains[k].dim, 0.3, 1.0);
      const NonlocalForm f = assemble(m, p);
      const FormDiagnostics d = diagnose(f, 10, 5);
      CHECK(d.symmetry <= 1e-12);
      CHECK(d.constants <= 1e-12);
      CHECK(d.min_weight >= 0.0);
      CHECK(d.min_probe >= -1e-10);
      CHECK(d.mu_sum <= 1e-12);
      CHECK(d.mu_min >= 0.0);
      CHECK(f.tail_bound > 0.0);
      // A single-cell indicator is seminorm-positive.
      Eigen::VectorXd e = Eigen::VectorXd::Zero(f.A.rows());
      e[0] = 1.0;
      CHECK(reduced_form(f, e) > 0.0);
    }
  }

  TEST_CASE("reconstruction and the discrete Neumann derivative") {
    const Mesh m = build_mesh(DomainSpec::ball({0.0, 0.0}, 0.5), 0.08, 3.0);
    const NonlocalForm f = assemble(m, make_params(2, 0.3, 1.0));
    const DiscreteField c = reconstruct_exterior(f, DiscreteField(std::vector<double>(m.size(), 3.0)));
    for (double v : *c.exterior_values) CHECK(v == doctest::Approx(3.0).epsilon(1e-14));
    std::vector<double> ind(m.size(), 0.0);
    ind[5] = 1.0;
    const DiscreteField e = reconstruct_exterior(f, DiscreteField(ind));
    for (std::size_t z = 0; z < f.exterior_size(); ++z) {
      CHECK((*e.exterior_values)[z] == doctest::Approx(f.mu(z, 5)).epsilon(1e-14));
      CHECK((*e.exterior_values)[z] >= 0.0);
      CHECK((*e.exterior_values)[z] <= 1.0);
    }
    const DiscreteField r = reconstruct_exterior(f, field(random_vector(m.size(), 9)));
    const std::vector<double> nd = neumann_derivative(f, r);
    double worst = 0.0;
    for (double v : nd) worst = std::max(worst, std::abs(v));
    CHECK(worst <= 1e-12);
  }

  TEST_CASE("elimination optimality") {
    const Mesh m = build_mesh(DomainSpec::ball({0.0, 0.0}, 0.5), 0.1, 3.0);
    const NonlocalForm f = assemble(m, make_params(2, 0.25, 1.0));
    const Eigen::VectorXd u = random_vector(m.size(), 11);
    const DiscreteField r = reconstruct_exterior(f, field(u));
    const double base = full_form(f, r);
    CHECK(base == doctest::Approx(reduced_form(f, u)).epsilon(1e-10));
    std::mt19937_64 rng(4);
    for (int t = 0; t < 20; ++t) {
      DiscreteField q = r;
      for (double& v : *q.exterior_values) v += 0.01 * std::uniform_real_distribution<double>(-1, 1)(rng);
      CHECK(full_form(f, q) >= base);
    }
  }

  TEST_CASE("operator: constants, linearity, quadratic-form consistency") {
    const Mesh m = build_mesh(DomainSpec::interval(0.0, 1.0), 1.0 / 32, 4.0);
    const NonlocalForm f = assemble(m, make_params(1, 0.3, 1.0));
    const DiscreteField one = reconstruct_exterior(f, DiscreteField(std::vector<double>(m.size(), 2.0)));
    for (double v : apply_fractional_laplacian(f, one).values) CHECK(std::abs(v) <= 1e-9);
    const Eigen::VectorXd a = random_vector(m.size(), 1), b = random_vector(m.size(), 2);
    const DiscreteField fa = reconstruct_exterior(f, field(a));
    const DiscreteField fb = reconstruct_exterior(f, field(b));
    const DiscreteField fab = reconstruct_exterior(f, field(2.0 * a - 3.0 * b));
    const Eigen::VectorXd la = as_vector(apply_fractional_laplacian(f, fa));
    const Eigen::VectorXd lb = as_vector(apply_fractional_laplacian(f, fb));
    const Eigen::VectorXd lab = as_vector(apply_fractional_laplacian(f, fab));
    CHECK((lab - (2.0 * la - 3.0 * lb)).cwiseAbs().maxCoeff() <= 1e-12 * lab.cwiseAbs().maxCoeff());

    BubbleSpec spec;
    spec.R = 1.0;
    spec.center = boundary_anchor(m);
    spec.epsilon = 0.02;
    const DiscreteField u = sample_bubble(m, f, spec, 0.3);
    const Eigen::VectorXd uv = as_vector(u);
    const Eigen::VectorXd lu = as_vector(apply_fractional_laplacian(f, u));
    CHECK(lu.cwiseProduct(f.M).dot(uv) == doctest::Approx(reduced_form(f, uv)).epsilon(1e-6));
  }

  TEST_CASE("gradient of the half form is A u") {
    const Mesh m = build_mesh(DomainSpec::interval(0.0, 1.0), 0.1, 4.0);
    REQUIRE(m.size() == 10);
    const NonlocalForm f = assemble(m, make_params(1, 0.2, 1.0));
    const Eigen::VectorXd u = random_vector(10, 21);
    const Eigen::VectorXd g = f.A * u;
    for (Eigen::Index i = 0; i < 10; ++i) {
      const double t = 1e-5;
      Eigen::VectorXd up = u, um = u;
      up[i] += t;
      um[i] -= t;
      const double fd = (0.5 * reduced_form(f, up) - 0.5 * reduced_form(f, um)) / (2 * t);
      CHECK(fd == doctest::Approx(g[i]).epsilon(1e-6));
    }
  }

  TEST_CASE("integration by parts: trivial and reconstructed cases") {
    const Mesh m = build_mesh(DomainSpec::ball({0.0, 0.0}, 0.5), 0.1, 3.0);
    const NonlocalForm f = assemble(m, make_params(2, 0.3, 1.0));
    const DiscreteField one = reconstruct_exterior(f, DiscreteField(std::vector<double>(m.size(), 1.0)));
    const DiscreteField w = reconstruct_exterior(f, field(random_vector(m.size(), 3)));
    const IbpReport t = ibp_check(f, one, w);
    CHECK(std::abs(t.lhs) <= 1e-12);
    CHECK(std::abs(t.bilinear) <= 1e-12);
    CHECK(std::abs(t.neumann_term) <= 1e-12);
    const DiscreteField v = reconstruct_exterior(f, field(random_vector(m.size(), 8)));
    const IbpReport r = ibp_check(f, v, v);
    CHECK(r.lhs == doctest::Approx(r.bilinear).epsilon(1e-10));
    CHECK(std::abs(r.neumann_term) <= 1e-10 * std::abs(r.bilinear));
  }

  TEST_CASE("Gaussian operator matches the Kummer oracle and a direct integral") {
    CHECK(gaussian_fractional_laplacian(2, 0.3, 0.5) == doctest::Approx(oracle::kGauss_2_03_r05).epsilon(1e-12));
    CHECK(gaussian_fractional_laplacian(3, 0.4, 1.2) == doctest::Approx(oracle::kGauss_3_04_r12).epsilon(1e-12));
    CHECK(gaussian_fractional_laplacian(1, 0.3, 0.7) == doctest::Approx(oracle::kGauss_1_03_r07).epsilon(1e-12));
  }

  TEST_CASE("outside kernel mass") {
    // At the center the mass is omega_n R^{-2s}/(2s).
    for (int n = 1; n <= 3; ++n) {
      const double v = outside_kernel_mass(n, 0.3, {0, 0, 0}, 2.0, {0, 0, 0});
      CHECK(v == doctest::Approx(sphere_measure(n) * std::pow(2.0, -0.6) / 0.6).epsilon(1e-12));
    }
    CHECK(outside_kernel_mass(2, 0.3, {0, 0, 0}, 2.0, {1, 0, 0}) > outside_kernel_mass(2, 0.3, {0, 0, 0}, 2.0, {0, 0, 0}));
  }

  TEST_CASE("refinement: residual falls by 1.5 per halving") {
    GaussianPair gp;
    gp.v_center = {0.45, 0, 0};
    gp.w_center = {0.6, 0, 0};
    const std::vector<IbpLevel> L =
        ibp_refinement(DomainSpec::interval(0.0, 1.0), make_params(1, 0.3, 1.0), {1.0 / 16, 1.0 / 32, 1.0 / 64}, 4.0, gp);
    for (std::size_t k = 1; k < L.size(); ++k) CHECK(L[k - 1].report.residual >= 1.5 * L[k].report.residual);
    for (const auto& l : L) CHECK(l.neumann_reconstructed <= 1e-10);
  }
}
