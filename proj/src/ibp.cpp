#include "fracvar/ibp.hpp"

#include <boost/math/special_functions/hypergeometric_1F1.hpp>
#include <cmath>
#include <numbers>

#include "fracvar/error.hpp"
#include "fracvar/quadrature.hpp"

namespace fracvar {
namespace {

// Distance from x to the sphere |y - c| = R along the unit direction e.
double ray_distance(const double* xc, const double* e, int n, double R) {
  double b = 0.0;
  double r2 = 0.0;
  for (int d = 0; d < n; ++d) {
    b += xc[d] * e[d];
    r2 += xc[d] * xc[d];
  }
  return -b + std::sqrt(b * b + R * R - r2);
}

}  // namespace

double gaussian_fractional_laplacian(int n, double s, double r) {
  const double a = 0.5 * n + s;
  const double b = 0.5 * n;
  const double pre = std::exp(2.0 * s * std::log(2.0) + std::lgamma(a) - std::lgamma(b));
  return pre * boost::math::hypergeometric_1F1(a, b, -r * r);
}

double outside_kernel_mass(int n, double s, const Point& c, double R, const Point& x) {
  double xc[3] = {0.0, 0.0, 0.0};
  double r2 = 0.0;
  for (int d = 0; d < n; ++d) {
    xc[d] = x[d] - c[d];
    r2 += xc[d] * xc[d];
  }
  if (!(r2 < R * R)) throw ValidationError("outside_kernel_mass: point outside the ball");
  const double k = 1.0 / (2.0 * s);
  if (n == 1) {
    double e = 1.0;
    const double a = ray_distance(xc, &e, 1, R);
    e = -1.0;
    const double b = ray_distance(xc, &e, 1, R);
    return k * (std::pow(a, -2.0 * s) + std::pow(b, -2.0 * s));
  }
  if (n == 2) {
    // Periodic integrand: the trapezoid rule converges geometrically.
    const int m = 256;
    double acc = 0.0;
    for (int j = 0; j < m; ++j) {
      const double t = 2.0 * std::numbers::pi * j / m;
      const double e[2] = {std::cos(t), std::sin(t)};
      acc += std::pow(ray_distance(xc, e, 2, R), -2.0 * s);
    }
    return k * acc * 2.0 * std::numbers::pi / m;
  }
  // Axisymmetric about x - c.
  const double rx = std::sqrt(r2);
  const quad::Rule& g = quad::gauss_legendre(64);
  double acc = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double mu = g.nodes[j];
    const double rho = -rx * mu + std::sqrt(rx * rx * mu * mu + R * R - r2);
    acc += g.weights[j] * std::pow(rho, -2.0 * s);
  }
  return k * 2.0 * std::numbers::pi * acc;
}

DiscreteField sample_gaussian(const Mesh& mesh, const Point& center, double width) {
  auto g = [&](const Point& x) {
    double r2 = 0.0;
    for (int d = 0; d < mesh.dim; ++d) r2 += (x[d] - center[d]) * (x[d] - center[d]);
    return std::exp(-r2 / (width * width));
  };
  std::vector<double> in(mesh.size());
  for (std::size_t i = 0; i < mesh.size(); ++i) in[i] = g(mesh.centroids[i]);
  std::vector<double> out(mesh.exterior_size());
  for (std::size_t z = 0; z < mesh.exterior_size(); ++z) out[z] = g(mesh.exterior[z].x);
  DiscreteField f(std::move(in));
  f.exterior_values = std::move(out);
  return f;
}

IbpLevel ibp_level(const Mesh& mesh, const ProblemParams& params, const GaussianPair& pair) {
  AssemblyOptions opts;
  opts.check_invariants = false;
  const NonlocalForm form = assemble(mesh, params, opts);
  const DiscreteField v = sample_gaussian(mesh, pair.v_center, pair.width);
  const DiscreteField w = sample_gaussian(mesh, pair.w_center, pair.width);
  const double scale = std::pow(pair.width, -2.0 * params.s);
  std::vector<double> op(mesh.size());
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    const Point& x = mesh.centroids[i];
    double r2 = 0.0;
    for (int d = 0; d < mesh.dim; ++d) r2 += (x[d] - pair.v_center[d]) * (x[d] - pair.v_center[d]);
    const double full = scale * gaussian_fractional_laplacian(params.n, params.s,
                                                              std::sqrt(r2) / pair.width);
    // The rule stops at R_ext, where v has long vanished.
    const double tail = form.cns * v.values[i] *
                        outside_kernel_mass(params.n, params.s, mesh.far_center, mesh.R_ext, x);
    op[i] = full - tail;
  }
  IbpLevel level;
  level.h = mesh.h;
  level.cells = mesh.size();
  level.report = ibp_check(form, v, w, &op);
  level.relative_residual = level.report.residual / std::abs(level.report.lhs);
  const DiscreteField vr = reconstruct_exterior(form, v);
  const DiscreteField wr = reconstruct_exterior(form, w);
  level.neumann_reconstructed = std::abs(ibp_check(form, vr, wr).neumann_term);
  return level;
}

std::vector<IbpLevel> ibp_refinement(const DomainSpec& domain, const ProblemParams& params,
                                     const std::vector<double>& hs, double R_ext,
                                     const GaussianPair& pair) {
  std::vector<IbpLevel> out;
  for (double h : hs) out.push_back(ibp_level(build_mesh(domain, h, R_ext), params, pair));
  return out;
}

}  // namespace fracvar
