#include "fracvar/constants.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "fracvar/assembly.hpp"
#include "fracvar/error.hpp"
#include "fracvar/model.hpp"
#include "fracvar/quadrature.hpp"

namespace fracvar {
namespace {

constexpr double kPi = std::numbers::pi;

void require_subcritical(int n, double s, const char* who) {
  if (n < 1 || !(s > 0.0 && s < 1.0) || !(n > 2.0 * s)) {
    throw ValidationError(std::string(who) + ": need n >= 1, s in (0,1), n > 2s");
  }
}

// Panels [a_k, a_{k+1}] and an integration rule applied to each.
struct Panels {
  std::vector<double> edges;
};

// Graded toward 0 from `first`, then geometric with ratio `ratio` up to `last`.
Panels graded_panels(double first, double last, double ratio, int inner_levels,
                     const std::vector<double>& extra = {}) {
  Panels p;
  std::vector<double>& e = p.edges;
  e.push_back(0.0);
  for (int k = inner_levels; k >= 1; --k) e.push_back(first * std::ldexp(1.0, -k));
  double x = first;
  while (x < last) {
    e.push_back(x);
    x *= ratio;
  }
  e.push_back(last);
  for (double v : extra) {
    if (v > e.front() && v < e.back()) e.push_back(v);
  }
  std::sort(e.begin(), e.end());
  e.erase(std::unique(e.begin(), e.end(),
                      [](double a, double b) { return std::abs(a - b) <= 1e-14 * std::max(1.0, b); }),
          e.end());
  return p;
}

template <class F>
double panel_sum(const Panels& p, int order, F&& f) {
  const quad::Rule& rule = quad::gauss_legendre(order);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < p.edges.size(); ++k) {
    const double a = p.edges[k];
    const double b = p.edges[k + 1];
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t j = 0; j < rule.size(); ++j) acc += rule.weights[j] * f(mid + half * rule.nodes[j]);
    total += half * acc;
  }
  return total;
}

class BubbleQuadrature {
 public:
  BubbleQuadrature(int n, double s, int grid)
      : n_(n), s_(s), grid_(grid), beta_(0.5 * (n - 2.0 * s)) {
    cns_ = normalizing_constant(n, s);
    omega_ = sphere_measure(n);
    if (n >= 2) omega_lower_ = sphere_measure(n - 1);
  }

  double U(double r) const { return std::pow(1.0 + r * r, -beta_); }
  double U2(double r2) const { return std::pow(1.0 + r2, -beta_); }

  // Mean of U over the sphere of radius rho about a point at distance r.
  double spherical_mean(double r, double rho) const {
    if (n_ == 1) return 0.5 * (U(r + rho) + U(r - rho));
    // psi measured from the antipodal direction: phi = pi - psi, and
    // |x + rho w|^2 = (r - rho)^2 + 2 r rho (1 - cos phi).
    const double scale = std::sqrt(std::max(r * rho, 1e-300));
    const double first = std::min(kPi, 0.5 / scale);
    Panels p;
    p.edges.push_back(0.0);
    double x = first;
    while (x < kPi) {
      p.edges.push_back(x);
      x *= 2.0;
    }
    p.edges.push_back(kPi);
    const double d0 = (r - rho) * (r - rho);
    const int lower = n_ - 2;
    const double num = panel_sum(p, grid_, [&](double phi) {
      const double half = std::sin(0.5 * phi);
      const double d2 = d0 + 4.0 * r * rho * half * half;
      return U2(d2) * std::pow(std::sin(phi), lower);
    });
    // Normalization: int_0^pi sin^{n-2} = omega_n / omega_{n-1}.
    return num * omega_lower_ / omega_;
  }

  // (-Delta)^s U at radius r.
  double laplacian(double r) const {
    const double base = U(r);
    const double R = 1e6 * std::max(1.0, r);
    const double first = 0.5 * std::min(1.0, std::max(r, 1e-3));
    std::vector<double> extra;
    if (r > first) extra = {r, 2.0 * r};
    const Panels p = graded_panels(first, R, 1.6, 30, extra);
    const double inner = panel_sum(p, grid_, [&](double rho) {
      return std::pow(rho, -1.0 - 2.0 * s_) * (base - spherical_mean(r, rho));
    });
    const double tail = base * std::pow(R, -2.0 * s_) / (2.0 * s_);
    return cns_ * omega_ * (inner + tail);
  }

  double seminorm() const {
    const double Rmax = 1e3;
    const Panels p = graded_panels(0.05, Rmax, 1.5, 6);
    const double bulk = panel_sum(p, grid_, [&](double r) {
      return std::pow(r, n_ - 1) * U(r) * laplacian(r);
    });
    // Tail: integrand decays like r^{-n-1}.
    const double last = std::pow(Rmax, n_) * U(Rmax) * laplacian(Rmax);
    const double tail = last / n_;
    return omega_ * (bulk + tail);
  }

  double lp_integral() const {
    const double Rmax = 1e4;
    const Panels p = graded_panels(0.05, Rmax, 1.5, 6);
    const double bulk = panel_sum(p, grid_, [&](double r) {
      return std::pow(r, n_ - 1) * std::pow(1.0 + r * r, -n_);
    });
    // (1+r^2)^{-n} r^{n-1} ~ r^{-n-1}
    const double tail = std::pow(Rmax, -static_cast<double>(n_)) / n_;
    return omega_ * (bulk + tail);
  }

 private:
  int n_;
  double s_;
  int grid_;
  double beta_;
  double cns_ = 0.0;
  double omega_ = 0.0;
  double omega_lower_ = 1.0;
};

}  // namespace

double sharp_constant(int n, double s) {
  require_subcritical(n, s, "sharp_constant");
  const double log_s = 2.0 * s * std::log(2.0) + s * std::log(kPi) +
                       std::lgamma(0.5 * (n + 2.0 * s)) - std::lgamma(0.5 * (n - 2.0 * s)) +
                       (2.0 * s / n) * (std::lgamma(0.5 * n) - std::lgamma(static_cast<double>(n)));
  return std::exp(log_s);
}

double lambda_star(double S, double domain_measure, int n, double s) {
  if (!(S > 0.0) || !(domain_measure > 0.0) || n < 1 || !(s > 0.0)) {
    throw ValidationError("lambda_star: inputs must be positive");
  }
  return S / std::pow(2.0 * domain_measure, 2.0 * s / n);
}

double bubble_eigen_factor(int n, double s) {
  require_subcritical(n, s, "bubble_eigen_factor");
  return std::exp(2.0 * s * std::log(2.0) + std::lgamma(0.5 * (n + 2.0 * s)) -
                  std::lgamma(0.5 * (n - 2.0 * s)));
}

double bubble_fractional_laplacian(int n, double s, double r, int grid) {
  require_subcritical(n, s, "bubble_fractional_laplacian");
  return BubbleQuadrature(n, s, grid).laplacian(r);
}

BubbleQuotient bubble_rayleigh_global(int n, double s, int grid) {
  require_subcritical(n, s, "bubble_rayleigh_global");
  if (grid < 4) throw ValidationError("bubble_rayleigh_global: grid must be >= 4");
  const double q = 2.0 / (critical_exponent(n, s) + 1.0);
  auto evaluate = [&](int g, double& semi, double& lp) {
    BubbleQuadrature bq(n, s, g);
    semi = bq.seminorm();
    lp = std::pow(bq.lp_integral(), q);
    return semi / lp;
  };
  BubbleQuotient out;
  double semi_c = 0.0;
  double lp_c = 0.0;
  out.value = evaluate(grid, out.seminorm, out.lp_norm_sq);
  out.coarse = evaluate(std::max(4, (3 * grid) / 4), semi_c, lp_c);
  out.converged = std::isfinite(out.value) && std::abs(out.value - out.coarse) <= 0.01 * out.value;
  return out;
}

double l2_closed(int n, double s) {
  require_subcritical(n, s, "l2_closed");
  const double base = std::exp(0.5 * n * std::log(kPi) + std::lgamma(0.5 * n) -
                               std::lgamma(static_cast<double>(n)));
  return std::pow(base, (n - 2.0 * s) / n);
}

double l3_closed(int n, double s) {
  if (!(n > 4.0 * s)) throw ValidationError("l3_closed: need n > 4s");
  require_subcritical(n, s, "l3_closed");
  if (n == 1) {
    return std::sqrt(kPi) * std::tgamma(0.5 * (1.0 - 4.0 * s)) / std::tgamma(1.0 - 2.0 * s);
  }
  return sphere_measure(n) * std::exp(std::lgamma(0.5 * (n - 4.0 * s)) + std::lgamma(0.5 * n) -
                                      std::lgamma(n - 2.0 * s)) /
         2.0;
}

double l2_quadrature(int n, double s, int grid) {
  require_subcritical(n, s, "l2_quadrature");
  const double q = 2.0 / (critical_exponent(n, s) + 1.0);
  return std::pow(BubbleQuadrature(n, s, grid).lp_integral(), q);
}

AsymptoticConstants asymptotic_constants(int n, double s, int grid) {
  if (!(n > 4.0 * s)) throw ValidationError("asymptotic_constants: need n > 4s");
  require_subcritical(n, s, "asymptotic_constants");
  AsymptoticConstants out;
  out.L2 = l2_closed(n, s);
  out.L3 = l3_closed(n, s);
  out.L1 = sharp_constant(n, s) * out.L2;
  out.L2_quadrature = l2_quadrature(n, s, std::max(grid, 16));
  out.L1_quadrature = BubbleQuadrature(n, s, grid).seminorm();
  return out;
}

ConstantTable constant_table(int n, double s, double domain_measure) {
  require_subcritical(n, s, "constant_table");
  ConstantTable t;
  t.n = n;
  t.s = s;
  t.p = critical_exponent(n, s);
  t.c_ns = normalizing_constant(n, s);
  t.S = sharp_constant(n, s);
  t.S_half = t.S / std::pow(2.0, 2.0 * s / n);
  t.omega_n = sphere_measure(n);
  if (n > 4.0 * s) {
    t.L2 = l2_closed(n, s);
    t.L3 = l3_closed(n, s);
    t.L1 = t.S * t.L2;
  }
  if (domain_measure > 0.0) t.lambda_star = lambda_star(t.S, domain_measure, n, s);
  return t;
}

}  // namespace fracvar
