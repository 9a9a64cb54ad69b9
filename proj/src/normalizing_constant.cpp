#include <cmath>
#include <numbers>

#include "fracvar/assembly.hpp"
#include "fracvar/error.hpp"
#include "fracvar/quadrature.hpp"

namespace fracvar {
namespace {

constexpr int kPeriods = 64;
constexpr int kOrder = 24;
constexpr int kLevels = 60;

// int_0^inf (1 - cos t) t^{-1-2s} dt.
double oscillatory_part(double s) {
  const double two_pi = 2.0 * std::numbers::pi;
  auto f = [s](double t) {
    const double half = std::sin(0.5 * t);
    return 2.0 * half * half * std::pow(t, -1.0 - 2.0 * s);
  };
  double total = quad::integrate_graded(f, 0.0, two_pi, kOrder, kLevels);
  // Dropped sliver [0, delta]: integrand ~ t^{1-2s}/2.
  const double delta = two_pi * std::ldexp(1.0, -kLevels);
  total += 0.5 * std::pow(delta, 2.0 - 2.0 * s) / (2.0 - 2.0 * s);
  for (int k = 1; k < kPeriods; ++k) {
    total += quad::integrate(f, k * two_pi, (k + 1) * two_pi, kOrder, 2);
  }
  // Tail past T = 2 pi K, where sin T = 0 and cos T = 1.
  const double T = kPeriods * two_pi;
  const double a = 1.0 + 2.0 * s;
  const double cos_tail = a * std::pow(T, -a - 1.0) -
                          a * (a + 1.0) * (a + 2.0) * std::pow(T, -a - 3.0) +
                          a * (a + 1.0) * (a + 2.0) * (a + 3.0) * (a + 4.0) *
                              std::pow(T, -a - 5.0);
  total += std::pow(T, -2.0 * s) / (2.0 * s) - cos_tail;
  return total;
}

// int_{S^{n-1}} |omega_1|^{2s} d omega.
double angular_part(int n, double s) {
  if (n == 1) return 2.0;
  // omega_1 = sin(phi), phi the latitude measured from the equator of the
  // x_1 axis: |S^{n-2}| * 2 int_0^{pi/2} sin^{2s}(phi) cos^{n-2}(phi) dphi.
  auto f = [n, s](double phi) {
    return std::pow(std::sin(phi), 2.0 * s) * std::pow(std::cos(phi), n - 2);
  };
  const double half_pi = 0.5 * std::numbers::pi;
  double inner = quad::integrate_graded(f, 0.0, half_pi, kOrder, kLevels);
  const double delta = half_pi * std::ldexp(1.0, -kLevels);
  inner += std::pow(delta, 2.0 * s + 1.0) / (2.0 * s + 1.0);
  return sphere_measure(n - 1) * 2.0 * inner;
}

}  // namespace

double sphere_measure(int n) {
  if (n < 1) throw ValidationError("sphere_measure: n must be >= 1");
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

double normalizing_constant_closed(int n, double s) {
  if (n < 1 || !(s > 0.0 && s < 1.0)) {
    throw ValidationError("normalizing_constant: need n >= 1 and s in (0, 1)");
  }
  const double log_c = std::log(s) + 2.0 * s * std::log(2.0) +
                       std::lgamma(0.5 * (n + 2.0 * s)) -
                       0.5 * n * std::log(std::numbers::pi) - std::lgamma(1.0 - s);
  return std::exp(log_c);
}

double normalizing_constant(int n, double s) {
  const double closed = normalizing_constant_closed(n, s);
  const double value = 1.0 / (angular_part(n, s) * oscillatory_part(s));
  if (!std::isfinite(value) || std::abs(value - closed) > 1e-6 * closed) {
    throw NumericalError("normalizing_constant: quadrature disagrees with closed form");
  }
  return value;
}

}  // namespace fracvar
