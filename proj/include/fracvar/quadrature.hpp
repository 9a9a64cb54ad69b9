#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace fracvar::quad {

// Gauss-Legendre rule on [-1, 1].
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const { return nodes.size(); }
};

// Cached per order; safe to call concurrently.
const Rule& gauss_legendre(int order);

// Integrates f over [a, b] with a Gauss rule of the given order on each of
// `panels` equal sub-intervals.
double integrate(const std::function<double(double)>& f, double a, double b,
                 int order, int panels = 1);

// Integrates f over [a, b] where f has an algebraic endpoint singularity at
// `a` (or just non-smoothness there). Uses geometric panels of ratio 1/2
// toward a; the innermost sliver of relative width 2^-levels is dropped.
double integrate_graded(const std::function<double(double)>& f, double a,
                        double b, int order, int levels);

}  // namespace fracvar::quad
