#include "fracvar/bubbles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "fracvar/constants.hpp"
#include "fracvar/error.hpp"
#include "fracvar/kernels.hpp"
#include "fracvar/solver.hpp"

namespace fracvar {
namespace {

double dist(const Point& a, const Point& b, int n) {
  double r2 = 0.0;
  for (int d = 0; d < n; ++d) r2 += (a[d] - b[d]) * (a[d] - b[d]);
  return std::sqrt(r2);
}

double smooth_step(double t) {
  // exp(-1/t) mollified step: 0 at t = 0, 1 at t = 1.
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

double quintic_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

std::array<int, kMaxDim> neighbor(std::array<int, kMaxDim> k, int d, int step) {
  k[d] += step;
  return k;
}

std::vector<int> edge_cells(const Mesh& mesh) {
  std::set<std::array<int, kMaxDim>> cells(mesh.index.begin(), mesh.index.end());
  std::vector<int> out;
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    bool edge = false;
    for (int d = 0; d < mesh.dim && !edge; ++d) {
      edge = !cells.count(neighbor(mesh.index[i], d, 1)) ||
             !cells.count(neighbor(mesh.index[i], d, -1));
    }
    if (edge) out.push_back(static_cast<int>(i));
  }
  return out;
}

void validate_spec(const Mesh& mesh, const BubbleSpec& spec) {
  if (!(spec.epsilon > 0.0) || !std::isfinite(spec.epsilon)) {
    throw ValidationError("bubble: epsilon must be > 0");
  }
  if (!(spec.R > 0.0) || !std::isfinite(spec.R)) throw ValidationError("bubble: R must be > 0");
  const int n = mesh.dim;
  bool reach = false;
  for (const Point& x : mesh.centroids) {
    if (dist(x, spec.center, n) <= 0.5 * spec.R) {
      reach = true;
      break;
    }
  }
  if (!reach) throw ValidationError("bubble: support misses the domain");
  if (spec.boundary) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t z = 0; z < mesh.near_count; ++z) {
      best = std::min(best, dist(mesh.exterior[z].x, spec.center, n));
    }
    if (best > 1.5 * mesh.h) throw ValidationError("bubble: center is not on the boundary");
  }
}

}  // namespace

double cutoff(double r, double R, CutoffProfile profile) {
  const double inner = 0.25 * R;
  if (r <= inner) return 1.0;
  if (r >= 0.5 * R) return 0.0;
  const double t = (r - inner) / inner;
  return 1.0 - (profile == CutoffProfile::Smooth ? smooth_step(t) : quintic_step(t));
}

double bubble_value(const BubbleSpec& spec, const Point& x, int n, double s) {
  const double r = dist(x, spec.center, n);
  const double psi = cutoff(r, spec.R, spec.profile);
  if (psi == 0.0) return 0.0;
  return psi * std::pow(spec.epsilon + r * r, -0.5 * (n - 2.0 * s));
}

std::vector<int> boundary_cells(const Mesh& mesh) { return edge_cells(mesh); }

Point boundary_anchor(const Mesh& mesh, const std::optional<Point>& hint) {
  Point target{};
  if (hint) {
    target = *hint;
  } else {
    Point lo, hi;
    mesh.domain.bounds(lo, hi);
    target = mesh.domain.centroid();
    target[0] = lo[0];
  }
  const std::vector<int> cells = edge_cells(mesh);
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (int i : cells) {
    const double d = dist(mesh.centroids[i], target, mesh.dim);
    if (d < best_d - 1e-12 * mesh.h) {
      best_d = d;
      best = i;
    }
  }
  if (best < 0) throw ValidationError("boundary_anchor: mesh has no boundary cells");
  return mesh.centroids[best];
}

Point interior_anchor(const Mesh& mesh) {
  const Point c = mesh.domain.centroid();
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    const double d = dist(mesh.centroids[i], c, mesh.dim);
    if (d < best_d - 1e-12 * mesh.h) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return mesh.centroids[best];
}

DiscreteField sample_bubble(const Mesh& mesh, const BubbleSpec& spec, double s) {
  validate_spec(mesh, spec);
  std::vector<double> values(mesh.size());
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    values[i] = bubble_value(spec, mesh.centroids[i], mesh.dim, s);
  }
  return DiscreteField(std::move(values));
}

DiscreteField sample_bubble(const Mesh& mesh, const NonlocalForm& form, const BubbleSpec& spec,
                            double s) {
  return reconstruct_exterior(form, sample_bubble(mesh, spec, s));
}

std::vector<double> default_ladder(double R, int count) {
  std::vector<double> out;
  for (int k = 0; k < count; ++k) out.push_back(std::ldexp(1.0, -2 * k) * (0.25 * R) * (0.25 * R));
  return out;
}

BubbleEvaluator::BubbleEvaluator(const Mesh& mesh, const ProblemParams& params, bool parallel)
    : mesh_(&mesh), params_(params), parallel_(parallel) {
  if (!params.discretization_valid) throw ValidationError("BubbleEvaluator: need s < 1/2");
  if (mesh.dim != params.n) throw ValidationError("BubbleEvaluator: dimension mismatch");
  cns_ = normalizing_constant(params.n, params.s);
  h_power_ = std::pow(mesh.h, params.n - 2.0 * params.s);
  complement_ = lattice_complement_sum(params.n, params.s);
  std::array<int, kMaxDim> lo{0, 0, 0};
  std::array<int, kMaxDim> hi{0, 0, 0};
  for (int d = 0; d < mesh.dim; ++d) {
    lo[d] = hi[d] = mesh.index.front()[d];
    for (const auto& k : mesh.index) {
      lo[d] = std::min(lo[d], k[d]);
      hi[d] = std::max(hi[d], k[d]);
    }
  }
  std::array<int, kMaxDim> extent{1, 1, 1};
  for (int d = 0; d < mesh.dim; ++d) extent[d] = hi[d] - lo[d] + 1;
  table_ = std::make_shared<PairTable>(params.n, params.s, extent);
}

BubbleMeasures BubbleEvaluator::evaluate(const BubbleSpec& spec) const {
  const Mesh& mesh = *mesh_;
  validate_spec(mesh, spec);
  const int n = params_.n;
  const double s = params_.s;
  const double p = params_.p();
  const Eigen::Index N = static_cast<Eigen::Index>(mesh.size());
  Eigen::VectorXd u(N);
  std::vector<int> active;
  for (Eigen::Index i = 0; i < N; ++i) {
    u[i] = bubble_value(spec, mesh.centroids[i], n, s);
    if (u[i] != 0.0) active.push_back(static_cast<int>(i));
  }
  double pairs = 0.0;
  std::vector<double> rows;
  if (parallel_) {
    pairs = kernels::omp::pair_form_active(*table_, mesh.index, u, active);
    kernels::omp::pair_rowsum(*table_, mesh.index, active, rows);
  } else {
    pairs = kernels::serial::pair_form_active(*table_, mesh.index, u, active);
    kernels::serial::pair_rowsum(*table_, mesh.index, active, rows);
  }
  double outside = 0.0;
  for (std::size_t a = 0; a < active.size(); ++a) {
    const double ui = u[active[a]];
    outside += ui * ui * (complement_ - rows[a]);
  }
  BubbleMeasures m;
  m.epsilon = spec.epsilon;
  m.seminorm_interior = cns_ * h_power_ * pairs;
  m.seminorm = cns_ * h_power_ * (pairs + outside);
  double lp = 0.0;
  double l2 = 0.0;
  for (int i : active) {
    lp += mesh.measures[i] * std::pow(std::abs(u[i]), p + 1.0);
    l2 += mesh.measures[i] * u[i] * u[i];
  }
  m.lp1_norm_sq = std::pow(lp, 2.0 / (p + 1.0));
  m.l2_norm_sq = l2;
  return m;
}

AsymptoticFit fit_power_law(const std::vector<double>& epsilons,
                            const std::vector<double>& values) {
  if (epsilons.size() != values.size() || epsilons.size() < 3) {
    throw ValidationError("fit_power_law: need at least three (epsilon, value) pairs");
  }
  for (std::size_t k = 0; k + 1 < epsilons.size(); ++k) {
    if (!(epsilons[k + 1] < epsilons[k]) || !(epsilons[k + 1] > 0.0)) {
      throw ValidationError("fit_power_law: epsilons must be positive and strictly decreasing");
    }
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw ValidationError("fit_power_law: values must be finite");
  }
  const double ratio = epsilons[0] / epsilons[1];
  for (std::size_t k = 1; k + 1 < epsilons.size(); ++k) {
    if (std::abs(epsilons[k] / epsilons[k + 1] - ratio) > 1e-9 * ratio) {
      throw ValidationError("fit_power_law: the ladder must be geometric");
    }
  }
  AsymptoticFit fit;
  fit.epsilons = epsilons;
  fit.values = values;
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t k = 0; k + 1 < values.size(); ++k) {
    const double diff = values[k + 1] - values[k];
    if (!(diff > 0.0)) {
      fit.fitted_exponent = std::numeric_limits<double>::quiet_NaN();
      fit.fitted_coefficient = std::numeric_limits<double>::quiet_NaN();
      fit.r2 = 0.0;
      return fit;
    }
    x.push_back(std::log(epsilons[k]));
    y.push_back(std::log(diff));
  }
  const double m = static_cast<double>(x.size());
  double sx = 0.0;
  double sy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
  }
  const double mx = sx / m;
  const double my = sy / m;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ssr = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double e = y[k] - (intercept + slope * x[k]);
    ssr += e * e;
  }
  fit.fitted_exponent = -slope;
  fit.fitted_coefficient = std::exp(intercept) / (std::pow(ratio, fit.fitted_exponent) - 1.0);
  fit.r2 = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  return fit;
}

AsymptoticStudy fit_asymptotics(const Mesh& mesh, const ProblemParams& params,
                                const BubbleSpec& base, const std::vector<double>& epsilons,
                                bool strict) {
  if (!(params.n > 4.0 * params.s)) throw ValidationError("fit_asymptotics: need n > 4s");
  if (epsilons.size() < 3) throw ValidationError("fit_asymptotics: need at least three epsilons");
  const double eps_min = *std::min_element(epsilons.begin(), epsilons.end());
  const double eps_max = *std::max_element(epsilons.begin(), epsilons.end());
  if (eps_max < 10.0 * eps_min) {
    throw ValidationError("fit_asymptotics: epsilons must span at least one decade");
  }
  if (mesh.h > 0.25 * std::sqrt(eps_min) * (1.0 + 1e-12)) {
    throw ValidationError("fit_asymptotics: core under-resolved, need h <= sqrt(eps)/4");
  }
  BubbleEvaluator evaluator(mesh, params);
  AsymptoticStudy study;
  std::vector<double> semi;
  std::vector<double> semi_in;
  std::vector<double> lp;
  std::vector<double> l2;
  for (double eps : epsilons) {
    BubbleSpec spec = base;
    spec.epsilon = eps;
    const BubbleMeasures m = evaluator.evaluate(spec);
    study.rows.push_back(m);
    semi.push_back(m.seminorm);
    semi_in.push_back(m.seminorm_interior);
    lp.push_back(m.lp1_norm_sq);
    l2.push_back(m.l2_norm_sq);
  }
  study.seminorm = fit_power_law(epsilons, semi);
  study.seminorm_interior = fit_power_law(epsilons, semi_in);
  study.lp1 = fit_power_law(epsilons, lp);
  study.l2 = fit_power_law(epsilons, l2);
  study.accepted = study.seminorm.r2 >= 0.99 && study.lp1.r2 >= 0.99 && study.l2.r2 >= 0.99;
  if (strict && !study.accepted) {
    throw NumericalError("fit_asymptotics: r^2 below 0.99, bubble core under-resolved");
  }
  return study;
}

std::vector<ProbeRow> bubble_quotient_probe(const NonlocalForm& form, const Mesh& mesh,
                                            const ProblemParams& params, const BubbleSpec& base,
                                            const std::vector<double>& epsilons) {
  const double S = sharp_constant(params.n, params.s);
  const double S_half = S / std::pow(2.0, 2.0 * params.s / params.n);
  const double p = params.p();
  std::vector<ProbeRow> rows;
  for (double eps : epsilons) {
    BubbleSpec spec = base;
    spec.epsilon = eps;
    const DiscreteField u = sample_bubble(mesh, spec, params.s);
    const Eigen::VectorXd v = as_vector(u);
    ProbeRow row;
    row.epsilon = eps;
    row.K_lambda = k_lambda(form, params, v);
    row.S_half = S_half;
    row.margin = S_half - row.K_lambda;
    row.margin_S = S - row.K_lambda;
    row.seminorm = reduced_form(form, v);
    row.lp1_norm_sq = std::pow(lp_integral(form.M, v, p), 2.0 / (p + 1.0));
    row.l2_norm_sq = v.cwiseProduct(form.M).dot(v);
    row.quarter_ratio = row.K_lambda / (0.25 * S);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace fracvar
