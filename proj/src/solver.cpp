#include "fracvar/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "fracvar/bubbles.hpp"
#include "fracvar/constants.hpp"
#include "fracvar/error.hpp"
#include "fracvar/kernels.hpp"

namespace fracvar {
namespace {

Eigen::VectorXd power_field(const Eigen::VectorXd& u, double p) {
  Eigen::VectorXd out(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double a = std::abs(u[i]);
    out[i] = a == 0.0 ? 0.0 : std::copysign(std::pow(a, p), u[i]);
  }
  return out;
}

DiscreteField to_field(const Eigen::VectorXd& v) {
  return DiscreteField(std::vector<double>(v.data(), v.data() + v.size()));
}

void check_shape(const NonlocalForm& form, const Eigen::VectorXd& u, const char* who) {
  if (static_cast<std::size_t>(u.size()) != form.size()) {
    throw ValidationError(std::string(who) + ": field length does not match the form");
  }
}

double quadratic(const NonlocalForm& form, double lambda, const Eigen::VectorXd& u) {
  return u.dot(form.A * u) + lambda * u.cwiseProduct(form.M).dot(u);
}

// Normalizes to unit L^{p+1} norm.
Eigen::VectorXd normalize(const NonlocalForm& form, const Eigen::VectorXd& u, double p) {
  const double norm = std::pow(lp_integral(form.M, u, p), 1.0 / (p + 1.0));
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw NumericalError("minimize: iterate lost its L^{p+1} norm");
  }
  return u / norm;
}

// Constrained gradient of K at u with |u|_{p+1} = 1, measured in M^{-1}.
double constrained_gradient(const NonlocalForm& form, const ProblemParams& params,
                            const Eigen::VectorXd& u, double K) {
  const double p = params.p();
  const Eigen::VectorXd r =
      form.A * u + params.lambda * form.M.cwiseProduct(u) - K * form.M.cwiseProduct(power_field(u, p));
  const double dual = std::sqrt(r.cwiseProduct(r).cwiseQuotient(form.M).sum());
  const double primal = std::sqrt(u.cwiseProduct(form.M).dot(u));
  return dual / primal;
}

bool lexicographically_less(const std::vector<double>& a, const std::vector<double>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

double m_distance(const NonlocalForm& form, const std::vector<double>& a,
                  const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += form.M[i] * (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc);
}

MinimizeReport run(const NonlocalForm& form, const ProblemParams& params,
                   const Eigen::LLT<Eigen::MatrixXd>& solver, const Eigen::VectorXd& init,
                   const MinimizeOptions& opts) {
  const double p = params.p();
  const double lambda = params.lambda;
  MinimizeReport report;
  Eigen::VectorXd u = normalize(form, init.cwiseAbs(), p);
  double K = quadratic(form, lambda, u);
  double g = constrained_gradient(form, params, u, K);
  int it = 0;
  while (it < opts.max_iters && g > opts.grad_tol) {
    ++it;
    const Eigen::VectorXd rhs = form.M.cwiseProduct(power_field(u, p));
    Eigen::VectorXd next = solver.solve(rhs).cwiseAbs();
    next = normalize(form, next, p);
    double Knext = quadratic(form, lambda, next);
    if (Knext > K * (1.0 + 1e-14)) {
      // Projected gradient with backtracking on the L^{p+1} sphere.
      ++report.fallback_steps;
      const Eigen::VectorXd r = form.A * u + lambda * form.M.cwiseProduct(u) -
                                K * form.M.cwiseProduct(power_field(u, p));
      const Eigen::VectorXd dir = -r.cwiseQuotient(form.M);
      double t = 1.0 / std::max(1.0, form.A.diagonal().cwiseQuotient(form.M).maxCoeff() + lambda);
      bool accepted = false;
      for (int k = 0; k < 60; ++k, t *= 0.5) {
        const Eigen::VectorXd trial = normalize(form, (u + t * dir).cwiseAbs(), p);
        const double Kt = quadratic(form, lambda, trial);
        if (Kt <= K) {
          next = trial;
          Knext = Kt;
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        next = u;
        Knext = K;
      }
    }
    const bool stalled = (next - u).cwiseAbs().maxCoeff() == 0.0;
    u = next;
    K = Knext;
    g = constrained_gradient(form, params, u, K);
    report.trace.push_back(K);
    if (stalled) break;
  }
  report.iterations = it;
  report.grad_norm = g;
  report.converged = g <= opts.grad_tol;
  report.X_lambda = K;
  report.minimizer = to_field(u);
  const Eigen::VectorXd v0 = std::pow(K, 1.0 / (p - 1.0)) * u;
  report.v0 = to_field(v0);
  report.weak_residual = weak_residual(form, params, v0);
  report.nonconstant = is_nonconstant(form, u);
  report.energy_J = j_lambda(form, params, v0);
  report.bound_constant = lambda * std::pow(form.domain_measure, (p - 1.0) / (p + 1.0));
  const double S = sharp_constant(params.n, params.s);
  report.bound_Shalf = S / std::pow(2.0, 2.0 * params.s / params.n);
  return report;
}

}  // namespace

double unit_uniform(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

double lp_integral(const Eigen::VectorXd& M, const Eigen::VectorXd& u, double p) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) acc += M[i] * std::pow(std::abs(u[i]), p + 1.0);
  return acc;
}

double k_lambda(const NonlocalForm& form, const ProblemParams& params, const Eigen::VectorXd& u) {
  check_shape(form, u, "k_lambda");
  const double lp = lp_integral(form.M, u, params.p());
  if (!(lp > 0.0)) throw ValidationError("k_lambda: zero field");
  return quadratic(form, params.lambda, u) / std::pow(lp, 2.0 / (params.p() + 1.0));
}

double k_lambda(const NonlocalForm& form, const ProblemParams& params, const DiscreteField& u) {
  return k_lambda(form, params, as_vector(u));
}

double j_lambda(const NonlocalForm& form, const ProblemParams& params, const Eigen::VectorXd& u) {
  check_shape(form, u, "j_lambda");
  const double p = params.p();
  return 0.5 * quadratic(form, params.lambda, u) - lp_integral(form.M, u, p) / (p + 1.0);
}

double j_lambda(const NonlocalForm& form, const ProblemParams& params, const DiscreteField& u) {
  return j_lambda(form, params, as_vector(u));
}

double weak_residual(const NonlocalForm& form, const ProblemParams& params,
                     const Eigen::VectorXd& v0) {
  check_shape(form, v0, "weak_residual");
  const double primal = std::sqrt(v0.cwiseProduct(form.M).dot(v0));
  if (primal == 0.0) return 0.0;
  const Eigen::VectorXd r = form.A * v0 + params.lambda * form.M.cwiseProduct(v0) -
                            form.M.cwiseProduct(power_field(v0, params.p()));
  return std::sqrt(r.cwiseProduct(r).cwiseQuotient(form.M).sum()) / primal;
}

double weak_residual(const NonlocalForm& form, const ProblemParams& params,
                     const DiscreteField& v0) {
  return weak_residual(form, params, as_vector(v0));
}

bool is_nonconstant(const NonlocalForm& form, const Eigen::VectorXd& u) {
  const double total = form.M.sum();
  const double mean = form.M.dot(u) / total;
  double var = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) var += form.M[i] * (u[i] - mean) * (u[i] - mean);
  var /= total;
  return var > 1e-8 * mean * mean;
}

MinimizeReport minimize(const NonlocalForm& form, const ProblemParams& params,
                        const DiscreteField& init, const MinimizeOptions& opts) {
  const Eigen::VectorXd u0 = as_vector(init);
  check_shape(form, u0, "minimize");
  if (u0.cwiseAbs().maxCoeff() == 0.0) throw ValidationError("minimize: zero initial field");
  Eigen::MatrixXd B = form.A;
  B.diagonal() += params.lambda * form.M;
  Eigen::LLT<Eigen::MatrixXd> solver(B);
  if (solver.info() != Eigen::Success) throw NumericalError("minimize: A + lambda M not SPD");
  return run(form, params, solver, u0, opts);
}

std::string init_name(std::size_t index) {
  if (index == 0) return "constant";
  if (index == 1) return "boundary_bubble";
  return "random";
}

std::vector<DiscreteField> initial_fields(const Mesh& mesh, const ProblemParams& params,
                                          const MinimizeOptions& opts) {
  std::vector<DiscreteField> out;
  const std::size_t N = mesh.size();
  const int starts = std::max(1, opts.starts);
  for (int k = 0; k < starts; ++k) {
    std::vector<double> v(N, 1.0);
    if (k == 1) {
      BubbleSpec spec;
      spec.R = mesh.diameter;
      spec.center = boundary_anchor(mesh);
      spec.epsilon = opts.bubble_epsilon * mesh.diameter * mesh.diameter;
      const DiscreteField b = sample_bubble(mesh, spec, params.s);
      double peak = 0.0;
      for (double x : b.values) peak = std::max(peak, x);
      for (std::size_t i = 0; i < N; ++i) v[i] += opts.bubble_amplitude * b.values[i] / peak;
    } else if (k >= 2) {
      std::mt19937_64 rng(opts.seed + static_cast<std::uint64_t>(k));
      for (std::size_t i = 0; i < N; ++i) v[i] = 0.5 + unit_uniform(rng());
    }
    out.emplace_back(std::move(v));
  }
  return out;
}

MultistartReport minimize_multistart(const NonlocalForm& form, const Mesh& mesh,
                                     const ProblemParams& params, const MinimizeOptions& opts) {
  const std::vector<DiscreteField> inits = initial_fields(mesh, params, opts);
  Eigen::MatrixXd B = form.A;
  B.diagonal() += params.lambda * form.M;
  Eigen::LLT<Eigen::MatrixXd> solver(B);
  if (solver.info() != Eigen::Success) throw NumericalError("minimize: A + lambda M not SPD");
  B.resize(0, 0);
  MultistartReport out;
  out.runs.resize(inits.size());
  const long count = static_cast<long>(inits.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(kernels::thread_count())
  for (long k = 0; k < count; ++k) {
    out.runs[k] = run(form, params, solver, as_vector(inits[k]), opts);
    out.runs[k].start_index = static_cast<int>(k);
    out.runs[k].init = init_name(static_cast<std::size_t>(k));
  }
  out.all_converged = true;
  int best = -1;
  for (int k = 0; k < count; ++k) {
    const MinimizeReport& r = out.runs[k];
    out.all_converged = out.all_converged && r.converged;
    if (best < 0) {
      best = k;
      continue;
    }
    const MinimizeReport& b = out.runs[best];
    // Converged runs outrank non-converged ones.
    if (r.converged != b.converged) {
      if (r.converged) best = k;
      continue;
    }
    const double tol = 1e-9 * std::abs(b.X_lambda);
    if (r.X_lambda < b.X_lambda - tol) {
      best = k;
    } else if (std::abs(r.X_lambda - b.X_lambda) <= tol &&
               lexicographically_less(r.minimizer.values, b.minimizer.values)) {
      best = k;
    }
  }
  out.best = out.runs[best];
  double spread = 0.0;
  for (int a = 0; a < count; ++a) {
    for (int b = a + 1; b < count; ++b) {
      if (!out.runs[a].converged || !out.runs[b].converged) continue;
      spread = std::max(spread, m_distance(form, out.runs[a].minimizer.values,
                                           out.runs[b].minimizer.values));
    }
  }
  out.spread = spread;
  return out;
}

double cherrier_ratio(const NonlocalForm& form, const ProblemParams& params,
                      const Eigen::VectorXd& u, double epsilon_c) {
  const double p = params.p();
  const double S = sharp_constant(params.n, params.s);
  const double beta = std::pow(2.0, 2.0 * params.s / params.n) / S + epsilon_c;
  const double lp = std::pow(lp_integral(form.M, u, p), 2.0 / (p + 1.0));
  const double l2 = u.cwiseProduct(form.M).dot(u);
  if (!(l2 > 0.0)) throw ValidationError("cherrier_ratio: zero field");
  return (lp - beta * u.dot(form.A * u)) / l2;
}

namespace {

// Gradient ascent on the ratio with backtracking; returns the improved field.
Eigen::VectorXd ascend(const NonlocalForm& form, const ProblemParams& params,
                       Eigen::VectorXd u, double epsilon_c, int steps) {
  const double p = params.p();
  const double S = sharp_constant(params.n, params.s);
  const double beta = std::pow(2.0, 2.0 * params.s / params.n) / S + epsilon_c;
  double value = cherrier_ratio(form, params, u, epsilon_c);
  double t = 1.0;
  for (int k = 0; k < steps; ++k) {
    const double lpi = lp_integral(form.M, u, p);
    const double l2 = u.cwiseProduct(form.M).dot(u);
    const Eigen::VectorXd gN =
        2.0 * std::pow(lpi, 2.0 / (p + 1.0) - 1.0) * form.M.cwiseProduct(power_field(u, p));
    const Eigen::VectorXd grad =
        (gN - 2.0 * beta * (form.A * u) - 2.0 * value * form.M.cwiseProduct(u)) / l2;
    const Eigen::VectorXd dir = grad.cwiseQuotient(form.M);
    const double scale = std::sqrt(l2) / std::max(1e-300, std::sqrt(dir.cwiseProduct(form.M).dot(dir)));
    bool moved = false;
    for (int b = 0; b < 30; ++b, t *= 0.5) {
      const Eigen::VectorXd trial = u + t * scale * dir;
      const double v = cherrier_ratio(form, params, trial, epsilon_c);
      if (v > value) {
        u = trial;
        value = v;
        moved = true;
        t = std::min(1.0, 2.0 * t);
        break;
      }
    }
    if (!moved) break;
  }
  return u;
}

}  // namespace

CherrierProbeReport cherrier_probe(const NonlocalForm& form, const Mesh& mesh,
                                   const ProblemParams& params, double epsilon_c,
                                   const CherrierOptions& opts) {
  if (!(epsilon_c > 0.0)) throw ValidationError("cherrier_probe: epsilon_c must be > 0");
  if (opts.budget < 2) throw ValidationError("cherrier_probe: budget must be >= 2");
  const std::size_t N = mesh.size();
  const double p = params.p();
  CherrierProbeReport report;
  report.epsilon_c = epsilon_c;
  report.constant_bound = std::pow(form.domain_measure, 2.0 / (p + 1.0) - 1.0);
  std::mt19937_64 rng(opts.seed);
  const std::vector<int> boundary = boundary_cells(mesh);
  const double eps_lo = 4.0 * mesh.h * mesh.h;
  const double eps_hi = mesh.diameter * mesh.diameter;
  Eigen::VectorXd best = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(N));
  double worst = cherrier_ratio(form, params, best, epsilon_c);
  report.history.push_back(worst);
  for (int k = 1; k < opts.budget; ++k) {
    Eigen::VectorXd u(static_cast<Eigen::Index>(N));
    const int kind = k % 5;
    if (kind == 4) {
      u = ascend(form, params, best, epsilon_c, opts.ascent_steps);
    } else if (kind == 0 || kind == 1) {
      for (std::size_t i = 0; i < N; ++i) {
        const double r = unit_uniform(rng());
        u[static_cast<Eigen::Index>(i)] = kind == 0 ? 0.5 + r : 2.0 * r - 1.0;
      }
    } else {
      BubbleSpec spec;
      spec.R = mesh.diameter;
      spec.boundary = kind == 2 && !boundary.empty();
      const double r = unit_uniform(rng());
      spec.epsilon = eps_lo * std::pow(eps_hi / eps_lo, r);
      if (spec.boundary) {
        spec.center = mesh.centroids[boundary[rng() % boundary.size()]];
      } else {
        spec.center = mesh.centroids[rng() % N];
      }
      u = as_vector(sample_bubble(mesh, spec, params.s));
    }
    if (u.cwiseAbs().maxCoeff() > 0.0) {
      const double v = cherrier_ratio(form, params, u, epsilon_c);
      if (v > worst) {
        worst = v;
        best = u;
      }
    }
    report.history.push_back(worst);
  }
  report.samples = opts.budget;
  report.worst_A = worst;
  report.maximizer_snapshot = to_field(best);
  const double half = report.history[report.history.size() / 2];
  report.late_change = std::abs(worst - half) / std::max(std::abs(worst), 1e-300);
  report.stagnated = report.late_change < 0.01;
  return report;
}

}  // namespace fracvar
