#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "fracvar/assembly.hpp"
#include "fracvar/model.hpp"

namespace fracvar {

// sum_i m_i |u_i|^{p+1}
double lp_integral(const Eigen::VectorXd& M, const Eigen::VectorXd& u, double p);

// (u^T A u + lambda u^T M u) / (sum_i m_i |u_i|^{p+1})^{2/(p+1)}
double k_lambda(const NonlocalForm& form, const ProblemParams& params,
                const DiscreteField& u);
double k_lambda(const NonlocalForm& form, const ProblemParams& params,
                const Eigen::VectorXd& u);

// 1/2 (u^T A u + lambda u^T M u) - 1/(p+1) sum_i m_i |u_i|^{p+1}
double j_lambda(const NonlocalForm& form, const ProblemParams& params,
                const DiscreteField& u);
double j_lambda(const NonlocalForm& form, const ProblemParams& params,
                const Eigen::VectorXd& u);

// || (A + lambda M) v - M |v|^{p-1} v ||_{M^{-1}} / ||v||_M; zero for v = 0.
double weak_residual(const NonlocalForm& form, const ProblemParams& params,
                     const DiscreteField& v0);
double weak_residual(const NonlocalForm& form, const ProblemParams& params,
                     const Eigen::VectorXd& v0);

enum class InitKind { Constant, BoundaryBubble, Random, Given };

struct MinimizeOptions {
  int max_iters = 500;
  double grad_tol = 1e-9;
  std::uint64_t seed = 1;
  int starts = 5;
  // Boundary-bubble start: amplitude relative to the constant and its width.
  double bubble_amplitude = 0.1;
  double bubble_epsilon = 0.01;
};

struct MinimizeReport {
  double X_lambda = 0.0;
  DiscreteField minimizer;
  DiscreteField v0;
  int iterations = 0;
  double grad_norm = 0.0;
  double weak_residual = 0.0;
  bool nonconstant = false;
  double energy_J = 0.0;
  double bound_constant = 0.0;
  double bound_Shalf = 0.0;
  bool converged = false;
  int fallback_steps = 0;
  int start_index = 0;
  std::string init;
  std::vector<double> trace;  // K_lambda after every iteration
};

// Single run from a given start.
MinimizeReport minimize(const NonlocalForm& form, const ProblemParams& params,
                        const DiscreteField& init, const MinimizeOptions& opts);

// Start fields of the multistart menu: constant, constant + boundary bubble,
// then seeded random positive fields.
std::vector<DiscreteField> initial_fields(const Mesh& mesh, const ProblemParams& params,
                                          const MinimizeOptions& opts);
std::string init_name(std::size_t index);

struct MultistartReport {
  MinimizeReport best;
  std::vector<MinimizeReport> runs;
  double spread = 0.0;  // max pairwise L2(M) distance of converged minimizers
  bool all_converged = false;
};

MultistartReport minimize_multistart(const NonlocalForm& form, const Mesh& mesh,
                                     const ProblemParams& params,
                                     const MinimizeOptions& opts);

// Coefficient variance > 1e-8 mean^2 (cell-measure weighted).
bool is_nonconstant(const NonlocalForm& form, const Eigen::VectorXd& u);

struct CherrierProbeReport {
  double epsilon_c = 0.0;
  int samples = 0;
  double worst_A = 0.0;
  DiscreteField maximizer_snapshot;
  std::vector<double> history;  // running worst_A after every sample
  double constant_bound = 0.0;  // |Omega|^{2/(p+1) - 1}
  double late_change = 0.0;     // relative change of worst_A over the last half
  bool stagnated = false;
};

struct CherrierOptions {
  int budget = 200;
  std::uint64_t seed = 1;
  int ascent_steps = 20;
};

CherrierProbeReport cherrier_probe(const NonlocalForm& form, const Mesh& mesh,
                                   const ProblemParams& params, double epsilon_c,
                                   const CherrierOptions& opts = {});

// Ratio (||u||^2_{p+1} - (2^{2s/n}/S + eps_c) u^T A u) / ||u||^2_{L^2}.
double cherrier_ratio(const NonlocalForm& form, const ProblemParams& params,
                      const Eigen::VectorXd& u, double epsilon_c);

// Uniform doubles in [0, 1) from the top 53 bits of a 64-bit draw.
double unit_uniform(std::uint64_t bits);

}  // namespace fracvar
