#pragma once

#include <cstdint>
#include <vector>

#include "fracvar/assembly.hpp"
#include "fracvar/model.hpp"
#include "fracvar/solver.hpp"

namespace fracvar {

// Pullback v(eta x) of a field on eta * Omega to Omega. Cells are matched
// one to one; throws ValidationError if mesh_eta is not the eta-image of
// mesh_ref.
DiscreteField rescale_field(const Mesh& mesh_ref, const Mesh& mesh_eta,
                            const DiscreteField& v, double eta);

struct ScalingIdentityReport {
  double seminorm_error = 0.0;  // max relative error of the seminorm identity
  double lp_error = 0.0;        // same for the L^{p+1} norm identity
  int samples = 0;
};

// Compares vbar^T A(Omega) vbar with eta^{2s-n} v^T A(eta Omega) v and
// |vbar|_{p+1} with eta^{-n/(p+1)} |v|_{p+1} over seeded random fields.
// Constant fields are scored by absolute error against the field scale.
ScalingIdentityReport scaling_identity_check(const NonlocalForm& form_ref, const Mesh& mesh_ref,
                                             const NonlocalForm& form_eta, const Mesh& mesh_eta,
                                             const ProblemParams& params, double eta,
                                             int samples, std::uint64_t seed = 1,
                                             bool include_constant = true);

struct ScalingRow {
  double eta = 1.0;
  double X_lambda = 0.0;
  double X_over_eta_power = 0.0;
  double rescaled_distance = 0.0;  // L2(Omega) distance to |Omega|^{-1/(p+1)}
  double rescaled_seminorm = 0.0;  // vbar^T A vbar of the normalized pullback
  double multistart_spread = 0.0;
  double minimizer_norm = 0.0;     // L2 norm of the best minimizer on eta Omega
  bool converged = false;
  bool nonconstant = false;
  std::size_t cells = 0;
};

struct ScalingSweepReport {
  std::vector<double> etas;
  std::vector<ScalingRow> rows;
  double limit_target = 0.0;  // lambda |Omega|^{(p-1)/(p+1)}
  double domain_measure = 0.0;
  double tail_bound = 0.0;    // of the eta = 1 form
  bool all_converged = true;
};

struct SweepOptions {
  double h = 0.05;       // lattice width on Omega; eta Omega uses eta h
  double R_ext = 0.0;    // exterior radius on Omega; 0 picks 4 diam
  MinimizeOptions solver;
  AssemblyOptions assembly;
};

// Default ladder 1, 1/2, 1/4, 1/8, 1/16.
std::vector<double> default_eta_ladder();

ScalingSweepReport shrink_sweep(const DomainSpec& domain, const ProblemParams& params,
                                const std::vector<double>& etas, const SweepOptions& opts);

}  // namespace fracvar
