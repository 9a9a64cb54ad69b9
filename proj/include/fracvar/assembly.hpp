#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fracvar/kernels.hpp"
#include "fracvar/model.hpp"
#include "fracvar/pair_integrals.hpp"

namespace fracvar {

// c_{n,s} of the singular-integral definition, by radial/angular quadrature.
// Throws NumericalError if it disagrees with the closed form beyond 1e-6.
double normalizing_constant(int n, double s);
// s 2^{2s} Gamma((n+2s)/2) / (pi^{n/2} Gamma(1-s)).
double normalizing_constant_closed(int n, double s);
// Surface measure of the unit sphere in R^n.
double sphere_measure(int n);

struct AssemblyOptions {
  bool parallel = true;
  bool check_invariants = true;
  // Number of Gauss points per axis for far-node couplings.
  int far_order = 2;
};

struct NonlocalForm {
  int n = 0;
  double s = 0.0;
  double cns = 0.0;
  double h = 0.0;
  double h_power = 0.0;  // h^{n-2s}
  Eigen::MatrixXd A;     // reduced seminorm form over interior cells
  Eigen::VectorXd M;     // cell measures
  // P(i, z): unnormalized coupling of cell i with exterior node z
  // (pair integral for collar cells, q_z * int_{C_i} k(., z) for far nodes).
  Eigen::MatrixXd P;
  Eigen::VectorXd w;  // w(z) = sum_i P(i, z)
  Eigen::VectorXd q;  // exterior quadrature weights
  std::shared_ptr<const PairTable> table;
  kernels::LatticeIndex index;
  double tail_bound = 0.0;
  double domain_measure = 0.0;
  bool parallel = true;

  std::size_t size() const { return static_cast<std::size_t>(M.size()); }
  std::size_t exterior_size() const { return static_cast<std::size_t>(q.size()); }
  // Normalized reconstruction weight mu_z(i).
  double mu(std::size_t z, std::size_t i) const { return P(i, z) / w[z]; }
};

struct FormDiagnostics {
  double symmetry = 0.0;     // max |A - A^T| / max |A|
  double constants = 0.0;    // max |A 1| / max |A|
  double min_weight = 0.0;   // most negative off-diagonal weight / max |A|
  double min_probe = 0.0;    // smallest u^T A u / (|u|^2 max|A|) over probes
  double mu_sum = 0.0;       // max |sum_i mu_z(i) - 1|
  double mu_min = 0.0;       // smallest mu_z(i)
};

NonlocalForm assemble(const Mesh& mesh, const ProblemParams& params,
                      const AssemblyOptions& opts = {});

FormDiagnostics diagnose(const NonlocalForm& form, int probes = 20,
                         unsigned long long seed = 1);

// Fills exterior values with the mu-averages of the interior values.
DiscreteField reconstruct_exterior(const NonlocalForm& form, const DiscreteField& u);

// Cell-averaged discrete (-Delta)^s of a completed field.
DiscreteField apply_fractional_laplacian(const NonlocalForm& form,
                                         const DiscreteField& u);

// Discrete nonlocal normal derivative at every exterior node.
std::vector<double> neumann_derivative(const NonlocalForm& form,
                                       const DiscreteField& u);

// u^T A u, i.e. the seminorm with the exterior eliminated.
double reduced_form(const NonlocalForm& form, const Eigen::VectorXd& u);

// c/2 int_{T(Omega)} |u(x)-u(y)|^2 |x-y|^{-n-2s} with explicit exterior values.
double full_form(const NonlocalForm& form, const DiscreteField& u);

// c/2 int_{Omega x Omega} only.
double interior_form(const NonlocalForm& form, const Eigen::VectorXd& u);

struct IbpReport {
  double lhs = 0.0;
  double bilinear = 0.0;
  double neumann_term = 0.0;
  double residual = 0.0;
};

// Discrete Lemma-2.6 terms. If `exact_operator` is given it replaces the
// discrete (-Delta)^s v at the cell centroids in the left-hand side.
IbpReport ibp_check(const NonlocalForm& form, const DiscreteField& v,
                    const DiscreteField& w,
                    const std::vector<double>* exact_operator = nullptr);

Eigen::VectorXd as_vector(const DiscreteField& u);

}  // namespace fracvar
