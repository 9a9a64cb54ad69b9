#include "fracvar/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fracvar/error.hpp"

namespace fracvar {
namespace {

void check_matched(const Mesh& ref, const Mesh& img, double eta) {
  if (ref.size() != img.size() || ref.dim != img.dim) {
    throw ValidationError("rescale_field: meshes have different cell counts");
  }
  const double tol = 1e-9 * std::max(ref.diameter, ref.h);
  for (std::size_t i = 0; i < ref.size(); ++i) {
    for (int d = 0; d < ref.dim; ++d) {
      if (std::abs(img.centroids[i][d] / eta - ref.centroids[i][d]) > tol) {
        throw ValidationError("rescale_field: mesh is not the eta-image of the reference");
      }
    }
  }
}

double lp_norm(const Eigen::VectorXd& M, const Eigen::VectorXd& u, double p) {
  return std::pow(lp_integral(M, u, p), 1.0 / (p + 1.0));
}

double relative(double a, double b, double scale) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), scale});
}

}  // namespace

DiscreteField rescale_field(const Mesh& mesh_ref, const Mesh& mesh_eta, const DiscreteField& v,
                            double eta) {
  if (!(eta > 0.0)) throw ValidationError("rescale_field: eta must be positive");
  check_matched(mesh_ref, mesh_eta, eta);
  check_field(mesh_eta, v);
  return DiscreteField(v.values);
}

ScalingIdentityReport scaling_identity_check(const NonlocalForm& form_ref, const Mesh& mesh_ref,
                                             const NonlocalForm& form_eta, const Mesh& mesh_eta,
                                             const ProblemParams& params, double eta,
                                             int samples, std::uint64_t seed,
                                             bool include_constant) {
  check_matched(mesh_ref, mesh_eta, eta);
  const double n = params.n;
  const double p = params.p();
  const double semi_factor = std::pow(eta, 2.0 * params.s - n);
  const double lp_factor = std::pow(eta, -n / (p + 1.0));
  ScalingIdentityReport report;
  std::mt19937_64 rng(seed);
  const Eigen::Index N = static_cast<Eigen::Index>(mesh_ref.size());
  const double Anorm = form_ref.A.cwiseAbs().maxCoeff();
  for (int k = 0; k < samples; ++k) {
    Eigen::VectorXd v(N);
    if (include_constant && k == 0) {
      v.setConstant(1.0 + unit_uniform(rng()));
    } else {
      for (Eigen::Index i = 0; i < N; ++i) v[i] = 2.0 * unit_uniform(rng()) - 1.0;
    }
    const DiscreteField vbar =
        rescale_field(mesh_ref, mesh_eta, DiscreteField(std::vector<double>(v.data(), v.data() + N)), eta);
    const Eigen::VectorXd vb = as_vector(vbar);
    const double lhs = vb.dot(form_ref.A * vb);
    const double rhs = semi_factor * v.dot(form_eta.A * v);
    // Scale for constants: the size of the form on the field.
    const double scale = 1e-300 + Anorm * vb.squaredNorm();
    report.seminorm_error = std::max(report.seminorm_error, relative(lhs, rhs, scale));
    const double l = lp_norm(form_ref.M, vb, p);
    const double r = lp_factor * lp_norm(form_eta.M, v, p);
    report.lp_error = std::max(report.lp_error, relative(l, r, 1e-300));
    ++report.samples;
  }
  return report;
}

std::vector<double> default_eta_ladder() { return {1.0, 0.5, 0.25, 0.125, 0.0625}; }

ScalingSweepReport shrink_sweep(const DomainSpec& domain, const ProblemParams& params,
                                const std::vector<double>& etas, const SweepOptions& opts) {
  if (etas.empty()) throw ValidationError("shrink_sweep: empty eta ladder");
  for (std::size_t k = 0; k < etas.size(); ++k) {
    if (!(etas[k] > 0.0 && etas[k] <= 1.0)) {
      throw ValidationError("shrink_sweep: etas must lie in (0, 1]");
    }
    if (k > 0 && !(etas[k] < etas[k - 1])) {
      throw ValidationError("shrink_sweep: etas must be strictly decreasing");
    }
  }
  if (domain.eta != 1.0) throw ValidationError("shrink_sweep: base domain must have eta = 1");
  domain.validate();
  const double R_ext = opts.R_ext > 0.0 ? opts.R_ext : 4.0 * domain.diameter();
  const double p = params.p();
  const Mesh mesh_ref = build_mesh(domain, opts.h, R_ext);
  const NonlocalForm form_ref = assemble(mesh_ref, params, opts.assembly);

  ScalingSweepReport report;
  report.etas = etas;
  report.domain_measure = form_ref.domain_measure;
  report.limit_target = params.lambda * std::pow(form_ref.domain_measure, (p - 1.0) / (p + 1.0));
  report.tail_bound = form_ref.tail_bound;
  const double target = std::pow(form_ref.domain_measure, -1.0 / (p + 1.0));

  for (double eta : etas) {
    DomainSpec d = domain;
    d.eta = eta;
    const Mesh mesh = eta == 1.0 ? mesh_ref : build_mesh(d, eta * opts.h, eta * R_ext);
    const NonlocalForm form = eta == 1.0 ? form_ref : assemble(mesh, params, opts.assembly);
    const MultistartReport ms = minimize_multistart(form, mesh, params, opts.solver);
    ScalingRow row;
    row.eta = eta;
    row.cells = mesh.size();
    row.X_lambda = ms.best.X_lambda;
    row.X_over_eta_power = ms.best.X_lambda / std::pow(eta, params.n * (p - 1.0) / (p + 1.0));
    row.multistart_spread = ms.spread;
    row.converged = ms.all_converged;
    row.nonconstant = ms.best.nonconstant;
    const Eigen::VectorXd u = as_vector(ms.best.minimizer);
    row.minimizer_norm = std::sqrt(u.cwiseProduct(form.M).dot(u));
    Eigen::VectorXd vbar = as_vector(rescale_field(mesh_ref, mesh, ms.best.minimizer, eta));
    vbar /= lp_norm(form_ref.M, vbar, p);
    double dist = 0.0;
    for (Eigen::Index i = 0; i < vbar.size(); ++i) {
      dist += form_ref.M[i] * (vbar[i] - target) * (vbar[i] - target);
    }
    row.rescaled_distance = std::sqrt(dist);
    row.rescaled_seminorm = vbar.dot(form_ref.A * vbar);
    report.all_converged = report.all_converged && row.converged;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace fracvar
