#include "fracvar/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fracvar/error.hpp"

namespace fracvar {
namespace {

std::array<int, kMaxDim> table_extent(const Mesh& mesh) {
  std::array<int, kMaxDim> lo{0, 0, 0};
  std::array<int, kMaxDim> hi{0, 0, 0};
  bool first = true;
  auto visit = [&](const std::array<int, kMaxDim>& k) {
    for (int d = 0; d < mesh.dim; ++d) {
      if (first) {
        lo[d] = hi[d] = k[d];
      } else {
        lo[d] = std::min(lo[d], k[d]);
        hi[d] = std::max(hi[d], k[d]);
      }
    }
    first = false;
  };
  for (const auto& k : mesh.index) visit(k);
  for (const auto& node : mesh.exterior) {
    if (node.near) visit(node.index);
  }
  std::array<int, kMaxDim> extent{1, 1, 1};
  for (int d = 0; d < mesh.dim; ++d) extent[d] = hi[d] - lo[d] + 1;
  return extent;
}

double max_abs(const Eigen::MatrixXd& A) { return A.cwiseAbs().maxCoeff(); }

}  // namespace

Eigen::VectorXd as_vector(const DiscreteField& u) {
  return Eigen::Map<const Eigen::VectorXd>(u.values.data(),
                                           static_cast<Eigen::Index>(u.values.size()));
}

NonlocalForm assemble(const Mesh& mesh, const ProblemParams& params,
                      const AssemblyOptions& opts) {
  if (!params.discretization_valid) {
    throw ValidationError("assemble: piecewise-constant fields need s < 1/2");
  }
  if (mesh.dim != params.n) throw ValidationError("assemble: mesh and params disagree on n");
  if (mesh.size() == 0) throw ValidationError("assemble: empty mesh");
  const int n = params.n;
  const double s = params.s;
  const Eigen::Index N = static_cast<Eigen::Index>(mesh.size());
  const Eigen::Index Z = static_cast<Eigen::Index>(mesh.exterior_size());

  NonlocalForm form;
  form.n = n;
  form.s = s;
  form.cns = normalizing_constant(n, s);
  form.h = mesh.h;
  form.h_power = std::pow(mesh.h, n - 2.0 * s);
  form.parallel = opts.parallel;
  form.index = mesh.index;
  form.table = std::make_shared<PairTable>(n, s, table_extent(mesh));
  form.domain_measure = mesh.domain_measure;
  form.tail_bound = form.cns * sphere_measure(n) * std::pow(mesh.R_ext, -2.0 * s) /
                    (2.0 * s) * mesh.domain_measure;

  form.M.resize(N);
  for (Eigen::Index i = 0; i < N; ++i) form.M[i] = mesh.measures[i];

  // Exterior couplings, one column per node.
  form.P.resize(N, Z);
  form.q.resize(Z);
  form.w.resize(Z);
  const PairTable& table = *form.table;
  const long zcount = static_cast<long>(Z);
#pragma omp parallel for schedule(dynamic, 8) if (opts.parallel) \
    num_threads(kernels::thread_count())
  for (long z = 0; z < zcount; ++z) {
    const ExteriorNode& node = mesh.exterior[z];
    form.q[z] = node.weight;
    for (Eigen::Index i = 0; i < N; ++i) {
      form.P(i, z) = node.near ? form.h_power * table(mesh.index[i], node.index)
                               : node.weight * cell_point_kernel(mesh.centroids[i], mesh.h,
                                                                 node.x, n, s, opts.far_order);
    }
    double sum = 0.0;
    for (Eigen::Index i = 0; i < N; ++i) sum += form.P(i, z);
    form.w[z] = sum;
  }

  // W = c (h^{n-2s} T + P diag(1/w) P^T); A = diag(W 1) - W.
  Eigen::MatrixXd Q = form.P;
  for (Eigen::Index z = 0; z < Z; ++z) Q.col(z) /= std::sqrt(form.w[z]);
  Eigen::MatrixXd G;
  Eigen::MatrixXd T;
  if (opts.parallel) {
    kernels::omp::gram(Q, G);
    kernels::omp::pair_matrix(table, form.index, T);
  } else {
    kernels::serial::gram(Q, G);
    kernels::serial::pair_matrix(table, form.index, T);
  }
  Q.resize(0, 0);
  Eigen::MatrixXd& A = form.A;
  A = form.h_power * T;
  T.resize(0, 0);
  A += G;
  G.resize(0, 0);
  A *= -form.cns;
  for (Eigen::Index i = 0; i < N; ++i) {
    A(i, i) = 0.0;
    double row = 0.0;
    for (Eigen::Index j = 0; j < N; ++j) row += A(j, i);
    A(i, i) = -row;
  }

  if (opts.check_invariants) {
    const FormDiagnostics diag = diagnose(form, 4, 12345);
    if (diag.symmetry > 1e-12 || diag.constants > 1e-12 || diag.min_weight < 0.0 ||
        diag.min_probe < -1e-10 || diag.mu_sum > 1e-12 || diag.mu_min < 0.0) {
      throw InvariantError("assemble: assembled form violates its invariants");
    }
  }
  return form;
}

FormDiagnostics diagnose(const NonlocalForm& form, int probes, unsigned long long seed) {
  const Eigen::MatrixXd& A = form.A;
  const Eigen::Index N = A.rows();
  FormDiagnostics out;
  const double scale = max_abs(A);
  double sym = 0.0;
  double minw = 0.0;
  for (Eigen::Index j = 0; j < N; ++j) {
    for (Eigen::Index i = 0; i < N; ++i) {
      sym = std::max(sym, std::abs(A(i, j) - A(j, i)));
      if (i != j) minw = std::min(minw, -A(i, j));
    }
  }
  out.symmetry = sym / scale;
  out.min_weight = minw / scale;
  out.constants = (A * Eigen::VectorXd::Ones(N)).cwiseAbs().maxCoeff() / scale;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  double probe = 0.0;
  for (int p = 0; p < probes; ++p) {
    Eigen::VectorXd u(N);
    for (Eigen::Index i = 0; i < N; ++i) u[i] = normal(rng);
    probe = std::min(probe, u.dot(A * u) / (u.squaredNorm() * scale));
  }
  out.min_probe = probe;
  double mu_sum = 0.0;
  double mu_min = 0.0;
  for (Eigen::Index z = 0; z < form.P.cols(); ++z) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < N; ++i) {
      const double m = form.mu(z, i);
      acc += m;
      mu_min = std::min(mu_min, m);
    }
    mu_sum = std::max(mu_sum, std::abs(acc - 1.0));
  }
  out.mu_sum = mu_sum;
  out.mu_min = mu_min;
  return out;
}

DiscreteField reconstruct_exterior(const NonlocalForm& form, const DiscreteField& u) {
  if (u.values.size() != form.size()) {
    throw ValidationError("reconstruct_exterior: field length does not match the form");
  }
  const Eigen::VectorXd v = as_vector(u);
  Eigen::VectorXd ext = form.P.transpose() * v;
  DiscreteField out(u.values);
  std::vector<double> values(form.exterior_size());
  for (std::size_t z = 0; z < values.size(); ++z) values[z] = ext[z] / form.w[z];
  out.exterior_values = std::move(values);
  return out;
}

namespace {

void require_completed(const NonlocalForm& form, const DiscreteField& u, const char* who) {
  if (u.values.size() != form.size()) {
    throw ValidationError(std::string(who) + ": field length does not match the form");
  }
  if (!u.exterior_values || u.exterior_values->size() != form.exterior_size()) {
    throw ValidationError(std::string(who) + ": field needs exterior values");
  }
}

Eigen::VectorXd exterior_vector(const DiscreteField& u) {
  const auto& e = *u.exterior_values;
  return Eigen::Map<const Eigen::VectorXd>(e.data(), static_cast<Eigen::Index>(e.size()));
}

// sum_j I_ij (u_i - u_j) for the interior pairs.
Eigen::VectorXd interior_apply(const NonlocalForm& form, const Eigen::VectorXd& u) {
  Eigen::VectorXd out;
  if (form.parallel) {
    kernels::omp::pair_apply(*form.table, form.index, u, out);
  } else {
    kernels::serial::pair_apply(*form.table, form.index, u, out);
  }
  return form.h_power * out;
}

}  // namespace

DiscreteField apply_fractional_laplacian(const NonlocalForm& form, const DiscreteField& u) {
  require_completed(form, u, "apply_fractional_laplacian");
  const Eigen::VectorXd v = as_vector(u);
  const Eigen::VectorXd e = exterior_vector(u);
  Eigen::VectorXd out = interior_apply(form, v);
  // sum_z P_iz (u_i - u_z) = u_i (P 1)_i - (P e)_i
  const Eigen::VectorXd row = form.P.rowwise().sum();
  out += v.cwiseProduct(row) - form.P * e;
  out = form.cns * out.cwiseQuotient(form.M);
  return DiscreteField(std::vector<double>(out.data(), out.data() + out.size()));
}

std::vector<double> neumann_derivative(const NonlocalForm& form, const DiscreteField& u) {
  require_completed(form, u, "neumann_derivative");
  const Eigen::VectorXd v = as_vector(u);
  const Eigen::VectorXd e = exterior_vector(u);
  const Eigen::VectorXd pv = form.P.transpose() * v;
  std::vector<double> out(form.exterior_size());
  for (std::size_t z = 0; z < out.size(); ++z) {
    out[z] = form.cns * (e[z] * form.w[z] - pv[z]) / form.q[z];
  }
  return out;
}

double reduced_form(const NonlocalForm& form, const Eigen::VectorXd& u) {
  if (u.size() != form.A.rows()) throw ValidationError("reduced_form: shape mismatch");
  return u.dot(form.A * u);
}

double interior_form(const NonlocalForm& form, const Eigen::VectorXd& u) {
  if (u.size() != form.A.rows()) throw ValidationError("interior_form: shape mismatch");
  const double pairs = form.parallel ? kernels::omp::pair_form(*form.table, form.index, u)
                                     : kernels::serial::pair_form(*form.table, form.index, u);
  return form.cns * form.h_power * pairs;
}

double full_form(const NonlocalForm& form, const DiscreteField& u) {
  require_completed(form, u, "full_form");
  const Eigen::VectorXd v = as_vector(u);
  const Eigen::VectorXd e = exterior_vector(u);
  double exterior = 0.0;
  for (Eigen::Index z = 0; z < form.P.cols(); ++z) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < form.P.rows(); ++i) {
      const double d = v[i] - e[z];
      acc += form.P(i, z) * d * d;
    }
    exterior += acc;
  }
  return interior_form(form, v) + form.cns * exterior;
}

IbpReport ibp_check(const NonlocalForm& form, const DiscreteField& v, const DiscreteField& w,
                    const std::vector<double>* exact_operator) {
  require_completed(form, v, "ibp_check");
  require_completed(form, w, "ibp_check");
  const Eigen::VectorXd vi = as_vector(v);
  const Eigen::VectorXd wi = as_vector(w);
  const Eigen::VectorXd ve = exterior_vector(v);
  const Eigen::VectorXd we = exterior_vector(w);
  IbpReport report;

  if (exact_operator) {
    if (exact_operator->size() != form.size()) {
      throw ValidationError("ibp_check: operator samples do not match the form");
    }
    double lhs = 0.0;
    for (std::size_t i = 0; i < form.size(); ++i) {
      lhs += form.M[i] * wi[i] * (*exact_operator)[i];
    }
    report.lhs = lhs;
  } else {
    const DiscreteField lv = apply_fractional_laplacian(form, v);
    const Eigen::VectorXd l = as_vector(lv);
    report.lhs = l.cwiseProduct(form.M).dot(wi);
  }

  // Polarized interior pairs: sum_{i<j} I (dv)(dw) = 1/4 [Q(v+w) - Q(v-w)].
  const double qp = interior_form(form, vi + wi);
  const double qm = interior_form(form, vi - wi);
  double exterior = 0.0;
  double neumann = 0.0;
  for (Eigen::Index z = 0; z < form.P.cols(); ++z) {
    double acc = 0.0;
    double nacc = 0.0;
    for (Eigen::Index i = 0; i < form.P.rows(); ++i) {
      acc += form.P(i, z) * (vi[i] - ve[z]) * (wi[i] - we[z]);
      nacc += form.P(i, z) * (ve[z] - vi[i]);
    }
    exterior += acc;
    neumann += we[z] * nacc;
  }
  report.bilinear = 0.25 * (qp - qm) + form.cns * exterior;
  report.neumann_term = form.cns * neumann;
  report.residual = std::abs(report.lhs - (report.bilinear - report.neumann_term));
  return report;
}

}  // namespace fracvar
