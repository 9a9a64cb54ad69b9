#include "fracvar/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdlib>
#include <string>

namespace fracvar::kernels {
namespace {

constexpr Eigen::Index kTile = 192;

double row_form(const PairTable& table, const LatticeIndex& index,
                const Eigen::VectorXd& u, Eigen::Index i) {
  const Eigen::Index n = u.size();
  const double ui = u[i];
  double acc = 0.0;
  for (Eigen::Index j = i + 1; j < n; ++j) {
    const double d = ui - u[j];
    acc += table(index[i], index[j]) * d * d;
  }
  return acc;
}

double row_form_active(const PairTable& table, const LatticeIndex& index,
                       const Eigen::VectorXd& u, const std::vector<char>& mask,
                       int i) {
  const Eigen::Index n = u.size();
  const double ui = u[i];
  double acc = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (mask[j] && j <= i) continue;
    const double d = ui - u[j];
    acc += table(index[i], index[j]) * d * d;
  }
  return acc;
}

double row_apply(const PairTable& table, const LatticeIndex& index,
                 const Eigen::VectorXd& u, Eigen::Index i) {
  const Eigen::Index n = u.size();
  const double ui = u[i];
  double acc = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    acc += table(index[i], index[j]) * (ui - u[j]);
  }
  return acc;
}

double row_sum(const PairTable& table, const LatticeIndex& index, int i) {
  double acc = 0.0;
  for (std::size_t j = 0; j < index.size(); ++j) acc += table(index[i], index[j]);
  return acc;
}

std::vector<char> make_mask(std::size_t n, const std::vector<int>& active) {
  std::vector<char> mask(n, 0);
  for (int a : active) mask[a] = 1;
  return mask;
}

}  // namespace

int thread_count() {
  if (const char* env = std::getenv("FRACVAR_THREADS")) {
    try {
      const int t = std::stoi(env);
      if (t >= 1) return std::min(t, omp_get_max_threads());
    } catch (...) {
    }
  }
  return omp_get_max_threads();
}

namespace serial {

void gram(const Eigen::MatrixXd& Q, Eigen::MatrixXd& G) {
  const Eigen::Index n = Q.rows();
  const Eigen::Index z = Q.cols();
  G.setZero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < z; ++k) acc += Q(i, k) * Q(j, k);
      G(i, j) = acc;
      G(j, i) = acc;
    }
  }
}

double pair_form(const PairTable& table, const LatticeIndex& index,
                 const Eigen::VectorXd& u) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) total += row_form(table, index, u, i);
  return total;
}

double pair_form_active(const PairTable& table, const LatticeIndex& index,
                        const Eigen::VectorXd& u, const std::vector<int>& active) {
  const std::vector<char> mask = make_mask(u.size(), active);
  double total = 0.0;
  for (int i : active) total += row_form_active(table, index, u, mask, i);
  return total;
}

void pair_apply(const PairTable& table, const LatticeIndex& index,
                const Eigen::VectorXd& u, Eigen::VectorXd& out) {
  out.resize(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) out[i] = row_apply(table, index, u, i);
}

void pair_matrix(const PairTable& table, const LatticeIndex& index,
                 Eigen::MatrixXd& W) {
  const Eigen::Index n = static_cast<Eigen::Index>(index.size());
  W.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) W(i, j) = table(index[i], index[j]);
  }
}

void pair_rowsum(const PairTable& table, const LatticeIndex& index,
                 const std::vector<int>& active, std::vector<double>& out) {
  out.resize(active.size());
  for (std::size_t a = 0; a < active.size(); ++a) out[a] = row_sum(table, index, active[a]);
}

}  // namespace serial

namespace omp {

void gram(const Eigen::MatrixXd& Q, Eigen::MatrixXd& G) {
  const Eigen::Index n = Q.rows();
  G.setZero(n, n);
  const Eigen::Index tiles = (n + kTile - 1) / kTile;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> work;
  for (Eigen::Index a = 0; a < tiles; ++a) {
    for (Eigen::Index b = a; b < tiles; ++b) work.push_back({a, b});
  }
  const long count = static_cast<long>(work.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_count())
  for (long w = 0; w < count; ++w) {
    const auto [a, b] = work[w];
    const Eigen::Index r0 = a * kTile;
    const Eigen::Index c0 = b * kTile;
    const Eigen::Index rn = std::min(kTile, n - r0);
    const Eigen::Index cn = std::min(kTile, n - c0);
    G.block(r0, c0, rn, cn).noalias() =
        Q.middleRows(r0, rn) * Q.middleRows(c0, cn).transpose();
  }
  // Mirror the strict upper tiles; a == b tiles are mirrored entrywise so
  // the result is exactly symmetric.
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) G(i, j) = G(j, i);
  }
}

double pair_form(const PairTable& table, const LatticeIndex& index,
                 const Eigen::VectorXd& u) {
  const long n = static_cast<long>(u.size());
  std::vector<double> partial(n, 0.0);
#pragma omp parallel for schedule(dynamic, 16) num_threads(thread_count())
  for (long i = 0; i < n; ++i) partial[i] = row_form(table, index, u, i);
  double total = 0.0;
  for (double v : partial) total += v;
  return total;
}

double pair_form_active(const PairTable& table, const LatticeIndex& index,
                        const Eigen::VectorXd& u, const std::vector<int>& active) {
  const std::vector<char> mask = make_mask(u.size(), active);
  const long m = static_cast<long>(active.size());
  std::vector<double> partial(m, 0.0);
#pragma omp parallel for schedule(dynamic, 16) num_threads(thread_count())
  for (long a = 0; a < m; ++a) {
    partial[a] = row_form_active(table, index, u, mask, active[a]);
  }
  double total = 0.0;
  for (double v : partial) total += v;
  return total;
}

void pair_apply(const PairTable& table, const LatticeIndex& index,
                const Eigen::VectorXd& u, Eigen::VectorXd& out) {
  const long n = static_cast<long>(u.size());
  out.resize(n);
#pragma omp parallel for schedule(dynamic, 16) num_threads(thread_count())
  for (long i = 0; i < n; ++i) out[i] = row_apply(table, index, u, i);
}

void pair_matrix(const PairTable& table, const LatticeIndex& index,
                 Eigen::MatrixXd& W) {
  const long n = static_cast<long>(index.size());
  W.resize(n, n);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (long j = 0; j < n; ++j) {
    for (long i = 0; i < n; ++i) W(i, j) = table(index[i], index[j]);
  }
}

void pair_rowsum(const PairTable& table, const LatticeIndex& index,
                 const std::vector<int>& active, std::vector<double>& out) {
  const long m = static_cast<long>(active.size());
  out.resize(m);
#pragma omp parallel for schedule(dynamic, 16) num_threads(thread_count())
  for (long a = 0; a < m; ++a) out[a] = row_sum(table, index, active[a]);
}

}  // namespace omp
}  // namespace fracvar::kernels
