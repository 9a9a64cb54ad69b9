#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "fracvar/model.hpp"
#include "fracvar/pair_integrals.hpp"

// Hot loops of the assembly. Each kernel exists twice: a plain serial
// reference and an OpenMP version. Work is split so that every output entry
// is produced by exactly one thread in a fixed order; results therefore do
// not depend on the worker count.
namespace fracvar::kernels {

using LatticeIndex = std::vector<std::array<int, kMaxDim>>;

namespace serial {

// G(i, j) = sum_z Q(i, z) Q(j, z), full symmetric result.
void gram(const Eigen::MatrixXd& Q, Eigen::MatrixXd& G);

// sum_{i<j} T(k_j - k_i) (u_i - u_j)^2 over the lattice cells.
double pair_form(const PairTable& table, const LatticeIndex& index,
                 const Eigen::VectorXd& u);

// Same sum restricted to pairs with at least one cell in `active`
// (cells outside it are assumed to carry equal values).
double pair_form_active(const PairTable& table, const LatticeIndex& index,
                        const Eigen::VectorXd& u,
                        const std::vector<int>& active);

// out_i = sum_j T(k_j - k_i) (u_i - u_j).
void pair_apply(const PairTable& table, const LatticeIndex& index,
                const Eigen::VectorXd& u, Eigen::VectorXd& out);

// W(i, j) = T(k_j - k_i), zero diagonal.
void pair_matrix(const PairTable& table, const LatticeIndex& index,
                 Eigen::MatrixXd& W);

// out[a] = sum_j T(k_j - k_{active[a]}).
void pair_rowsum(const PairTable& table, const LatticeIndex& index,
                 const std::vector<int>& active, std::vector<double>& out);

}  // namespace serial

namespace omp {

void gram(const Eigen::MatrixXd& Q, Eigen::MatrixXd& G);
double pair_form(const PairTable& table, const LatticeIndex& index,
                 const Eigen::VectorXd& u);
double pair_form_active(const PairTable& table, const LatticeIndex& index,
                        const Eigen::VectorXd& u,
                        const std::vector<int>& active);
void pair_apply(const PairTable& table, const LatticeIndex& index,
                const Eigen::VectorXd& u, Eigen::VectorXd& out);
void pair_matrix(const PairTable& table, const LatticeIndex& index,
                 Eigen::MatrixXd& W);
void pair_rowsum(const PairTable& table, const LatticeIndex& index,
                 const std::vector<int>& active, std::vector<double>& out);

}  // namespace omp

// Worker count used by the omp kernels: FRACVAR_THREADS if set, otherwise the
// OpenMP default.
int thread_count();

}  // namespace fracvar::kernels
