#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "fracvar/assembly.hpp"
#include "fracvar/model.hpp"
#include "fracvar/pair_integrals.hpp"

namespace fracvar {

enum class CutoffProfile { Smooth, Quintic };

// psi = 1 on |x| <= R/4, 0 beyond R/2, monotone transition in between.
double cutoff(double r, double R, CutoffProfile profile);

struct BubbleSpec {
  double R = 1.0;
  Point center{};
  double epsilon = 0.01;
  CutoffProfile profile = CutoffProfile::Smooth;
  bool boundary = true;  // center must sit on a boundary cell
};

// psi(x - center) / (eps + |x - center|^2)^{(n-2s)/2}
double bubble_value(const BubbleSpec& spec, const Point& x, int n, double s);

// Cells missing a lattice neighbour inside Omega.
std::vector<int> boundary_cells(const Mesh& mesh);

// Centroid of the boundary cell nearest `hint`; by default the point of
// the boundary with the smallest first coordinate.
Point boundary_anchor(const Mesh& mesh, const std::optional<Point>& hint = std::nullopt);

// Centroid of the interior cell nearest the domain centroid.
Point interior_anchor(const Mesh& mesh);

DiscreteField sample_bubble(const Mesh& mesh, const BubbleSpec& spec, double s);
// Same, with exterior values filled by reconstruct_exterior.
DiscreteField sample_bubble(const Mesh& mesh, const NonlocalForm& form,
                            const BubbleSpec& spec, double s);

// eps_k = 4^{-k} (R/4)^2, k = 0..count-1.
std::vector<double> default_ladder(double R, int count = 6);

struct BubbleMeasures {
  double epsilon = 0.0;
  double seminorm = 0.0;           // c/2 over T(Omega), bubble extended by 0
  double seminorm_interior = 0.0;  // c/2 over Omega x Omega
  double lp1_norm_sq = 0.0;        // (int_Omega V^{p+1})^{2/(p+1)}
  double l2_norm_sq = 0.0;         // int_Omega V^2
};

// Matrix-free evaluation on large lattices: only cells in the bubble
// support enter the row loops.
class BubbleEvaluator {
 public:
  BubbleEvaluator(const Mesh& mesh, const ProblemParams& params, bool parallel = true);
  BubbleMeasures evaluate(const BubbleSpec& spec) const;

 private:
  const Mesh* mesh_;
  ProblemParams params_;
  bool parallel_;
  double cns_;
  double h_power_;
  double complement_;  // lattice_complement_sum
  std::shared_ptr<PairTable> table_;
};

struct AsymptoticFit {
  std::vector<double> epsilons;
  std::vector<double> values;
  double fitted_exponent = 0.0;
  double fitted_coefficient = 0.0;
  double r2 = 0.0;
};

// Fits v(eps) = L eps^{-a} + C on a geometric ladder through the successive
// differences v_{k+1} - v_k = L (r^a - 1) eps_k^{-a}, r = eps_k / eps_{k+1}.
AsymptoticFit fit_power_law(const std::vector<double>& epsilons,
                            const std::vector<double>& values);

struct AsymptoticStudy {
  std::vector<BubbleMeasures> rows;
  AsymptoticFit seminorm;
  AsymptoticFit lp1;
  AsymptoticFit l2;
  AsymptoticFit seminorm_interior;  // reported, not required to be clean
  bool accepted = false;            // all three r^2 >= 0.99
};

// Throws ValidationError when the core is under-resolved (h > sqrt(eps)/4)
// or the ladder is not geometric; throws NumericalError when a required fit
// has r^2 < 0.99 and `strict` is set.
AsymptoticStudy fit_asymptotics(const Mesh& mesh, const ProblemParams& params,
                                const BubbleSpec& base, const std::vector<double>& epsilons,
                                bool strict = true);

struct ProbeRow {
  double epsilon = 0.0;
  double K_lambda = 0.0;
  double S_half = 0.0;
  double margin = 0.0;    // S_half - K_lambda
  double margin_S = 0.0;  // S - K_lambda
  double seminorm = 0.0;  // u^T A u
  double lp1_norm_sq = 0.0;
  double l2_norm_sq = 0.0;
  double quarter_ratio = 0.0;  // K_lambda / (S / 4), the quarter-bound diagnostic
};

std::vector<ProbeRow> bubble_quotient_probe(const NonlocalForm& form, const Mesh& mesh,
                                            const ProblemParams& params,
                                            const BubbleSpec& base,
                                            const std::vector<double>& epsilons);

}  // namespace fracvar
