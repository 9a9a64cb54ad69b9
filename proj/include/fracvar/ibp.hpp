#pragma once

#include <vector>

#include "fracvar/assembly.hpp"
#include "fracvar/model.hpp"

namespace fracvar {

// (-Delta)^s exp(-|x|^2) at radius r, as a Kummer function.
double gaussian_fractional_laplacian(int n, double s, double r);

// int_{|y - c| > R} |x - y|^{-n-2s} dy for |x - c| < R.
double outside_kernel_mass(int n, double s, const Point& c, double R, const Point& x);

struct GaussianPair {
  Point v_center{};
  Point w_center{};
  double width = 0.25;  // exp(-|x - x0|^2 / width^2)
};

// Both Gaussians sampled at centroids, exterior values included.
DiscreteField sample_gaussian(const Mesh& mesh, const Point& center, double width);

struct IbpLevel {
  double h = 0.0;
  std::size_t cells = 0;
  IbpReport report;              // exact operator on the left
  double relative_residual = 0.0;
  double neumann_reconstructed = 0.0;  // same pair with reconstructed exterior
};

// One level: assemble, then compare int w (-Delta)^s v against the
// discrete bilinear and Neumann terms.
IbpLevel ibp_level(const Mesh& mesh, const ProblemParams& params, const GaussianPair& pair);

std::vector<IbpLevel> ibp_refinement(const DomainSpec& domain, const ProblemParams& params,
                                     const std::vector<double>& hs, double R_ext,
                                     const GaussianPair& pair);

}  // namespace fracvar
