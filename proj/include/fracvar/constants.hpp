#pragma once

namespace fracvar {

// S = 2^{2s} pi^s Gamma((n+2s)/2)/Gamma((n-2s)/2) [Gamma(n/2)/Gamma(n)]^{2s/n}.
double sharp_constant(int n, double s);

// S / (2 |Omega|)^{2s/n}.
double lambda_star(double S, double domain_measure, int n, double s);

// Multiplier kappa in (-Delta)^s U = kappa U^p for U = (1+|x|^2)^{-(n-2s)/2}.
double bubble_eigen_factor(int n, double s);

struct BubbleQuotient {
  double value = 0.0;     // seminorm / L^{p+1} norm squared, finest grid
  double seminorm = 0.0;  // c/2 int int |U(x)-U(y)|^2 k(x-y)
  double lp_norm_sq = 0.0;
  double coarse = 0.0;    // same quotient with 3/4 of the points per panel
  bool converged = false; // |value - coarse| <= 1% value
};

// Whole-space Rayleigh quotient of the unit bubble by radial quadrature.
// `grid` is the number of Gauss points per panel.
BubbleQuotient bubble_rayleigh_global(int n, double s, int grid = 12);

// Radial profile of (-Delta)^s U at |x| = r by the same quadrature.
double bubble_fractional_laplacian(int n, double s, double r, int grid = 12);

struct AsymptoticConstants {
  double L1 = 0.0;             // S * L2
  double L2 = 0.0;             // closed form
  double L3 = 0.0;             // closed form
  double L1_quadrature = 0.0;  // whole-space seminorm of the unit bubble
  double L2_quadrature = 0.0;
};

AsymptoticConstants asymptotic_constants(int n, double s, int grid = 12);

double l2_closed(int n, double s);
double l3_closed(int n, double s);
// ||(1+|x|^2)^{-(n-2s)/2}||^2_{L^{p+1}} by radial quadrature.
double l2_quadrature(int n, double s, int grid = 16);

struct ConstantTable {
  int n = 0;
  double s = 0.0;
  double p = 0.0;
  double c_ns = 0.0;
  double S = 0.0;
  double S_half = 0.0;
  double omega_n = 0.0;
  double L1 = 0.0;
  double L2 = 0.0;
  double L3 = 0.0;
  double lambda_star = 0.0;  // zero when no measure is supplied
};

// All constants for (n, s); L-constants need n > 4s and are zero otherwise.
ConstantTable constant_table(int n, double s, double domain_measure = 0.0);

}  // namespace fracvar
