#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace fracvar {

constexpr int kMaxDim = 3;
using Point = std::array<double, kMaxDim>;

struct ProblemParams {
  int n = 2;
  double s = 0.3;
  double lambda = 1.0;
  bool admissible = false;            // n > max{4s, (8s+2)/3}
  bool discretization_valid = false;  // s < 1/2
  bool displayed_regime = false;      // false for n = 1 with s >= 1/8

  // Derived on every call so it can never drift from (n, s).
  double p() const;
};

double critical_exponent(int n, double s);

ProblemParams make_params(int n, double s, double lambda);

enum class Shape { Interval, Box, Ball, Annulus };

struct DomainSpec {
  Shape shape = Shape::Box;
  int dim = 2;
  Point lo{};       // interval / box
  Point hi{};
  Point center{};   // ball / annulus
  double radius = 0.0;
  double r_in = 0.0;
  double r_out = 0.0;
  double eta = 1.0;

  static DomainSpec interval(double a, double b);
  static DomainSpec box(const std::vector<double>& lo,
                        const std::vector<double>& hi);
  static DomainSpec ball(const std::vector<double>& center, double radius);
  static DomainSpec annulus(const std::vector<double>& center, double r_in,
                            double r_out);

  // Throws ValidationError on degenerate geometry.
  void validate() const;
  // Geometry of eta * Omega.
  double measure() const;
  double diameter() const;
  bool contains(const Point& x) const;
  Point centroid() const;
  // Axis-aligned bounding box of eta * Omega.
  void bounds(Point& lo_out, Point& hi_out) const;
  std::string describe() const;
};

struct MeshOptions {
  // Width of the lattice collar around the bounding box, as a fraction of
  // diam(Omega); at least four cells thick.
  double band_fraction = 0.25;
  int band_min_cells = 4;
  // Far-field rule: panels per face edge, Gauss points per panel, points per
  // logarithmic radial segment and the segment width in log(t).
  int face_panels = -1;  // -1: pick a default per dimension
  int face_order = 4;
  int radial_order = 4;
  double radial_log_step = 0.35;
};

// Exterior node of the collar or the far field.
//  - collar nodes are lattice cells outside Omega (near = true);
//  - far nodes are point quadrature nodes with weight q.
struct ExteriorNode {
  Point x{};
  double weight = 0.0;
  bool near = false;
  std::array<int, kMaxDim> index{};  // lattice index for collar cells
};

struct Mesh {
  int dim = 0;
  double h = 0.0;
  Point origin{};  // lattice anchor: cell k spans origin + h*[k, k+1)
  std::vector<std::array<int, kMaxDim>> index;
  std::vector<Point> centroids;
  std::vector<double> measures;
  double domain_measure = 0.0;
  double exact_measure = 0.0;
  double diameter = 0.0;
  double R_ext = 0.0;
  Point far_center{};
  std::vector<ExteriorNode> exterior;
  std::size_t near_count = 0;
  DomainSpec domain;
  double scale = 1.0;  // product of scale_mesh factors applied

  std::size_t size() const { return centroids.size(); }
  std::size_t exterior_size() const { return exterior.size(); }
};

// Builds the lattice mesh of eta * domain with width h (h is measured in the
// coordinates of eta * Omega).
Mesh build_mesh(const DomainSpec& domain, double h, double R_ext,
                const MeshOptions& opts = {});

// Exact image of a mesh under x -> eta x, including the exterior rule.
Mesh scale_mesh(const Mesh& mesh, double eta);

struct DiscreteField {
  std::vector<double> values;
  std::optional<std::vector<double>> exterior_values;

  DiscreteField() = default;
  explicit DiscreteField(std::vector<double> v) : values(std::move(v)) {}
  std::size_t size() const { return values.size(); }
};

// Throws ValidationError if the field does not fit the mesh or is not finite.
void check_field(const Mesh& mesh, const DiscreteField& u);

}  // namespace fracvar
