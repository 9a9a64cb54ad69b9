#include "fracvar/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fracvar/error.hpp"
#include "fracvar/quadrature.hpp"

namespace fracvar {
namespace {

bool finite(double x) { return std::isfinite(x); }

Point to_point(const std::vector<double>& v) {
  Point p{};
  for (std::size_t d = 0; d < v.size() && d < kMaxDim; ++d) p[d] = v[d];
  return p;
}

double norm(const Point& x, int dim) {
  double r2 = 0.0;
  for (int d = 0; d < dim; ++d) r2 += x[d] * x[d];
  return std::sqrt(r2);
}

double unit_ball_volume(int dim) {
  return std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim + 1.0);
}

}  // namespace

double critical_exponent(int n, double s) {
  return (n + 2.0 * s) / (n - 2.0 * s);
}

double ProblemParams::p() const { return critical_exponent(n, s); }

ProblemParams make_params(int n, double s, double lambda) {
  if (!finite(s) || !finite(lambda)) {
    throw ValidationError("make_params: non-finite input");
  }
  if (n < 1) throw ValidationError("make_params: n must be >= 1");
  if (!(s > 0.0 && s < 1.0)) {
    throw ValidationError("make_params: s must lie in (0, 1)");
  }
  if (!(lambda > 0.0)) throw ValidationError("make_params: lambda must be > 0");
  if (!(n > 2.0 * s)) {
    throw ValidationError("make_params: need n > 2s for a finite exponent");
  }
  ProblemParams params;
  params.n = n;
  params.s = s;
  params.lambda = lambda;
  params.admissible = n > std::max(4.0 * s, (8.0 * s + 2.0) / 3.0);
  params.discretization_valid = s < 0.5;
  params.displayed_regime = !(n == 1 && s >= 0.125);
  return params;
}

DomainSpec DomainSpec::interval(double a, double b) {
  DomainSpec d;
  d.shape = Shape::Interval;
  d.dim = 1;
  d.lo[0] = a;
  d.hi[0] = b;
  return d;
}

DomainSpec DomainSpec::box(const std::vector<double>& lo,
                           const std::vector<double>& hi) {
  if (lo.size() != hi.size() || lo.empty() || lo.size() > kMaxDim) {
    throw ValidationError("box: lo/hi must have matching length in 1..3");
  }
  DomainSpec d;
  d.shape = lo.size() == 1 ? Shape::Interval : Shape::Box;
  d.dim = static_cast<int>(lo.size());
  d.lo = to_point(lo);
  d.hi = to_point(hi);
  return d;
}

DomainSpec DomainSpec::ball(const std::vector<double>& center, double radius) {
  if (center.empty() || center.size() > kMaxDim) {
    throw ValidationError("ball: center must have 1..3 coordinates");
  }
  DomainSpec d;
  d.shape = Shape::Ball;
  d.dim = static_cast<int>(center.size());
  d.center = to_point(center);
  d.radius = radius;
  return d;
}

DomainSpec DomainSpec::annulus(const std::vector<double>& center, double r_in,
                               double r_out) {
  if (center.size() < 2 || center.size() > kMaxDim) {
    throw ValidationError("annulus: center must have 2..3 coordinates");
  }
  DomainSpec d;
  d.shape = Shape::Annulus;
  d.dim = static_cast<int>(center.size());
  d.center = to_point(center);
  d.r_in = r_in;
  d.r_out = r_out;
  return d;
}

void DomainSpec::validate() const {
  if (dim < 1 || dim > kMaxDim) throw ValidationError("domain: dim must be 1..3");
  if (!(eta > 0.0) || !finite(eta)) throw ValidationError("domain: eta must be > 0");
  switch (shape) {
    case Shape::Interval:
    case Shape::Box:
      for (int d = 0; d < dim; ++d) {
        if (!finite(lo[d]) || !finite(hi[d]) || !(hi[d] > lo[d])) {
          throw ValidationError("domain: box needs lo < hi on every axis");
        }
      }
      break;
    case Shape::Ball:
      if (!(radius > 0.0) || !finite(radius)) {
        throw ValidationError("domain: ball radius must be > 0");
      }
      break;
    case Shape::Annulus:
      if (!(r_in > 0.0 && r_out > r_in) || !finite(r_out)) {
        throw ValidationError("domain: annulus needs 0 < r_in < r_out");
      }
      break;
  }
}

double DomainSpec::measure() const {
  double ref = 0.0;
  switch (shape) {
    case Shape::Interval:
    case Shape::Box:
      ref = 1.0;
      for (int d = 0; d < dim; ++d) ref *= hi[d] - lo[d];
      break;
    case Shape::Ball:
      ref = unit_ball_volume(dim) * std::pow(radius, dim);
      break;
    case Shape::Annulus:
      ref = unit_ball_volume(dim) * (std::pow(r_out, dim) - std::pow(r_in, dim));
      break;
  }
  return ref * std::pow(eta, dim);
}

double DomainSpec::diameter() const {
  double ref = 0.0;
  switch (shape) {
    case Shape::Interval:
    case Shape::Box: {
      double r2 = 0.0;
      for (int d = 0; d < dim; ++d) r2 += (hi[d] - lo[d]) * (hi[d] - lo[d]);
      ref = std::sqrt(r2);
      break;
    }
    case Shape::Ball:
      ref = 2.0 * radius;
      break;
    case Shape::Annulus:
      ref = 2.0 * r_out;
      break;
  }
  return ref * eta;
}

bool DomainSpec::contains(const Point& x) const {
  Point y{};
  for (int d = 0; d < dim; ++d) y[d] = x[d] / eta;
  switch (shape) {
    case Shape::Interval:
    case Shape::Box:
      for (int d = 0; d < dim; ++d) {
        if (y[d] < lo[d] || y[d] > hi[d]) return false;
      }
      return true;
    case Shape::Ball:
    case Shape::Annulus: {
      Point r{};
      for (int d = 0; d < dim; ++d) r[d] = y[d] - center[d];
      const double rho = norm(r, dim);
      if (shape == Shape::Ball) return rho < radius;
      return rho > r_in && rho < r_out;
    }
  }
  return false;
}

Point DomainSpec::centroid() const {
  Point c{};
  for (int d = 0; d < dim; ++d) {
    c[d] = eta * ((shape == Shape::Interval || shape == Shape::Box)
                      ? 0.5 * (lo[d] + hi[d])
                      : center[d]);
  }
  return c;
}

void DomainSpec::bounds(Point& lo_out, Point& hi_out) const {
  lo_out = {};
  hi_out = {};
  for (int d = 0; d < dim; ++d) {
    if (shape == Shape::Interval || shape == Shape::Box) {
      lo_out[d] = eta * lo[d];
      hi_out[d] = eta * hi[d];
    } else {
      const double r = shape == Shape::Ball ? radius : r_out;
      lo_out[d] = eta * (center[d] - r);
      hi_out[d] = eta * (center[d] + r);
    }
  }
}

std::string DomainSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  auto pt = [&](const Point& p) {
    os << '(';
    for (int d = 0; d < dim; ++d) os << (d ? "," : "") << p[d];
    os << ')';
  };
  switch (shape) {
    case Shape::Interval:
      os << "interval(" << lo[0] << ',' << hi[0] << ')';
      break;
    case Shape::Box:
      os << "box";
      pt(lo);
      pt(hi);
      break;
    case Shape::Ball:
      os << "ball";
      pt(center);
      os << 'r' << radius;
      break;
    case Shape::Annulus:
      os << "annulus";
      pt(center);
      os << 'r' << r_in << '-' << r_out;
      break;
  }
  if (eta != 1.0) os << "*eta" << eta;
  return os.str();
}

namespace {

// Far-field nodes covering B_R(center) minus the box center + [-L, L].
void add_far_nodes(Mesh& mesh, const Point& center, const Point& L, double R,
                   const MeshOptions& opts) {
  const int n = mesh.dim;
  const quad::Rule& tr = quad::gauss_legendre(opts.radial_order);
  const quad::Rule& fr = quad::gauss_legendre(opts.face_order);
  int panels = opts.face_panels;
  if (panels < 0) panels = n == 2 ? 8 : 4;
  double jac = 1.0;
  for (int d = 0; d < n; ++d) jac *= L[d];

  // Face parameters: list of (xi, weight) on the surface of [-1,1]^n.
  std::vector<std::pair<Point, double>> face;
  if (n == 1) {
    face.push_back({Point{-1.0, 0.0, 0.0}, 1.0});
    face.push_back({Point{1.0, 0.0, 0.0}, 1.0});
  } else {
    std::vector<std::pair<double, double>> line;
    const double pw = 2.0 / panels;
    for (int p = 0; p < panels; ++p) {
      const double mid = -1.0 + (p + 0.5) * pw;
      for (std::size_t k = 0; k < fr.size(); ++k) {
        line.push_back({mid + 0.5 * pw * fr.nodes[k], 0.5 * pw * fr.weights[k]});
      }
    }
    for (int d = 0; d < n; ++d) {
      for (int sign = -1; sign <= 1; sign += 2) {
        if (n == 2) {
          for (const auto& [a, wa] : line) {
            Point xi{};
            xi[d] = sign;
            xi[1 - d] = a;
            face.push_back({xi, wa});
          }
        } else {
          const int e1 = (d + 1) % 3;
          const int e2 = (d + 2) % 3;
          for (const auto& [a, wa] : line) {
            for (const auto& [b, wb] : line) {
              Point xi{};
              xi[d] = sign;
              xi[e1] = a;
              xi[e2] = b;
              face.push_back({xi, wa * wb});
            }
          }
        }
      }
    }
  }

  for (const auto& [xi, wf] : face) {
    Point dir{};
    for (int d = 0; d < n; ++d) dir[d] = L[d] * xi[d];
    const double tmax = R / norm(dir, n);
    if (!(tmax > 1.0)) continue;
    const double span = std::log(tmax);
    const int segments = std::max(1, static_cast<int>(std::ceil(span / opts.radial_log_step)));
    const double ds = span / segments;
    for (int g = 0; g < segments; ++g) {
      const double mid = (g + 0.5) * ds;
      for (std::size_t k = 0; k < tr.size(); ++k) {
        const double sigma = mid + 0.5 * ds * tr.nodes[k];
        const double t = std::exp(sigma);
        // dt = t dsigma; volume element t^{n-1} prod(L) dt dxi.
        const double w = 0.5 * ds * tr.weights[k] * wf * jac * std::pow(t, n);
        ExteriorNode node;
        for (int d = 0; d < n; ++d) node.x[d] = center[d] + t * dir[d];
        node.weight = w;
        node.near = false;
        mesh.exterior.push_back(node);
      }
    }
  }
}

Mesh build_reference(const DomainSpec& domain, double h, double R_ext,
                     const MeshOptions& opts) {
  const int n = domain.dim;
  Mesh mesh;
  mesh.dim = n;
  mesh.h = h;
  mesh.domain = domain;
  mesh.exact_measure = domain.measure();
  mesh.diameter = domain.diameter();
  mesh.R_ext = R_ext;

  Point blo, bhi;
  domain.bounds(blo, bhi);
  std::array<int, kMaxDim> count{1, 1, 1};
  const bool anchored = domain.shape == Shape::Interval || domain.shape == Shape::Box;
  for (int d = 0; d < n; ++d) {
    if (anchored) {
      mesh.origin[d] = blo[d];
      count[d] = static_cast<int>(std::ceil((bhi[d] - blo[d]) / h - 1e-9));
    } else {
      const Point c = domain.centroid();
      const int half = static_cast<int>(std::ceil((c[d] - blo[d]) / h - 1e-9));
      mesh.origin[d] = c[d] - half * h;
      count[d] = 2 * half;
    }
  }

  auto centroid_of = [&](const std::array<int, kMaxDim>& k) {
    Point x{};
    for (int d = 0; d < n; ++d) x[d] = mesh.origin[d] + (k[d] + 0.5) * h;
    return x;
  };

  const int band = std::max(opts.band_min_cells,
                            static_cast<int>(std::ceil(opts.band_fraction * mesh.diameter / h)));
  std::array<int, kMaxDim> kmin{0, 0, 0};
  std::array<int, kMaxDim> kmax{0, 0, 0};
  for (int d = 0; d < n; ++d) {
    kmin[d] = -band;
    kmax[d] = count[d] + band - 1;
  }

  const double cell_measure = std::pow(h, n);
  std::vector<ExteriorNode> near;
  std::array<int, kMaxDim> k{0, 0, 0};
  // Lexicographic sweep, last axis fastest.
  for (k[0] = kmin[0]; k[0] <= kmax[0]; ++k[0]) {
    for (k[1] = kmin[1]; k[1] <= kmax[1]; ++k[1]) {
      for (k[2] = kmin[2]; k[2] <= kmax[2]; ++k[2]) {
        const Point x = centroid_of(k);
        bool inside_range = true;
        for (int d = 0; d < n; ++d) inside_range = inside_range && k[d] >= 0 && k[d] < count[d];
        if (inside_range && domain.contains(x)) {
          mesh.index.push_back(k);
          mesh.centroids.push_back(x);
          mesh.measures.push_back(cell_measure);
        } else {
          ExteriorNode node;
          node.x = x;
          node.weight = cell_measure;
          node.near = true;
          node.index = k;
          near.push_back(node);
        }
      }
    }
  }
  if (mesh.centroids.empty()) throw ValidationError("build_mesh: mesh has no cells");
  mesh.exterior = std::move(near);
  mesh.near_count = mesh.exterior.size();

  double total = 0.0;
  for (double m : mesh.measures) total += m;
  mesh.domain_measure = total;

  Point center{};
  Point L{};
  for (int d = 0; d < n; ++d) {
    const double lo = mesh.origin[d] + kmin[d] * h;
    const double hi = mesh.origin[d] + (kmax[d] + 1) * h;
    center[d] = 0.5 * (lo + hi);
    L[d] = 0.5 * (hi - lo);
  }
  mesh.far_center = center;
  if (!(R_ext > 1.000001 * norm(L, n))) {
    throw ValidationError("build_mesh: R_ext does not clear the lattice collar");
  }
  add_far_nodes(mesh, center, L, R_ext, opts);
  return mesh;
}

}  // namespace

Mesh build_mesh(const DomainSpec& domain, double h, double R_ext,
                const MeshOptions& opts) {
  domain.validate();
  if (!(h > 0.0) || !finite(h)) throw ValidationError("build_mesh: h must be > 0");
  if (h > domain.diameter()) {
    throw ValidationError("build_mesh: h exceeds the domain diameter");
  }
  if (!finite(R_ext) || R_ext < 2.0 * domain.diameter() * (1.0 - 1e-12)) {
    throw ValidationError("build_mesh: R_ext must be at least 2 diam(Omega)");
  }
  if (domain.dim == 1 && domain.shape == Shape::Annulus) {
    throw ValidationError("build_mesh: annulus needs dim >= 2");
  }
  DomainSpec ref = domain;
  ref.eta = 1.0;
  const double eta = domain.eta;
  Mesh mesh = build_reference(ref, h / eta, R_ext / eta, opts);
  if (eta == 1.0) return mesh;
  return scale_mesh(mesh, eta);
}

Mesh scale_mesh(const Mesh& mesh, double eta) {
  if (!(eta > 0.0) || !finite(eta)) throw ValidationError("scale_mesh: eta must be > 0");
  const int n = mesh.dim;
  const double vol = std::pow(eta, n);
  Mesh out = mesh;
  out.h = mesh.h * eta;
  out.R_ext = mesh.R_ext * eta;
  out.diameter = mesh.diameter * eta;
  out.exact_measure = mesh.exact_measure * vol;
  out.scale = mesh.scale * eta;
  out.domain.eta = mesh.domain.eta * eta;
  for (int d = 0; d < n; ++d) {
    out.origin[d] *= eta;
    out.far_center[d] *= eta;
  }
  for (auto& x : out.centroids) {
    for (int d = 0; d < n; ++d) x[d] *= eta;
  }
  double total = 0.0;
  for (auto& m : out.measures) {
    m *= vol;
    total += m;
  }
  out.domain_measure = total;
  for (auto& node : out.exterior) {
    for (int d = 0; d < n; ++d) node.x[d] *= eta;
    node.weight *= vol;
  }
  return out;
}

void check_field(const Mesh& mesh, const DiscreteField& u) {
  if (u.values.size() != mesh.size()) {
    throw ValidationError("field length does not match the mesh");
  }
  for (double v : u.values) {
    if (!std::isfinite(v)) throw ValidationError("field has non-finite entries");
  }
  if (u.exterior_values && u.exterior_values->size() != mesh.exterior_size()) {
    throw ValidationError("exterior field length does not match the mesh");
  }
}

}  // namespace fracvar
