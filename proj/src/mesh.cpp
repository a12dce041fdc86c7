#include "commfield/mesh.hpp"

#include "commfield/error.hpp"
#include "commfield/transform.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

namespace commfield {

namespace {

constexpr double kGauss = 0.57735026918962576451;  // 1/sqrt(3)

// Shared lattice connectivity and tags for an ni x nj structured mesh.
void build_lattice(Mesh& m, const std::array<std::string, 4>& tags) {
  const Index ni = m.ni, nj = m.nj;
  m.elements.reserve(static_cast<std::size_t>(ni * nj));
  for (Index j = 0; j < nj; ++j)
    for (Index i = 0; i < ni; ++i)
      m.elements.push_back({m.node_index(i, j), m.node_index(i + 1, j), m.node_index(i + 1, j + 1),
                            m.node_index(i, j + 1)});

  auto& low_j = m.boundary_tags[tags[0]];
  auto& high_i = m.boundary_tags[tags[1]];
  auto& high_j = m.boundary_tags[tags[2]];
  auto& low_i = m.boundary_tags[tags[3]];
  for (Index i = 0; i < ni; ++i) low_j.push_back({m.node_index(i, 0), m.node_index(i + 1, 0)});
  for (Index j = 0; j < nj; ++j) high_i.push_back({m.node_index(ni, j), m.node_index(ni, j + 1)});
  for (Index i = ni; i > 0; --i) high_j.push_back({m.node_index(i, nj), m.node_index(i - 1, nj)});
  for (Index j = nj; j > 0; --j) low_i.push_back({m.node_index(0, j), m.node_index(0, j - 1)});
}

}  // namespace

Box Mesh::bounding_box() const {
  if (nodes.empty()) return {};
  Box b{nodes[0].x(), nodes[0].x(), nodes[0].y(), nodes[0].y()};
  for (const auto& p : nodes) b = b.united({p.x(), p.x(), p.y(), p.y()});
  return b;
}

Mesh build_cartesian_mesh(std::array<double, 2> x_range, std::array<double, 2> y_range, Index nx, Index ny) {
  if (nx < 1 || ny < 1) throw ValidationError("build_cartesian_mesh: nx and ny must be >= 1");
  if (!(x_range[1] > x_range[0]) || !(y_range[1] > y_range[0]))
    throw ValidationError("build_cartesian_mesh: ranges must be nonempty");
  Mesh m;
  m.ni = nx;
  m.nj = ny;
  m.layout = MeshLayout::cartesian;
  m.nodes.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  const double dx = (x_range[1] - x_range[0]) / static_cast<double>(nx);
  const double dy = (y_range[1] - y_range[0]) / static_cast<double>(ny);
  for (Index j = 0; j <= ny; ++j) {
    const double y = j == ny ? y_range[1] : y_range[0] + static_cast<double>(j) * dy;
    for (Index i = 0; i <= nx; ++i) {
      const double x = i == nx ? x_range[1] : x_range[0] + static_cast<double>(i) * dx;
      m.nodes.emplace_back(x, y);
    }
  }
  build_lattice(m, {"bottom", "right", "top", "left"});
  return m;
}

Mesh build_annular_sector_mesh(double r1, double r2, double phi, Index nr, Index ntheta) {
  if (!(r1 > 0 && r2 > r1)) throw ValidationError("build_annular_sector_mesh: need 0 < r1 < r2");
  if (!(phi > 0 && phi <= 2 * kPi)) throw ValidationError("build_annular_sector_mesh: need 0 < phi <= 2 pi");
  if (nr < 1 || ntheta < 1) throw ValidationError("build_annular_sector_mesh: counts must be >= 1");
  Mesh m;
  m.ni = ntheta;
  m.nj = nr;
  m.layout = MeshLayout::annular_sector;
  m.sector = SectorGeometry{r1, r2, phi};
  // r1 exp(log(r2/r1) t) rather than pow, so nodes agree with bender_mapping images.
  const double log_ratio = std::log(r2 / r1);
  for (Index j = 0; j <= nr; ++j) {
    const double r = r1 * std::exp(log_ratio * static_cast<double>(j) / static_cast<double>(nr));
    for (Index i = 0; i <= ntheta; ++i) {
      const double theta = phi * static_cast<double>(i) / static_cast<double>(ntheta);
      m.nodes.emplace_back(r * std::sin(theta), r * std::cos(theta));
    }
  }
  build_lattice(m, {"inner-arc", "CB", "outer-arc", "AD"});
  validate_mesh(m);
  return m;
}

Mesh map_mesh(const Mesh& mesh, const Mapping& map) {
  Mesh out = mesh;
  out.layout = MeshLayout::mapped;
  out.sector.reset();
  for (auto& p : out.nodes) p = map(p);
  validate_mesh(out);
  return out;
}

std::array<double, 4> shape_values(const Point& xi) {
  const double s = xi.x(), t = xi.y();
  return {0.25 * (1 - s) * (1 - t), 0.25 * (1 + s) * (1 - t), 0.25 * (1 + s) * (1 + t),
          0.25 * (1 - s) * (1 + t)};
}

Eigen::Matrix<double, 2, 4> shape_gradients(const Point& xi) {
  const double s = xi.x(), t = xi.y();
  Eigen::Matrix<double, 2, 4> g;
  g << -0.25 * (1 - t), 0.25 * (1 - t), 0.25 * (1 + t), -0.25 * (1 + t),
       -0.25 * (1 - s), -0.25 * (1 + s), 0.25 * (1 + s), 0.25 * (1 - s);
  return g;
}

Eigen::Matrix<double, 2, 4> element_coordinates(const Mesh& mesh, Index element) {
  Eigen::Matrix<double, 2, 4> c;
  const auto& e = mesh.elements[static_cast<std::size_t>(element)];
  for (int k = 0; k < 4; ++k) c.col(k) = mesh.nodes[static_cast<std::size_t>(e[static_cast<std::size_t>(k)])];
  return c;
}

Point bilinear_map(const Eigen::Matrix<double, 2, 4>& coords, const Point& xi) {
  const auto n = shape_values(xi);
  return coords * Eigen::Vector4d(n[0], n[1], n[2], n[3]);
}

Eigen::Matrix2d element_jacobian(const Eigen::Matrix<double, 2, 4>& coords, const Point& xi) {
  return coords * shape_gradients(xi).transpose();
}

void validate_mesh(const Mesh& mesh) {
  for (Index e = 0; e < mesh.element_count(); ++e) {
    const auto c = element_coordinates(mesh, e);
    for (double s : {-kGauss, kGauss})
      for (double t : {-kGauss, kGauss})
        if (!(element_jacobian(c, Point(s, t)).determinant() > 0)) {
          std::ostringstream msg;
          msg << "mesh: element " << e << " is inverted or degenerate";
          throw GeometryError(msg.str());
        }
  }
}

Location locate_point(const Mesh& mesh, const Point& p) {
  const double scale = mesh.diameter();
  const double hull_tol = 1e-10 * scale;
  const double local_tol = 1e-9;
  bool newton_failed = false;
  for (Index e = 0; e < mesh.element_count(); ++e) {
    const auto c = element_coordinates(mesh, e);
    if (p.x() < c.row(0).minCoeff() - hull_tol || p.x() > c.row(0).maxCoeff() + hull_tol ||
        p.y() < c.row(1).minCoeff() - hull_tol || p.y() > c.row(1).maxCoeff() + hull_tol)
      continue;
    Point xi = Point::Zero();
    bool converged = false;
    for (int it = 0; it < 50; ++it) {
      const Point residual = bilinear_map(c, xi) - p;
      if (residual.norm() <= 1e-12 * std::max(1.0, scale)) {
        converged = true;
        break;
      }
      xi -= element_jacobian(c, xi).partialPivLu().solve(residual);
      if (!xi.allFinite()) break;
    }
    if (!converged) {
      newton_failed = true;
      continue;
    }
    if (xi.cwiseAbs().maxCoeff() <= 1.0 + local_tol) {
      return {e, xi.cwiseMax(-1.0).cwiseMin(1.0)};
    }
  }
  std::ostringstream msg;
  msg << "locate_point: (" << p.x() << ", " << p.y() << ")";
  if (newton_failed) throw GeometryError(msg.str() + ": inverse bilinear map did not converge");
  throw NotFoundError(msg.str() + " is outside the mesh");
}

}  // namespace commfield
