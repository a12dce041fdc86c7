#pragma once

#include "commfield/geometry.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace commfield {

class Mapping;

enum class MeshLayout { cartesian, annular_sector, mapped };

struct SectorGeometry {
  double r1, r2, phi;
};

/// Structured quadrilateral mesh.
///
/// Nodes are stored row-major on an (ni + 1) x (nj + 1) lattice, index = j (ni + 1) + i.
/// For Cartesian meshes i runs along x and j along y; for annular sectors i runs along
/// the angle and j along the radius. Elements list their corners counter-clockwise,
/// starting from the lattice corner (i, j).
struct Mesh {
  std::vector<Point> nodes;
  std::vector<std::array<Index, 4>> elements;
  std::map<std::string, std::vector<std::array<Index, 2>>> boundary_tags;
  Index ni{0};
  Index nj{0};
  MeshLayout layout{MeshLayout::cartesian};
  std::optional<SectorGeometry> sector;

  Index node_count() const { return static_cast<Index>(nodes.size()); }
  Index element_count() const { return static_cast<Index>(elements.size()); }
  Index node_index(Index i, Index j) const { return j * (ni + 1) + i; }
  Box bounding_box() const;
  double diameter() const { return bounding_box().diagonal(); }
};

/// Tags "bottom", "right", "top", "left".
Mesh build_cartesian_mesh(std::array<double, 2> x_range, std::array<double, 2> y_range, Index nx, Index ny);

/// Geometrically graded sector: r_j = r1 (r2/r1)^(j/nr), theta_i = i phi / ntheta, with the
/// same angle convention as bender_mapping (image point (r sin theta, r cos theta)).
/// Tags "AD" (theta = 0), "CB" (theta = phi), "inner-arc", "outer-arc".
Mesh build_annular_sector_mesh(double r1, double r2, double phi, Index nr, Index ntheta);

/// Same connectivity and tags, nodes moved through the map.
Mesh map_mesh(const Mesh& mesh, const Mapping& map);

/// Throws GeometryError if any element has a non-positive Jacobian at a Gauss point.
void validate_mesh(const Mesh& mesh);

// Bilinear reference element on [-1, 1]^2, corners counter-clockwise from (-1, -1).
std::array<double, 4> shape_values(const Point& xi);
/// Rows are d/dxi, d/deta; columns are the four corners.
Eigen::Matrix<double, 2, 4> shape_gradients(const Point& xi);
Eigen::Matrix<double, 2, 4> element_coordinates(const Mesh& mesh, Index element);
Point bilinear_map(const Eigen::Matrix<double, 2, 4>& coords, const Point& xi);
/// Jacobian dx/dxi of the bilinear element map.
Eigen::Matrix2d element_jacobian(const Eigen::Matrix<double, 2, 4>& coords, const Point& xi);

struct Location {
  Index element;
  Point local;
};

/// Element containing the point and its local coordinates in [-1, 1]^2.
/// Throws NotFoundError outside the mesh, GeometryError on Newton failure.
Location locate_point(const Mesh& mesh, const Point& p);

}  // namespace commfield
