#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <variant>

namespace commfield {

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

using Point = Eigen::Vector2d;
using Index = std::int64_t;

inline constexpr double kPi = 3.14159265358979323846;

/// Axis-aligned box; infinite bounds describe an unbounded domain.
struct Box {
  double xmin{0}, xmax{0}, ymin{0}, ymax{0};

  static Box unbounded();
  bool is_finite() const;
  double diagonal() const;
  bool contains(const Point& p, double tol = 0.0) const;
  bool contains(const Box& other, double tol = 0.0) const;
  Box united(const Box& other) const;
};

// Region predicates. All are closed sets.
struct Rectangle {
  double xmin, xmax, ymin, ymax;
};
struct Disk {
  Point center;
  double radius;
};
struct Annulus {
  Point center;
  double r_inner, r_outer;
};
/// Angles follow the standard polar convention, counter-clockwise from +x.
struct AnnularSector {
  Point center;
  double r_inner, r_outer, theta_begin, theta_end;
};
/// Points with normal . x <= offset.
struct HalfPlane {
  Point normal;
  double offset;
};

using Region = std::variant<Rectangle, Disk, Annulus, AnnularSector, HalfPlane>;

bool contains(const Region& region, const Point& p);
void validate(const Region& region);

}  // namespace commfield
