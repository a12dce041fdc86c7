#pragma once

#include "commfield/error.hpp"
#include "commfield/geometry.hpp"
#include "commfield/material.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <string>

namespace commfield {

/// Differentiable orientation-preserving 2D coordinate map x' = x'(x).
///
/// The Jacobian A_ij = dx'_i/dx_j is evaluated in closed form when the map
/// provides one and by central differences otherwise. An inverse is optional;
/// it is needed to push a parameter field onto the image domain.
class Mapping {
 public:
  using PointFn = std::function<Point(const Point&)>;
  using JacobianFn = std::function<Eigen::Matrix2d(const Point&)>;

  Mapping(std::string name, PointFn forward, Box domain, Box range, JacobianFn jacobian = {},
          PointFn inverse = {});

  const std::string& name() const { return name_; }
  const Box& domain() const { return domain_; }
  const Box& range() const { return range_; }
  bool has_closed_form_jacobian() const { return static_cast<bool>(jacobian_); }
  bool has_inverse() const { return static_cast<bool>(inverse_); }

  /// Throws DomainError for points outside the domain.
  Point operator()(const Point& x) const;
  Point inverse(const Point& x_image) const;

  bool in_domain(const Point& x) const;
  /// Central-difference step: 1e-6 of the domain diagonal (or of max(1, |x|) if unbounded).
  double fd_step(const Point& x) const;

  const PointFn& forward_fn() const { return forward_; }
  const JacobianFn& jacobian_fn() const { return jacobian_; }
  const PointFn& inverse_fn() const { return inverse_; }

 private:
  std::string name_;
  PointFn forward_;
  Box domain_;
  Box range_;
  JacobianFn jacobian_;
  PointFn inverse_;
};

struct CloakSpec {
  Point center{0, 0};
  double a{1};
  double b{2};
  double epsilon{1e-3};

  void validate() const;
};

/// Plate [0, k a] x [0, a] bent into an annular sector of angle phi starting at radius r1.
struct BenderSpec {
  double k{1};
  double a{1};
  double phi{kPi / 2};
  double r1{1};

  void validate() const;
  double length() const { return k * a; }
  double r2() const { return r1 * std::exp(phi / k); }
  Box plate() const { return {0.0, k * a, 0.0, a}; }
};

Mapping identity_mapping(const Box& domain = Box::unbounded());
Mapping scale_mapping(double factor, const Box& domain = Box::unbounded());
Mapping affine_mapping(const Eigen::Matrix2d& linear, const Eigen::Vector2d& offset,
                       const Box& domain = Box::unbounded());

/// Radial compression r' = a + (b - a) r / b for r < b, identity outside.
Mapping cloak_mapping(const CloakSpec& spec);

/// Conformal plate-to-sector map: theta = phi x / (k a), r = r1 exp(phi y / (k a)).
///
/// The sector angle theta is measured clockwise from the +y axis, i.e. the image
/// point is (r sin(theta), r cos(theta)). This keeps det A > 0 while sending the
/// plate's long side to the angular direction and its width to the radial one.
Mapping bender_mapping(const BenderSpec& spec);

/// outer o inner, with the chain-rule Jacobian.
Mapping compose(const Mapping& outer, const Mapping& inner);

Eigen::Matrix2d finite_difference_jacobian(const Mapping& map, const Point& x);

/// Jacobian of the map at x; closed form when available. Throws DomainError outside
/// the domain and DegenerateMapError when det A <= 0 or A is not finite.
Eigen::Matrix2d jacobian_at(const Mapping& map, const Point& x);

/// alpha' = A alpha A^T / det A, and rho, beta, f divided by det A.
template <typename Scalar>
ParameterSampleT<Scalar> push_forward(const ParameterSampleT<Scalar>& s, const Matrix2<Scalar>& A) {
  using std::isfinite;
  const Scalar det = A.determinant();
  if (!(det > Scalar(0)) || !isfinite(det))
    throw DegenerateMapError("push_forward: Jacobian determinant must be positive");
  const Matrix2<Scalar> alpha = A * s.alpha.matrix() * A.transpose() / det;
  return {s.rho / det, SymTensor2<Scalar>::from_matrix(alpha), s.beta / det, s.f / det};
}

/// R(theta) diag(alpha_r, alpha_theta) R(theta)^T.
template <typename Scalar>
SymTensor2<Scalar> principal_to_cartesian(Scalar alpha_r, Scalar alpha_theta, Scalar theta) {
  using std::cos;
  using std::sin;
  const Scalar c = cos(theta);
  const Scalar s = sin(theta);
  return {c * c * alpha_r + s * s * alpha_theta, c * s * (alpha_r - alpha_theta),
          s * s * alpha_r + c * c * alpha_theta};
}

/// Closed-form cloak material at an image point. Inside the shell the gap r' - a is
/// clamped below at epsilon * a. Points with r' > b get the base sample back.
ParameterSample cloak_params(const CloakSpec& spec, const ParameterSample& base, const Point& x_image);

/// cloak_params bound to a base sample, for use as a region rule.
ParameterRule cloak_rule(const CloakSpec& spec, const ParameterSample& base);

/// Isotropic bender material with the radial factor r pi / (2a). Only defined for
/// phi = pi/2 and k = 1.
ParameterSample bender_params_paper(const BenderSpec& spec, const ParameterSample& base,
                                    const Point& x_image);

/// Push-forward of the base material through bender_mapping, evaluated at an image point.
ParameterSample bender_params_derived(const BenderSpec& spec, const ParameterSample& base,
                                      const Point& x_image);

/// Field on the image domain: base sampled at the preimage and pushed forward.
/// Points outside the map's image use `outside_image` if given, else throw DomainError.
ParameterField pushed_forward_field(const Mapping& map, const ParameterField& base,
                                    ParameterRule outside_image = {});

}  // namespace commfield
