#include "commfield/transform.hpp"

#include <algorithm>
#include <array>
#include <sstream>

namespace commfield {

namespace {

constexpr double kDomainTol = 1e-10;

std::string point_str(const Point& p) {
  std::ostringstream s;
  s << "(" << p.x() << ", " << p.y() << ")";
  return s.str();
}

Eigen::Matrix2d rotation(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

Box box_of(const std::vector<Point>& pts) {
  Box b{pts.front().x(), pts.front().x(), pts.front().y(), pts.front().y()};
  for (const auto& p : pts) b = b.united({p.x(), p.x(), p.y(), p.y()});
  return b;
}

}  // namespace

Mapping::Mapping(std::string name, PointFn forward, Box domain, Box range, JacobianFn jacobian,
                 PointFn inverse)
    : name_(std::move(name)),
      forward_(std::move(forward)),
      domain_(domain),
      range_(range),
      jacobian_(std::move(jacobian)),
      inverse_(std::move(inverse)) {
  if (!forward_) throw ValidationError("mapping '" + name_ + "': forward map is empty");
}

bool Mapping::in_domain(const Point& x) const {
  const double tol = domain_.is_finite() ? kDomainTol * domain_.diagonal() : 0.0;
  return domain_.contains(x, tol);
}

Point Mapping::operator()(const Point& x) const {
  if (!in_domain(x)) throw DomainError("mapping '" + name_ + "': point " + point_str(x) + " outside domain");
  return forward_(x);
}

Point Mapping::inverse(const Point& x_image) const {
  if (!inverse_) throw UnsupportedError("mapping '" + name_ + "' has no inverse");
  return inverse_(x_image);
}

double Mapping::fd_step(const Point& x) const {
  if (domain_.is_finite()) return 1e-6 * domain_.diagonal();
  return 1e-6 * std::max(1.0, x.norm());
}

void CloakSpec::validate() const {
  if (!(a > 0 && a < b)) throw ValidationError("cloak: need 0 < a < b");
  if (!(epsilon > 0 && epsilon < 1)) throw ValidationError("cloak: need 0 < epsilon < 1");
  if (!(std::isfinite(center.x()) && std::isfinite(center.y())))
    throw ValidationError("cloak: center must be finite");
}

void BenderSpec::validate() const {
  if (!(k > 0)) throw ValidationError("bender: need k > 0");
  if (!(a > 0)) throw ValidationError("bender: need a > 0");
  if (!(phi > 0 && phi <= 2 * kPi)) throw ValidationError("bender: need 0 < phi <= 2 pi");
  if (!(r1 > 0)) throw ValidationError("bender: need r1 > 0");
}

Mapping identity_mapping(const Box& domain) {
  return Mapping(
      "identity", [](const Point& x) { return x; }, domain, domain,
      [](const Point&) { return Eigen::Matrix2d::Identity().eval(); }, [](const Point& x) { return x; });
}

Mapping affine_mapping(const Eigen::Matrix2d& linear, const Eigen::Vector2d& offset, const Box& domain) {
  if (!(linear.determinant() > 0)) throw DegenerateMapError("affine map: determinant must be positive");
  const Eigen::Matrix2d inv = linear.inverse();
  Box range = Box::unbounded();
  if (domain.is_finite()) {
    std::vector<Point> corners;
    for (double x : {domain.xmin, domain.xmax})
      for (double y : {domain.ymin, domain.ymax}) corners.push_back(linear * Point(x, y) + offset);
    range = box_of(corners);
  }
  return Mapping(
      "affine", [linear, offset](const Point& x) { return Point(linear * x + offset); }, domain, range,
      [linear](const Point&) { return linear; },
      [inv, offset](const Point& y) { return Point(inv * (y - offset)); });
}

Mapping scale_mapping(double factor, const Box& domain) {
  if (!(factor > 0)) throw DegenerateMapError("scale map: factor must be positive");
  Mapping m = affine_mapping(factor * Eigen::Matrix2d::Identity(), Eigen::Vector2d::Zero(), domain);
  return Mapping("scale", m.forward_fn(), m.domain(), m.range(), m.jacobian_fn(), m.inverse_fn());
}

Mapping cloak_mapping(const CloakSpec& spec) {
  spec.validate();
  const Point c = spec.center;
  const double a = spec.a, b = spec.b;
  auto forward = [c, a, b](const Point& x) -> Point {
    const Point d = x - c;
    const double r = d.norm();
    if (r >= b) return x;
    if (r == 0.0) return c + Point(a, 0.0);  // the centre blows up to the whole inner circle
    const double rp = a + (b - a) * r / b;
    return c + d * (rp / r);
  };
  auto jacobian = [c, a, b](const Point& x) -> Eigen::Matrix2d {
    const Point d = x - c;
    const double r = d.norm();
    if (r >= b) return Eigen::Matrix2d::Identity();
    if (r == 0.0) throw DegenerateMapError("cloak map: Jacobian undefined at the centre");
    const double rp = a + (b - a) * r / b;
    const Eigen::Matrix2d rot = rotation(std::atan2(d.y(), d.x()));
    return rot * Eigen::Vector2d((b - a) / b, rp / r).asDiagonal() * rot.transpose();
  };
  auto inverse = [c, a, b](const Point& y) -> Point {
    const Point d = y - c;
    const double rp = d.norm();
    if (rp >= b) return y;
    if (rp < a) throw DomainError("cloak map: point " + point_str(y) + " lies in the cloaked core");
    const double r = b * (rp - a) / (b - a);
    return c + d * (r / rp);
  };
  return Mapping("cloak", forward, Box::unbounded(), Box::unbounded(), jacobian, inverse);
}

Mapping bender_mapping(const BenderSpec& spec) {
  spec.validate();
  const double len = spec.length(), phi = spec.phi, r1 = spec.r1;
  auto forward = [len, phi, r1](const Point& x) -> Point {
    const double theta = phi * x.x() / len;
    const double r = r1 * std::exp(phi * x.y() / len);
    return {r * std::sin(theta), r * std::cos(theta)};
  };
  auto jacobian = [len, phi, r1](const Point& x) -> Eigen::Matrix2d {
    const double theta = phi * x.x() / len;
    const double s = r1 * std::exp(phi * x.y() / len) * phi / len;
    const double ct = std::cos(theta), st = std::sin(theta);
    Eigen::Matrix2d A;
    A << s * ct, s * st, -s * st, s * ct;
    return A;
  };
  auto inverse = [len, phi, r1](const Point& y) -> Point {
    const double r = y.norm();
    double theta = std::atan2(y.x(), y.y());
    if (theta < -1e-12) theta += 2 * kPi;
    return {len * theta / phi, len * std::log(r / r1) / phi};
  };

  std::vector<Point> extremes;
  std::vector<double> angles{0.0, phi};
  for (double t = kPi / 2; t < phi; t += kPi / 2) angles.push_back(t);
  for (double t : angles)
    for (double r : {r1, spec.r2()}) extremes.emplace_back(r * std::sin(t), r * std::cos(t));
  return Mapping("bender", forward, spec.plate(), box_of(extremes), jacobian, inverse);
}

Mapping compose(const Mapping& outer, const Mapping& inner) {
  const double tol = outer.domain().is_finite() ? kDomainTol * outer.domain().diagonal() : 0.0;
  if (!outer.domain().contains(inner.range(), tol))
    throw CompositionError("compose: range of '" + inner.name() + "' not inside domain of '" +
                           outer.name() + "'");
  auto forward = [outer, inner](const Point& x) { return outer.forward_fn()(inner.forward_fn()(x)); };
  auto jacobian = [outer, inner](const Point& x) -> Eigen::Matrix2d {
    return jacobian_at(outer, inner.forward_fn()(x)) * jacobian_at(inner, x);
  };
  Mapping::PointFn inverse;
  if (outer.has_inverse() && inner.has_inverse())
    inverse = [outer, inner](const Point& y) { return inner.inverse(outer.inverse(y)); };
  return Mapping(outer.name() + "*" + inner.name(), forward, inner.domain(), outer.range(), jacobian,
                 inverse);
}

Eigen::Matrix2d finite_difference_jacobian(const Mapping& map, const Point& x) {
  const double h = map.fd_step(x);
  Eigen::Matrix2d A;
  for (int j = 0; j < 2; ++j) {
    Point e = Point::Zero();
    e(j) = h;
    A.col(j) = (map.forward_fn()(x + e) - map.forward_fn()(x - e)) / (2 * h);
  }
  return A;
}

Eigen::Matrix2d jacobian_at(const Mapping& map, const Point& x) {
  if (!map.in_domain(x))
    throw DomainError("jacobian_at: point " + point_str(x) + " outside domain of '" + map.name() + "'");
  const Eigen::Matrix2d A = map.has_closed_form_jacobian() ? map.jacobian_fn()(x)
                                                           : finite_difference_jacobian(map, x);
  const double det = A.determinant();
  if (!A.allFinite() || !(det > 0))
    throw DegenerateMapError("jacobian_at: det A <= 0 for '" + map.name() + "' at " + point_str(x));
  return A;
}

ParameterSample cloak_params(const CloakSpec& spec, const ParameterSample& base, const Point& x_image) {
  spec.validate();
  const Point d = x_image - spec.center;
  const double rp = d.norm();
  if (rp > spec.b) return base;
  if (rp < spec.a) throw DomainError("cloak_params: point " + point_str(x_image) + " inside the core r' < a");
  if (!base.alpha.is_isotropic(1e-14 * std::abs(base.alpha.xx)))
    throw UnsupportedError("cloak_params: base diffusion tensor must be isotropic");

  const double gap = std::max(rp - spec.a, spec.epsilon * spec.a);
  const double alpha = base.alpha.xx;
  const double ratio = spec.b / (spec.b - spec.a);
  const double factor = ratio * ratio * gap / rp;
  return {factor * base.rho, principal_to_cartesian(gap / rp * alpha, rp / gap * alpha, std::atan2(d.y(), d.x())),
          factor * base.beta, factor * base.f};
}

ParameterRule cloak_rule(const CloakSpec& spec, const ParameterSample& base) {
  spec.validate();
  return [spec, base](const Point& p) { return cloak_params(spec, base, p); };
}

ParameterSample bender_params_paper(const BenderSpec& spec, const ParameterSample& base, const Point& x_image) {
  spec.validate();
  if (std::abs(spec.phi - kPi / 2) > 1e-12 || std::abs(spec.k - 1.0) > 1e-12)
    throw UnsupportedError("bender_params_paper: only defined for phi = pi/2 and k = 1");
  if (!base.alpha.is_isotropic(1e-14 * std::abs(base.alpha.xx)))
    throw UnsupportedError("bender_params_paper: base diffusion tensor must be isotropic");
  const double factor = x_image.norm() * kPi / (2 * spec.a);
  return {factor * base.rho, base.alpha, factor * base.beta, factor * base.f};
}

ParameterSample bender_params_derived(const BenderSpec& spec, const ParameterSample& base, const Point& x_image) {
  const Mapping map = bender_mapping(spec);
  const Point x = map.inverse(x_image);
  return push_forward(base, jacobian_at(map, x));
}

ParameterField pushed_forward_field(const Mapping& map, const ParameterField& base, ParameterRule outside_image) {
  if (!map.has_inverse())
    throw UnsupportedError("pushed_forward_field: mapping '" + map.name() + "' has no inverse");
  const bool has_fallback = static_cast<bool>(outside_image);
  auto rule = [map, base, outside_image](const Point& y) -> ParameterSample {
    Point x;
    try {
      x = map.inverse(y);
    } catch (const DomainError&) {
      if (outside_image) return outside_image(y);
      throw;
    }
    if (!map.in_domain(x)) {
      if (outside_image) return outside_image(y);
      throw DomainError("pushed_forward_field: point " + point_str(y) + " outside the image of '" +
                        map.name() + "'");
    }
    return push_forward(base.sample(x), jacobian_at(map, x));
  };
  return ParameterField({}, rule, has_fallback ? Box::unbounded() : map.range());
}

}  // namespace commfield
