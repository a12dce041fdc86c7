#include "commfield/geometry.hpp"

#include "commfield/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace commfield {

Box Box::unbounded() {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return {-inf, inf, -inf, inf};
}

bool Box::is_finite() const {
  return std::isfinite(xmin) && std::isfinite(xmax) && std::isfinite(ymin) && std::isfinite(ymax);
}

double Box::diagonal() const { return std::hypot(xmax - xmin, ymax - ymin); }

bool Box::contains(const Point& p, double tol) const {
  return p.x() >= xmin - tol && p.x() <= xmax + tol && p.y() >= ymin - tol && p.y() <= ymax + tol;
}

bool Box::contains(const Box& other, double tol) const {
  return other.xmin >= xmin - tol && other.xmax <= xmax + tol && other.ymin >= ymin - tol &&
         other.ymax <= ymax + tol;
}

Box Box::united(const Box& other) const {
  return {std::min(xmin, other.xmin), std::max(xmax, other.xmax), std::min(ymin, other.ymin),
          std::max(ymax, other.ymax)};
}

namespace {

struct Contains {
  const Point& p;

  bool operator()(const Rectangle& r) const {
    return p.x() >= r.xmin && p.x() <= r.xmax && p.y() >= r.ymin && p.y() <= r.ymax;
  }
  bool operator()(const Disk& d) const { return (p - d.center).norm() <= d.radius; }
  bool operator()(const Annulus& a) const {
    const double r = (p - a.center).norm();
    return r >= a.r_inner && r <= a.r_outer;
  }
  bool operator()(const AnnularSector& s) const {
    const Point d = p - s.center;
    const double r = d.norm();
    if (r < s.r_inner || r > s.r_outer) return false;
    const double span = s.theta_end - s.theta_begin;
    if (span >= 2 * kPi) return true;
    double rel = std::fmod(std::atan2(d.y(), d.x()) - s.theta_begin, 2 * kPi);
    if (rel < 0) rel += 2 * kPi;
    return rel <= span;
  }
  bool operator()(const HalfPlane& h) const { return h.normal.dot(p) <= h.offset; }
};

struct Validate {
  void operator()(const Rectangle& r) const {
    if (!(r.xmin <= r.xmax && r.ymin <= r.ymax)) throw ValidationError("rectangle: empty extent");
  }
  void operator()(const Disk& d) const {
    if (!(d.radius >= 0)) throw ValidationError("disk: radius must be >= 0");
  }
  void operator()(const Annulus& a) const {
    if (!(a.r_inner >= 0 && a.r_inner <= a.r_outer))
      throw ValidationError("annulus: need 0 <= r_inner <= r_outer");
  }
  void operator()(const AnnularSector& s) const {
    if (!(s.r_inner >= 0 && s.r_inner <= s.r_outer))
      throw ValidationError("annular sector: need 0 <= r_inner <= r_outer");
    if (!(s.theta_end >= s.theta_begin)) throw ValidationError("annular sector: theta_end < theta_begin");
  }
  void operator()(const HalfPlane& h) const {
    if (h.normal.norm() == 0.0) throw ValidationError("half-plane: zero normal");
  }
};

}  // namespace

bool contains(const Region& region, const Point& p) { return std::visit(Contains{p}, region); }

void validate(const Region& region) { std::visit(Validate{}, region); }

}  // namespace commfield
