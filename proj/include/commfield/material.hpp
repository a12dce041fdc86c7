#pragma once

#include "commfield/geometry.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace commfield {

/// Symmetric 2x2 tensor stored as its three independent components.
template <typename Scalar>
struct SymTensor2 {
  Scalar xx{0}, xy{0}, yy{0};

  static SymTensor2 isotropic(Scalar s) { return {s, Scalar(0), s}; }
  static SymTensor2 from_matrix(const Matrix2<Scalar>& m) {
    return {m(0, 0), (m(0, 1) + m(1, 0)) / Scalar(2), m(1, 1)};
  }

  Matrix2<Scalar> matrix() const {
    Matrix2<Scalar> m;
    m << xx, xy, xy, yy;
    return m;
  }

  /// Eigenvalues in ascending order.
  Vector2<Scalar> eigenvalues() const {
    using std::hypot;
    const Scalar mean = (xx + yy) / Scalar(2);
    const Scalar rad = hypot((xx - yy) / Scalar(2), xy);
    return {mean - rad, mean + rad};
  }

  bool is_isotropic(Scalar tol = Scalar(0)) const {
    using std::abs;
    return abs(xy) <= tol && abs(xx - yy) <= tol;
  }

  bool operator==(const SymTensor2&) const = default;
};

/// Material record of the governing equation at one point:
/// rho du/dt = div(alpha grad u) - beta u + f.
template <typename Scalar>
struct ParameterSampleT {
  Scalar rho{0};
  SymTensor2<Scalar> alpha{};
  Scalar beta{0};
  Scalar f{0};

  bool operator==(const ParameterSampleT&) const = default;
};

using ParameterSample = ParameterSampleT<double>;

/// True when rho, beta >= -tol and alpha has no eigenvalue below -tol.
template <typename Scalar>
bool is_admissible(const ParameterSampleT<Scalar>& s, Scalar tol = Scalar(0)) {
  using std::isfinite;
  if (!(isfinite(s.rho) && isfinite(s.beta) && isfinite(s.f) && isfinite(s.alpha.xx) &&
        isfinite(s.alpha.xy) && isfinite(s.alpha.yy)))
    return false;
  return s.rho >= -tol && s.beta >= -tol && s.alpha.eigenvalues()(0) >= -tol;
}

using ParameterRule = std::function<ParameterSample(const Point&)>;

ParameterRule constant_rule(const ParameterSample& sample);

struct RegionRule {
  Region region;
  ParameterRule rule;
};

/// Piecewise material field: entries are tried in order, first containing region wins,
/// otherwise the fallback rule applies. Immutable after construction.
class ParameterField {
 public:
  ParameterField(std::vector<RegionRule> entries, ParameterRule fallback, Box bounds);

  ParameterSample sample(const Point& p) const;
  const Box& bounding_box() const { return bounds_; }
  const std::vector<RegionRule>& entries() const { return entries_; }

 private:
  std::vector<RegionRule> entries_;
  ParameterRule fallback_;
  Box bounds_;
};

ParameterField homogeneous_params(double rho, double alpha, double beta, double f,
                                  const Box& bounds = Box::unbounded());

ParameterField piecewise_params(std::vector<RegionRule> entries, ParameterRule fallback,
                                const Box& bounds = Box::unbounded());

/// Throws DomainError outside the field's bounding box.
ParameterSample sample_params(const ParameterField& field, const Point& p);

}  // namespace commfield
