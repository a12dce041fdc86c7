#include "commfield/material.hpp"

#include "commfield/error.hpp"

#include <sstream>

namespace commfield {

ParameterRule constant_rule(const ParameterSample& sample) {
  return [sample](const Point&) { return sample; };
}

ParameterField::ParameterField(std::vector<RegionRule> entries, ParameterRule fallback, Box bounds)
    : entries_(std::move(entries)), fallback_(std::move(fallback)), bounds_(bounds) {
  if (!fallback_) throw ValidationError("parameter field: default rule is empty");
  for (const auto& e : entries_) {
    validate(e.region);
    if (!e.rule) throw ValidationError("parameter field: entry rule is empty");
  }
}

ParameterSample ParameterField::sample(const Point& p) const {
  for (const auto& e : entries_)
    if (contains(e.region, p)) return e.rule(p);
  return fallback_(p);
}

ParameterField homogeneous_params(double rho, double alpha, double beta, double f, const Box& bounds) {
  if (!(rho >= 0)) throw ValidationError("homogeneous_params: rho must be >= 0");
  if (!(alpha >= 0)) throw ValidationError("homogeneous_params: alpha must be >= 0");
  if (!(beta >= 0)) throw ValidationError("homogeneous_params: beta must be >= 0");
  if (!std::isfinite(f)) throw ValidationError("homogeneous_params: f must be finite");
  const ParameterSample s{rho, SymTensor2<double>::isotropic(alpha), beta, f};
  return ParameterField({}, constant_rule(s), bounds);
}

ParameterField piecewise_params(std::vector<RegionRule> entries, ParameterRule fallback,
                                const Box& bounds) {
  return ParameterField(std::move(entries), std::move(fallback), bounds);
}

ParameterSample sample_params(const ParameterField& field, const Point& p) {
  if (!field.bounding_box().contains(p)) {
    std::ostringstream msg;
    msg << "sample_params: point (" << p.x() << ", " << p.y() << ") outside bounding box";
    throw DomainError(msg.str());
  }
  return field.sample(p);
}

}  // namespace commfield
