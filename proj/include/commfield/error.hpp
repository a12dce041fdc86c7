#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace commfield {

// Validation-class failures exit the CLI with code 1, solver-class with 2.
enum class ErrorClass { validation, solver, io };

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), class_(cls) {}
  ErrorClass error_class() const noexcept { return class_; }

 private:
  ErrorClass class_;
};

#define COMMFIELD_ERROR(Name, Cls)                                          \
  class Name : public Error {                                               \
   public:                                                                  \
    explicit Name(const std::string& what) : Error(ErrorClass::Cls, what) {} \
  }

COMMFIELD_ERROR(ValidationError, validation);
COMMFIELD_ERROR(DomainError, validation);
COMMFIELD_ERROR(DegenerateMapError, validation);
COMMFIELD_ERROR(UnsupportedError, validation);
COMMFIELD_ERROR(CompositionError, validation);
COMMFIELD_ERROR(ComparisonError, validation);
COMMFIELD_ERROR(MaterialError, validation);
COMMFIELD_ERROR(ConfigError, validation);
COMMFIELD_ERROR(SolverError, solver);
COMMFIELD_ERROR(GeometryError, solver);
COMMFIELD_ERROR(NotFoundError, solver);
COMMFIELD_ERROR(IoError, io);

#undef COMMFIELD_ERROR

/// Singular system detected before iterating (no Dirichlet data and no decay).
class SetupError : public SolverError {
 public:
  using SolverError::SolverError;
};

class NonArrivalError : public Error {
 public:
  NonArrivalError(std::size_t probe, const std::string& what)
      : Error(ErrorClass::solver, what), probe_(probe) {}
  std::size_t probe() const noexcept { return probe_; }

 private:
  std::size_t probe_;
};

}  // namespace commfield
