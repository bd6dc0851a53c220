#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace omtopo {

// Failure taxonomy. Every error carries a stable, machine-readable category
// string; the CLI prints "error[<category>]: <message>" on stderr and maps
// usage-class errors to exit code 1, numerical-class errors to exit code 2.
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& message)
      : std::runtime_error(message), category_(std::move(category)) {}
  const std::string& category() const noexcept { return category_; }
  // usage-class: the caller asked for something malformed or unsupported
  virtual bool usage_class() const noexcept { return false; }

 private:
  std::string category_;
};

#define OMTOPO_USAGE_ERROR(Name, category)                                \
  class Name : public Error {                                             \
   public:                                                                \
    explicit Name(const std::string& m) : Error(category, m) {}           \
    bool usage_class() const noexcept override { return true; }           \
  }

#define OMTOPO_NUMERIC_ERROR(Name, category)                              \
  class Name : public Error {                                             \
   public:                                                                \
    explicit Name(const std::string& m) : Error(category, m) {}           \
  }

OMTOPO_USAGE_ERROR(ValidationError, "validation");
OMTOPO_USAGE_ERROR(SizingError, "sizing");
OMTOPO_USAGE_ERROR(UnsupportedCombinationError, "unsupported-combination");
OMTOPO_USAGE_ERROR(IoError, "io");

OMTOPO_NUMERIC_ERROR(NumericalError, "numerical");
OMTOPO_NUMERIC_ERROR(NoStationaryStateError, "no-stationary-state");
OMTOPO_NUMERIC_ERROR(SymmetryError, "symmetry");
OMTOPO_NUMERIC_ERROR(PhaseBoundaryError, "phase-boundary");
OMTOPO_NUMERIC_ERROR(ConvergenceError, "convergence");
OMTOPO_NUMERIC_ERROR(DegeneratePointError, "degenerate-point");
OMTOPO_NUMERIC_ERROR(UnphysicalCovarianceError, "unphysical-covariance");
OMTOPO_NUMERIC_ERROR(DataCorruptionError, "data-corruption");
OMTOPO_NUMERIC_ERROR(UnsupportedRegionError, "unsupported-region");
OMTOPO_NUMERIC_ERROR(UnstableGrowthError, "unstable-growth");
OMTOPO_NUMERIC_ERROR(ExtrapolationError, "extrapolation");

#undef OMTOPO_USAGE_ERROR
#undef OMTOPO_NUMERIC_ERROR

}  // namespace omtopo
