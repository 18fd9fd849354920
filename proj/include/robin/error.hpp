// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace robin {

/// Base of every error raised by the library. `module()` names the
/// component that raised it so front-ends can report provenance.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& what)
      : std::runtime_error(module + ": " + what), module_(std::move(module)) {}

  [[nodiscard]] const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

#define ROBIN_DEFINE_ERROR(Name, Module)                                   \
  class Name : public Error {                                              \
   public:                                                                 \
    explicit Name(const std::string& what) : Error(Module, what) {}        \
  }

// geometry
ROBIN_DEFINE_ERROR(SelfIntersectionError, "geometry");
ROBIN_DEFINE_ERROR(DegenerateParametrizationError, "geometry");
ROBIN_DEFINE_ERROR(TubularWidthError, "geometry");
// shared by comparison_1d / transverse / asymptotics
ROBIN_DEFINE_ERROR(ParameterError, "parameters");
ROBIN_DEFINE_ERROR(ResolutionError, "comparison_1d");
ROBIN_DEFINE_ERROR(SingularCoordinateError, "comparison_1d");
// robin_fem
ROBIN_DEFINE_ERROR(UnsupportedGeometryError, "robin_fem");
ROBIN_DEFINE_ERROR(AssemblyError, "robin_fem");
ROBIN_DEFINE_ERROR(IterationError, "robin_fem");
// asymptotics
ROBIN_DEFINE_ERROR(PlacementError, "asymptotics");
ROBIN_DEFINE_ERROR(FitError, "asymptotics");
// cli
ROBIN_DEFINE_ERROR(UsageError, "cli");

#undef ROBIN_DEFINE_ERROR

}  // namespace robin
