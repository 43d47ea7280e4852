#pragma once

#include <stdexcept>
#include <string>

namespace jumphinf {

struct UnknownPattern : std::runtime_error {
  explicit UnknownPattern(const std::string& what) : std::runtime_error(what) {}
};

struct OutOfRange : std::runtime_error {
  explicit OutOfRange(const std::string& what) : std::runtime_error(what) {}
};

struct NotErgodic : std::runtime_error {
  explicit NotErgodic(const std::string& what) : std::runtime_error(what) {}
};

struct LayoutError : std::runtime_error {
  explicit LayoutError(const std::string& what) : std::runtime_error(what) {}
};

struct AssumptionViolation : std::runtime_error {
  explicit AssumptionViolation(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateModeClass : std::runtime_error {
  explicit DegenerateModeClass(const std::string& what) : std::runtime_error(what) {}
};

struct RefinementFailed : std::runtime_error {
  explicit RefinementFailed(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace jumphinf
