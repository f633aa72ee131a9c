#pragma once

#include <stdexcept>
#include <string>

namespace crossflow {

/// Invalid geometry, limits, or configuration keys.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A requested trajectory or schedule cannot satisfy the kinematic limits.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

/// An exact oracle was asked to solve an instance above its size cap.
class OracleCapError : public std::runtime_error {
 public:
  explicit OracleCapError(const std::string& what) : std::runtime_error(what) {}
};

/// Internal inconsistency detected while stepping the simulation.
class SimulationError : public std::runtime_error {
 public:
  explicit SimulationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace crossflow
