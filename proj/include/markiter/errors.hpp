#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace markiter {

struct NonUniqueStationary : std::runtime_error {
  explicit NonUniqueStationary(const std::string& what)
      : std::runtime_error(what) {}
};

struct ZeroMassState : std::runtime_error {
  explicit ZeroMassState(const std::string& what) : std::runtime_error(what) {}
};

struct NotBounded : std::runtime_error {
  explicit NotBounded(const std::string& what) : std::runtime_error(what) {}
};

struct ShapeMismatch : std::runtime_error {
  explicit ShapeMismatch(const std::string& what) : std::runtime_error(what) {}
};

// Exact-enumeration request exceeds the feasibility bound.
struct TooLarge : std::runtime_error {
  explicit TooLarge(const std::string& what) : std::runtime_error(what) {}
};

struct HypothesisFailed : std::runtime_error {
  explicit HypothesisFailed(const std::string& what)
      : std::runtime_error(what) {}
};

// Every rung of the arc ladder exceeded diameter 1/4 at some step.
struct AllLaddersBlewUp : std::runtime_error {
  AllLaddersBlewUp(const std::string& what, std::vector<long> escape)
      : std::runtime_error(what), escape_steps(std::move(escape)) {}
  std::vector<long> escape_steps;  // first bad step per rung, -1 if none
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace markiter
