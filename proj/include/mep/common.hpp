#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace mep {

using Vec = std::vector<double>;

// Axis-aligned box, one [lo, hi] pair per dimension.
struct Box {
  std::vector<std::array<double, 2>> bounds;

  std::size_t dim() const { return bounds.size(); }
  double volume() const {
    double v = 1.0;
    for (const auto& b : bounds) v *= b[1] - b[0];
    return v;
  }
};

// Invalid user input (config keys, malformed files). Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

inline void check_dim(std::size_t expected, std::size_t got, const char* where) {
  if (expected != got)
    throw std::invalid_argument(std::string(where) + ": dimension mismatch, expected " +
                                std::to_string(expected) + ", got " + std::to_string(got));
}

}  // namespace mep
