#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rens {

// A state/kernel combination for which the evolution equations are not
// defined (an occupied observable value whose kernel-weighted density
// vanishes).
class SingularConfiguration : public std::runtime_error {
public:
  SingularConfiguration(int value_index, const std::string& what)
      : std::runtime_error(what), value_index_(value_index) {}
  int value_index() const { return value_index_; }

private:
  int value_index_;
};

// Raised when a time step produces non-finite coordinates, or when the
// adaptive controller collapses below its minimum step (stiffness signal).
class IntegrationFailure : public std::runtime_error {
public:
  IntegrationFailure(double t, const std::string& what)
      : std::runtime_error(what), time_(t) {}
  double time() const { return time_; }

private:
  double time_;
};

// Monte Carlo step whose per-member transition probability exceeds the cap.
class StepTooLarge : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Config-file problems; carries every violation found, not just the first.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(std::vector<std::string> violations)
      : std::runtime_error(join(violations)), violations_(std::move(violations)) {}
  explicit ConfigError(const std::string& one)
      : ConfigError(std::vector<std::string>{one}) {}
  const std::vector<std::string>& violations() const { return violations_; }

private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "invalid configuration:";
    for (const auto& x : v) {
      s += "\n  - ";
      s += x;
    }
    return s;
  }
  std::vector<std::string> violations_;
};

}  // namespace rens
