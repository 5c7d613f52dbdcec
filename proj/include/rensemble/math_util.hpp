#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>

namespace rens {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 6.28318530717958647692;

// Reduce an angle to (-pi, pi].
inline double wrap_to_pi(double x) {
  double r = std::remainder(x, kTwoPi);  // [-pi, pi], ties toward even quotient
  if (r <= -kPi) r += kTwoPi;
  return r;
}

// Weighted circular mean of angles. The mean is first located with the
// resultant-vector direction, then refined with the weighted average of the
// wrapped deviations, so that for angles clustered within a half circle the
// result equals the plain weighted average. Weights need not be normalized;
// a zero total weight falls back to the unweighted mean.
inline double weighted_circular_mean(std::span<const double> angles,
                                     std::span<const double> weights) {
  double sw = 0.0, ss = 0.0, sc = 0.0;
  for (std::size_t i = 0; i < angles.size(); ++i) {
    sw += weights[i];
    ss += weights[i] * std::sin(angles[i]);
    sc += weights[i] * std::cos(angles[i]);
  }
  if (sw <= 0.0) {
    ss = sc = 0.0;
    for (double a : angles) {
      ss += std::sin(a);
      sc += std::cos(a);
    }
    sw = static_cast<double>(angles.size());
    if (sw == 0.0) return 0.0;
    double ref = (ss == 0.0 && sc == 0.0) ? 0.0 : std::atan2(ss, sc);
    double corr = 0.0;
    for (double a : angles) corr += wrap_to_pi(a - ref);
    return wrap_to_pi(ref + corr / sw);
  }
  double ref = (ss == 0.0 && sc == 0.0) ? 0.0 : std::atan2(ss, sc);
  double corr = 0.0;
  for (std::size_t i = 0; i < angles.size(); ++i)
    corr += weights[i] * wrap_to_pi(angles[i] - ref);
  return wrap_to_pi(ref + corr / sw);
}

// FNV-1a, used for config fingerprints in run manifests.
inline std::uint64_t fnv1a_hash(std::string_view data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace rens
