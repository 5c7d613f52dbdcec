#pragma once

#include <string>
#include <utility>
#include <vector>

namespace rens {

// Phase-overlap kernel F(dphi): even, 2*pi periodic, F(0) = 1, F >= 0.
//
// Variants:
//   Flat      F = 1
//   Cosine    F = cos^2(dphi/2)
//   Spiked(c) F = cos^2(c*dphi/2) * Theta[cos(dphi) - cos(pi/c)]
//   Tabulated linear interpolation on a user grid
class Kernel {
public:
  enum class Variant { Flat, Cosine, Spiked, Tabulated };

  static Kernel flat() { return Kernel(Variant::Flat, 0.0); }
  static Kernel cosine() { return Kernel(Variant::Cosine, 0.0); }
  static Kernel spiked(double c);
  // Grid points (dphi, value); dphi in [0, pi] (mirrored by evenness) or
  // spanning negative angles, in which case evenness is checked by the
  // validator rather than imposed. Throws ConfigError on malformed grids.
  static Kernel tabulated(std::vector<std::pair<double, double>> grid);

  Variant variant() const { return variant_; }
  double spike_width() const { return c_; }  // c parameter, Spiked only

  // F(dphi); the argument is reduced to (-pi, pi] internally.
  double operator()(double dphi) const;

  // (dphiF^{-2}, lambda) with dphiF^{-2} = -F''(0)/2 and lambda = dphiF^{-2} - 1.
  // Closed forms for the named variants; tabulated grids use a second
  // difference through the first grid point (>= 1e-4) and must be sampled at
  // spacing <= 1e-3 near zero.
  std::pair<double, double> curvature() const;
  double lambda() const { return curvature().second; }

  // Human-readable spec string ("spiked:100" etc.).
  std::string spec() const;

private:
  Kernel(Variant v, double c) : variant_(v), c_(c) {}

  double eval_reduced(double d) const;  // d in [0, pi]

  Variant variant_;
  double c_ = 0.0;
  double cos_edge_ = -1.0;  // cos(pi/c) cut for the Theta factor
  std::vector<double> grid_x_, grid_f_;
  bool mirror_ = true;  // tabulated grid covers [0, pi] only
};

struct KernelViolation {
  std::string invariant;  // "unit_at_zero" | "non_negative" | "even" | "periodic"
  double dphi;
  std::string detail;
};

// Checks the four type invariants on a 4096-point grid over (-pi, pi].
// Empty result means the kernel is admissible.
std::vector<KernelViolation> validate_kernel(const Kernel& k);

// Parses "flat" | "cosine" | "spiked:<c>" | "table:<path>"; table files are
// two-column CSV (dphi, value). Throws ConfigError.
Kernel parse_kernel_spec(const std::string& spec);

}  // namespace rens
