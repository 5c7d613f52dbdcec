#include "rensemble/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rensemble/errors.hpp"
#include "rensemble/math_util.hpp"

namespace rens {

Kernel Kernel::spiked(double c) {
  if (!(c > 0.0) || !std::isfinite(c))
    throw ConfigError("kernel: spiked width c must be positive and finite");
  Kernel k(Variant::Spiked, c);
  k.cos_edge_ = std::cos(kPi / c);
  return k;
}

Kernel Kernel::tabulated(std::vector<std::pair<double, double>> grid) {
  std::vector<std::string> problems;
  if (grid.size() < 2) problems.push_back("kernel table: need at least two points");
  std::sort(grid.begin(), grid.end());
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    if (grid[i].first == grid[i + 1].first)
      problems.push_back("kernel table: duplicate abscissa " +
                         std::to_string(grid[i].first));
  for (const auto& [x, f] : grid) {
    if (!std::isfinite(x) || !std::isfinite(f))
      problems.push_back("kernel table: non-finite entry");
    if (x < -kPi || x > kPi)
      problems.push_back("kernel table: abscissa outside [-pi, pi]");
    if (f < 0.0 || f > 1.0 + 1e-12)
      problems.push_back("kernel table: value outside [0, 1] at dphi=" +
                         std::to_string(x));
  }
  if (!grid.empty()) {
    if (grid.back().first < kPi - 1e-9)
      problems.push_back("kernel table: grid must reach pi");
    const double lo = grid.front().first;
    if (lo > 1e-12 && lo >= 0.0)
      problems.push_back("kernel table: grid must start at 0");
  }
  if (!problems.empty()) throw ConfigError(problems);

  Kernel k(Variant::Tabulated, 0.0);
  k.mirror_ = grid.front().first >= 0.0;
  k.grid_x_.reserve(grid.size());
  k.grid_f_.reserve(grid.size());
  for (const auto& [x, f] : grid) {
    k.grid_x_.push_back(x);
    k.grid_f_.push_back(f);
  }
  return k;
}

double Kernel::eval_reduced(double d) const {
  switch (variant_) {
    case Variant::Flat:
      return 1.0;
    case Variant::Cosine: {
      const double u = std::cos(0.5 * d);
      return u * u;
    }
    case Variant::Spiked: {
      if (std::cos(d) < cos_edge_) return 0.0;
      const double u = std::cos(0.5 * c_ * d);
      return u * u;
    }
    case Variant::Tabulated: {
      const auto& xs = grid_x_;
      if (d <= xs.front()) return grid_f_.front();
      if (d >= xs.back()) return grid_f_.back();
      const auto it = std::upper_bound(xs.begin(), xs.end(), d);
      const std::size_t j = static_cast<std::size_t>(it - xs.begin());
      const double x0 = xs[j - 1], x1 = xs[j];
      const double w = (d - x0) / (x1 - x0);
      return (1.0 - w) * grid_f_[j - 1] + w * grid_f_[j];
    }
  }
  return 1.0;
}

double Kernel::operator()(double dphi) const {
  double d = wrap_to_pi(dphi);
  if (variant_ != Variant::Tabulated || mirror_) d = std::fabs(d);
  return eval_reduced(d);
}

std::pair<double, double> Kernel::curvature() const {
  switch (variant_) {
    case Variant::Flat:
      return {0.0, -1.0};
    case Variant::Cosine:
      return {0.25, -0.75};
    case Variant::Spiked:
      return {0.25 * c_ * c_, 0.25 * c_ * c_ - 1.0};
    case Variant::Tabulated: {
      // Linear interpolation is flat inside a segment, so sample the second
      // difference at an actual grid point near zero.
      double first_pos = kPi;
      for (double x : grid_x_)
        if (x > 1e-15 && x < first_pos) first_pos = x;
      if (first_pos > 1e-3)
        throw ConfigError(
            "kernel table: grid too coarse near 0 for curvature (spacing > 1e-3)");
      const double h = std::max(1e-4, first_pos);
      const double second = ((*this)(h)-2.0 * (*this)(0.0) + (*this)(-h)) / (h * h);
      const double inv_sq = -0.5 * second;
      return {inv_sq, inv_sq - 1.0};
    }
  }
  return {0.0, -1.0};
}

std::string Kernel::spec() const {
  switch (variant_) {
    case Variant::Flat:
      return "flat";
    case Variant::Cosine:
      return "cosine";
    case Variant::Spiked: {
      std::ostringstream os;
      os << "spiked:" << c_;
      return os.str();
    }
    case Variant::Tabulated:
      return "table";
  }
  return "?";
}

std::vector<KernelViolation> validate_kernel(const Kernel& k) {
  std::vector<KernelViolation> out;
  constexpr int n = 4096;
  const double tol = 1e-12;

  const double f0 = k(0.0);
  if (std::fabs(f0 - 1.0) > tol)
    out.push_back({"unit_at_zero", 0.0, "F(0) = " + std::to_string(f0)});

  for (int i = 0; i < n; ++i) {
    const double x = -kPi + kTwoPi * (i + 1) / n;  // (-pi, pi]
    const double f = k(x);
    if (f < -tol)
      out.push_back({"non_negative", x, "F = " + std::to_string(f)});
    const double mirror = k(-x);
    if (std::fabs(f - mirror) > tol)
      out.push_back({"even", x,
                     "F(dphi) - F(-dphi) = " + std::to_string(f - mirror)});
    const double shifted = k(x + kTwoPi);
    if (std::fabs(f - shifted) > 1e-9)
      out.push_back({"periodic", x,
                     "F(dphi) - F(dphi+2pi) = " + std::to_string(f - shifted)});
  }
  return out;
}

Kernel parse_kernel_spec(const std::string& spec) {
  if (spec == "flat") return Kernel::flat();
  if (spec == "cosine") return Kernel::cosine();
  if (spec.rfind("spiked:", 0) == 0) {
    double c = 0.0;
    try {
      c = std::stod(spec.substr(7));
    } catch (const std::exception&) {
      throw ConfigError("kernel: cannot parse spike width in '" + spec + "'");
    }
    return Kernel::spiked(c);
  }
  if (spec.rfind("table:", 0) == 0) {
    const std::string path = spec.substr(6);
    std::ifstream in(path);
    if (!in) throw ConfigError("kernel: cannot open table file '" + path + "'");
    std::vector<std::pair<double, double>> grid;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream ls(line);
      double x, f;
      if (ls >> x >> f) grid.emplace_back(x, f);
    }
    return Kernel::tabulated(std::move(grid));
  }
  throw ConfigError("kernel: unknown spec '" + spec +
                    "' (want flat | cosine | spiked:<c> | table:<path>)");
}

}  // namespace rens
