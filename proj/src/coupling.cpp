#include "rensemble/coupling.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "rensemble/math_util.hpp"

namespace rens {
namespace {

using cplx = std::complex<double>;

double arg_or_zero(double x) {
  if (x == 0.0) return 0.0;
  return x > 0.0 ? 0.0 : kPi;
}

// exp(-i H t) |v> for a Hermitian matrix given as flat row-major storage.
// Scaling and squaring with a Taylor kernel; accurate to ~1e-13 for the
// moderate norms used here and exactly what the two-level closed form is
// checked against in the tests.
std::vector<cplx> apply_expm(const std::vector<cplx>& h, int dim, double t,
                             const std::vector<cplx>& v) {
  const std::size_t n = static_cast<std::size_t>(dim);
  // A = -i t H
  std::vector<cplx> a(n * n);
  double norm1 = 0.0;
  for (std::size_t col = 0; col < n; ++col) {
    double colsum = 0.0;
    for (std::size_t row = 0; row < n; ++row) {
      a[row * n + col] = cplx(0.0, -t) * h[row * n + col];
      colsum += std::abs(a[row * n + col]);
    }
    norm1 = std::max(norm1, colsum);
  }
  int squarings = 0;
  if (norm1 > 0.5) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
    double scale = std::ldexp(1.0, -squarings);
    for (auto& x : a) x *= scale;
  }

  auto matmul = [n](const std::vector<cplx>& x, const std::vector<cplx>& y) {
    std::vector<cplx> z(n * n, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        cplx xik = x[i * n + k];
        for (std::size_t j = 0; j < n; ++j) z[i * n + j] += xik * y[k * n + j];
      }
    return z;
  };

  // Taylor series of exp(a); ||a|| <= 1/2 so ~20 terms reach machine epsilon.
  std::vector<cplx> e(n * n, cplx(0.0, 0.0));
  for (std::size_t i = 0; i < n; ++i) e[i * n + i] = 1.0;
  std::vector<cplx> term = e;
  for (int k = 1; k <= 24; ++k) {
    term = matmul(term, a);
    for (auto& x : term) x /= static_cast<double>(k);
    for (std::size_t i = 0; i < n * n; ++i) e[i] += term[i];
  }
  for (int s = 0; s < squarings; ++s) e = matmul(e, e);

  std::vector<cplx> out(n, cplx(0.0, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i] += e[i * n + j] * v[j];
  return out;
}

}  // namespace

CouplingMatrix CouplingMatrix::zero(int dim) {
  CouplingMatrix m;
  m.dim = dim;
  m.R.assign(static_cast<std::size_t>(dim) * dim, 0.0);
  m.beta.assign(static_cast<std::size_t>(dim) * dim, 0.0);
  return m;
}

bool CouplingMatrix::is_diagonal(double tol) const {
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b)
      if (a != b && std::fabs(r(a, b)) > tol) return false;
  return true;
}

std::vector<std::string> validate_coupling(const CouplingMatrix& m) {
  std::vector<std::string> out;
  const std::size_t want = static_cast<std::size_t>(m.dim) * m.dim;
  if (m.dim <= 0) {
    out.push_back("coupling: dim must be positive");
    return out;
  }
  if (m.R.size() != want || m.beta.size() != want) {
    out.push_back("coupling: R and beta must both be dim*dim");
    return out;
  }
  const double tol = 1e-12;
  for (int a = 0; a < m.dim; ++a) {
    for (int b = 0; b < m.dim; ++b) {
      if (!std::isfinite(m.r(a, b)) || !std::isfinite(m.b(a, b))) {
        out.push_back("coupling: non-finite entry at (" + std::to_string(a) + "," +
                      std::to_string(b) + ")");
        continue;
      }
      if (m.r(a, b) < 0.0)
        out.push_back("coupling: R[" + std::to_string(a) + "][" + std::to_string(b) +
                      "] is negative");
      if (b > a) {
        if (std::fabs(m.r(a, b) - m.r(b, a)) > tol)
          out.push_back("coupling: R not symmetric at (" + std::to_string(a) + "," +
                        std::to_string(b) + ")");
        if (std::fabs(wrap_to_pi(m.b(a, b) + m.b(b, a))) > tol)
          out.push_back("coupling: beta not antisymmetric at (" + std::to_string(a) +
                        "," + std::to_string(b) + ")");
      }
    }
    // Diagonal H entries must be real for hermiticity, so beta_aa is 0 or pi.
    double d = wrap_to_pi(m.b(a, a));
    if (std::fabs(d) > tol && std::fabs(std::fabs(d) - kPi) > tol)
      out.push_back("coupling: beta[" + std::to_string(a) + "][" + std::to_string(a) +
                    "] must be 0 or pi");
  }
  return out;
}

CouplingMatrix pauli_to_coupling(const PauliCoefficients& c) {
  if (!std::isfinite(c.ct) || !std::isfinite(c.cx) || !std::isfinite(c.cy) ||
      !std::isfinite(c.cz))
    throw std::invalid_argument("pauli_to_coupling: non-finite coefficient");
  CouplingMatrix m = CouplingMatrix::zero(2);
  m.r(0, 0) = std::fabs(c.ct + c.cz);
  m.r(1, 1) = std::fabs(c.ct - c.cz);
  m.r(0, 1) = m.r(1, 0) = std::hypot(c.cx, c.cy);
  m.b(0, 0) = arg_or_zero(c.ct + c.cz);
  m.b(1, 1) = arg_or_zero(c.ct - c.cz);
  if (c.cx == 0.0 && c.cy == 0.0) {
    m.b(0, 1) = m.b(1, 0) = 0.0;
  } else {
    double b01 = std::atan2(-c.cy, c.cx);  // arg(cx - i cy)
    m.b(0, 1) = b01;
    m.b(1, 0) = wrap_to_pi(-b01);
  }
  return m;
}

std::vector<std::complex<double>> coupling_to_hamiltonian(const CouplingMatrix& m) {
  const std::size_t n = static_cast<std::size_t>(m.dim);
  std::vector<cplx> h(n * n);
  for (int a = 0; a < m.dim; ++a)
    for (int b = 0; b < m.dim; ++b)
      h[static_cast<std::size_t>(a) * n + b] =
          m.r(a, b) * std::polar(1.0, m.b(a, b));
  // Force the diagonal real: beta_aa is 0 or pi up to rounding.
  for (std::size_t a = 0; a < n; ++a)
    h[a * n + a] = cplx(h[a * n + a].real(), 0.0);
  return h;
}

UnitaryState qm_reference_evolution(const CouplingMatrix& m,
                                    std::span<const double> rho0,
                                    std::span<const double> phi0, double t) {
  const int dim = m.dim;
  if (static_cast<int>(rho0.size()) != dim || static_cast<int>(phi0.size()) != dim)
    throw std::invalid_argument("qm_reference_evolution: size mismatch");
  double total = 0.0;
  for (double r : rho0) {
    if (r < 0.0) throw std::invalid_argument("qm_reference_evolution: negative rho");
    total += r;
  }
  if (std::fabs(total - 1.0) > 1e-9)
    throw std::invalid_argument("qm_reference_evolution: rho not normalized");

  std::vector<cplx> amp(dim);
  for (int a = 0; a < dim; ++a)
    amp[a] = std::sqrt(rho0[a]) * std::polar(1.0, -phi0[a]);

  std::vector<cplx> out;
  if (dim == 2) {
    // H = d*I + v.sigma; exp(-iHt) = e^{-i d t} [cos(w t) I - i sin(w t) vhat.sigma]
    const auto h = coupling_to_hamiltonian(m);
    const double d = 0.5 * (h[0].real() + h[3].real());
    const double vz = 0.5 * (h[0].real() - h[3].real());
    const double vx = h[1].real();
    const double vy = -h[1].imag();
    const double w = std::sqrt(vx * vx + vy * vy + vz * vz);
    cplx u00, u01, u10, u11;
    if (w == 0.0) {
      u00 = u11 = 1.0;
      u01 = u10 = 0.0;
    } else {
      const double cw = std::cos(w * t), sw = std::sin(w * t);
      const cplx mi(0.0, -1.0);
      u00 = cw + mi * sw * (vz / w);
      u11 = cw - mi * sw * (vz / w);
      u01 = mi * sw * (cplx(vx, -vy) / w);
      u10 = mi * sw * (cplx(vx, vy) / w);
    }
    const cplx phase = std::polar(1.0, -d * t);
    out = {phase * (u00 * amp[0] + u01 * amp[1]),
           phase * (u10 * amp[0] + u11 * amp[1])};
  } else {
    out = apply_expm(coupling_to_hamiltonian(m), dim, t, amp);
  }

  UnitaryState s;
  s.rho.resize(dim);
  s.phi.resize(dim);
  for (int a = 0; a < dim; ++a) {
    s.rho[a] = std::norm(out[a]);
    s.phi[a] = (out[a] == cplx(0.0, 0.0)) ? 0.0 : -std::arg(out[a]);
  }
  return s;
}

}  // namespace rens
