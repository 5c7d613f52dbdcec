#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

namespace rens {

// Coefficients of H = ct*I + cx*sigma_x + cy*sigma_y + cz*sigma_z (hbar = 1).
struct PauliCoefficients {
  double ct = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  double cz = 0.0;
};

// Magnitude/phase form of a Hermitian coupling, H[a][b] = R[a][b] e^{i beta[a][b]}.
//
// R is symmetric with non-negative entries; beta is antisymmetric off the
// diagonal (mod 2*pi) and restricted to {0, pi} on the diagonal so the
// diagonal of H stays real. Angles are kept in (-pi, pi].
struct CouplingMatrix {
  int dim = 0;
  std::vector<double> R;     // dim*dim, row major
  std::vector<double> beta;  // dim*dim, row major

  double r(int a, int b) const { return R[static_cast<std::size_t>(a) * dim + b]; }
  double b(int a, int b) const { return beta[static_cast<std::size_t>(a) * dim + b]; }
  double& r(int a, int b) { return R[static_cast<std::size_t>(a) * dim + b]; }
  double& b(int a, int b) { return beta[static_cast<std::size_t>(a) * dim + b]; }

  static CouplingMatrix zero(int dim);
  bool is_diagonal(double tol = 0.0) const;
};

// Empty when the matrix satisfies all CouplingMatrix invariants; otherwise one
// message per violation.
std::vector<std::string> validate_coupling(const CouplingMatrix& m);

// Two-level construction:
//   R12 = sqrt(cx^2+cy^2), R11 = |ct+cz|, R22 = |ct-cz|,
//   beta12 = arg(cx - i cy), beta11 = arg(ct+cz), beta22 = arg(ct-cz).
// arg of an exact zero is taken as 0; its R partner vanishes, so the choice
// never reaches the dynamics.
CouplingMatrix pauli_to_coupling(const PauliCoefficients& c);

// Dense Hermitian matrix H[a][b] = R[a][b] e^{i beta[a][b]}, row major.
std::vector<std::complex<double>> coupling_to_hamiltonian(const CouplingMatrix& m);

struct UnitaryState {
  std::vector<double> rho;
  std::vector<double> phi;
};

// Unitary reference evolution of the state with amplitudes
// sqrt(rho_a) e^{-i phi_a}. Returns |<a|e^{-iHt}|psi>|^2 and the phase of each
// amplitude in the same sign convention (phase of a vanishing amplitude is 0).
// dim == 2 uses the closed-form two-level propagator; larger dimensions go
// through a scaling-and-squaring matrix exponential.
//
// Throws std::invalid_argument if rho0 is not normalized to 1e-9.
UnitaryState qm_reference_evolution(const CouplingMatrix& m,
                                    std::span<const double> rho0,
                                    std::span<const double> phi0, double t);

}  // namespace rens
