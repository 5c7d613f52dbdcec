#pragma once

#include <span>
#include <vector>

#include "rensemble/coupling.hpp"
#include "rensemble/kernel.hpp"
#include "rensemble/state.hpp"

namespace rens {

enum class EvolutionModel { A, B };

// Kernel-weighted same-value density for entry i,
//   rho_tilde_i = sum_j rho_j [a_j == a_i] F(phi_i - phi_j).
double rho_tilde(const EnsembleState& s, const Kernel& k, std::size_t i);

// Right-hand-side evaluator for the two non-equilibrium evolution laws.
//
// Model A:
//   dphi_i = sum_j (rho_j/rho_{a_j}) sqrt(rt_j/rt_i) R cos(phi_i-phi_j+beta)
//   drho_i = (rho_i/rho_{a_i}) sum_j (rho_j/rho_{a_j}) sqrt(rt_i rt_j)
//            * 2R sin(phi_i-phi_j+beta)
// Model B:
//   dphi_i = sum_j rho_j / sqrt(rt_j rt_i) * R cos(phi_i-phi_j+beta)
//   drho_i = sum_j rho_i rho_j / sqrt(rt_j rt_i) * 2R sin(phi_i-phi_j+beta)
//
// with rt_i the per-entry rho_tilde, R = R[a_i][a_j], beta = beta[a_i][a_j].
// Entries of a fully unoccupied observable value get dphi = drho = 0 and drop
// out of every sum. drho sums to zero by construction: each unordered pair is
// evaluated once and applied antisymmetrically.
//
// The evaluator owns scratch buffers and is NOT safe for concurrent calls;
// use one instance per worker. Entry order and value assignment are fixed at
// construction.
//
// With inert_empty_entries the evaluator is total: entries with rho <= 0
// whose kernel-weighted density vanishes drop out silently instead of raising
// SingularConfiguration, and negative probabilities (transient integrator
// stage values) contribute nothing to the densities. The one-shot
// rhs_model_a/b operations keep the strict behavior.
class RhsEvaluator {
public:
  RhsEvaluator(const CouplingMatrix& m, const Kernel& k, EvolutionModel model,
               const EnsembleState& layout, bool inert_empty_entries = false);

  std::size_t size() const { return values_.size(); }
  EvolutionModel model() const { return model_; }

  // phi/rho/dphi/drho all have size() entries. Throws SingularConfiguration
  // when an occupied value has a vanishing rho_tilde.
  void operator()(std::span<const double> phi, std::span<const double> rho,
                  std::span<double> dphi, std::span<double> drho) const;

private:
  EvolutionModel model_;
  Kernel kernel_;
  int dim_;
  bool inert_empty_;
  std::vector<int> values_;             // a_i per entry
  std::vector<std::vector<int>> groups_;  // entry indices per value
  std::vector<double> coup_r_, coup_cb_, coup_sb_;  // per (a,b), row major
  mutable std::vector<double> rho_a_, rho_tilde_, sqrt_rt_, pref_;
  mutable std::vector<char> alive_;
};

// One-shot conveniences mirroring the evaluator (spec operation surface).
Derivatives rhs_model_a(const EnsembleState& s, const CouplingMatrix& m,
                        const Kernel& k);
Derivatives rhs_model_b(const EnsembleState& s, const CouplingMatrix& m,
                        const Kernel& k);

}  // namespace rens
