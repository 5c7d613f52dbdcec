#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rensemble/dynamics.hpp"

namespace rens {

// Discrete realization of the ensemble: N members, each carrying an
// observable value and a phase. Members sharing beables are stored as one
// cluster with a count (the dynamics never split a cluster: drift moves all
// members of a type together and copying moves members between types whole).
struct Population {
  struct Cluster {
    int a = 0;
    double phi = 0.0;
    std::int64_t count = 0;
  };
  std::vector<Cluster> clusters;
  std::int64_t n = 0;
  int dim = 0;
};

struct McEvent {
  double t = 0.0;
  enum class Kind { Copy, Extinction } kind = Kind::Copy;
  int from_type = -1;
  int to_type = -1;
  std::int64_t members = 0;
};

std::string events_to_csv(const std::vector<McEvent>& events, bool header);

// Multinomial draw of n members over the entries of s; members inherit the
// (a, phi) of their entry. Deterministic for a fixed rng state.
Population sample_initial_ensemble(const EnsembleState& s, std::int64_t n,
                                   std::mt19937_64& rng);

// Population counts divided by N, phases binned at 1e-6 rad (members within a
// bin merge, phi = count-weighted bin mean).
EnsembleState empirical_state(const Population& p);

// One step of the discrete dynamics:
//   (i) deterministic drift: each member's phase advances by dphi*dt from the
//       model-A law evaluated on the empirical state;
//  (ii) stochastic copying: the antisymmetric pair flows J_ij of the model-A
//       drho law become independent copy channels; each member of type i
//       copies the beables of type j with probability |J_ij| dt / rho_i for
//       every channel with J_ij < 0.
// Expected count changes match N * drho * dt. Member count is conserved
// exactly; a type reaching count zero is extinct and never repopulates.
//
// Throws StepTooLarge when a per-member total transition probability exceeds
// 0.1. Events are appended to *events when non-null (t stamps the step start).
Population mc_step(const Population& p, const CouplingMatrix& m, const Kernel& k,
                   double dt, std::mt19937_64& rng,
                   std::vector<McEvent>* events = nullptr, double t_now = 0.0);

}  // namespace rens
