#include "rensemble/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "rensemble/errors.hpp"

namespace rens {
namespace {

constexpr double kPhaseBin = 1e-6;
constexpr double kMaxTransitionProbability = 0.1;

// Bin key for phase merging; members within a bin are one type.
std::int64_t bin_of(double phi) {
  return static_cast<std::int64_t>(std::llround(phi / kPhaseBin));
}

Population rebin(const Population& p) {
  std::map<std::pair<int, std::int64_t>, std::pair<double, std::int64_t>> bins;
  for (const auto& c : p.clusters) {
    if (c.count == 0) continue;
    auto& slot = bins[{c.a, bin_of(c.phi)}];
    slot.first += c.phi * static_cast<double>(c.count);
    slot.second += c.count;
  }
  Population out;
  out.dim = p.dim;
  out.n = p.n;
  out.clusters.reserve(bins.size());
  for (const auto& [key, acc] : bins)
    out.clusters.push_back(
        {key.first, acc.first / static_cast<double>(acc.second), acc.second});
  return out;
}

}  // namespace

std::string events_to_csv(const std::vector<McEvent>& events, bool header) {
  std::string out;
  if (header) out += "t,event,from_type,to_type,members\n";
  char buf[128];
  for (const auto& e : events) {
    std::snprintf(buf, sizeof buf, "%.17g,%s,%d,%d,%lld\n", e.t,
                  e.kind == McEvent::Kind::Copy ? "copy" : "extinction",
                  e.from_type, e.to_type, static_cast<long long>(e.members));
    out += buf;
  }
  return out;
}

Population sample_initial_ensemble(const EnsembleState& s, std::int64_t n,
                                   std::mt19937_64& rng) {
  if (n < 1) throw ConfigError("sample_initial_ensemble: need n >= 1");
  Population p;
  p.dim = s.dim;
  p.n = n;
  p.clusters.reserve(s.size());

  // Conditional binomials realize the multinomial draw exactly.
  double remaining_prob = 0.0;
  for (const auto& e : s.entries) remaining_prob += e.rho;
  std::int64_t remaining = n;
  for (const auto& e : s.entries) {
    std::int64_t c = 0;
    if (remaining > 0 && remaining_prob > 0.0) {
      const double q = std::min(1.0, e.rho / remaining_prob);
      if (q >= 1.0) {
        c = remaining;
      } else if (q > 0.0) {
        std::binomial_distribution<std::int64_t> bin(remaining, q);
        c = bin(rng);
      }
    }
    remaining -= c;
    remaining_prob -= e.rho;
    if (c > 0) p.clusters.push_back({e.a, e.phi, c});
  }
  return rebin(p);
}

EnsembleState empirical_state(const Population& p) {
  if (p.n < 1) throw ConfigError("empirical_state: empty population");
  const Population q = rebin(p);
  EnsembleState s;
  s.dim = q.dim;
  s.entries.reserve(q.clusters.size());
  for (const auto& c : q.clusters)
    s.entries.push_back(
        {c.a, c.phi, static_cast<double>(c.count) / static_cast<double>(q.n)});
  return s;
}

Population mc_step(const Population& p, const CouplingMatrix& m, const Kernel& k,
                   double dt, std::mt19937_64& rng, std::vector<McEvent>* events,
                   double t_now) {
  if (!(dt > 0.0)) throw ConfigError("mc_step: dt must be positive");
  const Population cur = rebin(p);
  const std::size_t n_types = cur.clusters.size();
  if (n_types == 0) throw ConfigError("mc_step: empty population");

  // Empirical continuum state; entry order matches cur.clusters.
  EnsembleState s;
  s.dim = cur.dim;
  s.entries.reserve(n_types);
  for (const auto& c : cur.clusters)
    s.entries.push_back(
        {c.a, c.phi, static_cast<double>(c.count) / static_cast<double>(cur.n)});

  RhsEvaluator rhs(m, k, EvolutionModel::A, s);
  std::vector<double> phi(n_types), rho(n_types), dphi(n_types), drho(n_types);
  for (std::size_t i = 0; i < n_types; ++i) {
    phi[i] = s.entries[i].phi;
    rho[i] = s.entries[i].rho;
  }
  rhs(phi, rho, dphi, drho);

  // Pair flows J_ij: the (i, j) summand of the model-A drho law. Only the
  // negative channels (outflow from i toward j) trigger copies.
  std::vector<double> rho_a(static_cast<std::size_t>(cur.dim), 0.0);
  for (std::size_t i = 0; i < n_types; ++i)
    rho_a[static_cast<std::size_t>(s.entries[i].a)] += rho[i];
  std::vector<double> rho_tilde_all(n_types);
  for (std::size_t i = 0; i < n_types; ++i)
    rho_tilde_all[i] = rho_tilde(s, k, i);

  auto flow = [&](std::size_t i, std::size_t j) {
    const int ai = s.entries[i].a, aj = s.entries[j].a;
    const double r = m.r(ai, aj);
    if (r == 0.0) return 0.0;
    const double wi = rho[i] / rho_a[static_cast<std::size_t>(ai)];
    const double wj = rho[j] / rho_a[static_cast<std::size_t>(aj)];
    const double root = std::sqrt(rho_tilde_all[i] * rho_tilde_all[j]);
    return wi * wj * root * 2.0 * r * std::sin(phi[i] - phi[j] + m.b(ai, aj));
  };

  // Per-type channel probabilities.
  std::vector<std::vector<std::pair<std::size_t, double>>> channels(n_types);
  for (std::size_t i = 0; i < n_types; ++i) {
    if (rho[i] <= 0.0) continue;
    double total = 0.0;
    for (std::size_t j = 0; j < n_types; ++j) {
      if (j == i) continue;
      const double f = flow(i, j);
      if (f < 0.0) {
        const double prob = -f * dt / rho[i];
        channels[i].push_back({j, prob});
        total += prob;
      }
    }
    if (total > kMaxTransitionProbability)
      throw StepTooLarge("mc_step: per-member transition probability " +
                         std::to_string(total) + " exceeds 0.1; reduce dt");
  }

  // Drift, then copy. Counts move between types; N is conserved exactly.
  std::vector<std::int64_t> counts(n_types);
  for (std::size_t i = 0; i < n_types; ++i) counts[i] = cur.clusters[i].count;
  std::vector<double> new_phi(n_types);
  for (std::size_t i = 0; i < n_types; ++i) new_phi[i] = phi[i] + dphi[i] * dt;

  std::vector<std::int64_t> gains(n_types, 0);
  for (std::size_t i = 0; i < n_types; ++i) {
    if (channels[i].empty() || counts[i] == 0) continue;
    std::int64_t pool = counts[i];
    double prob_left = 1.0;
    for (const auto& [j, prob] : channels[i]) {
      if (pool == 0) break;
      const double q = std::min(1.0, prob / prob_left);
      std::int64_t moved = 0;
      if (q >= 1.0) {
        moved = pool;
      } else if (q > 0.0) {
        std::binomial_distribution<std::int64_t> bin(pool, q);
        moved = bin(rng);
      }
      pool -= moved;
      prob_left -= prob;
      if (moved > 0) {
        gains[j] += moved;
        if (events)
          events->push_back({t_now, McEvent::Kind::Copy, static_cast<int>(i),
                             static_cast<int>(j), moved});
      }
    }
    counts[i] = pool;
  }

  Population out;
  out.dim = cur.dim;
  out.n = cur.n;
  out.clusters.reserve(n_types);
  for (std::size_t i = 0; i < n_types; ++i) {
    // Members that copied type j adopt j's beables, including the drifted phase.
    const std::int64_t c = counts[i] + gains[i];
    if (c > 0) {
      out.clusters.push_back({s.entries[i].a, new_phi[i], c});
    } else if (cur.clusters[i].count > 0 && events) {
      events->push_back(
          {t_now, McEvent::Kind::Extinction, static_cast<int>(i), -1, 0});
    }
  }
  return rebin(out);
}

}  // namespace rens
