#include "rensemble/state.hpp"

#include <cmath>
#include <cstdio>
#include <json.hpp>

#include "rensemble/errors.hpp"
#include "rensemble/math_util.hpp"

namespace rens {

std::vector<double> EnsembleState::value_probabilities() const {
  std::vector<double> p(static_cast<std::size_t>(dim), 0.0);
  for (const auto& e : entries) p[static_cast<std::size_t>(e.a)] += e.rho;
  return p;
}

std::vector<std::string> validate_state(const EnsembleState& s) {
  std::vector<std::string> out;
  if (s.dim <= 0) {
    out.push_back("state: dim must be positive");
    return out;
  }
  if (s.entries.empty()) out.push_back("state: no entries");
  double total = 0.0;
  std::vector<bool> seen(static_cast<std::size_t>(s.dim), false);
  for (std::size_t i = 0; i < s.entries.size(); ++i) {
    const auto& e = s.entries[i];
    if (e.a < 0 || e.a >= s.dim) {
      out.push_back("state: entry " + std::to_string(i) + " has value index " +
                    std::to_string(e.a) + " outside 0.." + std::to_string(s.dim - 1));
      continue;
    }
    seen[static_cast<std::size_t>(e.a)] = true;
    if (!std::isfinite(e.phi) || !std::isfinite(e.rho))
      out.push_back("state: entry " + std::to_string(i) + " has non-finite fields");
    if (e.rho < 0.0)
      out.push_back("state: entry " + std::to_string(i) + " has negative rho");
    total += e.rho;
  }
  for (int a = 0; a < s.dim; ++a)
    if (!seen[static_cast<std::size_t>(a)])
      out.push_back("state: observable value " + std::to_string(a) +
                    " has no entry");
  if (std::fabs(total - 1.0) > 1e-9)
    out.push_back("state: probabilities sum to " + std::to_string(total) +
                  ", not 1");
  return out;
}

EnsembleState collapse_to_equilibrium(const EnsembleState& s) {
  EnsembleState eq;
  eq.dim = s.dim;
  eq.entries.resize(static_cast<std::size_t>(s.dim));
  for (int a = 0; a < s.dim; ++a) {
    std::vector<double> phis, weights;
    double total = 0.0;
    for (const auto& e : s.entries) {
      if (e.a != a) continue;
      phis.push_back(e.phi);
      weights.push_back(e.rho);
      total += e.rho;
    }
    auto& out = eq.entries[static_cast<std::size_t>(a)];
    out.a = a;
    out.rho = total;
    out.phi = weighted_circular_mean(phis, weights);
  }
  return eq;
}

EnsembleState make_state(const std::vector<std::vector<double>>& rho,
                         const std::vector<std::vector<double>>& phi) {
  if (rho.size() != phi.size())
    throw ConfigError("make_state: rho and phi shapes differ");
  EnsembleState s;
  s.dim = static_cast<int>(rho.size());
  for (std::size_t a = 0; a < rho.size(); ++a) {
    if (rho[a].size() != phi[a].size())
      throw ConfigError("make_state: rho and phi shapes differ for value " +
                        std::to_string(a));
    for (std::size_t k = 0; k < rho[a].size(); ++k)
      s.entries.push_back({static_cast<int>(a), phi[a][k], rho[a][k]});
  }
  return s;
}

std::string state_to_csv(const EnsembleState& s, double t, bool header) {
  std::string out;
  if (header) out += "t,entry_index,a,phi,rho\n";
  char buf[160];
  for (std::size_t i = 0; i < s.entries.size(); ++i) {
    const auto& e = s.entries[i];
    std::snprintf(buf, sizeof buf, "%.17g,%zu,%d,%.17g,%.17g\n", t, i, e.a, e.phi,
                  e.rho);
    out += buf;
  }
  return out;
}

std::string state_to_json(const EnsembleState& s) {
  nlohmann::json j;
  j["dim"] = s.dim;
  auto& list = j["entries"];
  list = nlohmann::json::array();
  for (const auto& e : s.entries)
    list.push_back({{"a", e.a}, {"phi", e.phi}, {"rho", e.rho}});
  return j.dump(2);
}

EnsembleState state_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  EnsembleState s;
  s.dim = j.at("dim").get<int>();
  for (const auto& e : j.at("entries"))
    s.entries.push_back({e.at("a").get<int>(), e.at("phi").get<double>(),
                         e.at("rho").get<double>()});
  return s;
}

}  // namespace rens
