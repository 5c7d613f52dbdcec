#include "rensemble/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "rensemble/errors.hpp"
#include "rensemble/math_util.hpp"

namespace rens {
namespace {

using nlohmann::json;

json coupling_to_json(const ExperimentConfig& cfg) {
  json h;
  if (cfg.pauli) {
    h["ct"] = cfg.pauli->ct;
    h["cx"] = cfg.pauli->cx;
    h["cy"] = cfg.pauli->cy;
    h["cz"] = cfg.pauli->cz;
  } else {
    const auto& m = cfg.coupling;
    json r = json::array(), b = json::array();
    for (int a = 0; a < m.dim; ++a) {
      json rr = json::array(), bb = json::array();
      for (int c = 0; c < m.dim; ++c) {
        rr.push_back(m.r(a, c));
        bb.push_back(m.b(a, c));
      }
      r.push_back(rr);
      b.push_back(bb);
    }
    h["R"] = r;
    h["beta"] = b;
  }
  return h;
}

json semantic_json(const ExperimentConfig& cfg) {
  json j;
  j["hamiltonian"] = coupling_to_json(cfg);
  j["kernel"] = cfg.kernel_spec;
  j["model"] = cfg.model == EvolutionModel::A ? "a" : "b";
  json init = json::array();
  for (const auto& e : cfg.initial.entries)
    init.push_back({{"a", e.a}, {"phi", e.phi}, {"rho", e.rho}});
  j["initial"] = init;
  j["dim"] = cfg.initial.dim;
  j["integrator"] = {
      {"dt", cfg.controls.dt},
      {"t_end", cfg.controls.t_end},
      {"snapshot_stride", cfg.controls.snapshot_stride},
      {"tolerance", cfg.controls.tolerance},
      {"mode",
       cfg.controls.mode == IntegratorControls::Mode::Fixed ? "fixed" : "adaptive"},
      {"rho_floor", cfg.controls.rho_floor}};
  j["horizon"] = cfg.horizon;
  j["seed"] = cfg.seed;
  return j;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

// Nearest log-interpolated exponent at time t; empty string outside the range.
std::string exponent_column(const std::vector<ExponentPoint>& pts, double t) {
  if (pts.empty() || t < pts.front().t || t > pts.back().t) return "";
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (t > pts[i].t) continue;
    const double l0 = std::log(pts[i - 1].t), l1 = std::log(pts[i].t);
    const double w = l1 > l0 ? (std::log(t) - l0) / (l1 - l0) : 0.0;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g",
                  (1.0 - w) * pts[i - 1].n + w * pts[i].n);
    return buf;
  }
  return "";
}

std::string trajectory_csv(const RunArtifacts& art, const EnsembleState& layout) {
  std::string out = "t,a,phase_index_within_value,phi,rho,sigma_phi,n\n";
  std::vector<int> index_within(layout.size());
  {
    std::vector<int> seen(static_cast<std::size_t>(layout.dim), 0);
    for (std::size_t i = 0; i < layout.size(); ++i)
      index_within[i] = seen[static_cast<std::size_t>(layout.entries[i].a)]++;
  }
  char buf[256];
  for (std::size_t k = 0; k < art.trajectory.times.size(); ++k) {
    const double t = art.trajectory.times[k];
    const auto& s = art.trajectory.states[k];
    const auto disp = phase_dispersion(s);
    for (std::size_t i = 0; i < s.entries.size(); ++i) {
      const auto& e = s.entries[i];
      const double sg = disp.sigma[static_cast<std::size_t>(e.a)];
      std::string sg_str;
      if (std::isfinite(sg)) {
        std::snprintf(buf, sizeof buf, "%.17g", sg);
        sg_str = buf;
      }
      const std::string n_str =
          art.report.exponent_series.empty()
              ? ""
              : exponent_column(
                    art.report.exponent_series[static_cast<std::size_t>(e.a)], t);
      std::snprintf(buf, sizeof buf, "%.17g,%d,%d,%.17g,%.17g,", t, e.a,
                    index_within[i], e.phi, e.rho);
      out += buf;
      out += sg_str;
      out += ',';
      out += n_str;
      out += '\n';
    }
  }
  return out;
}

std::string sigma_csv(const DispersionSeries& series) {
  std::string out = "t";
  for (std::size_t a = 0; a < series.sigma.size(); ++a)
    out += ",sigma_" + std::to_string(a);
  out += '\n';
  char buf[64];
  for (std::size_t k = 0; k < series.t.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", series.t[k]);
    out += buf;
    for (std::size_t a = 0; a < series.sigma.size(); ++a) {
      out += ',';
      if (std::isfinite(series.sigma[a][k])) {
        std::snprintf(buf, sizeof buf, "%.17g", series.sigma[a][k]);
        out += buf;
      }
    }
    out += '\n';
  }
  return out;
}

void run_indexed_jobs(std::size_t count, int jobs,
                      const std::function<void(std::size_t)>& work) {
  const int workers =
      std::max(1, std::min<int>(jobs, static_cast<int>(count)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        work(i);
      }
    });
  for (auto& th : pool) th.join();
}

const std::vector<std::vector<double>> kTableRhoUneven = {{0.16, 0.08, 0.06},
                                                          {0.23, 0.3, 0.17}};
const std::vector<std::vector<double>> kTableRhoEven = {{0.2, 0.1, 0.2},
                                                        {0.2, 0.1, 0.2}};

// phi = {{0, d, 2d}, {pi/2 + d, pi/2, pi/2 + d/2}}
std::vector<std::vector<double>> table_phases(double dphi0) {
  return {{0.0, dphi0, 2.0 * dphi0},
          {0.5 * kPi + dphi0, 0.5 * kPi, 0.5 * kPi + 0.5 * dphi0}};
}

std::vector<PatternEntry> table_pattern(const std::vector<std::vector<double>>& rho) {
  std::vector<PatternEntry> out;
  const double coeff[2][3] = {{0.0, 1.0, 2.0}, {1.0, 0.0, 0.5}};
  const double base[2] = {0.0, 0.5 * kPi};
  for (int a = 0; a < 2; ++a)
    for (int k = 0; k < 3; ++k)
      out.push_back({a, rho[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)],
                     base[a], coeff[a][k]});
  return out;
}

ExperimentConfig preset_base(const PauliCoefficients& pauli,
                             const std::string& kernel_spec, EvolutionModel model,
                             const std::vector<std::vector<double>>& rho,
                             const std::vector<std::vector<double>>& phi) {
  ExperimentConfig cfg;
  cfg.pauli = pauli;
  cfg.coupling = pauli_to_coupling(pauli);
  cfg.kernel_spec = kernel_spec;
  cfg.kernel = parse_kernel_spec(kernel_spec);
  cfg.model = model;
  cfg.initial = make_state(rho, phi);
  cfg.controls.dt = 1e-3;
  cfg.controls.t_end = 1000.0;
  cfg.controls.snapshot_stride = 10000;
  cfg.horizon = 1000.0;
  return cfg;
}

std::string kernel_file_tag(const std::string& spec) {
  std::string tag = spec;
  for (auto& c : tag)
    if (c == ':' || c == '.') c = '_';
  return tag;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }

  std::vector<std::string> problems;
  ExperimentConfig cfg;

  if (!j.contains("hamiltonian")) {
    problems.push_back("missing 'hamiltonian'");
  } else {
    const auto& h = j["hamiltonian"];
    try {
      if (h.contains("R") || h.contains("beta")) {
        CouplingMatrix m;
        const auto& r = h.at("R");
        const auto& b = h.at("beta");
        m.dim = static_cast<int>(r.size());
        for (const auto& row : r)
          for (const auto& x : row) m.R.push_back(x.get<double>());
        for (const auto& row : b)
          for (const auto& x : row) m.beta.push_back(x.get<double>());
        cfg.coupling = m;
      } else {
        PauliCoefficients p;
        p.ct = h.value("ct", 0.0);
        p.cx = h.value("cx", 0.0);
        p.cy = h.value("cy", 0.0);
        p.cz = h.value("cz", 0.0);
        cfg.pauli = p;
        cfg.coupling = pauli_to_coupling(p);
      }
    } catch (const std::exception& e) {
      problems.push_back(std::string("hamiltonian: ") + e.what());
    }
    for (auto& v : validate_coupling(cfg.coupling)) problems.push_back(v);
  }

  cfg.kernel_spec = j.value("kernel", "cosine");
  try {
    cfg.kernel = parse_kernel_spec(cfg.kernel_spec);
    for (const auto& v : validate_kernel(cfg.kernel))
      problems.push_back("kernel invariant '" + v.invariant +
                         "' violated near dphi=" + std::to_string(v.dphi));
  } catch (const ConfigError& e) {
    for (const auto& v : e.violations()) problems.push_back(v);
  }

  const std::string model = j.value("model", "a");
  if (model == "a" || model == "A")
    cfg.model = EvolutionModel::A;
  else if (model == "b" || model == "B")
    cfg.model = EvolutionModel::B;
  else
    problems.push_back("model must be 'a' or 'b', got '" + model + "'");

  if (!j.contains("initial")) {
    problems.push_back("missing 'initial' entries");
  } else {
    try {
      EnsembleState s;
      int max_a = -1;
      for (const auto& e : j["initial"]) {
        BeableEntry be{e.at("a").get<int>(), e.at("phi").get<double>(),
                       e.at("rho").get<double>()};
        max_a = std::max(max_a, be.a);
        s.entries.push_back(be);
      }
      s.dim = j.value("dim", max_a + 1);
      cfg.initial = s;
      for (auto& v : validate_state(s)) problems.push_back(v);
    } catch (const std::exception& e) {
      problems.push_back(std::string("initial: ") + e.what());
    }
  }
  if (cfg.initial.dim != cfg.coupling.dim && cfg.coupling.dim > 0 &&
      cfg.initial.dim > 0)
    problems.push_back("initial state dim " + std::to_string(cfg.initial.dim) +
                       " does not match hamiltonian dim " +
                       std::to_string(cfg.coupling.dim));

  const auto ij = j.value("integrator", json::object());
  cfg.controls.dt = ij.value("dt", 1e-3);
  cfg.controls.t_end = ij.value("t_end", 1000.0);
  cfg.controls.snapshot_stride = ij.value("snapshot_stride", 1000);
  cfg.controls.tolerance = ij.value("tolerance", 1e-9);
  cfg.controls.rho_floor = ij.value("rho_floor", 1e-14);
  const std::string mode = ij.value("mode", "fixed");
  if (mode == "fixed")
    cfg.controls.mode = IntegratorControls::Mode::Fixed;
  else if (mode == "adaptive")
    cfg.controls.mode = IntegratorControls::Mode::Adaptive;
  else
    problems.push_back("integrator.mode must be 'fixed' or 'adaptive'");
  if (!(cfg.controls.dt > 0.0)) problems.push_back("integrator.dt must be > 0");
  if (!(cfg.controls.t_end > 0.0)) problems.push_back("integrator.t_end must be > 0");
  if (!(cfg.controls.tolerance > 0.0))
    problems.push_back("integrator.tolerance must be > 0");
  if (cfg.controls.snapshot_stride < 1)
    problems.push_back("integrator.snapshot_stride must be >= 1");

  cfg.horizon = j.value("horizon", cfg.controls.t_end);
  if (cfg.horizon > cfg.controls.t_end + 1e-9)
    problems.push_back("horizon exceeds integrator.t_end");
  cfg.seed = j.value("seed", 0ull);
  cfg.out_dir = j.value("out", "");
  cfg.label = j.value("label", "");

  if (!problems.empty()) throw ConfigError(problems);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  return fnv1a_hash(semantic_json(cfg).dump());
}

RunArtifacts run_experiment(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  RunArtifacts art;
  art.hash = config_hash(cfg);

  RhsEvaluator eval(cfg.coupling, cfg.kernel, cfg.model, cfg.initial, true);
  RhsFunction rhs = [&eval](std::span<const double> phi, std::span<const double> rho,
                            std::span<double> dphi, std::span<double> drho) {
    eval(phi, rho, dphi, drho);
  };

  const auto n_steps = static_cast<std::uint64_t>(
      std::ceil(cfg.controls.t_end / cfg.controls.dt - 1e-9));
  const std::uint64_t sigma_every = std::max<std::uint64_t>(1, n_steps / 100000);

  std::vector<int> values(cfg.initial.size());
  for (std::size_t i = 0; i < cfg.initial.size(); ++i)
    values[i] = cfg.initial.entries[i].a;
  const int dim = cfg.initial.dim;

  DispersionSeries series;
  series.sigma.resize(static_cast<std::size_t>(dim));
  std::vector<double> sig(static_cast<std::size_t>(dim)),
      mean(static_cast<std::size_t>(dim));
  StepObserver observer = [&](double t, std::span<const double> phi,
                              std::span<const double> rho, std::uint64_t step) {
    if (step % sigma_every != 0 && t < cfg.controls.t_end) return;
    phase_dispersion_raw(values, dim, phi, rho, sig, mean);
    series.t.push_back(t);
    for (int a = 0; a < dim; ++a)
      series.sigma[static_cast<std::size_t>(a)].push_back(
          sig[static_cast<std::size_t>(a)]);
  };

  art.trajectory = evolve(cfg.initial, rhs, cfg.controls, observer);
  art.sigma_series = series;

  const auto weights = cfg.initial.value_probabilities();
  const double lambda = cfg.kernel.lambda();
  art.report = classify_run(series, weights, cfg.horizon, lambda);

  if (cfg.coupling.is_diagonal(0.0))
    art.oracle = make_oracle_report(lambda, art.report.sigma_fit);

  art.qm_gap = qm_deviation(art.trajectory, cfg.coupling);

  art.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (!cfg.out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    const fs::path dir(cfg.out_dir);
    write_file(dir / "trajectory.csv", trajectory_csv(art, cfg.initial));
    write_file(dir / "sigma.csv", sigma_csv(series));
    write_file(dir / "report.json", report_to_json(art.report));
    if (art.oracle) write_file(dir / "oracle.json", oracle_report_to_json(*art.oracle));

    json man;
    man["label"] = cfg.label;
    man["version"] = kSoftwareVersion;
    char hex[32];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(art.hash));
    man["config_hash"] = hex;
    man["config"] = semantic_json(cfg);
    man["trust_flag"] = art.trajectory.trust_flag;
    man["renormalization_count"] = art.trajectory.renormalization_count;
    man["accepted_steps"] = art.trajectory.accepted_steps;
    man["wall_seconds"] = art.wall_seconds;
    write_file(dir / "manifest.json", man.dump(2));
  }
  return art;
}

ScanGrid parse_scan_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("scan config is not valid JSON: ") + e.what());
  }
  std::vector<std::string> problems;
  ScanGrid grid;
  if (!j.contains("scan")) problems.push_back("missing 'scan' section");
  if (!j.contains("template")) problems.push_back("missing 'template' section");
  if (!problems.empty()) throw ConfigError(problems);

  for (const auto& x : j["scan"].value("c", json::array()))
    grid.c_values.push_back(x.get<double>());
  for (const auto& x : j["scan"].value("dphi0", json::array()))
    grid.dphi0_values.push_back(x.get<double>());
  if (grid.c_values.empty()) problems.push_back("scan.c axis is empty");
  if (grid.dphi0_values.empty()) problems.push_back("scan.dphi0 axis is empty");
  for (double c : grid.c_values)
    if (c < 0.0) problems.push_back("scan.c values must be >= 0 (0 means flat)");

  json tmpl = j["template"];
  if (!tmpl.contains("initial_pattern")) {
    problems.push_back("template.initial_pattern missing");
  } else {
    double total = 0.0;
    for (const auto& e : tmpl["initial_pattern"]) {
      PatternEntry pe;
      pe.a = e.at("a").get<int>();
      pe.rho = e.at("rho").get<double>();
      pe.phi_base = e.value("phi_base", 0.0);
      pe.phi_coeff = e.value("phi_coeff", 0.0);
      grid.pattern.push_back(pe);
      total += pe.rho;
    }
    if (std::fabs(total - 1.0) > 1e-9)
      problems.push_back("template.initial_pattern probabilities sum to " +
                         std::to_string(total));
  }
  if (!problems.empty()) throw ConfigError(problems);

  // The placeholders keep the template parsable as a complete config.
  tmpl["kernel"] = "flat";
  json init = json::array();
  for (const auto& pe : grid.pattern)
    init.push_back({{"a", pe.a}, {"phi", pe.phi_base}, {"rho", pe.rho}});
  tmpl["initial"] = init;
  tmpl.erase("initial_pattern");
  grid.base = parse_experiment_config(tmpl.dump());
  return grid;
}

ScanGrid load_scan_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scan config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scan_config(ss.str());
}

std::vector<ScanCellResult> scan_phase_space(const ScanGrid& grid, int jobs,
                                             const std::string& out_dir) {
  const std::size_t nc = grid.c_values.size();
  const std::size_t nd = grid.dphi0_values.size();
  std::vector<ScanCellResult> rows(nc * nd);

  run_indexed_jobs(nc * nd, jobs, [&](std::size_t idx) {
    const double c = grid.c_values[idx / nd];
    const double dphi0 = grid.dphi0_values[idx % nd];
    ScanCellResult& row = rows[idx];
    row.c = c;
    row.dphi0 = dphi0;
    try {
      ExperimentConfig cfg = grid.base;
      cfg.out_dir.clear();
      cfg.kernel_spec = c == 0.0 ? "flat" : "spiked:" + std::to_string(c);
      cfg.kernel = c == 0.0 ? Kernel::flat() : Kernel::spiked(c);
      cfg.initial.entries.clear();
      for (const auto& pe : grid.pattern)
        cfg.initial.entries.push_back(
            {pe.a, pe.phi_base + pe.phi_coeff * dphi0, pe.rho});
      const RunArtifacts art = run_experiment(cfg);
      row.classification = art.report.classification;
      row.per_value = art.report.per_value_class;
      for (const auto& n : art.report.n_at_horizon)
        if (n && (!row.n_at_horizon || *n > *row.n_at_horizon)) row.n_at_horizon = *n;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });

  if (!out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / "scan.csv", scan_to_csv(rows, true));
    json man;
    man["version"] = kSoftwareVersion;
    man["cells"] = rows.size();
    man["c_values"] = grid.c_values;
    man["dphi0_values"] = grid.dphi0_values;
    man["model"] = grid.base.model == EvolutionModel::A ? "a" : "b";
    write_file(fs::path(out_dir) / "manifest.json", man.dump(2));
  }
  return rows;
}

std::string scan_to_csv(const std::vector<ScanCellResult>& rows, bool header) {
  std::string out;
  if (header) out += "c,dphi0,classification,n_at_horizon,per_value,error\n";
  char buf[96];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,", r.c, r.dphi0);
    out += buf;
    out += r.error.empty() ? to_string(r.classification) : "error";
    out += ',';
    if (r.n_at_horizon) {
      std::snprintf(buf, sizeof buf, "%.17g", *r.n_at_horizon);
      out += buf;
    }
    out += ',';
    for (std::size_t a = 0; a < r.per_value.size(); ++a) {
      if (a) out += '|';
      out += to_string(r.per_value[a]);
    }
    out += ',';
    std::string err = r.error;
    for (auto& ch : err)
      if (ch == ',' || ch == '\n') ch = ';';
    out += err;
    out += '\n';
  }
  return out;
}

std::vector<std::string> reproduce_presets() {
  return {"table1",       "table3",      "table4_moderate", "table5_large",
          "table6_identity", "masterplot", "masterplot2"};
}

ExperimentConfig preset_table1_config(const std::string& kernel_spec,
                                      EvolutionModel model) {
  return preset_base({0.0, 0.0, 0.0, 2.0}, kernel_spec, model, kTableRhoUneven,
                     table_phases(0.001 * kPi));
}

std::vector<std::string> reproduce(const std::string& preset,
                                   const std::string& out_dir, int jobs,
                                   EvolutionModel model) {
  namespace fs = std::filesystem;
  std::vector<std::string> emitted;
  const auto known = reproduce_presets();
  if (std::find(known.begin(), known.end(), preset) == known.end()) {
    std::string msg = "unknown preset '" + preset + "'; available:";
    for (const auto& p : known) msg += " " + p;
    throw ConfigError(msg);
  }
  fs::create_directories(out_dir);

  auto run_list = [&](std::vector<ExperimentConfig> cfgs) {
    std::vector<std::string> dirs(cfgs.size());
    run_indexed_jobs(cfgs.size(), jobs, [&](std::size_t i) {
      run_experiment(cfgs[i]);
      dirs[i] = cfgs[i].out_dir;
    });
    for (auto& d : dirs) emitted.push_back(d);
  };

  if (preset == "table1" || preset == "table3" || preset == "table6_identity") {
    const PauliCoefficients h = preset == "table6_identity"
                                    ? PauliCoefficients{2.0, 0.0, 0.0, 0.0}
                                    : PauliCoefficients{0.0, 0.0, 0.0, 2.0};
    std::vector<std::string> kernels =
        preset == "table6_identity"
            ? std::vector<std::string>{"cosine", "spiked:100"}
            : std::vector<std::string>{"flat", "cosine", "spiked:100"};
    std::vector<ExperimentConfig> cfgs;
    for (const auto& ks : kernels) {
      auto cfg = preset_base(h, ks, model, kTableRhoUneven, table_phases(0.001 * kPi));
      cfg.label = preset + "/" + kernel_file_tag(ks);
      cfg.out_dir = (fs::path(out_dir) / kernel_file_tag(ks)).string();
      cfgs.push_back(cfg);
    }
    run_list(std::move(cfgs));
  } else if (preset == "table4_moderate") {
    const auto phases = table_phases(0.1 * kPi);
    std::vector<ExperimentConfig> cfgs;
    cfgs.push_back(preset_base({0.0, 1.0, 0.0, 1.0}, "cosine", model,
                               kTableRhoUneven, phases));
    cfgs.back().label = "table4_moderate/sxsz_cosine_uneven";
    cfgs.push_back(preset_base({0.0, 1.0, 0.0, 1.0}, "spiked:100", model,
                               kTableRhoEven, phases));
    cfgs.back().label = "table4_moderate/sxsz_spiked100_even";
    cfgs.push_back(preset_base({0.0, 0.0, 0.0, 2.0}, "spiked:100", model,
                               kTableRhoUneven, phases));
    cfgs.back().label = "table4_moderate/sz_spiked100_uneven";
    for (auto& cfg : cfgs)
      cfg.out_dir =
          (fs::path(out_dir) / cfg.label.substr(preset.size() + 1)).string();
    run_list(std::move(cfgs));
  } else if (preset == "table5_large") {
    const std::vector<std::vector<double>> phases = {
        {0.0, 1.0, 2.0}, {0.5 * kPi + 1.0, 0.5 * kPi, 0.5 * kPi + 0.5}};
    std::vector<ExperimentConfig> cfgs;
    cfgs.push_back(preset_base({0.0, 1.0, 0.0, 1.0}, "cosine", model,
                               kTableRhoUneven, phases));
    cfgs.back().label = "table5_large/sxsz_cosine";
    cfgs.push_back(preset_base({0.0, 0.0, 0.0, 2.0}, "spiked:100", model,
                               kTableRhoUneven, phases));
    cfgs.back().label = "table5_large/sz_spiked100";
    for (auto& cfg : cfgs)
      cfg.out_dir =
          (fs::path(out_dir) / cfg.label.substr(preset.size() + 1)).string();
    run_list(std::move(cfgs));
  } else if (preset == "masterplot") {
    ScanGrid grid;
    grid.c_values = {0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 25.0, 50.0, 100.0, 250.0, 1000.0};
    const double lo = std::log10(1e-3), hi = std::log10(2.0);
    for (int k = 0; k < 20; ++k)
      grid.dphi0_values.push_back(std::pow(10.0, lo + (hi - lo) * k / 19.0));
    grid.base = preset_table1_config("flat", model);
    grid.base.label = "masterplot";
    grid.pattern = table_pattern(kTableRhoUneven);
    scan_phase_space(grid, jobs, out_dir);
    emitted.push_back((fs::path(out_dir) / "scan.csv").string());
  } else if (preset == "masterplot2") {
    const std::vector<double> cs = {2.0, 5.0, 25.0, 100.0, 250.0, 1000.0};
    std::vector<ExperimentConfig> cfgs;
    for (double c : cs) {
      auto cfg = preset_table1_config("spiked:" + std::to_string(c), model);
      cfg.label = "masterplot2/c" + std::to_string(static_cast<int>(c));
      cfg.out_dir = (fs::path(out_dir) / ("c" + std::to_string(static_cast<int>(c))))
                        .string();
      cfgs.push_back(cfg);
    }
    std::vector<RunArtifacts> arts(cfgs.size());
    run_indexed_jobs(cfgs.size(), jobs, [&](std::size_t i) {
      arts[i] = run_experiment(cfgs[i]);
    });
    std::string summary = "c,n_at_horizon_up,n_at_horizon_down\n";
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
      emitted.push_back(cfgs[i].out_dir);
      std::string exp_csv = "t,a,n\n";
      const auto& es = arts[i].report.exponent_series;
      for (std::size_t a = 0; a < es.size(); ++a)
        for (const auto& pt : es[a]) {
          char buf[96];
          std::snprintf(buf, sizeof buf, "%.17g,%zu,%.17g\n", pt.t, a, pt.n);
          exp_csv += buf;
        }
      write_file(fs::path(cfgs[i].out_dir) / "exponents.csv", exp_csv);
      char buf[96];
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", cs[i],
                    arts[i].report.n_at_horizon[0].value_or(0.0),
                    arts[i].report.n_at_horizon[1].value_or(0.0));
      summary += buf;
    }
    write_file(fs::path(out_dir) / "summary.csv", summary);
    emitted.push_back((fs::path(out_dir) / "summary.csv").string());
  }
  return emitted;
}

}  // namespace rens
