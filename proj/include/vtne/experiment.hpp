#pragma once

#include <atomic>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "vtne/oracle.hpp"
#include "vtne/protocol.hpp"

namespace vtne {

/// Everything a single run needs; JSON-loadable, CLI flags override fields.
struct RunConfig {
  LatticeConfig lattice;
  int layers = -1;                   // -1: use the preset for this lattice
  std::size_t chi_b = 16;            // optimization bond cap
  std::vector<std::size_t> chi_a;    // evaluation bond caps
  OptimizerConfig opt;
  ProtocolMode mode = ProtocolMode::warm;
  std::vector<std::uint64_t> seeds = {1};
  std::string out_csv;
  std::string checkpoint_path;

  int resolved_layers() const {
    if (layers > 0) return layers;
    auto p = preset_layers(lattice.n_x, lattice.n_y);
    if (!p) {
      throw config_error("no layer preset for lattice " + std::to_string(lattice.n_x) + "x" +
                         std::to_string(lattice.n_y) + "; pass layers explicitly");
    }
    return *p;
  }

  void validate() const {
    lattice.validate();
    if (chi_b < 1) throw config_error("chi_b must be >= 1");
    if (layers == 0 || layers < -1) throw config_error("layers must be positive (or -1 = preset)");
    opt.validate();
    if (seeds.empty()) throw config_error("need at least one seed");
  }
};

/// One optimization trajectory with everything needed to reproduce and
/// re-evaluate it offline.
struct RunRecord {
  RunConfig config;
  std::uint64_t seed = 0;
  std::vector<double> theta;
  double energy_chib = 0.0;
  std::vector<std::pair<std::size_t, double>> energy_chia;  // (chi_a, E_{chi_a}(theta*))
  std::optional<double> reference_energy;
  std::optional<double> relative_error;   // signed, (E_chib - ref)/|ref|
  std::optional<double> infidelity_value;
  std::vector<TrajectoryPoint> trajectory;
  double discarded_weight = 0.0;
  double stage1_energy = 0.0;
  long n_gradient_calls = 0;
  StopReason stop_reason = StopReason::max_iters;
  std::uint64_t circuit_hash_value = 0;
  std::string version = kVersion;
};

namespace detail {

inline std::string fmt17(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace detail

// ---------------------------------------------------------------- JSON I/O

inline nlohmann::json config_to_json(const RunConfig& c) {
  return nlohmann::json{
      {"lattice",
       {{"n_x", c.lattice.n_x}, {"n_y", c.lattice.n_y}, {"t", c.lattice.t}, {"u", c.lattice.u}}},
      {"layers", c.layers},
      {"chi_b", c.chi_b},
      {"chi_a", c.chi_a},
      {"mode", c.mode == ProtocolMode::warm ? "warm" : "direct"},
      {"optimizer",
       {{"kind", c.opt.kind == OptimizerKind::bfgs ? "bfgs" : "adam"},
        {"ftol", c.opt.ftol},
        {"gtol", c.opt.gtol},
        {"alpha", c.opt.alpha},
        {"beta1", c.opt.beta1},
        {"beta2", c.opt.beta2},
        {"eps", c.opt.eps},
        {"max_iters", c.opt.max_iters},
        {"init_sigma", c.opt.init_sigma}}},
      {"seeds", c.seeds},
      {"out", c.out_csv},
      {"checkpoint", c.checkpoint_path}};
}

inline RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig c;
  try {
    if (j.contains("lattice")) {
      const auto& l = j.at("lattice");
      c.lattice.n_x = l.value("n_x", 1);
      c.lattice.n_y = l.value("n_y", 1);
      c.lattice.t = l.value("t", 1.0);
      c.lattice.u = l.value("u", 2.0);
    }
    c.layers = j.value("layers", -1);
    c.chi_b = j.value("chi_b", std::size_t{16});
    c.chi_a = j.value("chi_a", std::vector<std::size_t>{});
    if (j.contains("mode")) {
      std::string m = j.at("mode");
      if (m == "warm") c.mode = ProtocolMode::warm;
      else if (m == "direct") c.mode = ProtocolMode::direct;
      else throw config_error("mode must be warm or direct");
    }
    if (j.contains("optimizer")) {
      const auto& o = j.at("optimizer");
      if (o.contains("kind")) {
        std::string k = o.at("kind");
        if (k == "bfgs") c.opt.kind = OptimizerKind::bfgs;
        else if (k == "adam") c.opt.kind = OptimizerKind::adam;
        else throw config_error("optimizer.kind must be bfgs or adam");
      }
      c.opt.ftol = o.value("ftol", c.opt.ftol);
      c.opt.gtol = o.value("gtol", c.opt.gtol);
      c.opt.alpha = o.value("alpha", c.opt.alpha);
      c.opt.beta1 = o.value("beta1", c.opt.beta1);
      c.opt.beta2 = o.value("beta2", c.opt.beta2);
      c.opt.eps = o.value("eps", c.opt.eps);
      c.opt.max_iters = o.value("max_iters", c.opt.max_iters);
      c.opt.init_sigma = o.value("init_sigma", c.opt.init_sigma);
    }
    c.seeds = j.value("seeds", std::vector<std::uint64_t>{1});
    c.out_csv = j.value("out", std::string{});
    c.checkpoint_path = j.value("checkpoint", std::string{});
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("config: ") + e.what());
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw parse_error(std::string("config: ") + e.what(), e.byte);
  }
  return config_from_json(j);
}

// ------------------------------------------------------------- checkpoints

/// Self-describing warm-start handoff: enough to rebuild the circuit and
/// re-evaluate the parameters anywhere.
inline void save_checkpoint(const RunRecord& rec, const std::string& path) {
  const RunConfig& c = rec.config;
  nlohmann::json j{
      {"lattice",
       {{"n_x", c.lattice.n_x}, {"n_y", c.lattice.n_y}, {"t", c.lattice.t}, {"u", c.lattice.u}}},
      {"layers", c.resolved_layers()},
      {"chi_b", c.chi_b},
      {"seed", rec.seed},
      {"params", rec.theta},
      {"energy", rec.energy_chib},
      {"circuit_hash", rec.circuit_hash_value}};
  std::ofstream out(path);
  if (!out) throw config_error("cannot write checkpoint " + path);
  out << j.dump(2) << "\n";
}

/// Rebuild the circuit named by a checkpoint and return it with the stored
/// parameters. Rejects files whose circuit hash does not match the rebuilt
/// gate list.
inline std::pair<Circuit, ParameterVector> load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open checkpoint " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw parse_error(std::string("checkpoint: ") + e.what(), e.byte);
  }
  try {
    LatticeConfig lat;
    lat.n_x = j.at("lattice").at("n_x");
    lat.n_y = j.at("lattice").at("n_y");
    lat.t = j.at("lattice").value("t", 1.0);
    lat.u = j.at("lattice").value("u", 2.0);
    int layers = j.at("layers");
    Circuit c = build_np_ansatz(lat, layers);
    ParameterVector theta = j.at("params").get<ParameterVector>();
    if (theta.size() != static_cast<std::size_t>(c.n_params)) {
      throw config_error("checkpoint: parameter count does not match circuit");
    }
    std::uint64_t h = j.at("circuit_hash");
    if (h != circuit_hash(c)) {
      throw config_error("checkpoint: circuit hash mismatch");
    }
    return {std::move(c), std::move(theta)};
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("checkpoint: ") + e.what());
  }
}

// -------------------------------------------------------------------- CSV

/// Trajectory CSV, one row per optimization step, header included, 17
/// significant digits, LF line endings.
inline void emit_csv(const std::vector<TrajectoryPoint>& traj,
                     std::optional<double> reference, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot write csv " + path);
  out << "step,n_gradient_calls,energy,relative_error,grad_norm,wall_time_s\n";
  for (const TrajectoryPoint& p : traj) {
    double rel = std::numeric_limits<double>::quiet_NaN();
    if (reference.has_value() && *reference != 0.0) {
      rel = (p.energy - *reference) / std::abs(*reference);
    }
    out << p.step << ',' << p.n_gradient_calls << ',' << detail::fmt17(p.energy) << ','
        << detail::fmt17(rel) << ',' << detail::fmt17(p.grad_norm) << ','
        << detail::fmt17(p.wall_time_s) << "\n";
  }
}

inline void record_to_json_file(const RunRecord& rec, const std::string& path) {
  nlohmann::json traj = nlohmann::json::array();
  for (const TrajectoryPoint& p : rec.trajectory) {
    traj.push_back({{"step", p.step},
                    {"n_gradient_calls", p.n_gradient_calls},
                    {"energy", p.energy},
                    {"grad_norm", p.grad_norm},
                    {"wall_time_s", p.wall_time_s}});
  }
  nlohmann::json ea = nlohmann::json::array();
  for (const auto& [chi, e] : rec.energy_chia) ea.push_back({{"chi_a", chi}, {"energy", e}});
  nlohmann::json j{{"config", config_to_json(rec.config)},
                   {"seed", rec.seed},
                   {"params", rec.theta},
                   {"energy_chib", rec.energy_chib},
                   {"energy_chia", std::move(ea)},
                   {"stage1_energy", rec.stage1_energy},
                   {"discarded_weight", rec.discarded_weight},
                   {"n_gradient_calls", rec.n_gradient_calls},
                   {"stop_reason", to_string(rec.stop_reason)},
                   {"circuit_hash", rec.circuit_hash_value},
                   {"version", rec.version}};
  if (rec.reference_energy) j["reference_energy"] = *rec.reference_energy;
  if (rec.relative_error) j["relative_error"] = *rec.relative_error;
  if (rec.infidelity_value) j["infidelity"] = *rec.infidelity_value;
  j["trajectory"] = std::move(traj);
  std::ofstream out(path);
  if (!out) throw config_error("cannot write record " + path);
  out << j.dump(2) << "\n";
}

// ------------------------------------------------------------------- runs

/// Single pre-optimization run at chi_b, evaluation at every requested
/// chi_a, and oracle reference/infidelity when the system is small enough.
inline RunRecord run_vtne(const RunConfig& cfg_in) {
  RunConfig cfg = cfg_in;
  cfg.validate();
  const int layers = cfg.resolved_layers();

  RunRecord rec;
  rec.config = cfg;
  rec.seed = cfg.seeds.front();
  OptimizerConfig opt = cfg.opt;
  opt.seed = rec.seed;

  ProtocolResult pr = vtne_protocol(cfg.lattice, layers, cfg.chi_b, opt, cfg.mode);
  rec.theta = pr.theta;
  rec.energy_chib = pr.energy;
  rec.trajectory = pr.trajectory;
  rec.stage1_energy = pr.stage1_energy;
  rec.discarded_weight = pr.discarded_weight;
  rec.n_gradient_calls = pr.n_gradient_calls;
  rec.stop_reason = pr.reason;
  rec.circuit_hash_value = circuit_hash(pr.circuit);

  for (std::size_t chi : cfg.chi_a) {
    MatrixProductOperator h = hubbard_mpo(cfg.lattice);
    rec.energy_chia.emplace_back(chi, energy_chi(pr.circuit, pr.theta, h, chi));
  }

  if (cfg.lattice.n_qubits() <= 16) {
    auto terms = jordan_wigner_terms(cfg.lattice);
    GroundResult g = exact_ground(terms, cfg.lattice.n_qubits(),
                                  std::make_pair(cfg.lattice.n_up(), cfg.lattice.n_down()));
    rec.reference_energy = g.energy;
    rec.relative_error = (rec.energy_chib - g.energy) / std::abs(g.energy);
    MatrixProductState full = circuit_to_mps(pr.circuit, pr.theta,
                                             MatrixProductState::chi_max(cfg.lattice.n_qubits()));
    rec.infidelity_value = infidelity(normalize(full), DenseTensor({g.state.size()}, g.state));
  }

  if (!cfg.out_csv.empty()) emit_csv(rec.trajectory, rec.reference_energy, cfg.out_csv);
  if (!cfg.checkpoint_path.empty()) save_checkpoint(rec, cfg.checkpoint_path);
  return rec;
}

/// Run independent jobs over a small thread pool; results keep input order.
template <typename Item, typename Fn>
auto parallel_map(const std::vector<Item>& items, Fn fn, unsigned max_threads)
    -> std::vector<decltype(fn(items.front()))> {
  using Out = decltype(fn(items.front()));
  std::vector<Out> results(items.size());
  std::atomic<std::size_t> next{0};
  unsigned n_threads = std::min<unsigned>(std::max(1u, max_threads),
                                          static_cast<unsigned>(items.size()));
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mu;
  for (unsigned t = 0; t < n_threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t k = next.fetch_add(1);
        if (k >= items.size()) return;
        try {
          results[k] = fn(items[k]);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return results;
}

/// One arm of the warm-start study: an Adam run plus its trajectory.
struct ComparisonArm {
  std::string name;               // "cold" or "warm_chi<b>"
  std::uint64_t seed = 0;         // cold arms only
  std::size_t chi_b = 0;          // warm arms only
  std::vector<TrajectoryPoint> trajectory;
  double final_energy = 0.0;
};

struct ComparisonResult {
  std::vector<ComparisonArm> cold;          // one per seed
  std::vector<ComparisonArm> warm;          // one per chi_b (protocol mode)
  std::vector<TrajectoryPoint> cold_mean;   // energies averaged per step
  double reference_energy = 0.0;
};

/// Full-accuracy VQE comparison on a small system: Adam from cold Gaussian
/// starts versus Adam from pre-optimized parameters. Energies and gradients
/// use the exact state (the circuit at full bond dimension gives identical
/// values); the comparison currency is gradient evaluations.
inline ComparisonResult run_warmstart_comparison(
    const RunConfig& cfg_in, int n_seeds, int n_steps,
    const std::vector<std::pair<std::size_t, std::vector<double>>>& warm_starts,
    unsigned max_threads = std::thread::hardware_concurrency()) {
  RunConfig cfg = cfg_in;
  cfg.validate();
  if (cfg.lattice.n_qubits() > 16) {
    throw capacity_error("run_warmstart_comparison: exact stage limited to 16 qubits");
  }
  const int layers = cfg.resolved_layers();
  Circuit circuit = build_np_ansatz(cfg.lattice, layers);
  auto terms = jordan_wigner_terms(cfg.lattice);

  ComparisonResult out;
  GroundResult g = exact_ground(terms, cfg.lattice.n_qubits(),
                                std::make_pair(cfg.lattice.n_up(), cfg.lattice.n_down()));
  out.reference_energy = g.energy;

  auto objective = [&](const std::vector<double>& x) {
    ExactEval e = exact_energy_gradient(circuit, x, terms);
    return std::pair<double, std::vector<double>>(e.energy, std::move(e.grad));
  };

  OptimizerConfig adam = cfg.opt;
  adam.kind = OptimizerKind::adam;

  struct Job {
    bool cold;
    std::uint64_t seed;
    std::size_t chi;
    const std::vector<double>* start;
  };
  std::vector<Job> jobs;
  for (int k = 0; k < n_seeds; ++k) {
    jobs.push_back({true, cfg.seeds.front() + static_cast<std::uint64_t>(k), 0, nullptr});
  }
  for (const auto& [chi, theta] : warm_starts) jobs.push_back({false, 0, chi, &theta});

  auto run_job = [&](const Job& j) {
    ComparisonArm arm;
    std::vector<double> x0;
    if (j.cold) {
      // cold starts are drawn at the random-VQE width
      x0 = gaussian_init(circuit.n_params, std::sqrt(1e-3), j.seed);
      arm.name = "cold";
      arm.seed = j.seed;
    } else {
      x0 = *j.start;
      arm.name = "warm_chi" + std::to_string(j.chi);
      arm.chi_b = j.chi;
    }
    MinimizeResult res = adam_minimize(objective, x0, adam, n_steps);
    arm.trajectory = std::move(res.trajectory);
    arm.final_energy = res.f;
    return arm;
  };

  auto arms = parallel_map(jobs, run_job, max_threads);
  for (std::size_t k = 0; k < arms.size(); ++k) {
    if (jobs[k].cold) out.cold.push_back(std::move(arms[k]));
    else out.warm.push_back(std::move(arms[k]));
  }

  // per-step mean of the cold arms
  if (!out.cold.empty()) {
    const std::size_t len = out.cold.front().trajectory.size();
    out.cold_mean.resize(len);
    for (std::size_t s = 0; s < len; ++s) {
      TrajectoryPoint p = out.cold.front().trajectory[s];
      double esum = 0;
      for (const auto& arm : out.cold) esum += arm.trajectory[s].energy;
      p.energy = esum / static_cast<double>(out.cold.size());
      out.cold_mean[s] = p;
    }
  }
  return out;
}

/// Mean-trajectory CSV for the comparison study: one block per arm.
inline void emit_comparison_csv(const ComparisonResult& r, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot write csv " + path);
  out << "arm,step,n_gradient_calls,energy,relative_error\n";
  auto rows = [&](const std::string& name, const std::vector<TrajectoryPoint>& traj) {
    for (const TrajectoryPoint& p : traj) {
      double rel = (p.energy - r.reference_energy) / std::abs(r.reference_energy);
      out << name << ',' << p.step << ',' << p.n_gradient_calls << ','
          << detail::fmt17(p.energy) << ',' << detail::fmt17(rel) << "\n";
    }
  };
  rows("cold_mean", r.cold_mean);
  for (const auto& arm : r.warm) rows(arm.name, arm.trajectory);
  out.flush();
}

}  // namespace vtne
