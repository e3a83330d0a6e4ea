// Command-line front end: pre-optimize parameterized Hubbard circuits with a
// bond-capped MPS backend, compare warm and cold VQE starts, re-evaluate
// checkpoints at other bond dimensions, and print the CNOT bound table.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "vtne/experiment.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  int nx = 0, ny = 0, layers = 0;
  double t = 0, u = 0;
  long chi_b = 0;
  std::vector<std::size_t> chi_a;
  std::string mode, optimizer;
  long seed = -1;
  int seeds = 0;
  int max_iters = 0;
  std::string out_csv, checkpoint, record;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file; flags override its fields");
  cmd->add_option("--nx", f.nx, "lattice extent in x");
  cmd->add_option("--ny", f.ny, "lattice extent in y");
  cmd->add_option("--layers", f.layers, "ansatz layers (0 = preset for this lattice)");
  cmd->add_option("--t", f.t, "hopping amplitude");
  cmd->add_option("--u", f.u, "onsite interaction");
  cmd->add_option("--chi-b", f.chi_b, "optimization bond cap");
  cmd->add_option("--chi-a", f.chi_a, "evaluation bond caps (repeatable)");
  cmd->add_option("--mode", f.mode, "warm | direct");
  cmd->add_option("--optimizer", f.optimizer, "bfgs | adam");
  cmd->add_option("--seed", f.seed, "base RNG seed");
  cmd->add_option("--seeds", f.seeds, "number of seeds (comparison study)");
  cmd->add_option("--max-iters", f.max_iters, "optimizer iteration cap");
  cmd->add_option("--out", f.out_csv, "trajectory CSV path");
  cmd->add_option("--checkpoint", f.checkpoint, "checkpoint JSON path");
  cmd->add_option("--record", f.record, "full run record JSON path");
}

vtne::RunConfig build_config(const CommonFlags& f) {
  vtne::RunConfig cfg;
  if (!f.config_path.empty()) cfg = vtne::load_config(f.config_path);
  if (f.nx > 0) cfg.lattice.n_x = f.nx;
  if (f.ny > 0) cfg.lattice.n_y = f.ny;
  if (f.t != 0) cfg.lattice.t = f.t;
  if (f.u != 0) cfg.lattice.u = f.u;
  if (f.layers > 0) cfg.layers = f.layers;
  if (f.chi_b > 0) cfg.chi_b = static_cast<std::size_t>(f.chi_b);
  if (!f.chi_a.empty()) cfg.chi_a = f.chi_a;
  if (!f.mode.empty()) {
    if (f.mode == "warm") cfg.mode = vtne::ProtocolMode::warm;
    else if (f.mode == "direct") cfg.mode = vtne::ProtocolMode::direct;
    else throw vtne::config_error("--mode must be warm or direct");
  }
  if (!f.optimizer.empty()) {
    if (f.optimizer == "bfgs") cfg.opt.kind = vtne::OptimizerKind::bfgs;
    else if (f.optimizer == "adam") cfg.opt.kind = vtne::OptimizerKind::adam;
    else throw vtne::config_error("--optimizer must be bfgs or adam");
  }
  if (f.seed >= 0) cfg.seeds = {static_cast<std::uint64_t>(f.seed)};
  if (f.max_iters > 0) cfg.opt.max_iters = f.max_iters;
  if (!f.out_csv.empty()) cfg.out_csv = f.out_csv;
  if (!f.checkpoint.empty()) cfg.checkpoint_path = f.checkpoint;
  return cfg;
}

int cmd_run(const CommonFlags& f) {
  vtne::RunConfig cfg = build_config(f);
  vtne::RunRecord rec = vtne::run_vtne(cfg);
  std::printf("lattice %dx%d layers %d chi_b %zu seed %llu\n", cfg.lattice.n_x, cfg.lattice.n_y,
              cfg.resolved_layers(), cfg.chi_b,
              static_cast<unsigned long long>(rec.seed));
  std::printf("E_chib      = %.12f  (stop: %s, %ld gradient calls)\n", rec.energy_chib,
              vtne::to_string(rec.stop_reason), rec.n_gradient_calls);
  for (const auto& [chi, e] : rec.energy_chia) {
    std::printf("E_chia(%4zu)= %.12f\n", chi, e);
  }
  if (rec.reference_energy) {
    std::printf("reference   = %.12f   relative error = %.6e\n", *rec.reference_energy,
                *rec.relative_error);
  }
  if (rec.infidelity_value) std::printf("infidelity  = %.6e\n", *rec.infidelity_value);
  if (!f.record.empty()) vtne::record_to_json_file(rec, f.record);
  return 0;
}

int cmd_compare(const CommonFlags& f, const std::vector<std::string>& warm_checkpoints,
                int steps) {
  vtne::RunConfig cfg = build_config(f);
  int n_seeds = f.seeds > 0 ? f.seeds : 10;

  std::vector<std::pair<std::size_t, std::vector<double>>> warm;
  if (!warm_checkpoints.empty()) {
    for (const std::string& path : warm_checkpoints) {
      auto [circuit, theta] = vtne::load_checkpoint(path);
      std::ifstream in(path);
      nlohmann::json j;
      in >> j;
      warm.emplace_back(j.at("chi_b").get<std::size_t>(), std::move(theta));
    }
  } else {
    // no checkpoints given: run the pre-optimization here at each chi_a cap
    std::vector<std::size_t> caps = cfg.chi_a.empty() ? std::vector<std::size_t>{16, 32}
                                                      : cfg.chi_a;
    for (std::size_t chi : caps) {
      vtne::RunConfig c1 = cfg;
      c1.chi_b = chi;
      c1.chi_a.clear();
      vtne::RunRecord r = vtne::run_vtne(c1);
      warm.emplace_back(chi, r.theta);
    }
  }

  vtne::ComparisonResult res = vtne::run_warmstart_comparison(cfg, n_seeds, steps, warm);
  std::printf("reference energy = %.12f\n", res.reference_energy);
  if (!res.cold_mean.empty()) {
    const auto& last = res.cold_mean.back();
    std::printf("cold mean energy after %d steps = %.12f\n", last.step, last.energy);
    for (const auto& arm : res.warm) {
      int reach = -1;
      for (const auto& p : arm.trajectory) {
        if (p.energy <= last.energy) { reach = p.step; break; }
      }
      if (reach >= 0) {
        std::printf("%s reaches it at step %d (saves %d gradient calls)\n", arm.name.c_str(),
                    reach, last.step - reach);
      } else {
        std::printf("%s does not reach the cold mean within %d steps\n", arm.name.c_str(),
                    last.step);
      }
    }
  }
  if (!cfg.out_csv.empty()) {
    vtne::emit_comparison_csv(res, cfg.out_csv);
    std::printf("wrote %s\n", cfg.out_csv.c_str());
  }
  return 0;
}

int cmd_eval(const CommonFlags& f, const std::string& checkpoint) {
  auto [circuit, theta] = vtne::load_checkpoint(checkpoint);
  vtne::LatticeConfig lat{circuit.n_x, circuit.n_y};
  if (f.t != 0) lat.t = f.t;
  if (f.u != 0) lat.u = f.u;
  vtne::MatrixProductOperator h = vtne::hubbard_mpo(lat);
  std::vector<std::size_t> caps = f.chi_a;
  if (caps.empty()) caps = {vtne::MatrixProductState::chi_max(circuit.n_qubits)};
  std::printf("lattice %dx%d layers %d, %d parameters\n", lat.n_x, lat.n_y, circuit.layers,
              circuit.n_params);
  for (std::size_t chi : caps) {
    double e = vtne::energy_chi(circuit, theta, h, chi);
    std::printf("E_chia(%4zu) = %.12f\n", chi, e);
  }
  return 0;
}

int cmd_bound(const std::vector<std::size_t>& chis) {
  std::printf("chi,delta,cnot_bound\n");
  for (std::size_t chi : chis) {
    vtne::CnotBoundResult r = vtne::cnot_upper_bound(chi);
    std::printf("%zu,%.17g,%.17g\n", r.chi, r.delta, r.bound);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tensor-network pre-optimization for Hubbard-model variational circuits"};
  app.require_subcommand(1);

  CommonFlags run_f, cmp_f, eval_f;
  auto* run = app.add_subcommand("run", "one pre-optimization run");
  add_common(run, run_f);

  auto* cmp = app.add_subcommand("compare", "warm-start versus cold-start study");
  add_common(cmp, cmp_f);
  std::vector<std::string> warm_checkpoints;
  int steps = 1000;
  cmp->add_option("--warm-checkpoint", warm_checkpoints,
                  "checkpoint(s) providing warm starts (repeatable)");
  cmp->add_option("--steps", steps, "Adam steps per run");

  auto* ev = app.add_subcommand("eval", "re-evaluate a checkpoint at other bond caps");
  add_common(ev, eval_f);
  std::string eval_checkpoint;
  ev->add_option("checkpoint", eval_checkpoint, "checkpoint JSON")->required();

  auto* bnd = app.add_subcommand("bound", "CNOT upper-bound table");
  std::vector<std::size_t> chis{2, 4, 8, 16, 32, 64, 128, 256};
  bnd->add_option("--chi", chis, "bond dimensions to tabulate");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_f);
    if (cmp->parsed()) return cmd_compare(cmp_f, warm_checkpoints, steps);
    if (ev->parsed()) return cmd_eval(eval_f, eval_checkpoint);
    if (bnd->parsed()) return cmd_bound(chis);
  } catch (const vtne::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const vtne::parse_error& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const vtne::argument_error& e) {
    std::cerr << "argument error: " << e.what() << "\n";
    return 2;
  } catch (const vtne::capacity_error& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return 2;
  } catch (const vtne::numerical_integrity_error& e) {
    std::cerr << "numerical integrity error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
