#pragma once

#include "vtne/gradient.hpp"
#include "vtne/optimize.hpp"

namespace vtne {

enum class ProtocolMode { warm, direct };

/// One full pre-optimization run at a fixed bond cap.
struct ProtocolResult {
  Circuit circuit;                 // the full ansatz that theta parameterizes
  std::vector<double> theta;       // optimized parameters
  double energy = 0.0;             // E_chi at theta
  std::vector<TrajectoryPoint> trajectory;  // interacting-stage trajectory
  StopReason reason = StopReason::max_iters;
  long n_gradient_calls = 0;       // all stages
  double stage1_energy = 0.0;      // summed species energies (warm mode)
  double discarded_weight = 0.0;   // of the final contraction
  std::uint64_t seed = 0;
};

/// The two-stage pre-optimization: BFGS on the two non-interacting species
/// circuits from narrow Gaussian starts, parameter embedding into the full
/// circuit, then BFGS on the interacting system; or, in direct mode, BFGS on
/// the full circuit from a supplied (or drawn) start.
inline ProtocolResult vtne_protocol(const LatticeConfig& lat, int layers, std::size_t cap,
                                    const OptimizerConfig& cfg, ProtocolMode mode,
                                    std::optional<std::vector<double>> theta0_override =
                                        std::nullopt) {
  cfg.validate();
  ProtocolResult out;
  out.seed = cfg.seed;
  out.circuit = build_np_ansatz(lat, layers);
  MatrixProductOperator h = hubbard_mpo(lat);

  std::vector<double> theta0;
  long stage1_calls = 0;
  if (mode == ProtocolMode::warm && !theta0_override.has_value()) {
    MatrixProductOperator hs = build_mpo(species_hopping_terms(lat), lat.n_sites());
    std::vector<double> species_theta[2];
    double stage1_energy = 0.0;
    int tag = 0;
    for (Spin s : {Spin::up, Spin::down}) {
      Circuit c = build_noninteracting_ansatz(lat, layers, s);
      auto fg = [&](const std::vector<double>& x) {
        SweepResult r = gradient_sweep(c, x, hs, cap);
        return std::pair<double, std::vector<double>>(r.energy, std::move(r.grad));
      };
      std::vector<double> x0 =
          gaussian_init(c.n_params, std::sqrt(cfg.init_sigma), cfg.seed * 2 + tag);
      MinimizeResult res = bfgs_minimize(fg, x0, cfg);
      species_theta[tag] = std::move(res.x);
      stage1_energy += res.f;
      stage1_calls += res.n_gradient_calls;
      ++tag;
    }
    out.stage1_energy = stage1_energy;
    theta0 = embed_noninteracting_params(species_theta[0], species_theta[1], out.circuit);
  } else if (theta0_override.has_value()) {
    if (theta0_override->size() != static_cast<std::size_t>(out.circuit.n_params)) {
      throw argument_error("vtne_protocol: theta0 size mismatch");
    }
    theta0 = *theta0_override;
  } else {
    theta0 = gaussian_init(out.circuit.n_params, std::sqrt(cfg.init_sigma), cfg.seed);
  }

  auto fg = [&](const std::vector<double>& x) {
    SweepResult r = gradient_sweep(out.circuit, x, h, cap);
    return std::pair<double, std::vector<double>>(r.energy, std::move(r.grad));
  };
  MinimizeResult res = bfgs_minimize(fg, theta0, cfg);
  out.theta = std::move(res.x);
  out.energy = res.f;
  out.trajectory = std::move(res.trajectory);
  out.reason = res.reason;
  out.n_gradient_calls = stage1_calls + res.n_gradient_calls;
  out.discarded_weight = circuit_to_mps(out.circuit, out.theta, cap).discarded_weight;
  return out;
}

}  // namespace vtne
