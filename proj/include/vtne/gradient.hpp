#pragma once

#include "vtne/ansatz.hpp"

namespace vtne {

/// E_chi(theta): contract the circuit at bond cap and take the (normalized)
/// MPO expectation value. Deterministic for fixed inputs.
inline double energy_chi(const Circuit& c, std::span<const double> theta,
                         const MatrixProductOperator& h, std::size_t cap) {
  MatrixProductState psi = circuit_to_mps(c, theta, cap);
  return expectation(psi, h);
}

/// Analytic parameter derivatives of a gate's matrix.
inline std::vector<DenseTensor> gate_derivative(const GateOp& g,
                                                std::span<const double> theta_slice) {
  if (g.kind == GateKind::np) {
    if (theta_slice.size() != 2) throw argument_error("gate_derivative: NP needs 2 parameters");
    return {np_gate_dtheta(theta_slice[0], theta_slice[1]),
            np_gate_dphi(theta_slice[0], theta_slice[1])};
  }
  if (g.kind == GateKind::rz) {
    if (theta_slice.size() != 1) throw argument_error("gate_derivative: RZ needs 1 parameter");
    return {rz_gate_dtheta(theta_slice[0])};
  }
  throw argument_error("gate_derivative: FSWAP has no parameters");
}

namespace detail {

/// Cached transfer environments of <L|R>. left[k] contracts sites 0..k-1,
/// right[k] contracts sites k..n-1; watermarks track which entries are still
/// valid after local updates to L or R.
struct EnvCache {
  const MatrixProductState* L;
  const MatrixProductState* R;
  std::vector<DenseTensor> left;   // size n+1
  std::vector<DenseTensor> right;  // size n+1
  int left_valid;                  // left[0..left_valid] usable
  int right_valid;                 // right[right_valid..n] usable

  EnvCache(const MatrixProductState& l, const MatrixProductState& r)
      : L(&l), R(&r), left(l.n_qubits() + 1), right(l.n_qubits() + 1), left_valid(0),
        right_valid(l.n_qubits()) {
    DenseTensor one({1, 1});
    one[0] = cplx{1.0, 0.0};
    left[0] = one;
    right[L->n_qubits()] = one;
  }

  /// Sites in [lo, hi] changed in either state.
  void invalidate(int lo, int hi) {
    left_valid = std::min(left_valid, lo);
    right_valid = std::max(right_valid, hi + 1);
  }

  const DenseTensor& left_env(int k) {
    while (left_valid < k) {
      int s = left_valid;
      DenseTensor bra = L->sites[s].conjugated();
      DenseTensor tmp = contract(left[s], bra, {{0, 0}});          // (rR, p, braR)
      left[s + 1] = contract(tmp, R->sites[s], {{0, 0}, {1, 1}});  // (braR, ketR)
      ++left_valid;
    }
    return left[k];
  }

  const DenseTensor& right_env(int k) {
    while (right_valid > k) {
      int s = right_valid - 1;
      DenseTensor bra = L->sites[s].conjugated();
      DenseTensor tmp = contract(bra, right[s + 1], {{2, 0}});       // (braL, p, ketR)
      right[s] = contract(tmp, R->sites[s], {{1, 1}, {2, 2}});       // (braL, ketL)
      --right_valid;
    }
    return right[k];
  }
};

/// <L| M |R> for a local one- or two-site operator M at `site`.
inline cplx local_sandwich(EnvCache& env, const GateOp& g, const DenseTensor& m) {
  const int s = g.site;
  const MatrixProductState& L = *env.L;
  const MatrixProductState& R = *env.R;
  if (!g.two_qubit()) {
    DenseTensor t = contract(env.left_env(s), L.sites[s].conjugated(), {{0, 0}});  // (ketL,p',braR)
    t = contract(t, m, {{1, 0}});                                   // (ketL, braR, p)
    t = contract(t, R.sites[s], {{0, 0}, {2, 1}});                  // (braR, ketR)
    DenseTensor r = contract(t, env.right_env(s + 1), {{0, 0}, {1, 1}});
    return r[0];
  }
  DenseTensor t = contract(env.left_env(s), L.sites[s].conjugated(), {{0, 0}});  // (ketL, p1', braM)
  t = contract(t, L.sites[s + 1].conjugated(), {{2, 0}});           // (ketL, p1', p2', braR)
  DenseTensor m4 = m.reshaped({2, 2, 2, 2});                        // (o1, o2, i1, i2)
  t = contract(t, m4, {{1, 0}, {2, 1}});                            // (ketL, braR, i1, i2)
  t = contract(t, R.sites[s], {{0, 0}, {2, 1}});                    // (braR, i2, ketM)
  t = contract(t, R.sites[s + 1], {{2, 0}, {1, 1}});                // (braR, ketR)
  DenseTensor r = contract(t, env.right_env(s + 2), {{0, 0}, {1, 1}});
  return r[0];
}

inline DenseTensor dagger(const DenseTensor& m) {
  const std::size_t d = m.dim(0);
  DenseTensor out({d, d});
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) out[i * d + j] = std::conj(m[j * d + i]);
  return out;
}

/// Apply U^dag at a gate's position in place, reporting the modified site
/// range (center shifts widen it).
inline std::pair<int, int> apply_dagger_gate(MatrixProductState& psi, const GateOp& g,
                                             std::span<const double> theta, std::size_t cap) {
  DenseTensor ud = dagger(gate_matrix(g, theta));
  if (!g.two_qubit()) {
    apply_one_qubit_gate_inplace(psi, ud, g.site);
    return {g.site, g.site};
  }
  int before = psi.orthogonality_center.value_or(g.site);
  apply_two_qubit_gate_inplace(psi, ud, g.site, cap);
  return {std::min(before, g.site), std::max(before, g.site + 1)};
}

}  // namespace detail

struct SweepResult {
  double energy = 0.0;
  std::vector<double> grad;
  double discarded_weight = 0.0;
};

/// Energy and its gradient via the reverse sweep: build the circuit state
/// once, apply the Hamiltonian once, then move gates one at a time from the
/// bra to the ket side, truncating to the bond cap after each move. The
/// gradient of slot i of gate k is 2 Re <L^(k)| dU_k^dag/dtheta_i |R^(k)>.
/// At full cap this equals the exact-state gradient; at smaller caps it
/// approximates the derivative of the exact energy, not of E_chi.
inline SweepResult gradient_sweep(const Circuit& c, std::span<const double> theta,
                                  const MatrixProductOperator& h, std::size_t cap) {
  if (theta.size() != static_cast<std::size_t>(c.n_params)) {
    throw argument_error("gradient_sweep: parameter size mismatch");
  }
  SweepResult out;
  out.grad.assign(c.n_params, 0.0);

  MatrixProductState L = circuit_to_mps(c, theta, cap);
  out.energy = expectation(L, h);  // the value optimizers see: E_chi itself
  out.discarded_weight = L.discarded_weight;
  MatrixProductState R = apply_mpo(h, L, cap);

  detail::EnvCache env(L, R);
  for (auto it = c.gates.rbegin(); it != c.gates.rend(); ++it) {
    const GateOp& g = *it;
    auto [lo, hi] = detail::apply_dagger_gate(L, g, theta, cap);
    env.invalidate(lo, hi);
    if (g.kind != GateKind::fswap) {
      std::span<const double> slice =
          (g.kind == GateKind::np) ? theta.subspan(g.slot_theta, 2)
                                   : theta.subspan(g.slot_theta, 1);
      auto derivs = gate_derivative(g, slice);
      const int slots[2] = {g.slot_theta, g.slot_phi};
      for (std::size_t d = 0; d < derivs.size(); ++d) {
        cplx val = detail::local_sandwich(env, g, detail::dagger(derivs[d]));
        out.grad[slots[d]] = 2.0 * val.real();
      }
    }
    auto [rlo, rhi] = detail::apply_dagger_gate(R, g, theta, cap);
    env.invalidate(rlo, rhi);
  }

  for (double x : out.grad) {
    if (!std::isfinite(x)) throw numerical_integrity_error("gradient_sweep: NaN in gradient");
  }
  return out;
}

}  // namespace vtne
