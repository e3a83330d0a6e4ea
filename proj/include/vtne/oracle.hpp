#pragma once

#include <bit>
#include <unordered_map>

#include "vtne/ansatz.hpp"

namespace vtne {

namespace detail {

/// Apply a 2x2 matrix to qubit q of a dense amplitude vector
/// (qubit 0 = most significant bit).
inline void dense_apply_1q(std::vector<cplx>& psi, const DenseTensor& g, int q, int n) {
  const std::size_t outer = std::size_t{1} << q;
  const std::size_t inner = std::size_t{1} << (n - q - 1);
  const cplx a = g[0], b = g[1], c = g[2], d = g[3];
  for (std::size_t o = 0; o < outer; ++o) {
    cplx* base = psi.data() + o * 2 * inner;
    for (std::size_t i = 0; i < inner; ++i) {
      cplx x0 = base[i], x1 = base[inner + i];
      base[i] = a * x0 + b * x1;
      base[inner + i] = c * x0 + d * x1;
    }
  }
}

/// Apply a 4x4 matrix to adjacent qubits (q, q+1).
inline void dense_apply_2q(std::vector<cplx>& psi, const DenseTensor& g, int q, int n) {
  const std::size_t outer = std::size_t{1} << q;
  const std::size_t inner = std::size_t{1} << (n - q - 2);
  for (std::size_t o = 0; o < outer; ++o) {
    cplx* base = psi.data() + o * 4 * inner;
    for (std::size_t i = 0; i < inner; ++i) {
      cplx x0 = base[i], x1 = base[inner + i], x2 = base[2 * inner + i], x3 = base[3 * inner + i];
      base[i] = g[0] * x0 + g[1] * x1 + g[2] * x2 + g[3] * x3;
      base[inner + i] = g[4] * x0 + g[5] * x1 + g[6] * x2 + g[7] * x3;
      base[2 * inner + i] = g[8] * x0 + g[9] * x1 + g[10] * x2 + g[11] * x3;
      base[3 * inner + i] = g[12] * x0 + g[13] * x1 + g[14] * x2 + g[15] * x3;
    }
  }
}

inline void dense_apply_gate(std::vector<cplx>& psi, const GateOp& g,
                             std::span<const double> theta, int n, bool dagger) {
  DenseTensor m = gate_matrix(g, theta);
  if (dagger) {
    DenseTensor md(m.shape());
    const std::size_t d = m.dim(0);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) md[i * d + j] = std::conj(m[j * d + i]);
    m = std::move(md);
  }
  if (g.two_qubit()) {
    dense_apply_2q(psi, m, g.site, n);
  } else {
    dense_apply_1q(psi, m, g.site, n);
  }
}

/// y += string applied to x. Pauli strings permute basis states with phases,
/// so this is a single pass over the amplitudes.
inline void add_string_apply(const PauliString& term, const std::vector<cplx>& x,
                             std::vector<cplx>& y, int n) {
  std::uint64_t flip = 0;   // X,Y flip the bit
  std::uint64_t zmask = 0;  // Z,Y read the bit
  int y_count = 0;
  for (const auto& [site, p] : term.factors) {
    const std::uint64_t bit = std::uint64_t{1} << (n - 1 - site);
    if (p == 'X') flip |= bit;
    if (p == 'Y') { flip |= bit; zmask |= bit; ++y_count; }
    if (p == 'Z') zmask |= bit;
  }
  // phase bookkeeping: Y|0> = i|1>, Y|1> = -i|0>; Z|1> = -|1>
  const cplx base = term.coefficient * std::pow(cplx{0.0, 1.0}, y_count);
  const std::size_t dim = std::size_t{1} << n;
  for (std::size_t src = 0; src < dim; ++src) {
    // sign from Z/Y factors evaluated on the source bits
    int ones = std::popcount(src & zmask);
    cplx amp = base * ((ones & 1) ? -1.0 : 1.0);
    y[src ^ flip] += amp * x[src];
  }
}

}  // namespace detail

/// Exact 2^n amplitude vector of the circuit (same basis convention as
/// to_statevector).
inline DenseTensor statevector_simulate(const Circuit& c, std::span<const double> theta) {
  if (c.n_qubits > 20) throw capacity_error("statevector_simulate: more than 20 qubits");
  if (theta.size() != static_cast<std::size_t>(c.n_params)) {
    throw argument_error("statevector_simulate: parameter size mismatch");
  }
  const int n = c.n_qubits;
  std::vector<cplx> psi(std::size_t{1} << n, cplx{0.0, 0.0});
  std::size_t idx = 0;
  for (int b : c.initial_bits) idx = (idx << 1) | static_cast<unsigned>(b);
  psi[idx] = 1.0;
  for (const GateOp& g : c.gates) detail::dense_apply_gate(psi, g, theta, n, false);
  const std::size_t dim = psi.size();
  return DenseTensor({dim}, std::move(psi));
}

/// H|x> for H given as Pauli strings.
inline std::vector<cplx> apply_terms(std::span<const PauliString> terms,
                                     const std::vector<cplx>& x, int n) {
  std::vector<cplx> y(x.size(), cplx{0.0, 0.0});
  for (const PauliString& t : terms) detail::add_string_apply(t, x, y, n);
  return y;
}

/// Exact circuit energy <psi(theta)|H|psi(theta)>.
inline double exact_energy(const Circuit& c, std::span<const double> theta,
                           std::span<const PauliString> terms) {
  if (c.n_qubits > 16) throw capacity_error("exact_energy: more than 16 qubits");
  DenseTensor psi = statevector_simulate(c, theta);
  std::vector<cplx> h = apply_terms(terms, psi.data(), c.n_qubits);
  cplx e{0.0, 0.0};
  for (std::size_t k = 0; k < h.size(); ++k) e += std::conj(psi[k]) * h[k];
  if (std::abs(e.imag()) > 1e-9 * std::max(1.0, std::abs(e.real()))) {
    throw numerical_integrity_error("exact_energy: imaginary part too large");
  }
  return e.real();
}

/// Exact energy and gradient in one backward pass over the gates (dense
/// counterpart of the MPS gradient sweep; two state-sized work vectors).
struct ExactEval {
  double energy;
  std::vector<double> grad;
};

inline ExactEval exact_energy_gradient(const Circuit& c, std::span<const double> theta,
                                       std::span<const PauliString> terms) {
  if (c.n_qubits > 16) throw capacity_error("exact_energy_gradient: more than 16 qubits");
  const int n = c.n_qubits;
  DenseTensor psi_t = statevector_simulate(c, theta);
  std::vector<cplx> L = psi_t.data();
  std::vector<cplx> R = apply_terms(terms, L, n);
  cplx e{0.0, 0.0};
  for (std::size_t k = 0; k < L.size(); ++k) e += std::conj(L[k]) * R[k];

  ExactEval out;
  out.energy = e.real();
  out.grad.assign(c.n_params, 0.0);
  std::vector<cplx> tmp(L.size());
  for (auto it = c.gates.rbegin(); it != c.gates.rend(); ++it) {
    const GateOp& g = *it;
    detail::dense_apply_gate(L, g, theta, n, /*dagger=*/true);
    if (g.kind != GateKind::fswap) {
      std::vector<DenseTensor> derivs;
      if (g.kind == GateKind::np) {
        derivs.push_back(np_gate_dtheta(theta[g.slot_theta], theta[g.slot_phi]));
        derivs.push_back(np_gate_dphi(theta[g.slot_theta], theta[g.slot_phi]));
      } else {
        derivs.push_back(rz_gate_dtheta(theta[g.slot_theta]));
      }
      const int slots[2] = {g.slot_theta, g.slot_phi};
      for (std::size_t d = 0; d < derivs.size(); ++d) {
        // dE/dt = 2 Re <L| dU^dag |R>
        tmp = R;
        DenseTensor dag(derivs[d].shape());
        const std::size_t dim = derivs[d].dim(0);
        for (std::size_t i = 0; i < dim; ++i)
          for (std::size_t j = 0; j < dim; ++j)
            dag[i * dim + j] = std::conj(derivs[d][j * dim + i]);
        if (g.two_qubit()) {
          detail::dense_apply_2q(tmp, dag, g.site, n);
        } else {
          detail::dense_apply_1q(tmp, dag, g.site, n);
        }
        cplx acc{0.0, 0.0};
        for (std::size_t k = 0; k < L.size(); ++k) acc += std::conj(L[k]) * tmp[k];
        out.grad[slots[d]] = 2.0 * acc.real();
      }
    }
    detail::dense_apply_gate(R, g, theta, n, /*dagger=*/true);
  }
  return out;
}

/// Basis restriction to fixed per-species occupation numbers
/// (down = even line positions, up = odd).
inline std::vector<std::uint64_t> sector_basis(int n_qubits, int n_up, int n_down) {
  std::vector<std::uint64_t> basis;
  const std::size_t dim = std::size_t{1} << n_qubits;
  for (std::uint64_t b = 0; b < dim; ++b) {
    int up = 0, down = 0;
    for (int q = 0; q < n_qubits; ++q) {
      if ((b >> (n_qubits - 1 - q)) & 1) {
        if (q % 2 == 1) ++up; else ++down;
      }
    }
    if (up == n_up && down == n_down) basis.push_back(b);
  }
  return basis;
}

struct GroundResult {
  double energy = 0.0;
  std::vector<cplx> state;  // full 2^n vector
  double residual = 0.0;
  int iterations = 0;
};

/// Lowest eigenpair of sum(terms) by Lanczos with full reorthogonalization,
/// optionally restricted to a fixed (n_up, n_down) sector.
inline GroundResult exact_ground(std::span<const PauliString> terms, int n_qubits,
                                 std::optional<std::pair<int, int>> sector = std::nullopt) {
  if (n_qubits > 16) throw capacity_error("exact_ground: more than 16 qubits");
  const std::size_t full_dim = std::size_t{1} << n_qubits;

  std::vector<std::uint64_t> basis;
  std::unordered_map<std::uint64_t, std::size_t> rank;
  if (sector.has_value()) {
    basis = sector_basis(n_qubits, sector->first, sector->second);
    if (basis.empty()) throw argument_error("exact_ground: empty sector");
    rank.reserve(basis.size() * 2);
    for (std::size_t k = 0; k < basis.size(); ++k) rank[basis[k]] = k;
  }
  const std::size_t dim = sector ? basis.size() : full_dim;

  // in-sector matvec: Pauli strings map sector basis states to sector basis
  // states (the Hamiltonian conserves the species numbers)
  auto matvec = [&](const std::vector<cplx>& x) {
    if (!sector) return apply_terms(terms, x, n_qubits);
    std::vector<cplx> y(dim, cplx{0.0, 0.0});
    for (const PauliString& t : terms) {
      std::uint64_t flip = 0, zmask = 0;
      int y_count = 0;
      for (const auto& [site, p] : t.factors) {
        const std::uint64_t bit = std::uint64_t{1} << (n_qubits - 1 - site);
        if (p == 'X') flip |= bit;
        if (p == 'Y') { flip |= bit; zmask |= bit; ++y_count; }
        if (p == 'Z') zmask |= bit;
      }
      const cplx base = t.coefficient * std::pow(cplx{0.0, 1.0}, y_count);
      for (std::size_t k = 0; k < dim; ++k) {
        std::uint64_t src = basis[k];
        int ones = std::popcount(src & zmask);
        auto it = rank.find(src ^ flip);
        if (it == rank.end()) continue;  // term leaves the sector: drop
        y[it->second] += base * ((ones & 1) ? -1.0 : 1.0) * x[k];
      }
    }
    return y;
  };

  if (dim == 1) {
    std::vector<cplx> x(1, cplx{1.0, 0.0});
    auto hx = matvec(x);
    GroundResult r;
    r.energy = hx[0].real();
    r.state.assign(full_dim, cplx{0.0, 0.0});
    r.state[sector ? basis[0] : 0] = 1.0;
    return r;
  }

  const int max_iter = static_cast<int>(std::min<std::size_t>(dim, 400));
  std::vector<std::vector<cplx>> V;
  std::vector<double> alpha, beta;

  // deterministic start vector
  std::vector<cplx> v(dim);
  NormalSampler rng(0x5eed5eedULL + dim);
  double nrm = 0;
  for (auto& z : v) {
    z = cplx{rng(0.0, 1.0), 0.0};
    nrm += std::norm(z);
  }
  nrm = std::sqrt(nrm);
  for (auto& z : v) z /= nrm;

  auto dot = [](const std::vector<cplx>& a, const std::vector<cplx>& b) {
    cplx s{0.0, 0.0};
    for (std::size_t k = 0; k < a.size(); ++k) s += std::conj(a[k]) * b[k];
    return s;
  };

  double prev_e = 1e300;
  bool converged = false;
  std::vector<double> ritz;  // weights of the lowest Ritz vector in the Lanczos basis
  for (int it = 0; it < max_iter; ++it) {
    V.push_back(v);
    std::vector<cplx> w = matvec(v);
    double a = dot(V.back(), w).real();
    alpha.push_back(a);
    for (std::size_t k = 0; k < w.size(); ++k) {
      w[k] -= a * V.back()[k];
      if (it > 0) w[k] -= beta.back() * V[it - 1][k];
    }
    // full reorthogonalization keeps the basis clean at this problem size
    for (const auto& q : V) {
      cplx c = dot(q, w);
      for (std::size_t k = 0; k < w.size(); ++k) w[k] -= c * q[k];
    }
    double b = 0;
    for (const auto& z : w) b += std::norm(z);
    b = std::sqrt(b);

    const int m = static_cast<int>(alpha.size());
    std::vector<double> d = alpha, e(beta.begin(), beta.end());
    e.resize(std::max(0, m - 1));
    std::vector<double> z(static_cast<std::size_t>(m) * m);
    int info = LAPACKE_dsteqr(LAPACK_ROW_MAJOR, 'I', m, d.data(), e.data(), z.data(), m);
    if (info != 0) throw numerical_integrity_error("exact_ground: tridiagonal solve failed");
    ritz.resize(m);
    for (int k = 0; k < m; ++k) ritz[k] = z[static_cast<std::size_t>(k) * m];
    converged = (b < 1e-12) || (it > 8 && std::abs(d[0] - prev_e) < 1e-13);
    prev_e = d[0];
    if (converged || it == max_iter - 1 || b < 1e-12) break;
    beta.push_back(b);
    for (std::size_t k = 0; k < w.size(); ++k) v[k] = w[k] / b;
  }

  std::vector<cplx> ground(dim, cplx{0.0, 0.0});
  for (std::size_t k = 0; k < ritz.size(); ++k) {
    for (std::size_t x = 0; x < dim; ++x) ground[x] += ritz[k] * V[k][x];
  }
  double gn = 0;
  for (const auto& zz : ground) gn += std::norm(zz);
  gn = std::sqrt(gn);
  for (auto& zz : ground) zz /= gn;

  GroundResult result;
  result.energy = prev_e;
  result.iterations = static_cast<int>(alpha.size());
  auto hg = matvec(ground);
  double res = 0;
  for (std::size_t x = 0; x < dim; ++x) res += std::norm(hg[x] - result.energy * ground[x]);
  result.residual = std::sqrt(res);
  if (result.residual > 1e-8) {
    throw numerical_integrity_error("exact_ground: Lanczos residual " +
                                    std::to_string(result.residual));
  }
  result.state.assign(full_dim, cplx{0.0, 0.0});
  for (std::size_t x = 0; x < dim; ++x) result.state[sector ? basis[x] : x] = ground[x];
  return result;
}

/// 1 - |<psi0|psi>|^2 for an MPS against a dense reference state.
inline double infidelity(const MatrixProductState& psi, const DenseTensor& psi0) {
  DenseTensor v = to_statevector(psi);
  if (v.size() != psi0.size()) throw argument_error("infidelity: size mismatch");
  cplx ov{0.0, 0.0};
  double n1 = 0, n2 = 0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    ov += std::conj(psi0[k]) * v[k];
    n1 += std::norm(psi0[k]);
    n2 += std::norm(v[k]);
  }
  if (n1 <= 0 || n2 <= 0) throw argument_error("infidelity: zero state");
  return 1.0 - std::norm(ov) / (n1 * n2);
}

/// Upper bound on the CNOT count of the unitaries preparing an arbitrary
/// bond-chi MPS: (23/16) d^2 chi^2 - 3 d chi + 4/3 with
/// d = 2^(ceil(log2 2chi) - log2 2chi).
struct CnotBoundResult {
  std::size_t chi = 1;
  double delta = 1.0;
  double bound = 0.0;
};

inline CnotBoundResult cnot_upper_bound(std::size_t chi) {
  if (chi < 1) throw argument_error("cnot_upper_bound: chi must be >= 1");
  const double l2 = std::log2(2.0 * static_cast<double>(chi));
  const double delta = std::pow(2.0, std::ceil(l2) - l2);
  CnotBoundResult r;
  r.chi = chi;
  r.delta = delta;
  r.bound = 23.0 / 16.0 * delta * delta * static_cast<double>(chi) * static_cast<double>(chi) -
            3.0 * delta * static_cast<double>(chi) + 4.0 / 3.0;
  return r;
}

}  // namespace vtne
