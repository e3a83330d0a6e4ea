#pragma once

#include <optional>
#include <vector>

#include "vtne/tensor.hpp"

namespace vtne {

/// Matrix product state over qubits. Site tensors are rank-3
/// (left bond, physical = 2, right bond); boundary bonds have dimension 1.
/// Qubit 0 is the most significant bit of the computational basis index.
///
/// States are value types: the public gate/MPO operations below return new
/// states and never mutate their inputs. The in-place members they are built
/// from are available for hot loops that own their state.
struct MatrixProductState {
  std::vector<DenseTensor> sites;
  std::optional<int> orthogonality_center;
  /// Sum of relative discarded weights over every truncation this state has
  /// been through; proxy for the accumulated approximation error.
  double discarded_weight = 0.0;

  int n_qubits() const { return static_cast<int>(sites.size()); }

  /// Largest internal bond dimension (1 for a product state).
  std::size_t max_bond_dim() const {
    std::size_t m = 1;
    for (const auto& t : sites) m = std::max(m, t.dim(2));
    return m;
  }

  /// Maximum bond dimension any state on n qubits can need: 2^(n/2).
  static std::size_t chi_max(int n_qubits) { return std::size_t{1} << (n_qubits / 2); }
};

/// Matrix product operator; site tensors are rank-4
/// (left bond, physical out, physical in, right bond).
struct MatrixProductOperator {
  std::vector<DenseTensor> sites;
  int n_qubits() const { return static_cast<int>(sites.size()); }
  std::size_t max_bond_dim() const {
    std::size_t m = 1;
    for (const auto& t : sites) m = std::max(m, t.dim(3));
    return m;
  }
};

/// Basis product state |b0 b1 ... b_{n-1}> with bond dimension 1.
inline MatrixProductState product_state(const std::vector<int>& bits) {
  if (bits.empty()) throw argument_error("product_state: empty bit list");
  MatrixProductState psi;
  psi.sites.reserve(bits.size());
  for (int b : bits) {
    if (b != 0 && b != 1) throw argument_error("product_state: bits must be 0 or 1");
    DenseTensor t({1, 2, 1});
    t[b] = cplx{1.0, 0.0};
    psi.sites.push_back(std::move(t));
  }
  psi.orthogonality_center = 0;
  return psi;
}

namespace detail {

inline void check_site_range(const MatrixProductState& psi, int site, int width) {
  if (site < 0 || site + width > psi.n_qubits()) {
    throw argument_error("gate site out of range");
  }
}

inline void check_unitary(const DenseTensor& g, std::size_t dim) {
  if (g.rank() != 2 || g.dim(0) != dim || g.dim(1) != dim) {
    throw argument_error("gate has wrong shape");
  }
  double err = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      cplx acc{0.0, 0.0};
      for (std::size_t k = 0; k < dim; ++k) acc += std::conj(g[k * dim + i]) * g[k * dim + j];
      if (i == j) acc -= 1.0;
      err += std::norm(acc);
    }
  }
  if (std::sqrt(err) > 1e-8) throw argument_error("gate is not unitary");
}

/// Left-canonicalize site k via QR, absorbing R into site k+1.
inline void qr_step_right(MatrixProductState& psi, int k) {
  DenseTensor& a = psi.sites[k];
  const std::size_t l = a.dim(0), r = a.dim(2);
  const std::size_t rows = l * 2, cols = r;
  const std::size_t kk = std::min(rows, cols);
  std::vector<cplx> work = a.data();
  std::vector<cplx> tau(kk);
  LAPACKE_zgeqrf(LAPACK_ROW_MAJOR, static_cast<int>(rows), static_cast<int>(cols),
                 reinterpret_cast<lapack_complex_double*>(work.data()), static_cast<int>(cols),
                 reinterpret_cast<lapack_complex_double*>(tau.data()));
  // R: kk x cols upper triangle
  DenseTensor rmat({kk, cols});
  for (std::size_t i = 0; i < kk; ++i)
    for (std::size_t j = i; j < cols; ++j) rmat[i * cols + j] = work[i * cols + j];
  LAPACKE_zungqr(LAPACK_ROW_MAJOR, static_cast<int>(rows), static_cast<int>(kk),
                 static_cast<int>(kk), reinterpret_cast<lapack_complex_double*>(work.data()),
                 static_cast<int>(cols), reinterpret_cast<lapack_complex_double*>(tau.data()));
  DenseTensor q({rows, kk});
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < kk; ++j) q[i * kk + j] = work[i * cols + j];
  psi.sites[k] = q.reshaped({l, 2, kk});
  psi.sites[k + 1] = contract(rmat, psi.sites[k + 1], {{1, 0}});
}

/// Right-canonicalize site k via LQ, absorbing L into site k-1.
inline void qr_step_left(MatrixProductState& psi, int k) {
  DenseTensor& a = psi.sites[k];
  const std::size_t l = a.dim(0), r = a.dim(2);
  const std::size_t rows = l, cols = 2 * r;
  const std::size_t kk = std::min(rows, cols);
  std::vector<cplx> work = a.data();
  std::vector<cplx> tau(kk);
  LAPACKE_zgelqf(LAPACK_ROW_MAJOR, static_cast<int>(rows), static_cast<int>(cols),
                 reinterpret_cast<lapack_complex_double*>(work.data()), static_cast<int>(cols),
                 reinterpret_cast<lapack_complex_double*>(tau.data()));
  DenseTensor lmat({rows, kk});
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j <= std::min(i, kk - 1); ++j) lmat[i * kk + j] = work[i * cols + j];
  LAPACKE_zunglq(LAPACK_ROW_MAJOR, static_cast<int>(kk), static_cast<int>(cols),
                 static_cast<int>(kk), reinterpret_cast<lapack_complex_double*>(work.data()),
                 static_cast<int>(cols), reinterpret_cast<lapack_complex_double*>(tau.data()));
  DenseTensor q({kk, cols});
  for (std::size_t i = 0; i < kk; ++i)
    for (std::size_t j = 0; j < cols; ++j) q[i * cols + j] = work[i * cols + j];
  psi.sites[k] = q.reshaped({kk, 2, r});
  psi.sites[k - 1] = contract(psi.sites[k - 1], lmat, {{2, 0}});
}

}  // namespace detail

/// Move (or establish) the orthogonality center.
inline void shift_center(MatrixProductState& psi, int target) {
  detail::check_site_range(psi, target, 1);
  const int n = psi.n_qubits();
  if (!psi.orthogonality_center.has_value()) {
    for (int k = 0; k < target; ++k) detail::qr_step_right(psi, k);
    for (int k = n - 1; k > target; --k) detail::qr_step_left(psi, k);
  } else {
    int c = *psi.orthogonality_center;
    while (c < target) detail::qr_step_right(psi, c++);
    while (c > target) detail::qr_step_left(psi, c--);
  }
  psi.orthogonality_center = target;
}

/// Apply a 2x2 unitary to one site, in place. Bond dimensions are unchanged
/// and canonical structure is preserved (unitaries on the physical leg keep
/// isometries isometric).
inline void apply_one_qubit_gate_inplace(MatrixProductState& psi, const DenseTensor& gate,
                                         int site) {
  detail::check_site_range(psi, site, 1);
  detail::check_unitary(gate, 2);
  // (l,p,r) with p contracted against gate's column index -> (p', l, r)
  DenseTensor t = contract(gate, psi.sites[site], {{1, 1}});
  psi.sites[site] = t.permuted({1, 0, 2});
}

/// Apply a 4x4 unitary to qubits (site, site+1) with bond cap, in place.
/// The two-site block is formed at the orthogonality center, the gate is
/// contracted in, and the block is split by a truncated SVD.
inline void apply_two_qubit_gate_inplace(MatrixProductState& psi, const DenseTensor& gate,
                                         int site, std::size_t cap,
                                         double cutoff = kSvdCutoff) {
  detail::check_site_range(psi, site, 2);
  detail::check_unitary(gate, 4);
  if (cap == 0) throw argument_error("bond cap must be positive");
  if (!psi.orthogonality_center.has_value() || *psi.orthogonality_center < site ||
      *psi.orthogonality_center > site + 1) {
    shift_center(psi, site);
  }

  const std::size_t l = psi.sites[site].dim(0);
  const std::size_t r = psi.sites[site + 1].dim(2);
  // theta: (l, p1, p2, r)
  DenseTensor theta = contract(psi.sites[site], psi.sites[site + 1], {{2, 0}});
  // gate indexed as (p1' p2', p1 p2)
  DenseTensor g4 = gate.reshaped({2, 2, 2, 2});
  theta = contract(theta, g4, {{1, 2}, {2, 3}});  // -> (l, r, p1', p2')
  theta = theta.permuted({0, 2, 3, 1});           // -> (l, p1', p2', r)

  TruncatedSVD svd = svd_truncate(theta.reshaped({l * 2, 2 * r}), cap, cutoff);
  if (svd.kept() == 0) throw numerical_integrity_error("two-qubit gate produced zero state");
  psi.sites[site] = svd.u.reshaped({l, 2, svd.kept()});
  psi.sites[site + 1] = svd.sv().reshaped({svd.kept(), 2, r});
  psi.orthogonality_center = site + 1;
  psi.discarded_weight += svd.discarded_weight;
}

inline MatrixProductState apply_one_qubit_gate(const MatrixProductState& psi,
                                               const DenseTensor& gate, int site) {
  MatrixProductState out = psi;
  apply_one_qubit_gate_inplace(out, gate, site);
  return out;
}

inline MatrixProductState apply_two_qubit_gate(const MatrixProductState& psi,
                                               const DenseTensor& gate, int site,
                                               std::size_t cap) {
  MatrixProductState out = psi;
  apply_two_qubit_gate_inplace(out, gate, site, cap);
  return out;
}

/// <phi|psi> by a left-to-right transfer contraction.
inline cplx inner_product(const MatrixProductState& phi, const MatrixProductState& psi) {
  if (phi.n_qubits() != psi.n_qubits()) throw argument_error("inner_product: size mismatch");
  // env: (bond of phi^*, bond of psi)
  DenseTensor env({1, 1});
  env[0] = cplx{1.0, 0.0};
  for (int k = 0; k < psi.n_qubits(); ++k) {
    DenseTensor bra = phi.sites[k].conjugated();
    DenseTensor tmp = contract(env, bra, {{0, 0}});      // (psi_bond, p, phi_r)
    env = contract(tmp, psi.sites[k], {{0, 0}, {1, 1}});  // (phi_r, psi_r)
  }
  return env[0];
}

inline double norm(const MatrixProductState& psi) {
  if (psi.orthogonality_center.has_value()) {
    return psi.sites[*psi.orthogonality_center].norm();
  }
  cplx n2 = inner_product(psi, psi);
  return std::sqrt(std::max(0.0, n2.real()));
}

inline MatrixProductState normalize(const MatrixProductState& psi) {
  MatrixProductState out = psi;
  double n = norm(out);
  if (n < 1e-150) throw numerical_integrity_error("normalize: zero-norm state");
  int k = out.orthogonality_center.value_or(0);
  out.sites[k].scale(cplx{1.0 / n, 0.0});
  return out;
}

/// H|psi> approximated with bond cap. Zip-up: MPO sites are contracted in
/// left to right with an SVD at each bond. The forward pass drops only
/// numerically zero singular values (the environment is not isometric there,
/// so capping during it would discard real weight); the cap is applied by a
/// right-to-left compression sweep once the chain is left-canonical.
inline MatrixProductState apply_mpo(const MatrixProductOperator& op,
                                    const MatrixProductState& psi, std::size_t cap,
                                    double cutoff = kSvdCutoff) {
  if (op.n_qubits() != psi.n_qubits()) throw argument_error("apply_mpo: size mismatch");
  if (cap == 0) throw argument_error("apply_mpo: cap must be positive");
  const int n = psi.n_qubits();
  MatrixProductState in = psi;
  shift_center(in, 0);

  const std::size_t no_cap = std::size_t{1} << 62;
  MatrixProductState out;
  out.sites.resize(n);
  // carry: (new left bond, psi bond, mpo bond)
  DenseTensor carry({1, 1, 1});
  carry[0] = cplx{1.0, 0.0};
  double discarded = psi.discarded_weight;
  for (int k = 0; k < n; ++k) {
    DenseTensor t = contract(carry, in.sites[k], {{1, 0}});     // (L, w, p, ar)
    t = contract(t, op.sites[k], {{1, 0}, {2, 2}});             // (L, ar, o, wr)
    t = t.permuted({0, 2, 1, 3});                               // (L, o, ar, wr)
    const std::size_t L = t.dim(0), ar = t.dim(2), wr = t.dim(3);
    if (k == n - 1) {
      out.sites[k] = t.reshaped({L, 2, ar * wr});
    } else {
      TruncatedSVD svd = svd_truncate(t.reshaped({L * 2, ar * wr}), no_cap, cutoff);
      if (svd.kept() == 0) throw numerical_integrity_error("apply_mpo: zero state");
      out.sites[k] = svd.u.reshaped({L, 2, svd.kept()});
      carry = svd.sv().reshaped({svd.kept(), ar, wr});
    }
  }
  // chain is now left-canonical except the last site: truncate to cap
  for (int k = n - 1; k > 0; --k) {
    DenseTensor& a = out.sites[k];
    const std::size_t l = a.dim(0), r = a.dim(2);
    TruncatedSVD svd = svd_truncate(a.reshaped({l, 2 * r}), cap, cutoff);
    if (svd.kept() == 0) throw numerical_integrity_error("apply_mpo: zero state");
    out.sites[k] = svd.v.reshaped({svd.kept(), 2, r});
    discarded += svd.discarded_weight;
    DenseTensor us = svd.us();  // (l, kept)
    out.sites[k - 1] = contract(out.sites[k - 1], us, {{2, 0}});
  }
  out.orthogonality_center = 0;
  out.discarded_weight = discarded;
  return out;
}

/// <psi|H|psi> / <psi|psi>, checked real. The sandwich contraction is exact
/// for the given tensors; only the state itself carries truncation error.
inline double expectation(const MatrixProductState& psi, const MatrixProductOperator& op) {
  if (op.n_qubits() != psi.n_qubits()) throw argument_error("expectation: size mismatch");
  const int n = psi.n_qubits();
  // env: (bra bond, mpo bond, ket bond)
  DenseTensor env({1, 1, 1});
  env[0] = cplx{1.0, 0.0};
  for (int k = 0; k < n; ++k) {
    DenseTensor bra = psi.sites[k].conjugated();
    DenseTensor tmp = contract(env, bra, {{0, 0}});          // (w, ket, p_out, bra_r)
    tmp = contract(tmp, op.sites[k], {{0, 0}, {2, 1}});      // (ket, bra_r, p_in, w_r)
    env = contract(tmp, psi.sites[k], {{0, 0}, {2, 1}});     // (bra_r, w_r, ket_r)
  }
  cplx raw = env[0];
  cplx n2 = inner_product(psi, psi);
  if (n2.real() <= 0.0) throw numerical_integrity_error("expectation: zero-norm state");
  cplx val = raw / n2.real();
  if (std::abs(val.imag()) > 1e-6 * std::max(1.0, std::abs(val.real()))) {
    throw numerical_integrity_error("expectation: imaginary part too large");
  }
  return val.real();
}

/// Amplitude vector (length 2^n) in the shared basis convention.
inline DenseTensor to_statevector(const MatrixProductState& psi) {
  const int n = psi.n_qubits();
  if (n > 20) throw capacity_error("to_statevector: more than 20 qubits");
  // partial: (basis prefix, bond)
  DenseTensor partial({1, 1});
  partial[0] = cplx{1.0, 0.0};
  for (int k = 0; k < n; ++k) {
    DenseTensor next = contract(partial, psi.sites[k], {{1, 0}});  // (prefix, p, r)
    partial = next.reshaped({next.dim(0) * 2, next.dim(2)});
  }
  return partial.reshaped({partial.dim(0)});
}

}  // namespace vtne
