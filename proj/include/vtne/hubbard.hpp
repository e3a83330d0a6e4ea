#pragma once

#include <array>
#include <map>
#include <span>
#include <vector>

#include "vtne/mps.hpp"

namespace vtne {

enum class Spin { down = 0, up = 1 };

/// Rectangular Fermi-Hubbard lattice with open boundaries.
/// Half filling: electron count equals the site count, split between the
/// species as evenly as the site count allows.
struct LatticeConfig {
  int n_x = 1;
  int n_y = 1;
  double t = 1.0;
  double u = 2.0;

  int n_sites() const { return n_x * n_y; }
  int n_qubits() const { return 2 * n_sites(); }
  int n_electrons() const { return n_sites(); }
  int n_up() const { return (n_sites() + 1) / 2; }
  int n_down() const { return n_sites() / 2; }

  void validate() const {
    if (n_x < 1 || n_y < 1) throw argument_error("lattice extents must be positive");
  }

  /// Row-major snake over sites: row 0 left to right, row 1 right to left, ...
  int site_index(int i, int j) const {
    if (i < 0 || i >= n_x || j < 0 || j >= n_y) throw argument_error("site out of range");
    return j * n_x + (j % 2 == 0 ? i : n_x - 1 - i);
  }
};

struct QubitLabel {
  int i = 0;
  int j = 0;
  Spin spin = Spin::down;
};

/// Line position of a qubit: (i,j,down) sits immediately left of (i,j,up).
inline int qubit_index(const QubitLabel& label, const LatticeConfig& lattice) {
  return 2 * lattice.site_index(label.i, label.j) + (label.spin == Spin::up ? 1 : 0);
}

/// One nearest-neighbor lattice bond (site coordinates).
struct Bond {
  int i0, j0, i1, j1;
  bool operator==(const Bond&) const = default;
};

/// The four commuting hopping groups, in the order they appear within an
/// ansatz layer: even-column horizontal, odd-column horizontal,
/// even-row vertical, odd-row vertical. 1D lattices have empty vertical
/// groups.
inline std::array<std::vector<Bond>, 4> hopping_groups(const LatticeConfig& lat) {
  std::array<std::vector<Bond>, 4> groups;
  for (int j = 0; j < lat.n_y; ++j)
    for (int i = 0; i + 1 < lat.n_x; i += 2) groups[0].push_back({i, j, i + 1, j});
  for (int j = 0; j < lat.n_y; ++j)
    for (int i = 1; i + 1 < lat.n_x; i += 2) groups[1].push_back({i, j, i + 1, j});
  for (int j = 0; j + 1 < lat.n_y; j += 2)
    for (int i = 0; i < lat.n_x; ++i) groups[2].push_back({i, j, i, j + 1});
  for (int j = 1; j + 1 < lat.n_y; j += 2)
    for (int i = 0; i < lat.n_x; ++i) groups[3].push_back({i, j, i, j + 1});
  return groups;
}

/// Real-coefficient Pauli string; identity on every site not listed.
struct PauliString {
  double coefficient = 0.0;
  std::map<int, char> factors;  // site -> 'X' | 'Y' | 'Z'
};

/// Jordan-Wigner expansion of the Hubbard Hamiltonian on the snake line.
/// Each spin-resolved hopping bond contributes -t/2 (X Z..Z X + Y Z..Z Y);
/// each site contributes U/4 (I - Z_dn - Z_up + Z_dn Z_up).
inline std::vector<PauliString> jordan_wigner_terms(const LatticeConfig& lat) {
  lat.validate();
  std::vector<PauliString> terms;
  for (const auto& group : hopping_groups(lat)) {
    for (const Bond& b : group) {
      for (Spin s : {Spin::down, Spin::up}) {
        int qa = qubit_index({b.i0, b.j0, s}, lat);
        int qb = qubit_index({b.i1, b.j1, s}, lat);
        int lo = std::min(qa, qb), hi = std::max(qa, qb);
        PauliString xs{-lat.t / 2, {}}, ys{-lat.t / 2, {}};
        xs.factors[lo] = 'X';
        ys.factors[lo] = 'Y';
        for (int q = lo + 1; q < hi; ++q) {
          xs.factors[q] = 'Z';
          ys.factors[q] = 'Z';
        }
        xs.factors[hi] = 'X';
        ys.factors[hi] = 'Y';
        terms.push_back(std::move(xs));
        terms.push_back(std::move(ys));
      }
    }
  }
  for (int j = 0; j < lat.n_y; ++j) {
    for (int i = 0; i < lat.n_x; ++i) {
      int qd = qubit_index({i, j, Spin::down}, lat);
      int qu = qubit_index({i, j, Spin::up}, lat);
      double u4 = lat.u / 4;
      terms.push_back({u4, {}});
      terms.push_back({-u4, {{qd, 'Z'}}});
      terms.push_back({-u4, {{qu, 'Z'}}});
      terms.push_back({u4, {{qd, 'Z'}, {qu, 'Z'}}});
    }
  }
  return terms;
}

/// Hopping Hamiltonian of one spin species on the n_sites-qubit register
/// (one qubit per site, snake order). Used by the non-interacting stage.
inline std::vector<PauliString> species_hopping_terms(const LatticeConfig& lat) {
  lat.validate();
  std::vector<PauliString> terms;
  for (const auto& group : hopping_groups(lat)) {
    for (const Bond& b : group) {
      int qa = lat.site_index(b.i0, b.j0);
      int qb = lat.site_index(b.i1, b.j1);
      int lo = std::min(qa, qb), hi = std::max(qa, qb);
      PauliString xs{-lat.t / 2, {}}, ys{-lat.t / 2, {}};
      xs.factors[lo] = 'X';
      ys.factors[lo] = 'Y';
      for (int q = lo + 1; q < hi; ++q) {
        xs.factors[q] = 'Z';
        ys.factors[q] = 'Z';
      }
      xs.factors[hi] = 'X';
      ys.factors[hi] = 'Y';
      terms.push_back(std::move(xs));
      terms.push_back(std::move(ys));
    }
  }
  return terms;
}

namespace detail {

inline DenseTensor pauli_matrix(char p) {
  DenseTensor m({2, 2});
  switch (p) {
    case 'I': m[0] = 1.0; m[3] = 1.0; break;
    case 'X': m[1] = 1.0; m[2] = 1.0; break;
    case 'Y': m[1] = cplx{0.0, -1.0}; m[2] = cplx{0.0, 1.0}; break;
    case 'Z': m[0] = 1.0; m[3] = -1.0; break;
    default: throw argument_error("unknown Pauli factor");
  }
  return m;
}

/// Bond-1 MPO of a single Pauli string (coefficient folded into site 0).
inline MatrixProductOperator string_mpo(const PauliString& term, int n_qubits) {
  MatrixProductOperator op;
  op.sites.reserve(n_qubits);
  for (int q = 0; q < n_qubits; ++q) {
    auto it = term.factors.find(q);
    DenseTensor m = pauli_matrix(it == term.factors.end() ? 'I' : it->second);
    if (q == 0) m.scale(term.coefficient);
    op.sites.push_back(m.reshaped({1, 2, 2, 1}));
  }
  return op;
}

/// Direct sum on the virtual bonds (boundaries concatenated, interior
/// block-diagonal).
inline MatrixProductOperator mpo_add(const MatrixProductOperator& a,
                                     const MatrixProductOperator& b) {
  const int n = a.n_qubits();
  MatrixProductOperator out;
  out.sites.reserve(n);
  for (int k = 0; k < n; ++k) {
    const DenseTensor& x = a.sites[k];
    const DenseTensor& y = b.sites[k];
    std::size_t lx = x.dim(0), rx = x.dim(3), ly = y.dim(0), ry = y.dim(3);
    std::size_t l = (k == 0) ? 1 : lx + ly;
    std::size_t r = (k == n - 1) ? 1 : rx + ry;
    DenseTensor z({l, 2, 2, r});
    auto put = [&](const DenseTensor& src, std::size_t loff, std::size_t roff) {
      for (std::size_t a0 = 0; a0 < src.dim(0); ++a0)
        for (std::size_t p = 0; p < 2; ++p)
          for (std::size_t q = 0; q < 2; ++q)
            for (std::size_t b0 = 0; b0 < src.dim(3); ++b0)
              z.at({(k == 0) ? 0 : a0 + loff, p, q, (k == n - 1) ? 0 : b0 + roff}) +=
                  src.at({a0, p, q, b0});
    };
    put(x, 0, 0);
    put(y, lx, rx);
    out.sites.push_back(std::move(z));
  }
  return out;
}

/// Exact compression: right-canonicalize with LQ, then a left-to-right SVD
/// sweep dropping only relative-1e-12 singular values.
inline void mpo_compress(MatrixProductOperator& op) {
  const int n = op.n_qubits();
  const std::size_t no_cap = std::size_t{1} << 62;
  // right-canonicalize (LQ) from the right edge
  for (int k = n - 1; k > 0; --k) {
    DenseTensor& a = op.sites[k];
    std::size_t l = a.dim(0), r = a.dim(3);
    TruncatedSVD svd = svd_truncate(a.reshaped({l, 4 * r}), no_cap, kSvdCutoff);
    op.sites[k] = svd.v.reshaped({svd.kept(), 2, 2, r});
    DenseTensor us = svd.us();  // (l, kept)
    op.sites[k - 1] = contract(op.sites[k - 1], us, {{3, 0}});
  }
  // left-to-right sweep
  for (int k = 0; k + 1 < n; ++k) {
    DenseTensor& a = op.sites[k];
    std::size_t l = a.dim(0), r = a.dim(3);
    TruncatedSVD svd = svd_truncate(a.reshaped({l * 4, r}), no_cap, kSvdCutoff);
    op.sites[k] = svd.u.reshaped({l, 2, 2, svd.kept()});
    DenseTensor sv = svd.sv();  // (kept, r)
    op.sites[k + 1] = contract(sv, op.sites[k + 1], {{1, 0}});
  }
}

}  // namespace detail

/// MPO equal to the sum of the given Pauli strings, built by iterative
/// sum-and-compress.
inline MatrixProductOperator build_mpo(std::span<const PauliString> terms, int n_qubits) {
  if (n_qubits < 1) throw argument_error("build_mpo: need at least one qubit");
  for (const auto& t : terms) {
    if (!t.factors.empty() &&
        (t.factors.begin()->first < 0 || t.factors.rbegin()->first >= n_qubits)) {
      throw argument_error("build_mpo: site index out of range");
    }
  }
  if (terms.empty()) {
    PauliString zero{0.0, {}};
    return detail::string_mpo(zero, n_qubits);
  }
  MatrixProductOperator acc = detail::string_mpo(terms[0], n_qubits);
  int since_compress = 0;
  for (std::size_t k = 1; k < terms.size(); ++k) {
    acc = detail::mpo_add(acc, detail::string_mpo(terms[k], n_qubits));
    if (++since_compress == 8) {
      detail::mpo_compress(acc);
      since_compress = 0;
    }
  }
  detail::mpo_compress(acc);
  return acc;
}

/// Total occupation-number operator sum_i (I - Z_i)/2.
inline MatrixProductOperator number_mpo(int n_qubits) {
  std::vector<PauliString> terms;
  terms.push_back({0.5 * n_qubits, {}});
  for (int q = 0; q < n_qubits; ++q) terms.push_back({-0.5, {{q, 'Z'}}});
  return build_mpo(terms, n_qubits);
}

/// The Hubbard Hamiltonian as an MPO.
inline MatrixProductOperator hubbard_mpo(const LatticeConfig& lat) {
  auto terms = jordan_wigner_terms(lat);
  return build_mpo(terms, lat.n_qubits());
}

}  // namespace vtne
