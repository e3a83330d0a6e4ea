#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include <json.hpp>

#include "vtne/hubbard.hpp"

namespace vtne {

enum class GateKind { np, fswap, rz };

/// One gate in line order. Two-qubit gates act on adjacent line indices
/// (site, site+1) by construction. Hopping NP gates carry the
/// (layer, group, bond, spin) identity used to transfer parameters between
/// the single-species and full circuits.
struct GateOp {
  GateKind kind = GateKind::fswap;
  int site = 0;
  int slot_theta = -1;  // NP theta / RZ angle
  int slot_phi = -1;    // NP phi
  // hopping identity (NP hopping gates only)
  int layer = -1;
  int group = -1;
  int bond = -1;
  Spin spin = Spin::down;
  bool onsite = false;

  bool two_qubit() const { return kind != GateKind::rz; }
  int n_slots() const { return kind == GateKind::np ? 2 : (kind == GateKind::rz ? 1 : 0); }
};

/// Parameterized circuit: ordered gates over a qubit line plus the basis
/// string it starts from. Every parameter slot is referenced by exactly one
/// gate.
struct Circuit {
  int n_qubits = 0;
  std::vector<GateOp> gates;
  int n_params = 0;
  std::vector<int> initial_bits;
  // construction metadata (checkpoint rebuilds, parameter embedding)
  int n_x = 0, n_y = 0, layers = 0;
  std::optional<Spin> species;  // set for single-species circuits
};

using ParameterVector = std::vector<double>;

/// Number-preserving two-qubit gate in basis |00>,|01>,|10>,|11>:
/// identity on the empty block, an XX+YY rotation on the single-occupation
/// block, and a phase e^{i phi} on the doubly occupied block.
inline DenseTensor np_gate(double theta, double phi) {
  DenseTensor g({4, 4});
  const double c = std::cos(theta), s = std::sin(theta);
  g[0] = 1.0;
  g[5] = c;
  g[6] = cplx{0.0, s};
  g[9] = cplx{0.0, s};
  g[10] = c;
  g[15] = std::polar(1.0, phi);
  return g;
}

inline DenseTensor np_gate_dtheta(double theta, double phi) {
  DenseTensor g({4, 4});
  const double c = std::cos(theta), s = std::sin(theta);
  g[5] = -s;
  g[6] = cplx{0.0, c};
  g[9] = cplx{0.0, c};
  g[10] = -s;
  return g;
}

inline DenseTensor np_gate_dphi(double theta, double phi) {
  DenseTensor g({4, 4});
  g[15] = cplx{0.0, 1.0} * std::polar(1.0, phi);
  return g;
}

/// Fermionic swap: exchanges neighboring modes and flips the sign of the
/// doubly occupied component. Self-inverse.
inline DenseTensor fswap() {
  DenseTensor g({4, 4});
  g[0] = 1.0;
  g[6] = 1.0;
  g[9] = 1.0;
  g[15] = -1.0;
  return g;
}

inline DenseTensor rz_gate(double theta) {
  DenseTensor g({2, 2});
  g[0] = std::polar(1.0, -theta / 2);
  g[3] = std::polar(1.0, theta / 2);
  return g;
}

inline DenseTensor rz_gate_dtheta(double theta) {
  DenseTensor g({2, 2});
  g[0] = cplx{0.0, -0.5} * std::polar(1.0, -theta / 2);
  g[3] = cplx{0.0, 0.5} * std::polar(1.0, theta / 2);
  return g;
}

/// Gate matrix for one GateOp at the given parameters.
inline DenseTensor gate_matrix(const GateOp& g, std::span<const double> theta) {
  switch (g.kind) {
    case GateKind::np: return np_gate(theta[g.slot_theta], theta[g.slot_phi]);
    case GateKind::fswap: return fswap();
    case GateKind::rz: return rz_gate(theta[g.slot_theta]);
  }
  throw argument_error("unknown gate kind");
}

namespace detail {

struct CircuitBuilder {
  Circuit c;

  int add_slot() { return c.n_params++; }

  void rz(int q) {
    GateOp g;
    g.kind = GateKind::rz;
    g.site = q;
    g.slot_theta = add_slot();
    c.gates.push_back(g);
  }
  void fswap_at(int p) {
    GateOp g;
    g.kind = GateKind::fswap;
    g.site = p;
    c.gates.push_back(g);
  }
  void np(int p, int layer, int group, int bond, Spin spin, bool onsite) {
    GateOp g;
    g.kind = GateKind::np;
    g.site = p;
    g.slot_theta = add_slot();
    g.slot_phi = add_slot();
    g.layer = layer;
    g.group = group;
    g.bond = bond;
    g.spin = spin;
    g.onsite = onsite;
    c.gates.push_back(g);
  }
};

/// Emit the FSWAP sequence that moves the site block at `from` next to the
/// block at `to` (block width = 2 qubits for the full register, 1 for a
/// single-species register), returning the emitted swaps so they can be
/// undone in reverse.
inline std::vector<int> shuttle_blocks(CircuitBuilder& b, int lo, int hi, int width) {
  std::vector<int> swaps;
  for (int s = hi; s > lo + 1; --s) {
    // swap blocks at (s-1, s)
    int p = width * (s - 1);
    if (width == 1) {
      swaps.push_back(p);
    } else {
      swaps.push_back(p + 1);
      swaps.push_back(p);
      swaps.push_back(p + 2);
      swaps.push_back(p + 1);
    }
  }
  for (int p : swaps) b.fswap_at(p);
  return swaps;
}

}  // namespace detail

/// Lattice/layer presets for the benchmark configurations.
inline std::optional<int> preset_layers(int n_x, int n_y) {
  if (n_y == 1) {
    if (n_x == 4) return 4;
    if (n_x == 8) return 7;
    if (n_x == 12) return 11;
    if (n_x == 16) return 14;
  }
  if (n_x == 4) {
    if (n_y == 2) return 10;
    if (n_y == 3) return 17;
    if (n_y == 4) return 24;
  }
  return std::nullopt;
}

/// Half-filled checkerboard occupation: up electrons on even snake sites,
/// down electrons on odd snake sites.
inline std::vector<int> checkerboard_bits(const LatticeConfig& lat) {
  std::vector<int> bits(lat.n_qubits(), 0);
  for (int s = 0; s < lat.n_sites(); ++s) bits[2 * s + (s % 2 == 0 ? 1 : 0)] = 1;
  return bits;
}

/// Full number-preserving ansatz: an Rz layer on every qubit, then `layers`
/// repetitions of onsite NP gates followed by the four hopping groups, each
/// bond routed to adjacency with fermionic swaps and restored afterwards.
inline Circuit build_np_ansatz(const LatticeConfig& lat, int layers) {
  lat.validate();
  if (layers < 1) throw argument_error("build_np_ansatz: layers must be >= 1");
  detail::CircuitBuilder b;
  b.c.n_qubits = lat.n_qubits();
  b.c.initial_bits = checkerboard_bits(lat);
  b.c.n_x = lat.n_x;
  b.c.n_y = lat.n_y;
  b.c.layers = layers;

  for (int q = 0; q < lat.n_qubits(); ++q) b.rz(q);

  const auto groups = hopping_groups(lat);
  for (int layer = 0; layer < layers; ++layer) {
    for (int s = 0; s < lat.n_sites(); ++s) {
      b.np(2 * s, layer, -1, s, Spin::down, /*onsite=*/true);
    }
    for (int g = 0; g < 4; ++g) {
      for (std::size_t bid = 0; bid < groups[g].size(); ++bid) {
        const Bond& bond = groups[g][bid];
        int sa = lat.site_index(bond.i0, bond.j0);
        int sb = lat.site_index(bond.i1, bond.j1);
        int lo = std::min(sa, sb), hi = std::max(sa, sb);
        auto swaps = detail::shuttle_blocks(b, lo, hi, 2);
        int p = 2 * lo;
        b.fswap_at(p + 1);
        b.np(p, layer, g, static_cast<int>(bid), Spin::down, false);
        b.np(p + 2, layer, g, static_cast<int>(bid), Spin::up, false);
        b.fswap_at(p + 1);
        for (auto it = swaps.rbegin(); it != swaps.rend(); ++it) b.fswap_at(*it);
      }
    }
  }
  return b.c;
}

/// Single-species ansatz on n_sites qubits: hopping layers only, no onsite
/// gates and no spin-crossing swaps. The up species starts on even snake
/// sites, the down species on odd ones.
inline Circuit build_noninteracting_ansatz(const LatticeConfig& lat, int layers, Spin spin) {
  lat.validate();
  if (layers < 1) throw argument_error("build_noninteracting_ansatz: layers must be >= 1");
  detail::CircuitBuilder b;
  b.c.n_qubits = lat.n_sites();
  b.c.initial_bits.assign(lat.n_sites(), 0);
  for (int s = 0; s < lat.n_sites(); ++s) {
    if (s % 2 == (spin == Spin::up ? 0 : 1)) b.c.initial_bits[s] = 1;
  }
  b.c.n_x = lat.n_x;
  b.c.n_y = lat.n_y;
  b.c.layers = layers;
  b.c.species = spin;

  for (int q = 0; q < lat.n_sites(); ++q) b.rz(q);

  const auto groups = hopping_groups(lat);
  for (int layer = 0; layer < layers; ++layer) {
    for (int g = 0; g < 4; ++g) {
      for (std::size_t bid = 0; bid < groups[g].size(); ++bid) {
        const Bond& bond = groups[g][bid];
        int sa = lat.site_index(bond.i0, bond.j0);
        int sb = lat.site_index(bond.i1, bond.j1);
        int lo = std::min(sa, sb), hi = std::max(sa, sb);
        auto swaps = detail::shuttle_blocks(b, lo, hi, 1);
        b.np(lo, layer, g, static_cast<int>(bid), spin, false);
        for (auto it = swaps.rbegin(); it != swaps.rend(); ++it) b.fswap_at(*it);
      }
    }
  }
  return b.c;
}

/// Copy species-optimized hopping parameters into a full-circuit vector by
/// (layer, group, bond, spin) identity; onsite and Rz slots stay zero.
inline ParameterVector embed_noninteracting_params(const ParameterVector& up,
                                                   const ParameterVector& down,
                                                   const Circuit& full) {
  if (full.species.has_value()) throw argument_error("embed: target must be the full circuit");
  LatticeConfig lat{full.n_x, full.n_y};
  Circuit up_c = build_noninteracting_ansatz(lat, full.layers, Spin::up);
  Circuit dn_c = build_noninteracting_ansatz(lat, full.layers, Spin::down);
  if (up.size() != static_cast<std::size_t>(up_c.n_params) ||
      down.size() != static_cast<std::size_t>(dn_c.n_params)) {
    throw argument_error("embed: species parameter vectors do not match the circuit layers");
  }

  // (layer, group, bond) -> (theta, phi), one map per species
  auto collect = [](const Circuit& c, const ParameterVector& v) {
    std::map<std::tuple<int, int, int>, std::pair<double, double>> m;
    for (const GateOp& g : c.gates) {
      if (g.kind == GateKind::np && !g.onsite) {
        m[{g.layer, g.group, g.bond}] = {v[g.slot_theta], v[g.slot_phi]};
      }
    }
    return m;
  };
  auto up_m = collect(up_c, up);
  auto dn_m = collect(dn_c, down);

  ParameterVector out(full.n_params, 0.0);
  for (const GateOp& g : full.gates) {
    if (g.kind != GateKind::np || g.onsite) continue;
    const auto& m = (g.spin == Spin::up) ? up_m : dn_m;
    auto it = m.find({g.layer, g.group, g.bond});
    if (it == m.end()) throw argument_error("embed: no matching species gate");
    out[g.slot_theta] = it->second.first;
    out[g.slot_phi] = it->second.second;
  }
  return out;
}

/// Contract the circuit into an MPS with bond cap. The returned state carries
/// the total discarded weight accumulated over all truncations.
inline MatrixProductState circuit_to_mps(const Circuit& c, std::span<const double> theta,
                                         std::size_t cap) {
  if (theta.size() != static_cast<std::size_t>(c.n_params)) {
    throw argument_error("circuit_to_mps: parameter vector size mismatch");
  }
  MatrixProductState psi = product_state(c.initial_bits);
  for (const GateOp& g : c.gates) {
    DenseTensor m = gate_matrix(g, theta);
    if (g.two_qubit()) {
      apply_two_qubit_gate_inplace(psi, m, g.site, cap);
    } else {
      apply_one_qubit_gate_inplace(psi, m, g.site);
    }
  }
  return psi;
}

inline nlohmann::json circuit_to_json(const Circuit& c) {
  nlohmann::json gates = nlohmann::json::array();
  for (const GateOp& g : c.gates) {
    nlohmann::json jg;
    jg["kind"] = (g.kind == GateKind::np) ? "NP" : (g.kind == GateKind::rz ? "RZ" : "FSWAP");
    jg["site"] = g.site;
    if (g.kind == GateKind::np) jg["slots"] = {g.slot_theta, g.slot_phi};
    if (g.kind == GateKind::rz) jg["slots"] = {g.slot_theta};
    gates.push_back(std::move(jg));
  }
  return nlohmann::json{{"n_qubits", c.n_qubits},
                        {"n_params", c.n_params},
                        {"n_x", c.n_x},
                        {"n_y", c.n_y},
                        {"layers", c.layers},
                        {"species", c.species.has_value()
                                        ? (c.species == Spin::up ? "up" : "down")
                                        : "full"},
                        {"initial_bits", c.initial_bits},
                        {"gates", std::move(gates)}};
}

/// FNV-1a over the canonical serialization; stable across runs and platforms.
inline std::uint64_t circuit_hash(const Circuit& c) {
  std::string s = circuit_to_json(c).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace vtne
