#include "vtne/hubbard.hpp"

#include <gtest/gtest.h>

using namespace vtne;

namespace {

// dense matrix of a Pauli-string sum, test-side oracle
std::vector<cplx> terms_to_dense(std::span<const PauliString> terms, int n) {
  const std::size_t dim = std::size_t{1} << n;
  std::vector<cplx> h(dim * dim, cplx{0, 0});
  for (const auto& term : terms) {
    for (std::size_t src = 0; src < dim; ++src) {
      cplx val = term.coefficient;
      std::size_t dst = src;
      for (const auto& [site, p] : term.factors) {
        std::size_t bit = (src >> (n - 1 - site)) & 1;
        if (p == 'Z') {
          if (bit) val = -val;
        } else if (p == 'X') {
          dst ^= std::size_t{1} << (n - 1 - site);
        } else {
          dst ^= std::size_t{1} << (n - 1 - site);
          val *= bit ? cplx{0, -1} : cplx{0, 1};
        }
      }
      h[dst * dim + src] += val;
    }
  }
  return h;
}

std::vector<cplx> mpo_to_dense(const MatrixProductOperator& op) {
  const int n = op.n_qubits();
  DenseTensor acc({1, 1, 1});
  acc[0] = cplx{1, 0};
  for (int k = 0; k < n; ++k) {
    // acc (O, I, w) * site (w, o, i, w') -> (O, I, o, i, w') -> (O*2, I*2, w')
    DenseTensor t = contract(acc, op.sites[k], {{2, 0}});
    t = t.permuted({0, 2, 1, 3, 4});
    acc = t.reshaped({t.dim(0) * 2, t.dim(2) * 2, t.dim(4)});
  }
  const std::size_t dim = std::size_t{1} << n;
  std::vector<cplx> out(dim * dim);
  for (std::size_t k = 0; k < dim * dim; ++k) out[k] = acc[k];
  return out;
}

std::vector<double> dense_eigvals(std::vector<cplx> h, std::size_t dim) {
  std::vector<double> w(dim);
  int info = LAPACKE_zheevd(LAPACK_ROW_MAJOR, 'N', 'U', static_cast<int>(dim),
                            reinterpret_cast<lapack_complex_double*>(h.data()),
                            static_cast<int>(dim), w.data());
  EXPECT_EQ(info, 0);
  return w;
}

double free_fermion_energy(const LatticeConfig& lat, int n_fermions) {
  const int ns = lat.n_sites();
  std::vector<double> a(static_cast<std::size_t>(ns) * ns, 0.0);
  for (const auto& group : hopping_groups(lat)) {
    for (const Bond& b : group) {
      int sa = lat.site_index(b.i0, b.j0), sb = lat.site_index(b.i1, b.j1);
      a[static_cast<std::size_t>(sa) * ns + sb] = -lat.t;
      a[static_cast<std::size_t>(sb) * ns + sa] = -lat.t;
    }
  }
  std::vector<double> w(ns);
  LAPACKE_dsyevd(LAPACK_ROW_MAJOR, 'N', 'U', ns, a.data(), ns, w.data());
  double e = 0;
  for (int k = 0; k < n_fermions; ++k) e += w[k];
  return e;
}

}  // namespace

TEST(Lattice, QubitIndexOrdering) {
  LatticeConfig lat{3, 2};
  EXPECT_EQ(qubit_index({0, 0, Spin::down}, lat), 0);
  EXPECT_EQ(qubit_index({0, 0, Spin::up}, lat), 1);
  // snake: row 1 runs right-to-left, so (2,1) comes directly after (2,0)
  EXPECT_EQ(lat.site_index(2, 1), 3);
  EXPECT_EQ(lat.site_index(0, 1), 5);
  EXPECT_EQ(qubit_index({0, 1, Spin::up}, lat), lat.n_qubits() - 1);
  EXPECT_THROW(qubit_index({3, 0, Spin::up}, lat), argument_error);
}

TEST(Lattice, QubitIndexBijective) {
  for (auto [nx, ny] : {std::pair{4, 1}, {2, 2}, {4, 3}}) {
    LatticeConfig lat{nx, ny};
    std::vector<int> seen(lat.n_qubits(), 0);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        for (Spin s : {Spin::down, Spin::up}) ++seen[qubit_index({i, j, s}, lat)];
    for (int c : seen) EXPECT_EQ(c, 1);
  }
}

TEST(JordanWigner, TermCount1D) {
  // 2 sites: 2 spin-resolved bonds -> 4 hopping strings; 2 sites x 4 onsite pieces
  LatticeConfig lat{2, 1};
  auto terms = jordan_wigner_terms(lat);
  EXPECT_EQ(terms.size(), 12u);
  int hopping = 0, onsite = 0;
  for (const auto& t : terms) {
    bool has_xy = false;
    for (const auto& [q, p] : t.factors) has_xy |= (p != 'Z');
    if (has_xy) ++hopping; else ++onsite;
  }
  EXPECT_EQ(hopping, 4);
  EXPECT_EQ(onsite, 8);
}

TEST(JordanWigner, HoppingStringStructure) {
  // same-site down/up never hop; same-spin 1D neighbors have exactly one interior Z
  LatticeConfig lat{2, 1};
  auto terms = jordan_wigner_terms(lat);
  for (const auto& t : terms) {
    std::vector<std::pair<int, char>> xy;
    for (const auto& [q, p] : t.factors)
      if (p != 'Z') xy.emplace_back(q, p);
    if (xy.empty()) continue;
    ASSERT_EQ(xy.size(), 2u);
    EXPECT_EQ(xy[0].second, xy[1].second);            // XX or YY
    EXPECT_EQ(xy[1].first - xy[0].first, 2);          // line distance 2 (same spin)
    EXPECT_EQ(t.factors.count(xy[0].first + 1), 1u);  // one interior Z
    EXPECT_NEAR(t.coefficient, -0.5, 1e-15);
  }
}

TEST(JordanWigner, TwoSiteGroundEnergy) {
  LatticeConfig lat{2, 1};
  auto terms = jordan_wigner_terms(lat);
  auto h = terms_to_dense(terms, 4);
  auto w = dense_eigvals(std::move(h), 16);
  EXPECT_NEAR(w[0], 1.0 - std::sqrt(5.0), 1e-12);
}

TEST(JordanWigner, FreeFermion4x1) {
  LatticeConfig lat{4, 1};
  lat.u = 0.0;
  auto terms = jordan_wigner_terms(lat);
  auto h = terms_to_dense(terms, 8);
  auto w = dense_eigvals(std::move(h), 256);
  // two species, two fermions each at U=0
  double expected = 2.0 * free_fermion_energy(lat, 2);
  EXPECT_NEAR(expected, -4.47213595499958, 1e-10);
  EXPECT_NEAR(w[0], expected, 1e-10);
}

TEST(JordanWigner, HermitianAndNumberConserving) {
  for (auto [nx, ny] : {std::pair{3, 1}, {2, 2}}) {
    LatticeConfig lat{nx, ny};
    auto terms = jordan_wigner_terms(lat);
    const int n = lat.n_qubits();
    const std::size_t dim = std::size_t{1} << n;
    auto h = terms_to_dense(terms, n);
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t c = 0; c < dim; ++c)
        EXPECT_LT(std::abs(h[r * dim + c] - std::conj(h[c * dim + r])), 1e-12);
    // [H, N] = 0
    std::vector<PauliString> nterms;
    nterms.push_back({0.5 * n, {}});
    for (int q = 0; q < n; ++q) nterms.push_back({-0.5, {{q, 'Z'}}});
    auto nmat = terms_to_dense(nterms, n);
    double comm = 0;
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t c = 0; c < dim; ++c) {
        cplx hn{0, 0}, nh{0, 0};
        for (std::size_t k = 0; k < dim; ++k) {
          hn += h[r * dim + k] * nmat[k * dim + c];
          nh += nmat[r * dim + k] * h[k * dim + c];
        }
        comm = std::max(comm, std::abs(hn - nh));
      }
    EXPECT_LT(comm, 1e-10);
  }
}

TEST(HubbardMpo, SingleZTermExpectation) {
  std::vector<PauliString> terms = {{1.0, {{0, 'Z'}}}};
  MatrixProductOperator op = build_mpo(terms, 3);
  MatrixProductState zero = product_state({0, 0, 0});
  EXPECT_NEAR(expectation(zero, op), 1.0, 1e-12);
}

TEST(HubbardMpo, CommutingZTermsAdd) {
  std::vector<PauliString> za = {{0.7, {{0, 'Z'}}}};
  std::vector<PauliString> zb = {{-0.3, {{2, 'Z'}}}};
  std::vector<PauliString> both = {za[0], zb[0]};
  MatrixProductState psi = product_state({0, 1, 1});
  double ea = expectation(psi, build_mpo(za, 3));
  double eb = expectation(psi, build_mpo(zb, 3));
  double eab = expectation(psi, build_mpo(both, 3));
  EXPECT_NEAR(eab, ea + eb, 1e-12);
}

TEST(HubbardMpo, DenseEquality4x1) {
  LatticeConfig lat{4, 1};
  auto terms = jordan_wigner_terms(lat);
  MatrixProductOperator op = hubbard_mpo(lat);
  auto lhs = mpo_to_dense(op);
  auto rhs = terms_to_dense(terms, 8);
  double err = 0;
  for (std::size_t k = 0; k < lhs.size(); ++k) err = std::max(err, std::abs(lhs[k] - rhs[k]));
  EXPECT_LT(err, 1e-10);
}

TEST(HubbardMpo, DenseEquality2x2AndSpecies) {
  LatticeConfig lat{2, 2};
  auto terms = jordan_wigner_terms(lat);
  auto lhs = mpo_to_dense(build_mpo(terms, 8));
  auto rhs = terms_to_dense(terms, 8);
  double err = 0;
  for (std::size_t k = 0; k < lhs.size(); ++k) err = std::max(err, std::abs(lhs[k] - rhs[k]));
  EXPECT_LT(err, 1e-10);

  auto sp = species_hopping_terms(lat);
  auto lhs2 = mpo_to_dense(build_mpo(sp, lat.n_sites()));
  auto rhs2 = terms_to_dense(sp, lat.n_sites());
  double err2 = 0;
  for (std::size_t k = 0; k < lhs2.size(); ++k) err2 = std::max(err2, std::abs(lhs2[k] - rhs2[k]));
  EXPECT_LT(err2, 1e-10);
}

TEST(HubbardMpo, OutOfRangeIndexThrows) {
  std::vector<PauliString> terms = {{1.0, {{5, 'Z'}}}};
  EXPECT_THROW(build_mpo(terms, 3), argument_error);
}

TEST(HubbardMpo, NumberMpoValues) {
  MatrixProductState zeros = product_state({0, 0, 0, 0});
  MatrixProductState ones = product_state({1, 1, 1, 1});
  MatrixProductOperator n4 = number_mpo(4);
  EXPECT_NEAR(expectation(zeros, n4), 0.0, 1e-12);
  EXPECT_NEAR(expectation(ones, n4), 4.0, 1e-12);

  MatrixProductOperator n8 = number_mpo(8);
  MatrixProductState checker = product_state({0, 1, 1, 0, 0, 1, 1, 0});
  EXPECT_NEAR(expectation(checker, n8), 4.0, 1e-12);
}

TEST(HubbardMpo, BondDimensionStaysModest) {
  LatticeConfig lat{8, 1};
  MatrixProductOperator h = hubbard_mpo(lat);
  EXPECT_LE(h.max_bond_dim(), 8u);
}
