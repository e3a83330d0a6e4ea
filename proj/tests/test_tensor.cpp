#include "vtne/tensor.hpp"

#include <random>

#include <gtest/gtest.h>

using namespace vtne;

namespace {

DenseTensor random_tensor(std::vector<std::size_t> shape, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  DenseTensor t(std::move(shape));
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = cplx{dist(rng), dist(rng)};
  return t;
}

/// Independent reference: naive loop over all index assignments.
DenseTensor naive_contract(const DenseTensor& a, const DenseTensor& b,
                           const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  std::vector<bool> a_used(a.rank(), false), b_used(b.rank(), false);
  for (auto [ia, ib] : pairs) {
    a_used[ia] = true;
    b_used[ib] = true;
  }
  std::vector<std::size_t> out_shape, a_free, b_free;
  for (std::size_t k = 0; k < a.rank(); ++k)
    if (!a_used[k]) { out_shape.push_back(a.dim(k)); a_free.push_back(k); }
  for (std::size_t k = 0; k < b.rank(); ++k)
    if (!b_used[k]) { out_shape.push_back(b.dim(k)); b_free.push_back(k); }
  if (out_shape.empty()) out_shape.push_back(1);
  DenseTensor out(out_shape);

  std::vector<std::size_t> ai(a.rank(), 0), bi(b.rank(), 0);
  std::size_t ksize = 1;
  for (auto [ia, ib] : pairs) ksize *= a.dim(ia);

  const std::size_t out_n = out.size();
  for (std::size_t flat = 0; flat < out_n; ++flat) {
    // decode flat into free indices of a then b
    std::size_t rem = flat;
    std::vector<std::size_t> free_idx(out_shape.size());
    for (std::size_t k = out_shape.size(); k-- > 0;) {
      free_idx[k] = rem % out_shape[k];
      rem /= out_shape[k];
    }
    cplx acc{0, 0};
    for (std::size_t ks = 0; ks < ksize; ++ks) {
      std::size_t krem = ks;
      std::fill(ai.begin(), ai.end(), 0);
      std::fill(bi.begin(), bi.end(), 0);
      for (std::size_t k = pairs.size(); k-- > 0;) {
        std::size_t v = krem % a.dim(pairs[k].first);
        krem /= a.dim(pairs[k].first);
        ai[pairs[k].first] = v;
        bi[pairs[k].second] = v;
      }
      for (std::size_t k = 0; k < a_free.size(); ++k) ai[a_free[k]] = free_idx[k];
      for (std::size_t k = 0; k < b_free.size(); ++k) bi[b_free[k]] = free_idx[a_free.size() + k];
      acc += a.at(ai) * b.at(bi);
    }
    out[flat] = acc;
  }
  return out;
}

double max_abs_diff(const DenseTensor& a, const DenseTensor& b) {
  double m = 0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace

TEST(Tensor, IdentityContraction) {
  DenseTensor eye({2, 2});
  eye[0] = 1.0;
  eye[3] = 1.0;
  DenseTensor v({2});
  v[0] = cplx{0.3, 0.1};
  v[1] = cplx{-0.7, 0.2};
  DenseTensor out = contract(eye, v, {{1, 0}});
  EXPECT_NEAR(std::abs(out[0] - v[0]), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(out[1] - v[1]), 0.0, 1e-15);
}

TEST(Tensor, PauliXFlipsBit) {
  DenseTensor x({2, 2});
  x[1] = 1.0;
  x[2] = 1.0;
  DenseTensor v({2});
  v[0] = 1.0;
  DenseTensor out = contract(x, v, {{1, 0}});
  EXPECT_NEAR(std::abs(out[0]), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(out[1] - 1.0), 0.0, 1e-15);
}

TEST(Tensor, MatchesNaiveLoopOnRank3) {
  DenseTensor a = random_tensor({3, 4, 2}, 11);
  DenseTensor b = random_tensor({2, 4, 5}, 12);
  DenseTensor fast = contract(a, b, {{1, 1}, {2, 0}});
  DenseTensor slow = naive_contract(a, b, {{1, 1}, {2, 0}});
  EXPECT_EQ(fast.shape(), slow.shape());
  EXPECT_LT(max_abs_diff(fast, slow), 1e-12);
}

TEST(Tensor, ContractIsBilinear) {
  DenseTensor a = random_tensor({3, 3, 2}, 21);
  DenseTensor b = random_tensor({3, 2}, 22);
  const cplx alpha{0.6, -1.3};
  DenseTensor a_scaled = a;
  a_scaled.scale(alpha);
  DenseTensor lhs = contract(a_scaled, b, {{0, 0}});
  DenseTensor rhs = contract(a, b, {{0, 0}});
  rhs.scale(alpha);
  EXPECT_LT(max_abs_diff(lhs, rhs), 1e-12);
}

TEST(Tensor, ShapeMismatchThrows) {
  DenseTensor a = random_tensor({3, 4}, 31);
  DenseTensor b = random_tensor({5, 2}, 32);
  EXPECT_THROW(contract(a, b, {{1, 0}}), shape_error);
}

TEST(Tensor, PermuteRoundTrip) {
  DenseTensor a = random_tensor({2, 3, 4}, 41);
  DenseTensor p = a.permuted({2, 0, 1});
  EXPECT_EQ(p.dim(0), 4u);
  EXPECT_EQ(p.dim(1), 2u);
  EXPECT_EQ(p.dim(2), 3u);
  DenseTensor back = p.permuted({1, 2, 0});
  EXPECT_LT(max_abs_diff(a, back), 1e-15);
}

TEST(Svd, DiagonalMatrix) {
  DenseTensor m({3, 3});
  m[0] = 3.0;
  m[4] = 2.0;
  m[8] = 1.0;
  TruncatedSVD svd = svd_truncate(m, 2, 0.0);
  ASSERT_EQ(svd.s.size(), 2u);
  EXPECT_NEAR(svd.s[0], 3.0, 1e-12);
  EXPECT_NEAR(svd.s[1], 2.0, 1e-12);
  EXPECT_NEAR(svd.discarded_weight, 1.0 / 14.0, 1e-12);
}

TEST(Svd, IdentityKeepsEverything) {
  DenseTensor m({4, 4});
  for (int k = 0; k < 4; ++k) m[k * 4 + k] = 1.0;
  TruncatedSVD svd = svd_truncate(m, 4, 0.0);
  ASSERT_EQ(svd.s.size(), 4u);
  for (double s : svd.s) EXPECT_NEAR(s, 1.0, 1e-12);
  EXPECT_NEAR(svd.discarded_weight, 0.0, 1e-15);
}

TEST(Svd, FullRankReconstruction) {
  DenseTensor m = random_tensor({8, 8}, 51);
  TruncatedSVD svd = svd_truncate(m, 8, 0.0);
  DenseTensor rec = contract(svd.us(), svd.v, {{1, 0}});
  EXPECT_LT(max_abs_diff(rec, m), 1e-10);
  EXPECT_NEAR(svd.discarded_weight, 0.0, 1e-12);
}

TEST(Svd, IsometryConditions) {
  DenseTensor m = random_tensor({6, 9}, 61);
  TruncatedSVD svd = svd_truncate(m, 4, 0.0);
  ASSERT_EQ(svd.s.size(), 4u);
  // u^dag u = I
  DenseTensor utu = contract(svd.u.conjugated(), svd.u, {{0, 0}});
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      EXPECT_NEAR(std::abs(utu[i * 4 + j] - (i == j ? 1.0 : 0.0)), 0.0, 1e-10);
  // v v^dag = I
  DenseTensor vvt = contract(svd.v, svd.v.conjugated(), {{1, 1}});
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      EXPECT_NEAR(std::abs(vvt[i * 4 + j] - (i == j ? 1.0 : 0.0)), 0.0, 1e-10);
}

TEST(Svd, SortedDescendingAndErrorIdentity) {
  DenseTensor m = random_tensor({10, 7}, 71);
  TruncatedSVD svd = svd_truncate(m, 3, 0.0);
  for (std::size_t k = 1; k < svd.s.size(); ++k) EXPECT_LE(svd.s[k], svd.s[k - 1]);
  // Frobenius error^2 == discarded_weight * ||m||_F^2
  DenseTensor rec = contract(svd.us(), svd.v, {{1, 0}});
  double err2 = 0, nrm2 = 0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    err2 += std::norm(rec[k] - m[k]);
    nrm2 += std::norm(m[k]);
  }
  EXPECT_NEAR(err2, svd.discarded_weight * nrm2, 1e-10 * nrm2);
}

TEST(Svd, DiscardedWeightMonotoneInCap) {
  DenseTensor m = random_tensor({12, 12}, 81);
  double prev = 2.0;
  for (std::size_t cap = 1; cap <= 12; ++cap) {
    TruncatedSVD svd = svd_truncate(m, cap, 0.0);
    EXPECT_LE(svd.discarded_weight, prev + 1e-15);
    prev = svd.discarded_weight;
  }
}

TEST(Svd, ZeroMatrixEmptySpectrum) {
  DenseTensor m({3, 5});
  TruncatedSVD svd = svd_truncate(m, 3, 0.0);
  EXPECT_TRUE(svd.s.empty());
  EXPECT_EQ(svd.discarded_weight, 0.0);
}

TEST(Svd, RankOneMatrixNeedsOneValue) {
  DenseTensor m({4, 4});
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m[i * 4 + j] = cplx{1.0, 0.0} * double((i + 1) * (j + 1));
  TruncatedSVD svd = svd_truncate(m, 4, 1e-12);
  EXPECT_EQ(svd.s.size(), 1u);
  EXPECT_NEAR(svd.discarded_weight, 0.0, 1e-20);
}

TEST(Svd, NonMatrixThrows) {
  DenseTensor t({2, 2, 2});
  EXPECT_THROW(svd_truncate(t, 2, 0.0), shape_error);
}
