#include "vtne/optimize.hpp"

#include <gtest/gtest.h>

#include "vtne/oracle.hpp"
#include "vtne/protocol.hpp"

using namespace vtne;

namespace {

ValueGradFn quadratic(const std::vector<double>& center) {
  return [center](const std::vector<double>& x) {
    double f = 0;
    std::vector<double> g(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
      f += (x[k] - center[k]) * (x[k] - center[k]);
      g[k] = 2 * (x[k] - center[k]);
    }
    return std::pair<double, std::vector<double>>(f, std::move(g));
  };
}

ValueGradFn rosenbrock() {
  return [](const std::vector<double>& x) {
    const double a = x[0], b = x[1];
    double f = (1 - a) * (1 - a) + 100 * (b - a * a) * (b - a * a);
    std::vector<double> g = {-2 * (1 - a) - 400 * a * (b - a * a), 200 * (b - a * a)};
    return std::pair<double, std::vector<double>>(f, std::move(g));
  };
}

}  // namespace

TEST(Bfgs, QuadraticConvergesFast) {
  std::vector<double> center = {1.5, -2.0, 0.25, 3.0};
  OptimizerConfig cfg;
  cfg.ftol = 1e-14;
  cfg.gtol = 1e-10;
  MinimizeResult res = bfgs_minimize(quadratic(center), {0, 0, 0, 0}, cfg);
  for (std::size_t k = 0; k < center.size(); ++k) EXPECT_NEAR(res.x[k], center[k], 1e-6);
  EXPECT_LE(static_cast<int>(res.trajectory.size()) - 1, static_cast<int>(center.size()) + 5);
}

TEST(Bfgs, Rosenbrock2D) {
  OptimizerConfig cfg;
  cfg.ftol = 1e-14;
  cfg.gtol = 1e-8;
  cfg.max_iters = 200;
  MinimizeResult res = bfgs_minimize(rosenbrock(), {-1.2, 1.0}, cfg);
  EXPECT_NEAR(res.x[0], 1.0, 1e-5);
  EXPECT_NEAR(res.x[1], 1.0, 1e-5);
}

TEST(Bfgs, TerminatesOnGtol) {
  OptimizerConfig cfg;
  cfg.gtol = 1e-6;
  cfg.ftol = 1e-30;  // effectively off
  MinimizeResult res = bfgs_minimize(quadratic({0.5, 0.5}), {3.0, -1.0}, cfg);
  EXPECT_EQ(res.reason, StopReason::gtol);
  double g2 = 0;
  auto [f, g] = quadratic({0.5, 0.5})(res.x);
  for (double v : g) g2 += v * v;
  EXPECT_LE(std::sqrt(g2), 1e-6);
}

TEST(Bfgs, NeverEndsAboveStart) {
  // monotone acceptance: the returned energy never exceeds the initial one
  OptimizerConfig cfg;
  cfg.max_iters = 15;
  auto fg = rosenbrock();
  MinimizeResult res = bfgs_minimize(fg, {-1.2, 1.0}, cfg);
  double f0 = fg({-1.2, 1.0}).first;
  EXPECT_LE(res.f, f0);
  for (std::size_t k = 1; k < res.trajectory.size(); ++k) {
    EXPECT_LE(res.trajectory[k].energy, res.trajectory[k - 1].energy + 1e-12);
  }
}

TEST(Bfgs, GradientCallAccounting) {
  OptimizerConfig cfg;
  cfg.max_iters = 50;
  long calls = 0;
  auto counted = [&calls](const std::vector<double>& x) {
    ++calls;
    double f = 0;
    std::vector<double> g(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
      f += x[k] * x[k];
      g[k] = 2 * x[k];
    }
    return std::pair<double, std::vector<double>>(f, std::move(g));
  };
  MinimizeResult res = bfgs_minimize(counted, {2.0, -3.0}, cfg);
  EXPECT_EQ(res.n_gradient_calls, calls);
  for (std::size_t k = 1; k < res.trajectory.size(); ++k) {
    EXPECT_GE(res.trajectory[k].n_gradient_calls, res.trajectory[k - 1].n_gradient_calls);
  }
}

TEST(Adam, FirstStepMovesByAlpha) {
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::adam;
  cfg.alpha = 0.001;
  auto fg = [](const std::vector<double>& x) {
    return std::pair<double, std::vector<double>>(x[0] * x[0], {2 * x[0]});
  };
  MinimizeResult res = adam_minimize(fg, {1.0}, cfg, 1);
  // bias-corrected first step moves by alpha against the gradient sign
  EXPECT_NEAR(res.x[0], 1.0 - cfg.alpha, 1e-9);
}

TEST(Adam, ZeroGradientLeavesParametersAlone) {
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::adam;
  auto fg = [](const std::vector<double>& x) {
    return std::pair<double, std::vector<double>>(7.0, std::vector<double>(x.size(), 0.0));
  };
  MinimizeResult res = adam_minimize(fg, {0.3, -0.7}, cfg, 25);
  EXPECT_EQ(res.x[0], 0.3);
  EXPECT_EQ(res.x[1], -0.7);
}

TEST(Adam, MonotoneDecreaseOnConvexQuadratic) {
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::adam;
  cfg.alpha = 0.01;
  MinimizeResult res = adam_minimize(quadratic({0.0, 0.0}), {1.0, -0.5}, cfg, 100);
  ASSERT_EQ(res.trajectory.size(), 101u);
  for (std::size_t k = 1; k < res.trajectory.size(); ++k) {
    EXPECT_LE(res.trajectory[k].energy, res.trajectory[k - 1].energy + 1e-12);
  }
}

TEST(Adam, NanEnergyAborts) {
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::adam;
  auto fg = [](const std::vector<double>& x) {
    return std::pair<double, std::vector<double>>(std::nan(""), std::vector<double>{0.0});
  };
  EXPECT_THROW(adam_minimize(fg, {1.0}, cfg, 5), numerical_integrity_error);
}

TEST(OptimizerConfigValidation, RejectsBadValues) {
  OptimizerConfig cfg;
  cfg.ftol = -1;
  EXPECT_THROW(cfg.validate(), config_error);
  cfg = OptimizerConfig{};
  cfg.beta1 = 1.5;
  EXPECT_THROW(cfg.validate(), config_error);
  cfg = OptimizerConfig{};
  cfg.max_iters = 0;
  EXPECT_THROW(cfg.validate(), config_error);
}

TEST(Protocol, TwoSiteChainReachesSectorGround) {
  // full protocol on the 2-site chain at full cap: 1 - sqrt(5)
  LatticeConfig lat{2, 1};
  OptimizerConfig cfg;
  cfg.seed = 3;
  ProtocolResult res = vtne_protocol(lat, /*layers=*/2, /*cap=*/4, cfg, ProtocolMode::warm);
  EXPECT_NEAR(res.energy, 1.0 - std::sqrt(5.0), 1e-5);
  EXPECT_GT(res.n_gradient_calls, 0);
}

TEST(Protocol, Stage1MatchesFreeFermionOracleAt4x1) {
  LatticeConfig lat{4, 1};
  OptimizerConfig cfg;
  cfg.seed = 1;
  ProtocolResult res = vtne_protocol(lat, 4, MatrixProductState::chi_max(8), cfg,
                                     ProtocolMode::warm);
  // both species together at U=0: -2 sqrt(5)
  EXPECT_NEAR(res.stage1_energy, -4.47213595499958, 2e-6);
}

TEST(Protocol, DirectModeUsesOverride) {
  LatticeConfig lat{2, 1};
  OptimizerConfig cfg;
  cfg.max_iters = 1;
  Circuit c = build_np_ansatz(lat, 1);
  std::vector<double> theta0(c.n_params, 0.05);
  ProtocolResult res = vtne_protocol(lat, 1, 4, cfg, ProtocolMode::direct, theta0);
  EXPECT_EQ(res.circuit.n_params, c.n_params);
  std::vector<double> bad(c.n_params + 2, 0.0);
  EXPECT_THROW(vtne_protocol(lat, 1, 4, cfg, ProtocolMode::direct, bad), argument_error);
}

TEST(Protocol, DeterministicForFixedSeed) {
  LatticeConfig lat{2, 1};
  OptimizerConfig cfg;
  cfg.seed = 11;
  cfg.max_iters = 40;
  ProtocolResult a = vtne_protocol(lat, 2, 4, cfg, ProtocolMode::warm);
  ProtocolResult b = vtne_protocol(lat, 2, 4, cfg, ProtocolMode::warm);
  ASSERT_EQ(a.theta.size(), b.theta.size());
  for (std::size_t k = 0; k < a.theta.size(); ++k) EXPECT_EQ(a.theta[k], b.theta[k]);
  EXPECT_EQ(a.energy, b.energy);
  ASSERT_EQ(a.trajectory.size(), b.trajectory.size());
}
