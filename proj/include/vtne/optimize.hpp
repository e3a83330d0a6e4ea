#pragma once

#include <chrono>
#include <functional>

#include "vtne/common.hpp"

#include <vector>

namespace vtne {

enum class OptimizerKind { bfgs, adam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::bfgs;
  double ftol = 1e-7;         // |f_{k+1} - f_k| termination
  double gtol = 1e-6;         // ||g||_2 termination
  double alpha = 0.001;       // Adam step size
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int max_iters = 5000;
  std::uint64_t seed = 1;
  /// Variance of the N(0, init_sigma) Gaussian used for parameter starts;
  /// draws use the corresponding standard deviation sqrt(init_sigma).
  double init_sigma = 1e-5;

  void validate() const {
    if (ftol <= 0 || gtol <= 0) throw config_error("tolerances must be positive");
    if (beta1 <= 0 || beta1 >= 1 || beta2 <= 0 || beta2 >= 1) {
      throw config_error("Adam moment decays must lie in (0,1)");
    }
    if (max_iters < 1) throw config_error("max_iters must be positive");
  }
};

struct TrajectoryPoint {
  int step = 0;
  double energy = 0.0;
  double grad_norm = 0.0;
  long n_gradient_calls = 0;
  double wall_time_s = 0.0;
};

enum class StopReason { ftol, gtol, max_iters, line_search_failure, nan_abort };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::ftol: return "ftol";
    case StopReason::gtol: return "gtol";
    case StopReason::max_iters: return "max_iters";
    case StopReason::line_search_failure: return "line_search_failure";
    case StopReason::nan_abort: return "nan_abort";
  }
  return "?";
}

struct MinimizeResult {
  std::vector<double> x;
  double f = 0.0;
  std::vector<TrajectoryPoint> trajectory;
  StopReason reason = StopReason::max_iters;
  long n_gradient_calls = 0;
};

/// Objective with energy and gradient evaluated together (one sweep).
using ValueGradFn = std::function<std::pair<double, std::vector<double>>(
    const std::vector<double>&)>;

namespace detail {

inline double nrm2(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

struct LineSearchResult {
  bool ok = false;
  double alpha = 0.0;
  double f = 0.0;
  std::vector<double> x;
  std::vector<double> g;
};

/// Strong Wolfe line search (bracket + zoom with bisection/interpolation),
/// c1 = 1e-4, c2 = 0.9.
inline LineSearchResult wolfe_search(const ValueGradFn& fg, const std::vector<double>& x0,
                                     double f0, const std::vector<double>& g0,
                                     const std::vector<double>& dir, long& grad_calls) {
  constexpr double c1 = 1e-4, c2 = 0.9;
  const double dphi0 = dot(g0, dir);
  LineSearchResult res;
  if (dphi0 >= 0) return res;  // not a descent direction

  auto eval = [&](double a) {
    std::vector<double> x = x0;
    for (std::size_t k = 0; k < x.size(); ++k) x[k] += a * dir[k];
    auto [f, g] = fg(x);
    ++grad_calls;
    return std::tuple<double, std::vector<double>, std::vector<double>>(f, std::move(g),
                                                                        std::move(x));
  };

  double a_prev = 0.0, f_prev = f0, dphi_prev = dphi0;
  double a = 1.0;
  double a_lo = 0, a_hi = 0, f_lo = 0;
  std::vector<double> g_lo;
  std::vector<double> x_lo;
  bool bracketed = false;

  std::vector<double> g_prev = g0;
  std::vector<double> x_prev = x0;

  for (int it = 0; it < 20 && !bracketed; ++it) {
    auto [f, g, x] = eval(a);
    double dphi = dot(g, dir);
    if (f > f0 + c1 * a * dphi0 || (it > 0 && f >= f_prev)) {
      a_lo = a_prev; f_lo = f_prev; g_lo = g_prev; x_lo = x_prev;
      a_hi = a;
      bracketed = true;
      break;
    }
    if (std::abs(dphi) <= -c2 * dphi0) {
      res.ok = true;
      res.alpha = a;
      res.f = f;
      res.x = std::move(x);
      res.g = std::move(g);
      return res;
    }
    if (dphi >= 0) {
      a_lo = a; f_lo = f; g_lo = g; x_lo = x;
      a_hi = a_prev;
      bracketed = true;
      break;
    }
    a_prev = a; f_prev = f; dphi_prev = dphi; g_prev = std::move(g); x_prev = std::move(x);
    a *= 2.0;
    if (a > 1e6) break;
  }
  if (!bracketed) return res;

  // zoom
  for (int it = 0; it < 30; ++it) {
    double am = 0.5 * (a_lo + a_hi);
    auto [f, g, x] = eval(am);
    double dphi = dot(g, dir);
    if (f > f0 + c1 * am * dphi0 || f >= f_lo) {
      a_hi = am;
    } else {
      if (std::abs(dphi) <= -c2 * dphi0) {
        res.ok = true;
        res.alpha = am;
        res.f = f;
        res.x = std::move(x);
        res.g = std::move(g);
        return res;
      }
      if (dphi * (a_hi - a_lo) >= 0) a_hi = a_lo;
      a_lo = am; f_lo = f; g_lo = std::move(g); x_lo = std::move(x);
    }
    if (std::abs(a_hi - a_lo) < 1e-14 * std::max(1.0, std::abs(a_lo))) break;
  }
  // fall back to the best admissible point found, if any
  if (!x_lo.empty() && f_lo < f0 + c1 * a_lo * dphi0 && a_lo > 0) {
    res.ok = true;
    res.alpha = a_lo;
    res.f = f_lo;
    res.x = x_lo;
    res.g = g_lo;
  }
  return res;
}

}  // namespace detail

/// Dense-inverse-Hessian BFGS with a strong Wolfe line search. Terminates on
/// |f_{k+1}-f_k| <= ftol, on ||g||_2 <= gtol, or at max_iters; a failed line
/// search returns the best point seen with a status flag.
inline MinimizeResult bfgs_minimize(const ValueGradFn& fg, const std::vector<double>& theta0,
                                    const OptimizerConfig& cfg) {
  cfg.validate();
  const std::size_t n = theta0.size();
  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  };

  MinimizeResult out;
  out.x = theta0;
  auto [f, g] = fg(out.x);
  ++out.n_gradient_calls;
  out.f = f;
  out.trajectory.push_back({0, f, detail::nrm2(g), out.n_gradient_calls, elapsed()});

  if (n == 0) {
    out.reason = StopReason::gtol;
    return out;
  }

  // inverse Hessian estimate, dense row-major
  std::vector<double> hinv(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) hinv[i * n + i] = 1.0;
  std::vector<double> dir(n), s(n), y(n), hy(n);

  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    if (detail::nrm2(g) <= cfg.gtol) {
      out.reason = StopReason::gtol;
      return out;
    }
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0;
      for (std::size_t j = 0; j < n; ++j) acc += hinv[i * n + j] * g[j];
      dir[i] = -acc;
    }
    if (detail::dot(dir, g) >= 0) {
      // reset a spoiled Hessian estimate
      std::fill(hinv.begin(), hinv.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) hinv[i * n + i] = 1.0;
      for (std::size_t i = 0; i < n; ++i) dir[i] = -g[i];
    }

    auto ls = detail::wolfe_search(fg, out.x, f, g, dir, out.n_gradient_calls);
    if (!ls.ok) {
      out.reason = StopReason::line_search_failure;
      return out;
    }

    for (std::size_t i = 0; i < n; ++i) {
      s[i] = ls.x[i] - out.x[i];
      y[i] = ls.g[i] - g[i];
    }
    double df = std::abs(ls.f - f);
    out.x = std::move(ls.x);
    f = ls.f;
    g = std::move(ls.g);
    out.f = f;
    out.trajectory.push_back({iter, f, detail::nrm2(g), out.n_gradient_calls, elapsed()});

    if (df <= cfg.ftol) {
      out.reason = StopReason::ftol;
      return out;
    }

    double sy = detail::dot(s, y);
    if (sy > 1e-12 * detail::nrm2(s) * detail::nrm2(y)) {
      const double rho = 1.0 / sy;
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0;
        for (std::size_t j = 0; j < n; ++j) acc += hinv[i * n + j] * y[j];
        hy[i] = acc;
      }
      const double yhy = detail::dot(y, hy);
      // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          hinv[i * n + j] += -rho * (s[i] * hy[j] + hy[i] * s[j]) +
                             rho * (1.0 + rho * yhy) * s[i] * s[j];
        }
      }
    }
  }
  out.reason = StopReason::max_iters;
  return out;
}

/// Textbook Adam with bias correction; runs exactly n_steps steps (or until
/// a NaN energy aborts).
inline MinimizeResult adam_minimize(const ValueGradFn& fg, const std::vector<double>& theta0,
                                    const OptimizerConfig& cfg, int n_steps) {
  cfg.validate();
  if (n_steps < 0) throw config_error("adam_minimize: negative step count");
  const std::size_t n = theta0.size();
  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  };

  MinimizeResult out;
  out.x = theta0;
  std::vector<double> m(n, 0.0), v(n, 0.0);
  auto [f, g] = fg(out.x);
  ++out.n_gradient_calls;
  out.f = f;
  out.trajectory.push_back({0, f, detail::nrm2(g), out.n_gradient_calls, elapsed()});

  for (int step = 1; step <= n_steps; ++step) {
    if (!std::isfinite(f)) throw numerical_integrity_error("adam_minimize: NaN energy");
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = cfg.beta1 * m[i] + (1 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1 - cfg.beta2) * g[i] * g[i];
      const double mh = m[i] / (1 - std::pow(cfg.beta1, step));
      const double vh = v[i] / (1 - std::pow(cfg.beta2, step));
      out.x[i] -= cfg.alpha * mh / (std::sqrt(vh) + cfg.eps);
    }
    std::tie(f, g) = fg(out.x);
    ++out.n_gradient_calls;
    out.f = f;
    out.trajectory.push_back({step, f, detail::nrm2(g), out.n_gradient_calls, elapsed()});
  }
  out.reason = StopReason::max_iters;
  return out;
}

/// Gaussian N(0, sigma^2) initial parameter vector, deterministic in the seed.
inline std::vector<double> gaussian_init(std::size_t n, double sigma, std::uint64_t seed) {
  NormalSampler rng(seed);
  std::vector<double> x(n);
  for (double& v : x) v = rng(0.0, sigma);
  return x;
}

}  // namespace vtne
