#include "optdesign/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Dense>

#include "optdesign/error.hpp"

namespace optdesign {

namespace {

constexpr double kPatternTol = 1e-12;
// Newton refinement starts once the KKT residual is below this.
constexpr double kNewtonGate = 1e-3;
// Residual at which the iteration stops regardless of the criterion change.
constexpr double kKktTight = 1e-13;
// Residual required together with a small criterion change.
constexpr double kKktLoose = 1e-10;
constexpr double kNearSaturation = 1e-6;
constexpr double kNearSaturationMass = 1e-3;

bool nearly_equal(double a, double b) {
  return std::abs(a - b) <= kPatternTol * std::max(std::abs(a), std::abs(b));
}

double kkt_residual(const std::array<double, 4>& v, const std::array<double, 4>& p) {
  const auto g = objective_gradient(v, p);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < 4; ++i) {
    if (p[i] <= 0.0) continue;
    lo = std::min(lo, g[i]);
    hi = std::max(hi, g[i]);
  }
  if (!(hi > 0.0)) return 0.0;
  return (hi - lo) / hi;
}

SolveResult make_result(const VarianceVector& v, const DesignMeasure& p, Branch branch,
                        int iterations) {
  return {p, objective_L(v, p), branch, iterations, kkt_residual(v.values(), p.values())};
}

std::array<double, 4> multiplicative_step(const std::array<double, 4>& v,
                                          const std::array<double, 4>& p) {
  const auto g = objective_gradient(v, p);
  double s = 0.0;
  for (std::size_t i = 0; i < 4; ++i) s += p[i] * g[i];
  std::array<double, 4> next{};
  for (std::size_t i = 0; i < 4; ++i) next[i] = p[i] * g[i] / s;
  return next;
}

// One Newton step on grad L(p) = lambda * 1, sum p = 1. Returns false when the
// step cannot be taken (singular system, leaves the open simplex, or fails
// to increase L after halving).
bool newton_step(const std::array<double, 4>& v, std::array<double, 4>& p, double& L) {
  const auto g = objective_gradient(v, p);
  // Hessian of L: zero diagonal; off-diagonal (i, j) sums v_k p_m over the
  // two ways of splitting the remaining indices {k, m}.
  Eigen::Matrix<double, 5, 5> J = Eigen::Matrix<double, 5, 5>::Zero();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (i == j) continue;
      double h = 0.0;
      for (int k = 0; k < 4; ++k) {
        if (k == i || k == j) continue;
        const int m = 6 - i - j - k;
        h += v[k] * p[m];
      }
      J(i, j) = h;
    }
    J(i, 4) = -1.0;
    J(4, i) = 1.0;
  }
  double lambda = 0.0;
  for (int i = 0; i < 4; ++i) lambda += p[i] * g[i];  // 3 L, the exact multiplier at optimum
  lambda /= std::accumulate(p.begin(), p.end(), 0.0);

  Eigen::Matrix<double, 5, 1> F;
  for (int i = 0; i < 4; ++i) F(i) = g[i] - lambda;
  F(4) = std::accumulate(p.begin(), p.end(), 0.0) - 1.0;

  const Eigen::FullPivLU<Eigen::Matrix<double, 5, 5>> lu(J);
  if (!lu.isInvertible()) return false;
  const Eigen::Matrix<double, 5, 1> delta = lu.solve(-F);
  if (!delta.allFinite()) return false;

  double t = 1.0;
  for (int halving = 0; halving < 20; ++halving, t *= 0.5) {
    std::array<double, 4> trial{};
    bool positive = true;
    for (int i = 0; i < 4; ++i) {
      trial[i] = p[i] + t * delta(i);
      positive = positive && trial[i] > 0.0;
    }
    if (!positive) continue;
    const double total = std::accumulate(trial.begin(), trial.end(), 0.0);
    for (double& x : trial) x /= total;
    const double L_trial = objective_L(v, trial);
    if (L_trial >= L * (1.0 - 4 * std::numeric_limits<double>::epsilon())) {
      p = trial;
      L = L_trial;
      return true;
    }
  }
  return false;
}

std::array<std::size_t, 3> others(std::size_t i) {
  std::array<std::size_t, 3> out{};
  std::size_t n = 0;
  for (std::size_t j = 0; j < 4; ++j) {
    if (j != i) out[n++] = j;
  }
  return out;
}

}  // namespace

std::string_view to_string(Branch branch) {
  switch (branch) {
    case Branch::saturated: return "saturated";
    case Branch::corollary1: return "corollary1";
    case Branch::corollary2: return "corollary2";
    case Branch::general: return "general";
  }
  return "unknown";
}

SaturationCheck is_saturated(const VarianceVector& v, double tol) {
  const std::size_t k = v.argmax();
  return {2.0 * v[k] >= (1.0 - tol) * v.sum(), k};
}

SolveResult solve_saturated(const VarianceVector& v, double tol) {
  const SaturationCheck s = is_saturated(v, tol);
  if (!s.saturated) throw ValidationError("solve_saturated: variances are not saturated");
  std::array<double, 4> p{};
  p.fill(1.0 / 3.0);
  p[s.index] = 0.0;
  return make_result(v, DesignMeasure::normalized(p), Branch::saturated, 0);
}

std::optional<SolveResult> solve_corollary1(const VarianceVector& v) {
  for (std::size_t odd = 0; odd < 4; ++odd) {
    const auto idx = others(odd);
    const double a = v[idx[0]], b = v[idx[1]], c = v[idx[2]];
    if (!(nearly_equal(a, b) && nearly_equal(b, c) && nearly_equal(a, c))) continue;
    const double common = (a + b + c) / 3.0;
    const double u = v[odd];
    if (u > 3.0 * common * (1.0 + kPatternTol)) return std::nullopt;
    const double denom = 9.0 * common - u;
    std::array<double, 4> p{};
    p[odd] = std::max(0.0, (3.0 * common - u) / denom);
    for (std::size_t k = 0; k < 3; ++k) p[idx[k]] = 2.0 * common / denom;
    return make_result(v, DesignMeasure::normalized(p), Branch::corollary1, 0);
  }
  return std::nullopt;
}

std::optional<SolveResult> solve_corollary2(const VarianceVector& v) {
  static constexpr std::array<std::array<std::size_t, 4>, 3> kPairings{{
      {0, 1, 2, 3},
      {0, 2, 1, 3},
      {0, 3, 1, 2},
  }};
  for (const auto& pr : kPairings) {
    const double x = v[pr[0]], y = v[pr[1]], z = v[pr[2]], t = v[pr[3]];
    if (!(nearly_equal(x, y) && nearly_equal(z, t))) continue;
    double hi = 0.5 * (x + y);
    double lo = 0.5 * (z + t);
    std::array<std::size_t, 2> hi_idx{pr[0], pr[1]};
    std::array<std::size_t, 2> lo_idx{pr[2], pr[3]};
    if (hi < lo) {
      std::swap(hi, lo);
      std::swap(hi_idx, lo_idx);
    }
    if (nearly_equal(hi, lo)) return std::nullopt;
    // (2u - s - d) / (6(u - s)) and (u - 2s + d) / (6(u - s)), rationalised
    // so that nothing cancels as u -> s.
    const double d = std::sqrt(hi * hi - hi * lo + lo * lo);
    const double p_hi = hi / (2.0 * (2.0 * hi - lo + d));
    const double p_lo = lo / (2.0 * (d - hi + 2.0 * lo));
    std::array<double, 4> p{};
    p[hi_idx[0]] = p[hi_idx[1]] = p_hi;
    p[lo_idx[0]] = p[lo_idx[1]] = p_lo;
    return make_result(v, DesignMeasure::normalized(p), Branch::corollary2, 0);
  }
  return std::nullopt;
}

SolveResult solve_general(const VarianceVector& v, const SolverConfig& cfg) {
  std::array<double, 4> start{0.25, 0.25, 0.25, 0.25};
  const std::size_t k = v.argmax();
  if (2.0 * v[k] / v.sum() > 1.0 - kNearSaturation) {
    // Start next to the three-point design; uniform would crawl.
    start.fill((1.0 - kNearSaturationMass) / 3.0);
    start[k] = kNearSaturationMass;
  }
  return solve_general(v, DesignMeasure::normalized(start), cfg);
}

SolveResult solve_general(const VarianceVector& v, const DesignMeasure& start,
                          const SolverConfig& cfg) {
  if (is_saturated(v, cfg.saturation_tol).saturated) {
    throw ValidationError("solve_general: variances are saturated; use solve_saturated");
  }
  std::array<double, 4> p = start.values();
  for (double x : p) {
    if (!(x > 0.0)) throw ValidationError("solve_general: start must be strictly positive");
  }
  const auto& vv = v.values();
  double L = objective_L(vv, p);
  double residual = kkt_residual(vv, p);

  for (int iter = 1; iter <= cfg.max_iter; ++iter) {
    const double L_prev = L;
    bool stepped = false;
    if (residual < kNewtonGate) stepped = newton_step(vv, p, L);
    if (!stepped) {
      p = multiplicative_step(vv, p);
      L = objective_L(vv, p);
    }
    residual = kkt_residual(vv, p);
    const double change = std::abs(L - L_prev) / L;
    if (residual <= kKktTight || (change <= cfg.convergence_tol && residual <= kKktLoose)) {
      return make_result(v, DesignMeasure::normalized(p), Branch::general, iter);
    }
  }
  throw NumericalError("solve_general: no convergence after " + std::to_string(cfg.max_iter) +
                       " iterations (kkt residual " + std::to_string(residual) + ")");
}

SolveResult solve(const VarianceVector& v, const SolverConfig& cfg) {
  if (is_saturated(v, cfg.saturation_tol).saturated) return solve_saturated(v, cfg.saturation_tol);
  if (auto r = solve_corollary1(v)) return *r;
  if (auto r = solve_corollary2(v)) return *r;
  return solve_general(v, cfg);
}

DesignMeasure grid_oracle(const VarianceVector& v, int resolution) {
  if (resolution < 1) throw ValidationError("grid_oracle: resolution must be >= 1");
  const double r = resolution;
  double best = -1.0;
  std::array<int, 4> arg{};
  for (int i = 0; i <= resolution; ++i) {
    for (int j = 0; i + j <= resolution; ++j) {
      for (int k = 0; i + j + k <= resolution; ++k) {
        const int l = resolution - i - j - k;
        const double val = objective_L(v.values(), {i / r, j / r, k / r, l / r});
        if (val > best) {
          best = val;
          arg = {i, j, k, l};
        }
      }
    }
  }
  return DesignMeasure::normalized({arg[0] / r, arg[1] / r, arg[2] / r, arg[3] / r});
}

std::array<int, 4> allocate(const DesignMeasure& p, int n) {
  if (n < 1) throw ValidationError("allocate: n must be >= 1");
  std::array<int, 4> counts{};
  std::array<double, 4> remainder{};
  int assigned = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double exact = n * p[i];
    counts[i] = static_cast<int>(std::floor(exact));
    remainder[i] = exact - counts[i];
    assigned += counts[i];
  }
  std::array<std::size_t, 4> order{0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < n; k = (k + 1) % 4, ++assigned) ++counts[order[k]];
  return counts;
}

}  // namespace optdesign
