#include "optdesign/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "optdesign/error.hpp"
#include "optdesign/solver.hpp"

namespace optdesign {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRangeSlack = 1e-12;

double rho(double theta) { return std::sqrt(theta * theta - theta + 1.0); }

// (2t - 1 - rho)(t - 2 + rho)(t + 1 + rho) / (t - 1)^2, rewritten without the
// removable singularity at t = 1.
double bbaa_denominator_over_square(double theta) {
  const double r = rho(theta);
  return 9.0 * theta * (theta + 1.0 + r) / ((2.0 * theta - 1.0 + r) * (r - theta + 2.0));
}

double clamp_unit(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

RangeSpec::RangeSpec(double a, double b) : a_(a), b_(b), unbounded_(std::isinf(b)) {
  if (!(std::isfinite(a) && a > 0.0)) throw ValidationError("range: lower bound must be finite and > 0");
  if (!(b >= a)) throw ValidationError("range: upper bound must be >= lower bound");
}

RangeSpec RangeSpec::unbounded(double a) { return RangeSpec(a, kInf); }

RangeSpec RangeSpec::from_weights(double w_low, double w_high) {
  if (!(w_high > 0.0 && std::isfinite(w_high))) throw ValidationError("range: w_high must be > 0");
  if (!(w_low >= 0.0 && w_low <= w_high)) throw ValidationError("range: need 0 <= w_low <= w_high");
  return RangeSpec(1.0 / w_high, w_low > 0.0 ? 1.0 / w_low : kInf);
}

double RangeSpec::theta() const { return unbounded_ ? kInf : b_ / a_; }

QProducts q_products(const DesignMeasure& p_c) {
  QProducts out;
  std::iota(out.order.begin(), out.order.end(), std::size_t{0});
  std::stable_sort(out.order.begin(), out.order.end(),
                   [&](std::size_t x, std::size_t y) { return p_c[x] > p_c[y]; });
  std::array<double, 4> s{};
  for (std::size_t k = 0; k < 4; ++k) s[k] = p_c[out.order[k]];
  out.q = {s[1] * s[2] * s[3], s[0] * s[2] * s[3], s[0] * s[1] * s[3], s[0] * s[1] * s[2]};
  return out;
}

std::string_view to_string(VtPattern pattern) {
  switch (pattern) {
    case VtPattern::baaa: return "baaa";
    case VtPattern::bbaa: return "bbaa";
    case VtPattern::bbba: return "bbba";
  }
  return "unknown";
}

std::string_view to_string(RmaxCase c) {
  switch (c) {
    case RmaxCase::saturated_case_i: return "saturated_case_i";
    case RmaxCase::interior_case_ii: return "interior_case_ii";
    case RmaxCase::unbounded: return "unbounded";
  }
  return "unknown";
}

double Q_ratio(const VarianceVector& v_t, const DesignMeasure& p_c, const DesignMeasure& p_t) {
  const double denom = objective_L(v_t, p_t);
  if (!(denom > 0.0)) throw NumericalError("Q_ratio: degenerate optimal design (L = 0)");
  return objective_L(v_t, p_c) / denom;
}

double closed_Q(double theta, VtPattern pattern, const QProducts& qp) {
  if (!(theta >= 1.0 && std::isfinite(theta))) {
    throw ValidationError("closed_Q: theta must be finite and >= 1");
  }
  const auto& q = qp.q;
  switch (pattern) {
    case VtPattern::baaa: {
      const double s = theta * q[0] + q[1] + q[2] + q[3];
      if (theta >= 3.0) return 27.0 / theta * s;
      return (9.0 - theta) * (9.0 - theta) / 4.0 * s;
    }
    case VtPattern::bbaa: {
      const double s = theta * q[0] + theta * q[1] + q[2] + q[3];
      return 108.0 * s / bbaa_denominator_over_square(theta);
    }
    case VtPattern::bbba: {
      const double s = theta * (q[0] + q[1] + q[2]) + q[3];
      return (9.0 * theta - 1.0) * (9.0 * theta - 1.0) / (4.0 * theta * theta * theta) * s;
    }
  }
  return 0.0;
}

RmaxReport r_max(const DesignMeasure& p_c, const VarianceVector& v_c, const RangeSpec& range) {
  RmaxReport report;
  report.theta = range.theta();
  if (range.is_unbounded()) {
    report.value = r_max_unbounded(p_c, v_c);
    report.rmax_case = RmaxCase::unbounded;
    return report;
  }
  const double a = range.a();
  const double b = range.b();
  for (std::size_t i = 0; i < 4; ++i) {
    if (v_c[i] < a * (1.0 - kRangeSlack) || v_c[i] > b * (1.0 + kRangeSlack)) {
      throw ValidationError("r_max: v_c[" + std::to_string(i + 1) + "] lies outside [a, b]");
    }
  }
  const double theta = report.theta;
  const QProducts qp = q_products(p_c);

  const auto vt_for = [&](VtPattern pattern) {
    const std::size_t n_b = pattern == VtPattern::baaa ? 1 : pattern == VtPattern::bbaa ? 2 : 3;
    std::array<double, 4> vt{};
    for (std::size_t k = 0; k < 4; ++k) vt[qp.order[k]] = k < n_b ? b : a;
    return VarianceVector(vt);
  };

  if (is_saturated(v_c).saturated) {
    if (theta < 3.0 * (1.0 - kRangeSlack)) {
      throw ValidationError("r_max: inconsistent input, saturated v_c requires b/a >= 3");
    }
    report.rmax_case = RmaxCase::saturated_case_i;
    report.value = clamp_unit(1.0 - std::pow((9.0 * theta - 1.0) / 2.0, 2.0 / 3.0) / (3.0 * theta));
    report.pattern = VtPattern::bbba;
    report.attaining_vt = vt_for(VtPattern::bbba);
    return report;
  }

  report.rmax_case = RmaxCase::interior_case_ii;
  double q_min = kInf;
  for (VtPattern pattern : {VtPattern::baaa, VtPattern::bbaa, VtPattern::bbba}) {
    const double q = closed_Q(theta, pattern, qp);
    if (q < q_min) {
      q_min = q;
      report.pattern = pattern;
    }
  }
  report.value = clamp_unit(1.0 - std::cbrt(q_min));
  report.attaining_vt = vt_for(*report.pattern);
  return report;
}

double r_max_unbounded(const DesignMeasure& p_c, const VarianceVector& v_c) {
  if (is_saturated(v_c).saturated) return 1.0;
  const auto& q = q_products(p_c).q;
  return clamp_unit(1.0 - 3.0 * std::cbrt(q[0]));
}

double uniform_loss(const WeightVector& w) {
  const VarianceVector v = variance_from_weight(w);
  const SolveResult opt = solve(v);
  return clamp_unit(1.0 - 0.25 * std::cbrt(v.sum() / objective_L(v, opt.p)));
}

double r_max_uniform_branch(double theta, UniformBranch branch) {
  switch (branch) {
    case UniformBranch::high:
      return 1.0 - 0.75 * std::cbrt(1.0 + 3.0 / theta);
    case UniformBranch::middle:
      return 1.0 - std::cbrt(2.0 * (theta + 3.0) * (9.0 - theta) * (9.0 - theta)) / 8.0;
    case UniformBranch::low:
      return 1.0 - 1.5 * std::cbrt((theta + 1.0) / bbaa_denominator_over_square(theta));
  }
  return 0.0;
}

double r_max_uniform(double theta) {
  if (!(theta >= 1.0)) throw ValidationError("r_max_uniform: theta must be >= 1");
  if (std::isinf(theta)) return 0.25;
  if (theta == 1.0) return 0.0;
  if (theta >= 3.0) return r_max_uniform_branch(theta, UniformBranch::high);
  if (theta >= theta_star()) return r_max_uniform_branch(theta, UniformBranch::middle);
  return r_max_uniform_branch(theta, UniformBranch::low);
}

double theta_star_polynomial(double t) {
  // Horner, highest degree first.
  static constexpr std::array<double, 7> kCoeff{1.0, 100.0, -1506.0, 596.0, 3561.0, -5184.0, 3456.0};
  double acc = 0.0;
  for (double c : kCoeff) acc = acc * t + c;
  return acc;
}

double theta_star() {
  static const double root = [] {
    double lo = 1.0;  // polynomial > 0
    double hi = 3.0;  // polynomial < 0
    while (hi - lo > 1e-13) {
      const double mid = 0.5 * (lo + hi);
      (theta_star_polynomial(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }();
  return root;
}

double standardized_distance(const VarianceVector& v) {
  const double vmax = v.max();
  return (2.0 * vmax - v.sum()) / vmax;
}

}  // namespace optdesign
