#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "optdesign/design.hpp"

namespace optdesign {

/// Bounds a <= v <= b shared by every design point (equivalently
/// 1/b <= w <= 1/a). An unbounded range has b = infinity.
class RangeSpec {
 public:
  RangeSpec(double a, double b);
  static RangeSpec unbounded(double a);
  /// From weight bounds alpha <= w <= beta.
  static RangeSpec from_weights(double w_low, double w_high);

  double a() const { return a_; }
  double b() const { return b_; }
  bool is_unbounded() const { return unbounded_; }
  /// b / a, or infinity when unbounded.
  double theta() const;

 private:
  double a_;
  double b_;
  bool unbounded_ = false;
};

/// Triple products of the candidate design sorted so that
/// p_(1) >= p_(2) >= p_(3) >= p_(4); q_i omits p_(i), hence q1 <= ... <= q4.
struct QProducts {
  std::array<double, 4> q{};
  /// order[k] is the original index of the k-th largest proportion.
  std::array<std::size_t, 4> order{};
};

QProducts q_products(const DesignMeasure& p_c);

/// Worst-case true-variance patterns, written in sorted-candidate
/// coordinates: baaa puts b on the point with the largest p_c.
enum class VtPattern { baaa, bbaa, bbba };

std::string_view to_string(VtPattern pattern);

/// L(v_t, p_c) / L(v_t, p_t). R(t, c) = 1 - Q^{1/3}.
/// Throws NumericalError when L(v_t, p_t) == 0.
double Q_ratio(const VarianceVector& v_t, const DesignMeasure& p_c,
               const DesignMeasure& p_t);

/// Closed forms of Q at the three patterns as functions of theta = b/a.
double closed_Q(double theta, VtPattern pattern, const QProducts& q);

enum class RmaxCase { saturated_case_i, interior_case_ii, unbounded };

std::string_view to_string(RmaxCase c);

struct RmaxReport {
  double value = 0.0;
  RmaxCase rmax_case = RmaxCase::interior_case_ii;
  std::optional<VtPattern> pattern;
  /// The maximising true variances in original design-point order
  /// (absent for unbounded ranges, where the supremum is not attained).
  std::optional<VarianceVector> attaining_vt;
  double theta = 1.0;
};

/// Maximum relative loss of the design p_c (optimal for v_c) over all true
/// variances in the range. Throws ValidationError if v_c leaves the range
/// or if v_c is saturated while theta < 3.
RmaxReport r_max(const DesignMeasure& p_c, const VarianceVector& v_c,
                 const RangeSpec& range);

/// Limit b -> infinity: 1 if v_c is saturated, else
/// 1 - 3 (p_(2) p_(3) p_(4))^{1/3}.
double r_max_unbounded(const DesignMeasure& p_c, const VarianceVector& v_c);

/// Loss of the uniform design under w: 1 - (1/4)(sum v / L(p_t))^{1/3}.
double uniform_loss(const WeightVector& w);

/// The pieces of the worst-case loss of the uniform design.
enum class UniformBranch {
  high,    // theta >= 3
  middle,  // theta_* <= theta < 3
  low,     // 1 < theta < theta_*
};

/// Evaluates one branch formula regardless of where theta lies.
double r_max_uniform_branch(double theta, UniformBranch branch);

/// Worst-case loss of the uniform design when alpha <= w <= beta,
/// theta = beta / alpha >= 1. Accepts theta = infinity (limit 1/4).
double r_max_uniform(double theta);

/// Root in (1, 3) of
/// 3456 - 5184 t + 3561 t^2 + 596 t^3 - 1506 t^4 + 100 t^5 + t^6,
/// where the binding pattern switches between baaa and bbaa.
/// Computed once by bisection.
double theta_star();

/// The sextic above.
double theta_star_polynomial(double theta);

/// (2 v_max - sum v) / v_max: >= 0 iff saturated, -2 iff all equal.
double standardized_distance(const VarianceVector& v);

}  // namespace optdesign
