#pragma once

#include <array>
#include <cstddef>

#include <Eigen/Core>

namespace optdesign {

/// Finite 4-vector of doubles in design-point order.
class Quad {
 public:
  constexpr Quad() = default;
  constexpr explicit Quad(const std::array<double, 4>& values) : values_(values) {}

  constexpr double operator[](std::size_t i) const { return values_[i]; }
  constexpr const std::array<double, 4>& values() const { return values_; }
  constexpr auto begin() const { return values_.begin(); }
  constexpr auto end() const { return values_.end(); }

  double sum() const;
  double max() const;
  /// Index of the largest entry; lowest index on ties.
  std::size_t argmax() const;

  friend bool operator==(const Quad&, const Quad&) = default;

 protected:
  std::array<double, 4> values_{};
};

/// GLM weights w_i >= 0. Zero entries are representable but rejected by
/// every operation that needs v = 1/w.
class WeightVector : public Quad {
 public:
  WeightVector() = default;
  explicit WeightVector(const std::array<double, 4>& w);
};

/// Variances v_i = 1/w_i, all finite and strictly positive.
class VarianceVector : public Quad {
 public:
  VarianceVector() = default;
  explicit VarianceVector(const std::array<double, 4>& v);
};

/// Allocation proportions on the 3-simplex.
class DesignMeasure : public Quad {
 public:
  static constexpr double kSumTolerance = 1e-12;

  /// Uniform (1/4, 1/4, 1/4, 1/4).
  DesignMeasure();
  /// Throws ValidationError unless p_i >= 0 and |sum - 1| <= kSumTolerance.
  explicit DesignMeasure(const std::array<double, 4>& p);

  /// Clips tiny negatives, rescales onto the simplex, then validates.
  static DesignMeasure normalized(std::array<double, 4> p);
  static DesignMeasure uniform() { return DesignMeasure{}; }
};

using InfoMatrix = Eigen::Matrix3d;

/// v_i = 1/w_i. Throws ValidationError ("degenerate weight at index k",
/// 1-based) when some w_i <= 0.
VarianceVector variance_from_weight(const WeightVector& w);
WeightVector weight_from_variance(const VarianceVector& v);

/// L(p) = v4 p1 p2 p3 + v3 p1 p2 p4 + v2 p1 p3 p4 + v1 p2 p3 p4.
/// Each v_i multiplies the product of the three proportions other than p_i.
double objective_L(const VarianceVector& v, const DesignMeasure& p);
/// Same polynomial without the simplex requirement on p.
double objective_L(const std::array<double, 4>& v, const std::array<double, 4>& p);

/// dL/dp_i for i = 1..4.
std::array<double, 4> objective_gradient(const std::array<double, 4>& v,
                                         const std::array<double, 4>& p);

/// det(X'WX) = 16 w1 w2 w3 w4 L(p).
double det_criterion(const WeightVector& w, const DesignMeasure& p);

/// X'WX with W = diag(w_i p_i) and the fixed main-effects model matrix.
InfoMatrix information_matrix(const WeightVector& w, const DesignMeasure& p);

/// Relative loss of D-efficiency of p_c under the true weights w_t whose
/// optimal design is p_t: 1 - (det(w_t, p_c) / det(w_t, p_t))^{1/3},
/// clamped into [0, 1]. Throws NumericalError when det(w_t, p_t) == 0.
double relative_loss(const WeightVector& w_t, const DesignMeasure& p_t,
                     const DesignMeasure& p_c);

}  // namespace optdesign
