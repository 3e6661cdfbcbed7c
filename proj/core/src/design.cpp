#include "optdesign/design.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "optdesign/error.hpp"
#include "optdesign/link.hpp"

namespace optdesign {

namespace {

void require_finite(const std::array<double, 4>& x, const char* what) {
  for (std::size_t i = 0; i < 4; ++i) {
    if (!std::isfinite(x[i])) {
      throw ValidationError(std::string(what) + ": non-finite entry at index " +
                            std::to_string(i + 1));
    }
  }
}

}  // namespace

double Quad::sum() const { return (values_[0] + values_[1]) + (values_[2] + values_[3]); }

double Quad::max() const { return values_[argmax()]; }

std::size_t Quad::argmax() const {
  std::size_t k = 0;
  for (std::size_t i = 1; i < 4; ++i) {
    if (values_[i] > values_[k]) k = i;
  }
  return k;
}

WeightVector::WeightVector(const std::array<double, 4>& w) : Quad(w) {
  require_finite(w, "weight vector");
  for (std::size_t i = 0; i < 4; ++i) {
    if (w[i] < 0.0) {
      throw ValidationError("weight vector: negative weight at index " + std::to_string(i + 1));
    }
  }
}

VarianceVector::VarianceVector(const std::array<double, 4>& v) : Quad(v) {
  require_finite(v, "variance vector");
  for (std::size_t i = 0; i < 4; ++i) {
    if (!(v[i] > 0.0)) {
      throw ValidationError("variance vector: non-positive entry at index " +
                            std::to_string(i + 1));
    }
  }
}

DesignMeasure::DesignMeasure() : Quad({0.25, 0.25, 0.25, 0.25}) {}

DesignMeasure::DesignMeasure(const std::array<double, 4>& p) : Quad(p) {
  require_finite(p, "design measure");
  for (std::size_t i = 0; i < 4; ++i) {
    if (p[i] < 0.0) {
      throw ValidationError("design measure: negative proportion at index " +
                            std::to_string(i + 1));
    }
  }
  if (std::abs(sum() - 1.0) > kSumTolerance) {
    throw ValidationError("design measure: proportions do not sum to 1");
  }
}

DesignMeasure DesignMeasure::normalized(std::array<double, 4> p) {
  double total = 0.0;
  for (double& x : p) {
    if (x < 0.0 && x > -1e-12) x = 0.0;
    total += x;
  }
  if (!(total > 0.0)) throw ValidationError("design measure: zero total mass");
  for (double& x : p) x /= total;
  return DesignMeasure(p);
}

VarianceVector variance_from_weight(const WeightVector& w) {
  std::array<double, 4> v{};
  for (std::size_t i = 0; i < 4; ++i) {
    if (!(w[i] > 0.0)) {
      throw ValidationError("degenerate weight at index " + std::to_string(i + 1));
    }
    v[i] = 1.0 / w[i];
  }
  return VarianceVector(v);
}

WeightVector weight_from_variance(const VarianceVector& v) {
  return WeightVector({1.0 / v[0], 1.0 / v[1], 1.0 / v[2], 1.0 / v[3]});
}

double objective_L(const std::array<double, 4>& v, const std::array<double, 4>& p) {
  return v[3] * p[0] * p[1] * p[2] + v[2] * p[0] * p[1] * p[3] + v[1] * p[0] * p[2] * p[3] +
         v[0] * p[1] * p[2] * p[3];
}

double objective_L(const VarianceVector& v, const DesignMeasure& p) {
  return objective_L(v.values(), p.values());
}

std::array<double, 4> objective_gradient(const std::array<double, 4>& v,
                                         const std::array<double, 4>& p) {
  // dL/dp_i = sum over k != i of v_k * (product of p_m, m not in {i, k})
  const auto& [p1, p2, p3, p4] = p;
  return {
      v[3] * p2 * p3 + v[2] * p2 * p4 + v[1] * p3 * p4,
      v[3] * p1 * p3 + v[2] * p1 * p4 + v[0] * p3 * p4,
      v[3] * p1 * p2 + v[1] * p1 * p4 + v[0] * p2 * p4,
      v[2] * p1 * p2 + v[1] * p1 * p3 + v[0] * p2 * p3,
  };
}

double det_criterion(const WeightVector& w, const DesignMeasure& p) {
  const VarianceVector v = variance_from_weight(w);
  return 16.0 * w[0] * w[1] * w[2] * w[3] * objective_L(v, p);
}

InfoMatrix information_matrix(const WeightVector& w, const DesignMeasure& p) {
  InfoMatrix m = InfoMatrix::Zero();
  for (std::size_t i = 0; i < 4; ++i) {
    const Eigen::Vector3d x(1.0, kDesignPoints[i].x1, kDesignPoints[i].x2);
    m.noalias() += (w[i] * p[i]) * x * x.transpose();
  }
  return m;
}

double relative_loss(const WeightVector& w_t, const DesignMeasure& p_t,
                     const DesignMeasure& p_c) {
  const double det_t = det_criterion(w_t, p_t);
  if (!(det_t > 0.0)) throw NumericalError("relative_loss: degenerate optimum (det = 0)");
  const double det_c = det_criterion(w_t, p_c);
  const double r = 1.0 - std::cbrt(det_c / det_t);
  return std::clamp(r, 0.0, 1.0);
}

}  // namespace optdesign
