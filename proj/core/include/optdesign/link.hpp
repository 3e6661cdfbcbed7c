#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace optdesign {

/// Binary-response link families.
///
/// `cloglog` is mu = 1 - exp(-exp(eta)); `loglog` is its mirror image,
/// mu = exp(-exp(-eta)), so that weight(loglog, eta) == weight(cloglog, -eta).
enum class Link { logit, probit, loglog, cloglog };

std::string_view to_string(Link link);
/// Parses "logit", "probit", "loglog" or "cloglog"; throws ValidationError.
Link parse_link(std::string_view name);

/// Upper bound of the GLM weight over all eta (0.25, 2/pi, ~0.6476).
double weight_cap(Link link);

/// Regression coefficients of the main-effects model eta = b0 + b1 x1 + b2 x2.
struct BetaVector {
  double b0 = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
};

/// One factor-level combination (x1, x2), each coordinate +1 or -1.
struct DesignPoint {
  int x1;
  int x2;
};

/// Fixed ordering of the four design points. Every 4-vector in the library
/// (weights, variances, proportions, cell counts) is indexed this way, and it
/// matches the rows of the model matrix X.
inline constexpr std::array<DesignPoint, 4> kDesignPoints{{
    {+1, +1},
    {+1, -1},
    {-1, +1},
    {-1, -1},
}};

/// Linear predictor at design point i.
double linear_predictor(const BetaVector& beta, std::size_t point);

/// Inverse link mu(eta), clamped into [1e-15, 1 - 1e-15].
double mean(Link link, double eta);
/// 1 - mu(eta) without cancellation, clamped the same way.
double mean_complement(Link link, double eta);
/// d mu / d eta.
double mean_derivative(Link link, double eta);
/// GLM weight (dmu/deta)^2 / (mu (1 - mu)).
double weight(Link link, double eta);
/// The link function g(mu) = eta; mu must lie in (0, 1).
double link_value(Link link, double mu);

/// Weights at the four design points, in kDesignPoints order.
std::array<double, 4> weights_from_beta(Link link, const BetaVector& beta);

struct CurvePoint {
  double eta;
  double mu;
  double w;
};

std::vector<CurvePoint> weight_curve(Link link, std::span<const double> eta_grid);

/// Writes the curve as CSV with header `eta,mu,w`, 15 significant digits.
void write_curve_csv(std::ostream& out, std::span<const CurvePoint> curve);

}  // namespace optdesign
