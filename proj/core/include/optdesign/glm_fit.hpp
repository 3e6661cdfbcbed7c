#pragma once

#include <array>
#include <istream>
#include <string>
#include <vector>

#include "optdesign/design.hpp"
#include "optdesign/link.hpp"

namespace optdesign {

struct BinomialCell {
  int successes = 0;
  int trials = 1;
};

/// Cell counts in design-point order.
struct BinomialTable {
  std::array<BinomialCell, 4> cells{};

  /// Throws ValidationError unless 0 <= successes <= trials and trials >= 1.
  void validate() const;
};

/// Parses CSV rows `x1,x2,successes,trials` (header required, '#' comment
/// lines allowed). Each of the four (x1, x2) points must appear once; rows
/// may come in any order. Throws ValidationError on malformed input.
BinomialTable read_binomial_csv(std::istream& in);

struct FitResult {
  BetaVector beta_hat;
  WeightVector w_hat;
  DesignMeasure p_opt;
  double det_opt = 0.0;
  double det_uniform = 0.0;
  double uniform_efficiency = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Max-norm of the log-likelihood score at beta_hat.
  double score_norm = 0.0;
  std::vector<std::string> warnings;
};

struct IrlsOptions {
  int max_iter = 50;
  /// Also accepted: a stalled step with score max-norm <= 1e-8.
  double score_tol = 1e-10;
};

/// Maximum-likelihood fit by IRLS with step halving. Uses the Newton step
/// when the observed information is positive definite, Fisher scoring
/// otherwise.
/// Fills beta_hat, iterations, converged, score_norm and warnings.
/// Throws NumericalError, with the iteration trace, on non-convergence.
FitResult fit_glm(const BinomialTable& table, Link link, const IrlsOptions& opts = {});

/// Same on real-valued proportions y_i in [0, 1] with trial counts n_i.
FitResult fit_glm(const std::array<double, 4>& proportions,
                  const std::array<double, 4>& trials, Link link,
                  const IrlsOptions& opts = {});

/// Score vector sum_i n_i (y_i - mu_i) mu'_i / (mu_i (1 - mu_i)) x_i.
std::array<double, 3> score(const BetaVector& beta,
                            const std::array<double, 4>& proportions,
                            const std::array<double, 4>& trials, Link link);

/// Observed information (negative Hessian of the log-likelihood).
Eigen::Matrix3d observed_information(const BetaVector& beta,
                                     const std::array<double, 4>& proportions,
                                     const std::array<double, 4>& trials,
                                     Link link);

/// Fit, then the locally optimal design at beta_hat and the efficiency of
/// the uniform design.
FitResult analyze(const BinomialTable& table, Link link, const IrlsOptions& opts = {});

}  // namespace optdesign
