#include "optdesign/glm_fit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "optdesign/csv.hpp"
#include "optdesign/error.hpp"
#include "optdesign/solver.hpp"

namespace optdesign {

namespace {

Eigen::Vector3d row(std::size_t i) {
  return {1.0, static_cast<double>(kDesignPoints[i].x1), static_cast<double>(kDesignPoints[i].x2)};
}

BetaVector to_beta(const Eigen::Vector3d& b) { return {b(0), b(1), b(2)}; }
Eigen::Vector3d to_vec(const BetaVector& b) { return {b.b0, b.b1, b.b2}; }

// y - mu, taken through 1 - mu when mu is close to 1.
double residual(double y, double mu, double one_minus_mu) {
  return mu > 0.5 ? one_minus_mu - (1.0 - y) : y - mu;
}

double log_likelihood(const BetaVector& beta, const std::array<double, 4>& y,
                      const std::array<double, 4>& n, Link link) {
  double ll = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double eta = linear_predictor(beta, i);
    ll += n[i] * (y[i] * std::log(mean(link, eta)) + (1.0 - y[i]) * std::log(mean_complement(link, eta)));
  }
  return ll;
}

// Below this the score is at the rounding floor of the log-likelihood sums.
constexpr double kStalledScoreTol = 1e-8;

double max_abs(const std::array<double, 3>& s) {
  return std::max({std::abs(s[0]), std::abs(s[1]), std::abs(s[2])});
}

}  // namespace

void BinomialTable::validate() const {
  for (std::size_t i = 0; i < 4; ++i) {
    const BinomialCell& c = cells[i];
    if (c.trials < 1 || c.successes < 0 || c.successes > c.trials) {
      throw ValidationError("binomial table: cell " + std::to_string(i + 1) +
                            " needs trials >= 1 and 0 <= successes <= trials");
    }
  }
}

BinomialTable read_binomial_csv(std::istream& in) {
  BinomialTable table;
  std::array<bool, 4> seen{};
  bool header = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto fields = csv::split_line(line);
    const auto where = [&] { return "data line " + std::to_string(line_no) + ": "; };
    if (!header) {
      if (fields != std::vector<std::string>{"x1", "x2", "successes", "trials"}) {
        throw ValidationError(where() + "expected header 'x1,x2,successes,trials'");
      }
      header = true;
      continue;
    }
    if (fields.size() != 4) throw ValidationError(where() + "expected 4 fields");
    try {
      const int x1 = csv::parse_int(fields[0]);
      const int x2 = csv::parse_int(fields[1]);
      const auto it = std::find_if(kDesignPoints.begin(), kDesignPoints.end(),
                                   [&](const DesignPoint& p) { return p.x1 == x1 && p.x2 == x2; });
      if (it == kDesignPoints.end()) throw ValidationError("x1 and x2 must be -1 or +1");
      const auto idx = static_cast<std::size_t>(it - kDesignPoints.begin());
      if (seen[idx]) throw ValidationError("duplicate design point");
      seen[idx] = true;
      table.cells[idx] = {csv::parse_int(fields[2]), csv::parse_int(fields[3])};
    } catch (const ValidationError& e) {
      throw ValidationError(where() + e.what());
    }
  }
  if (!header) throw ValidationError("binomial csv: missing header");
  if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) {
    throw ValidationError("binomial csv: all four design points must be present");
  }
  table.validate();
  return table;
}

std::array<double, 3> score(const BetaVector& beta, const std::array<double, 4>& y,
                            const std::array<double, 4>& n, Link link) {
  Eigen::Vector3d s = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < 4; ++i) {
    const double eta = linear_predictor(beta, i);
    const double mu = mean(link, eta);
    const double cmu = mean_complement(link, eta);
    s += n[i] * residual(y[i], mu, cmu) * mean_derivative(link, eta) / (mu * cmu) * row(i);
  }
  return {s(0), s(1), s(2)};
}

Eigen::Matrix3d observed_information(const BetaVector& beta, const std::array<double, 4>& y,
                                     const std::array<double, 4>& n, Link link) {
  // Central differences of the analytic score.
  constexpr double h = 1e-6;
  Eigen::Matrix3d info;
  for (int j = 0; j < 3; ++j) {
    Eigen::Vector3d up = to_vec(beta), down = to_vec(beta);
    up(j) += h;
    down(j) -= h;
    const auto su = score(to_beta(up), y, n, link);
    const auto sd = score(to_beta(down), y, n, link);
    for (int i = 0; i < 3; ++i) info(i, j) = -(su[i] - sd[i]) / (2.0 * h);
  }
  return 0.5 * (info + info.transpose());
}

FitResult fit_glm(const std::array<double, 4>& y, const std::array<double, 4>& n, Link link,
                  const IrlsOptions& opts) {
  FitResult fit;
  double total = 0.0, pooled = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    if (!(n[i] > 0.0) || !(y[i] >= 0.0 && y[i] <= 1.0)) {
      throw ValidationError("fit_glm: need trials > 0 and proportions in [0, 1]");
    }
    if (y[i] == 0.0 || y[i] == 1.0) {
      fit.warnings.push_back("boundary cell " + std::to_string(i + 1) +
                             ": observed proportion is 0 or 1; the MLE may not exist");
    }
    total += n[i];
    pooled += n[i] * y[i];
  }
  pooled = std::clamp(pooled / total, 1e-6, 1.0 - 1e-6);

  BetaVector beta{link_value(link, pooled), 0.0, 0.0};
  double ll = log_likelihood(beta, y, n, link);
  std::ostringstream trace;

  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    Eigen::Matrix3d xtwx = Eigen::Matrix3d::Zero();
    Eigen::Vector3d xtwz = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < 4; ++i) {
      const double eta = linear_predictor(beta, i);
      const double mu = mean(link, eta);
      const double cmu = mean_complement(link, eta);
      const double d = std::max(mean_derivative(link, eta), 1e-300);
      const double w = n[i] * d * d / (mu * cmu);
      const double z = eta + residual(y[i], mu, cmu) / d;
      xtwx += w * row(i) * row(i).transpose();
      xtwz += w * z * row(i);
    }
    const Eigen::Vector3d current = to_vec(beta);
    Eigen::Vector3d proposal = xtwx.ldlt().solve(xtwz);
    // Fisher scoring is only linearly convergent for non-canonical links;
    // take the Newton step instead whenever the observed information is
    // positive definite.
    const auto sc = score(beta, y, n, link);
    const Eigen::LLT<Eigen::Matrix3d> observed(observed_information(beta, y, n, link));
    if (observed.info() == Eigen::Success) {
      const Eigen::Vector3d newton = current + observed.solve(Eigen::Vector3d(sc[0], sc[1], sc[2]));
      if (newton.allFinite()) proposal = newton;
    }
    if (!proposal.allFinite()) {
      throw NumericalError("fit_glm: singular working information at iteration " +
                           std::to_string(iter) + "\n" + trace.str());
    }
    double ll_new = log_likelihood(to_beta(proposal), y, n, link);
    // Near the optimum ll is flat to rounding; only halve on a real decrease.
    const double ll_floor = ll - 1e-12 * (1.0 + std::abs(ll));
    for (int halving = 0; halving < 30 && !(ll_new >= ll_floor); ++halving) {
      proposal = 0.5 * (current + proposal);
      ll_new = log_likelihood(to_beta(proposal), y, n, link);
    }
    beta = to_beta(proposal);
    ll = ll_new;
    fit.score_norm = max_abs(score(beta, y, n, link));
    trace << "iter " << iter << ": beta=(" << beta.b0 << ", " << beta.b1 << ", " << beta.b2
          << ") loglik=" << ll << " |score|=" << fit.score_norm << '\n';
    const double step = (proposal - current).cwiseAbs().maxCoeff();
    const bool stalled = step <= 1e-12 * (1.0 + current.cwiseAbs().maxCoeff()) &&
                         fit.score_norm <= kStalledScoreTol;
    if (fit.score_norm <= opts.score_tol || stalled) {
      fit.beta_hat = beta;
      fit.iterations = iter;
      fit.converged = true;
      return fit;
    }
  }
  throw NumericalError("fit_glm: non-convergence after " + std::to_string(opts.max_iter) +
                       " IRLS iterations\n" + trace.str());
}

FitResult fit_glm(const BinomialTable& table, Link link, const IrlsOptions& opts) {
  table.validate();
  std::array<double, 4> y{}, n{};
  for (std::size_t i = 0; i < 4; ++i) {
    n[i] = table.cells[i].trials;
    y[i] = table.cells[i].successes / n[i];
  }
  return fit_glm(y, n, link, opts);
}

FitResult analyze(const BinomialTable& table, Link link, const IrlsOptions& opts) {
  FitResult fit = fit_glm(table, link, opts);
  fit.w_hat = WeightVector(weights_from_beta(link, fit.beta_hat));
  const SolveResult opt = solve(variance_from_weight(fit.w_hat));
  fit.p_opt = opt.p;
  fit.det_opt = det_criterion(fit.w_hat, fit.p_opt);
  fit.det_uniform = det_criterion(fit.w_hat, DesignMeasure::uniform());
  fit.uniform_efficiency = std::min(1.0, std::cbrt(fit.det_uniform / fit.det_opt));
  return fit;
}

}  // namespace optdesign
