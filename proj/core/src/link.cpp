#include "optdesign/link.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "optdesign/csv.hpp"
#include "optdesign/error.hpp"

namespace optdesign {

namespace {

constexpr double kMuClamp = 1e-15;

double clamp_mu(double mu) { return std::clamp(mu, kMuClamp, 1.0 - kMuClamp); }

// Standard normal density and upper/lower tails, each accurate in its own tail.
double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// mu and 1 - mu, each evaluated without cancellation.
struct Tails {
  double mu;
  double one_minus_mu;
};

Tails cloglog_tails(double eta) {
  const double e = std::exp(eta);
  return {-std::expm1(-e), std::exp(-e)};
}

Tails tails(Link link, double eta) {
  switch (link) {
    case Link::logit: {
      const double z = std::exp(-std::abs(eta));
      const double small = z / (1.0 + z);
      const double large = 1.0 / (1.0 + z);
      return eta >= 0 ? Tails{large, small} : Tails{small, large};
    }
    case Link::probit:
      return {normal_cdf(eta), normal_cdf(-eta)};
    case Link::cloglog:
      return cloglog_tails(eta);
    case Link::loglog: {
      const Tails t = cloglog_tails(-eta);
      return {t.one_minus_mu, t.mu};
    }
  }
  return {0.5, 0.5};
}

double cloglog_derivative(double eta) {
  // d/deta [1 - exp(-e^eta)] = e^eta exp(-e^eta)
  return std::exp(eta - std::exp(eta));
}

double cloglog_weight(double eta) {
  const Tails t = cloglog_tails(eta);
  const double d = cloglog_derivative(eta);
  return d * d / (clamp_mu(t.mu) * clamp_mu(t.one_minus_mu));
}

}  // namespace

std::string_view to_string(Link link) {
  switch (link) {
    case Link::logit: return "logit";
    case Link::probit: return "probit";
    case Link::loglog: return "loglog";
    case Link::cloglog: return "cloglog";
  }
  return "unknown";
}

Link parse_link(std::string_view name) {
  for (Link l : {Link::logit, Link::probit, Link::loglog, Link::cloglog}) {
    if (name == to_string(l)) return l;
  }
  throw ValidationError("unknown link '" + std::string(name) +
                        "' (expected logit, probit, loglog or cloglog)");
}

double weight_cap(Link link) {
  switch (link) {
    case Link::logit: return 0.25;
    case Link::probit: return 2.0 / std::numbers::pi;
    // max of the cloglog weight, attained at eta ~ 0.46601
    case Link::loglog:
    case Link::cloglog: return 0.6476102378919143;
  }
  return 0.0;
}

double linear_predictor(const BetaVector& beta, std::size_t point) {
  const DesignPoint& x = kDesignPoints.at(point);
  return beta.b0 + beta.b1 * x.x1 + beta.b2 * x.x2;
}

double mean(Link link, double eta) { return clamp_mu(tails(link, eta).mu); }

double mean_complement(Link link, double eta) { return clamp_mu(tails(link, eta).one_minus_mu); }

double mean_derivative(Link link, double eta) {
  switch (link) {
    case Link::logit: {
      const Tails t = tails(link, eta);
      return t.mu * t.one_minus_mu;
    }
    case Link::probit: return normal_pdf(eta);
    case Link::cloglog: return cloglog_derivative(eta);
    case Link::loglog: return cloglog_derivative(-eta);
  }
  return 0.0;
}

double weight(Link link, double eta) {
  switch (link) {
    case Link::logit: {
      const Tails t = tails(link, eta);
      return t.mu * t.one_minus_mu;
    }
    case Link::probit: {
      const double d = normal_pdf(eta);
      return d * d / (clamp_mu(normal_cdf(eta)) * clamp_mu(normal_cdf(-eta)));
    }
    case Link::cloglog: return cloglog_weight(eta);
    case Link::loglog: return cloglog_weight(-eta);
  }
  return 0.0;
}

double link_value(Link link, double mu) {
  if (!(mu > 0.0 && mu < 1.0)) {
    throw ValidationError("link_value: mean must lie in (0, 1)");
  }
  switch (link) {
    case Link::logit: return std::log(mu / (1.0 - mu));
    case Link::cloglog: return std::log(-std::log1p(-mu));
    case Link::loglog: return -std::log(-std::log(mu));
    case Link::probit: {
      // Phi is monotone; bisection to full precision is plenty for a start value.
      double lo = -40.0;
      double hi = 40.0;
      for (int i = 0; i < 200 && hi - lo > 1e-14; ++i) {
        const double mid = 0.5 * (lo + hi);
        (normal_cdf(mid) < mu ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
  }
  return 0.0;
}

std::array<double, 4> weights_from_beta(Link link, const BetaVector& beta) {
  std::array<double, 4> w{};
  for (std::size_t i = 0; i < 4; ++i) w[i] = weight(link, linear_predictor(beta, i));
  return w;
}

std::vector<CurvePoint> weight_curve(Link link, std::span<const double> eta_grid) {
  if (eta_grid.empty()) throw ValidationError("weight_curve: empty eta grid");
  std::vector<CurvePoint> out;
  out.reserve(eta_grid.size());
  for (double eta : eta_grid) {
    if (!std::isfinite(eta)) throw ValidationError("weight_curve: non-finite eta");
    out.push_back({eta, mean(link, eta), weight(link, eta)});
  }
  return out;
}

void write_curve_csv(std::ostream& out, std::span<const CurvePoint> curve) {
  out << "eta,mu,w\n";
  for (const CurvePoint& c : curve) {
    out << csv::format_significant(c.eta, 15) << ',' << csv::format_significant(c.mu, 15)
        << ',' << csv::format_significant(c.w, 15) << '\n';
  }
}

}  // namespace optdesign
