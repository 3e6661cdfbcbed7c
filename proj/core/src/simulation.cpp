#include "optdesign/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

#include "optdesign/csv.hpp"
#include "optdesign/error.hpp"
#include "optdesign/robustness.hpp"

namespace optdesign {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::string percentile_label(double q) {
  return "R_" + csv::format_significant(q, 6);
}

CandidateSummary summarize(std::vector<double>& losses, std::span<const double> percentiles) {
  std::sort(losses.begin(), losses.end());
  CandidateSummary s;
  s.r_percentiles.reserve(percentiles.size());
  for (double q : percentiles) s.r_percentiles.push_back(nearest_rank_percentile(losses, q));
  s.r_max = losses.empty() ? 0.0 : losses.back();
  return s;
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> rank(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }
  return rank;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace

StudyConfig StudyConfig::defaults(Link link) {
  StudyConfig cfg;
  cfg.link = link;
  cfg.w_low = 0.05;
  cfg.w_high = link == Link::logit ? 0.25 : 0.65;
  return cfg;
}

void StudyConfig::validate() const {
  if (!(std::isfinite(w_low) && std::isfinite(w_high) && w_low > 0.0 && w_low < w_high)) {
    throw ValidationError("study: need 0 < w_low < w_high");
  }
  if (n_samples < 2) throw ValidationError("study: n_samples must be >= 2");
  for (double q : percentiles) {
    if (!(q > 0.0 && q <= 100.0)) throw ValidationError("study: percentiles must lie in (0, 100]");
  }
  if (!std::is_sorted(percentiles.begin(), percentiles.end())) {
    throw ValidationError("study: percentiles must be sorted ascending");
  }
}

std::vector<double> StudyResult::percentile_column(std::size_t k) const {
  std::vector<double> col;
  col.reserve(candidates.size());
  for (const auto& c : candidates) col.push_back(c.r_percentiles.at(k));
  return col;
}

std::vector<WeightVector> sample_weights(const StudyConfig& cfg) {
  cfg.validate();
  std::vector<WeightVector> out;
  out.reserve(static_cast<std::size_t>(cfg.n_samples));
  const double span = cfg.w_high - cfg.w_low;
  for (int i = 0; i < cfg.n_samples; ++i) {
    std::mt19937_64 rng(splitmix64(cfg.seed ^ splitmix64(static_cast<std::uint64_t>(i))));
    std::array<double, 4> w{};
    for (double& x : w) x = cfg.w_low + span * unit_uniform(rng);
    out.emplace_back(w);
  }
  return out;
}

double saturated_fraction(std::span<const WeightVector> samples) {
  if (samples.empty()) throw ValidationError("saturated_fraction: no samples");
  std::size_t hits = 0;
  for (const WeightVector& w : samples) {
    if (is_saturated(variance_from_weight(w)).saturated) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

double nearest_rank_percentile(std::span<const double> sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(q / 100.0 * n));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

StudyResult run_study(const StudyConfig& cfg, std::span<const WeightVector> weights) {
  cfg.validate();
  StudyResult result;
  result.config = cfg;
  result.samples.reserve(weights.size());
  for (const WeightVector& w : weights) {
    SampleRecord rec;
    rec.w = w;
    try {
      rec.v = variance_from_weight(w);
      const SolveResult sol = solve(rec.v, cfg.solver);
      rec.p = sol.p;
      rec.branch = sol.branch;
      rec.distance = standardized_distance(rec.v);
    } catch (const Error& e) {
      rec.error = e.what();
      ++result.failed_samples;
    }
    result.samples.push_back(std::move(rec));
  }
  result.saturated_fraction = saturated_fraction(weights);

  std::vector<std::size_t> valid;
  for (std::size_t i = 0; i < result.samples.size(); ++i) {
    if (!result.samples[i].error) valid.push_back(i);
  }
  const std::size_t n = result.samples.size();
  result.candidates.resize(valid.size());
  if (cfg.keep_matrix) {
    result.matrix.assign(n, std::vector<double>(n, std::numeric_limits<double>::quiet_NaN()));
  }

  // Each candidate slot is written by exactly one worker.
  const auto evaluate = [&](std::size_t begin, std::size_t end) {
    std::vector<double> losses;
    losses.reserve(valid.size());
    for (std::size_t slot = begin; slot < end; ++slot) {
      const SampleRecord& cand = result.samples[valid[slot]];
      losses.clear();
      for (std::size_t t : valid) {
        if (t == valid[slot]) continue;
        const SampleRecord& truth = result.samples[t];
        const double r = relative_loss(truth.w, truth.p, cand.p);
        losses.push_back(r);
        if (cfg.keep_matrix) result.matrix[valid[slot]][t] = r;
      }
      CandidateSummary s = summarize(losses, cfg.percentiles);
      s.index = valid[slot];
      s.distance = cand.distance;
      result.candidates[slot] = std::move(s);
    }
  };

  unsigned workers = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                      : cfg.threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, valid.size())));
  if (workers <= 1) {
    evaluate(0, valid.size());
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (valid.size() + workers - 1) / workers;
    for (std::size_t begin = 0; begin < valid.size(); begin += chunk) {
      pool.emplace_back(evaluate, begin, std::min(valid.size(), begin + chunk));
    }
  }
  return result;
}

StudyResult run_study(const StudyConfig& cfg) {
  const std::vector<WeightVector> weights = sample_weights(cfg);
  return run_study(cfg, weights);
}

double spearman_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ValidationError("spearman_correlation: need two equal-length samples of size >= 2");
  }
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

std::string summary_header(std::span<const double> percentiles) {
  std::string h = "candidate_index";
  for (double q : percentiles) h += "," + percentile_label(q);
  h += ",distance";
  return h;
}

void export_study(const StudyResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());

  using csv::format_roundtrip;
  {
    const auto path = dir / "samples.csv";
    auto out = open_for_write(path);
    out << kSamplesHeader << '\n';
    for (std::size_t i = 0; i < result.samples.size(); ++i) {
      const SampleRecord& s = result.samples[i];
      out << i;
      for (double x : s.w) out << ',' << format_roundtrip(x);
      if (s.error) {
        out << ",,,,,,,,,failed,\n";
        continue;
      }
      for (double x : s.v) out << ',' << format_roundtrip(x);
      for (double x : s.p) out << ',' << format_roundtrip(x);
      out << ',' << to_string(s.branch) << ',' << format_roundtrip(s.distance) << '\n';
    }
    finish(out, path);
  }
  {
    const auto path = dir / "summary.csv";
    auto out = open_for_write(path);
    const StudyConfig& cfg = result.config;
    out << "# saturated_fraction=" << format_roundtrip(result.saturated_fraction)
        << " failed_samples=" << result.failed_samples << " n_samples=" << result.samples.size()
        << " link=" << to_string(cfg.link) << " w_low=" << format_roundtrip(cfg.w_low)
        << " w_high=" << format_roundtrip(cfg.w_high) << " seed=" << cfg.seed << '\n';
    out << summary_header(cfg.percentiles) << '\n';
    for (const CandidateSummary& c : result.candidates) {
      out << c.index;
      for (double r : c.r_percentiles) out << ',' << format_roundtrip(r);
      out << ',' << format_roundtrip(c.distance) << '\n';
    }
    finish(out, path);
  }
  if (!result.matrix.empty()) {
    const auto path = dir / "matrix.csv";
    auto out = open_for_write(path);
    out << "# row c = chosen design, column t = true weights, entry R(t, c)\n";
    for (const auto& row : result.matrix) {
      for (std::size_t t = 0; t < row.size(); ++t) {
        if (t) out << ',';
        if (!std::isnan(row[t])) out << format_roundtrip(row[t]);
      }
      out << '\n';
    }
    finish(out, path);
  }
}

}  // namespace optdesign
