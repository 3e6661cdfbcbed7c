#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "optdesign/design.hpp"
#include "optdesign/link.hpp"
#include "optdesign/solver.hpp"

namespace optdesign {

struct StudyConfig {
  Link link = Link::logit;
  double w_low = 0.05;
  double w_high = 0.25;
  int n_samples = 1000;
  /// Requested percentiles in (0, 100]; nearest-rank definition.
  std::vector<double> percentiles{25, 50, 75, 95, 99};
  std::uint64_t seed = 0;
  /// Worker threads for the pairwise stage; 0 means hardware concurrency.
  unsigned threads = 1;
  /// Keep the full n x n loss matrix in the result.
  bool keep_matrix = false;
  SolverConfig solver{};

  /// Link-specific default weight range: [0.05, 0.25] for logit,
  /// [0.05, 0.65] otherwise.
  static StudyConfig defaults(Link link);
  /// Throws ValidationError on an inconsistent configuration.
  void validate() const;
};

struct SampleRecord {
  WeightVector w;
  VarianceVector v;
  DesignMeasure p;
  Branch branch = Branch::general;
  double distance = 0.0;
  /// Set when the solver failed; the sample is then excluded.
  std::optional<std::string> error;
};

struct CandidateSummary {
  std::size_t index = 0;
  /// One entry per StudyConfig::percentiles.
  std::vector<double> r_percentiles;
  double r_max = 0.0;
  double distance = 0.0;
};

struct StudyResult {
  StudyConfig config;
  std::vector<SampleRecord> samples;
  /// Only samples whose solve succeeded act as candidates.
  std::vector<CandidateSummary> candidates;
  double saturated_fraction = 0.0;
  std::size_t failed_samples = 0;
  /// Row c, column t holds R(t, c); the diagonal and failed samples are NaN.
  /// Empty unless StudyConfig::keep_matrix.
  std::vector<std::vector<double>> matrix;

  /// Percentile column for config.percentiles[k] across all candidates.
  std::vector<double> percentile_column(std::size_t k) const;
};

/// Sample i depends only on (seed, i).
std::vector<WeightVector> sample_weights(const StudyConfig& cfg);

/// Fraction of samples satisfying the saturation condition.
double saturated_fraction(std::span<const WeightVector> samples);

/// Nearest-rank percentile of an ascending-sorted sample: the
/// ceil(q/100 * n)-th order statistic.
double nearest_rank_percentile(std::span<const double> sorted, double q);

/// Samples weights from cfg, solves every sample once and evaluates R(t, c)
/// for every ordered pair t != c. The result does not depend on cfg.threads.
StudyResult run_study(const StudyConfig& cfg);
/// Same study over caller-supplied weights (cfg's sampling fields unused).
StudyResult run_study(const StudyConfig& cfg, std::span<const WeightVector> weights);

/// Spearman rank correlation with average ranks for ties.
double spearman_correlation(std::span<const double> x, std::span<const double> y);

/// Writes samples.csv and summary.csv (and matrix.csv when the matrix was
/// kept) into dir, creating it if needed. Throws IoError with the path.
void export_study(const StudyResult& result, const std::filesystem::path& dir);

/// Header line of summary.csv for the given percentiles.
std::string summary_header(std::span<const double> percentiles);
inline constexpr const char* kSamplesHeader =
    "index,w1,w2,w3,w4,v1,v2,v3,v4,p1,p2,p3,p4,branch,distance";

}  // namespace optdesign
