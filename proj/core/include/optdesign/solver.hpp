#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

#include "optdesign/design.hpp"

namespace optdesign {

struct SolverConfig {
  /// Stop when the relative change of L falls below this (and KKT holds).
  double convergence_tol = 1e-12;
  int max_iter = 10000;
  /// Relative slack in the saturation test 2 max v >= (1 - tol) sum v.
  double saturation_tol = 1e-10;
  /// Divisions per axis for grid_oracle.
  int grid_resolution = 200;
};

enum class Branch { saturated, corollary1, corollary2, general };

std::string_view to_string(Branch branch);

struct SolveResult {
  DesignMeasure p;
  double L_max = 0.0;
  Branch branch = Branch::general;
  int iterations = 0;
  /// (max_i dL/dp_i - min_i dL/dp_i) / max_i dL/dp_i over the support.
  double kkt_residual = 0.0;
};

struct SaturationCheck {
  bool saturated = false;
  /// Index of max v (0-based, lowest on ties).
  std::size_t index = 0;
};

/// Saturation condition: 2 max v >= (1 - tol) sum v.
SaturationCheck is_saturated(const VarianceVector& v, double tol = 1e-10);

/// Three-point design (1/3 on every point except argmax v).
/// Throws ValidationError if v is not saturated.
SolveResult solve_saturated(const VarianceVector& v, double tol = 1e-10);

/// Closed form when three v's coincide and the fourth is at most 3x their
/// common value. Returns nullopt on pattern mismatch.
std::optional<SolveResult> solve_corollary1(const VarianceVector& v);

/// Closed form for two matched pairs v = (u, u, s, s) up to relabelling with
/// u > s. Returns nullopt on pattern mismatch (including u == s).
std::optional<SolveResult> solve_corollary2(const VarianceVector& v);

/// Iterative maximiser of L over the simplex for non-saturated v.
/// Throws ValidationError if v is saturated and NumericalError if it fails
/// to converge within cfg.max_iter iterations.
SolveResult solve_general(const VarianceVector& v, const SolverConfig& cfg = {});

/// Same, started from a caller-provided strictly positive design.
SolveResult solve_general(const VarianceVector& v, const DesignMeasure& start,
                          const SolverConfig& cfg = {});

/// Dispatcher: saturated -> corollary1 -> corollary2 -> general.
SolveResult solve(const VarianceVector& v, const SolverConfig& cfg = {});

/// Exhaustive argmax of L over {(i, j, k, r - i - j - k) / r}.
DesignMeasure grid_oracle(const VarianceVector& v, int resolution);

/// Largest-remainder rounding of n p_i. Ties in the remainder go to the
/// lowest index.
std::array<int, 4> allocate(const DesignMeasure& p, int n);

}  // namespace optdesign
