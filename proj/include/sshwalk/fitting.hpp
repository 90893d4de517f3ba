#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sshwalk/montecarlo.hpp"
#include "sshwalk/rates.hpp"

namespace sshwalk {

struct FitTerm {
  double beta = 0.0;
  double weight = 0.0;
};

struct FitDiagnostics {
  int iterations = 0;
  bool converged = false;
  /// s_max / s_min of the linear design matrix at the optimum.
  double condition = 1.0;
  std::size_t restarts = 0;
  /// Index of the winning start.
  std::size_t best_start = 0;
};

/// Fit of P_int(t) = 1 - sum_j A_j exp(-beta_j t) with sum_j A_j = 1.
struct FitResult {
  /// Sorted by beta; near-duplicate exponents merged.
  std::vector<FitTerm> terms;
  /// Root-mean-square misfit.
  double residual = 0.0;
  /// Requested number of terms.
  std::size_t k_terms = 0;
  FitDiagnostics diagnostics;

  std::size_t effective_k() const { return terms.size(); }
  double weight_sum() const;
};

struct FitOptions {
  std::size_t random_restarts = 8;
  std::uint64_t seed = 0;
  /// Typical rate of the data; centers the deterministic starting ladder.
  double rate_scale = 1.0;
  int max_iterations = 500;
  double tolerance = 1e-10;
};

/// Variable projection: the weights are solved exactly (with A_K eliminated
/// through the sum rule) for every trial set of exponents, and log(beta) is
/// optimized by Levenberg-Marquardt from several starts. Requires
/// K in [1, 6] and at least 4K points.
FitResult fit_integrated_etd(std::span<const double> t, std::span<const double> y, std::size_t k,
                             const FitOptions &options = {});
FitResult fit_integrated_etd(const ReconstructedCurve &curve, std::size_t k,
                             const FitOptions &options = {});

/// Sampling and reconstruction settings shared by every sweep cell.
struct PipelineOptions {
  std::size_t n_av = 100;
  std::size_t n_step = 500;
  InitialSpec initial;
  /// Escape times are multiplied by this before reconstruction, e.g.
  /// 2 gamma_bar for times in units of 1/(2 gamma_bar).
  double time_scale = 1.0;
  FitOptions fit;
};

struct StabilityCell {
  std::size_t k = 0;
  std::size_t i_max = 0;
  std::uint64_t seed = 0;
  std::optional<FitResult> fit;
  /// Set when the cell failed; the sweep carries on.
  std::string error;
};

/// Full sample -> reconstruct -> fit pipeline for every (K, i_max, seed).
/// Cells are ordered by K, then i_max, then seed.
std::vector<StabilityCell> fit_stability_sweep(const RateConfig &config, std::size_t n_sites,
                                               std::span<const std::size_t> k_list,
                                               std::span<const std::size_t> i_max_list,
                                               std::span<const std::uint64_t> seeds,
                                               const PipelineOptions &options = {});

struct SpreadSummary {
  std::size_t k = 0;
  /// (max - min) / mean of the j-th smallest beta across usable cells.
  std::vector<double> spreads;
  std::size_t cells_used = 0;
  /// Cells that failed or returned fewer than K distinct terms.
  std::size_t cells_skipped = 0;

  double max_spread() const;
};

SpreadSummary beta_spread(std::span<const StabilityCell> cells, std::size_t k);

} // namespace sshwalk
