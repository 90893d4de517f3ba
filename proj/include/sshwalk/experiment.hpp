#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sshwalk/etd.hpp"
#include "sshwalk/fitting.hpp"
#include "sshwalk/generator.hpp"
#include "sshwalk/io.hpp"
#include "sshwalk/montecarlo.hpp"
#include "sshwalk/rates.hpp"
#include "sshwalk/spectral.hpp"

namespace sshwalk {

enum class Model { ssh, set, feedback };

std::string to_string(Model model);
Model parse_model(const std::string &text);

struct SweepSpec {
  double alpha_min = -1.0;
  double alpha_max = 1.0;
  /// Number of grid points, endpoints included.
  std::size_t points = 21;

  std::vector<double> values() const;
};

struct SamplingSpec {
  std::size_t i_max = 100000;
  std::uint64_t seed = 1;
  InitialSpec initial;
};

struct PipelineSpec {
  std::size_t n_av = 100;
  std::size_t n_step = 500;
  std::size_t k = 3;
  std::size_t restarts = 8;
};

/// Everything a run needs. Read from a JSON file; command-line flags are
/// applied on top by the caller.
struct ExperimentConfig {
  Model model = Model::ssh;
  /// SSH rates; gamma_bar also sets the time unit 1/(2 gamma_bar).
  double gamma_bar = 1.0;
  double alpha = -0.5;
  /// Feedback walk: gamma_l_even is held fixed while alpha is swept.
  double gamma_l_even = 1.0;
  SetLeadConfig lead;
  std::size_t n_sites = 10;
  std::optional<SweepSpec> sweep;
  SamplingSpec sampling;
  PipelineSpec pipeline;
  std::filesystem::path output_dir = "out";
  bool raw_units = false;

  static ExperimentConfig from_json(const json &doc);
  static ExperimentConfig load(const std::filesystem::path &path);
  json to_json() const;
  /// to_json without the output directory, so artifacts do not depend on
  /// where they are written.
  json artifact_json() const;
  /// Throws std::invalid_argument on any out-of-range parameter.
  void validate() const;

  /// Rates at the configured alpha (SSH only).
  RateConfig rates() const;
  /// Rates at a sweep point; |alpha| = gamma_bar is allowed.
  RateConfig rates_at(double alpha) const;
  FeedbackConfig feedback_at(double alpha) const;

  /// The natural rate 2 gamma_bar of the model; times are reported in units
  /// of its inverse unless raw_units is set.
  double rate_unit() const;
  /// Factor applied to raw times (rate_unit, or 1 in raw units).
  double time_factor() const;
  std::string time_unit_label() const;
};

/// Symmetric generator for the configured model at the given alpha.
ChainGenerator generator_at(const ExperimentConfig &config, double alpha);

/// Hopping rates used for sampling at the given alpha.
HoppingChain sampling_chain(const ExperimentConfig &config, double alpha);

/// CSV with header alpha, j, beta_j, parity, edge_weight.
CsvWriter spectrum_writer();
/// Appends one row per eigenvalue; beta in units of rate_scale.
void append_spectrum_rows(CsvWriter &csv, double alpha,
                          const SpectralDecomposition &decomposition, double rate_scale);
/// Columns j, beta_j, a_j, A_j, parity.
std::string etd_csv(const EtdModel &model, double rate_scale);

/// Sample, rescale, reconstruct and fit at one alpha.
struct PipelineResult {
  EscapeTimeEnsemble ensemble;
  ReconstructedCurve curve;
  FitResult fit;
};

PipelineResult run_pipeline(const ExperimentConfig &config, double alpha);

struct SweepError {
  double alpha = 0.0;
  std::string message;
};

struct SweepReport {
  std::vector<std::filesystem::path> files;
  std::vector<SweepError> errors;
  /// Some fit in the sweep did not converge.
  bool unconverged = false;
};

/// Fitted exponent spectrum over the alpha sweep: alpha, j, beta_j, A_j.
SweepReport sweep_fit(const ExperimentConfig &config, const std::filesystem::path &path);

/// fig2_analytic.csv (alpha, j, beta_j, A_j, parity) and fig2_fitted.csv
/// (alpha, j, beta_fit_j, A_fit_j) in the output directory.
SweepReport reproduce_fig2(const ExperimentConfig &config, bool with_fit = true);

/// fig3a_analytic.csv, fig3a_integrated.csv, fig3a_density.csv,
/// fig3a_summary.json at the configured alpha and fig3b.csv with
/// alpha, kappa_1, kappa_2, kappa_3 over the sweep.
SweepReport reproduce_fig3(const ExperimentConfig &config);

struct RunReport {
  json manifest;
  bool fit_converged = true;
};

/// Runs generate -> decompose -> etd -> sample -> reconstruct -> fit,
/// writes every artifact plus manifest.json (with SHA-256 digests) to the
/// output directory. On a stage failure the manifest records the stages
/// that completed and the error is rethrown.
RunReport run_experiment(const ExperimentConfig &config);

} // namespace sshwalk
