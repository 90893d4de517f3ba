#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sshwalk/generator.hpp"
#include "sshwalk/philox.hpp"
#include "sshwalk/rates.hpp"

namespace sshwalk {

/// Per-site hopping rates of a nearest-neighbour walk on {1, ..., N}.
/// up[k-1] moves k -> k+1 (up[N-1] escapes right), down[k-1] moves
/// k -> k-1 (down[0] escapes left).
struct HoppingChain {
  std::size_t n_sites = 0;
  std::vector<double> up;
  std::vector<double> down;
};

HoppingChain hopping_chain(const ChainGenerator &generator);
HoppingChain hopping_chain(const TransportGenerator &generator);
HoppingChain hopping_chain(const RateConfig &config, std::size_t n_sites);

inline constexpr std::uint64_t kDefaultMaxSteps = 1'000'000'000ULL;

/// Thrown when a trajectory exceeds its step budget.
class StepLimitError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Event-driven exact trajectory: Exp(up + down) holding times, a jump
/// right with probability up / (up + down), until the walker leaves
/// {1, ..., N}. start_site is 1-based.
double sample_escape_time(const HoppingChain &chain, std::size_t start_site, Philox4x64 &rng,
                          std::uint64_t max_steps = kDefaultMaxSteps);
double sample_escape_time(const RateConfig &config, std::size_t n_sites, std::size_t start_site,
                          Philox4x64 &rng, std::uint64_t max_steps = kDefaultMaxSteps);

/// How trajectories choose their start site.
struct InitialSpec {
  enum class Kind { symmetric_edges, site };
  Kind kind = Kind::symmetric_edges;
  std::size_t site = 1;

  static InitialSpec symmetric() { return {}; }
  static InitialSpec at_site(std::size_t site) { return {Kind::site, site}; }
  /// "symmetric" or "site:<k>".
  static InitialSpec parse(const std::string &text);
  std::string describe() const;

  /// Trajectories i < i_max/2 start at site 1, the rest at N (symmetric);
  /// otherwise every trajectory starts at `site`.
  std::size_t start_site(std::size_t trajectory, std::size_t i_max, std::size_t n_sites) const;
  /// The matching initial distribution rho0.
  std::vector<double> distribution(std::size_t n_sites) const;
};

struct EscapeTimeEnsemble {
  /// Sorted ascending.
  std::vector<double> times;
  std::uint64_t seed = 0;
  std::size_t n_sites = 0;
  InitialSpec initial;
  /// Hex digest of the hopping rates the ensemble was drawn from.
  std::string fingerprint;
  /// Times are raw times multiplied by this factor.
  double time_scale = 1.0;
  std::string time_unit = "raw";

  std::size_t i_max() const { return times.size(); }
  /// Multiplies every time by factor and records the new unit.
  void rescale(double factor, const std::string &unit);
};

/// FNV-1a over the rate bytes; stable across runs and platforms.
std::string chain_fingerprint(const HoppingChain &chain);

/// Trajectory i uses the stream Philox4x64(master_seed, i). Parallel over
/// trajectories with OpenMP; the result is identical for any thread count.
EscapeTimeEnsemble sample_ensemble(const HoppingChain &chain, std::size_t i_max,
                                   const InitialSpec &initial, std::uint64_t master_seed,
                                   std::uint64_t max_steps = kDefaultMaxSteps);
EscapeTimeEnsemble sample_ensemble(const RateConfig &config, std::size_t n_sites,
                                   std::size_t i_max, const InitialSpec &initial,
                                   std::uint64_t master_seed);

/// Single-threaded reference for sample_ensemble.
EscapeTimeEnsemble sample_ensemble_serial(const HoppingChain &chain, std::size_t i_max,
                                          const InitialSpec &initial, std::uint64_t master_seed,
                                          std::uint64_t max_steps = kDefaultMaxSteps);

enum class CurveKind { integrated_etd, etd };

std::string to_string(CurveKind kind);
CurveKind parse_curve_kind(const std::string &text);

struct CurvePoint {
  double t = 0.0;
  double value = 0.0;
};

struct ReconstructedCurve {
  std::vector<CurvePoint> points;
  CurveKind kind = CurveKind::integrated_etd;
  std::size_t n_av = 0;
  std::size_t n_step = 0;

  std::vector<double> times() const;
  std::vector<double> values() const;
};

/// Moving average of (t_i, i) over windows of exactly n_av consecutive
/// sorted times, normalized by i_max, then every n_step-th point (starting
/// with the first). Requires i_max > n_av + n_step.
ReconstructedCurve reconstruct_integrated_etd(std::span<const double> sorted_times,
                                              std::size_t n_av = 100, std::size_t n_step = 500);
ReconstructedCurve reconstruct_integrated_etd(const EscapeTimeEnsemble &ensemble,
                                              std::size_t n_av = 100, std::size_t n_step = 500);

/// Finite-difference density of the smoothed cumulative curve at stride
/// n_step, placed at the midpoint of each interval. Intervals of zero width
/// are merged into the next one so the differences still telescope.
ReconstructedCurve reconstruct_etd(std::span<const double> sorted_times, std::size_t n_av = 100,
                                   std::size_t n_step = 500);
ReconstructedCurve reconstruct_etd(const EscapeTimeEnsemble &ensemble, std::size_t n_av = 100,
                                   std::size_t n_step = 500);

/// Kolmogorov-Smirnov distance sup |F_n - F| for a sorted sample.
double ks_distance(std::span<const double> sorted_sample, const std::function<double(double)> &cdf);

struct SampleStats {
  double mean = 0.0;
  double std_error = 0.0;
};

SampleStats sample_stats(std::span<const double> sample);

} // namespace sshwalk
