#include "sshwalk/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <stdexcept>

namespace sshwalk {

namespace {

void check_chain(const HoppingChain &chain) {
  if (chain.n_sites == 0 || chain.up.size() != chain.n_sites ||
      chain.down.size() != chain.n_sites) {
    throw std::invalid_argument("hopping chain has inconsistent sizes");
  }
  for (std::size_t k = 0; k < chain.n_sites; ++k) {
    if (!(chain.up[k] >= 0.0) || !(chain.down[k] >= 0.0)) {
      throw std::invalid_argument("hopping rates must be nonnegative");
    }
  }
}

// Can the walker reach the outside from `start` at all?
bool escape_reachable(const HoppingChain &chain, std::size_t start) {
  std::size_t k = start - 1;
  while (true) {
    if (chain.up[k] <= 0.0) break;
    if (k + 1 == chain.n_sites) return true;
    ++k;
  }
  k = start - 1;
  while (true) {
    if (chain.down[k] <= 0.0) break;
    if (k == 0) return true;
    --k;
  }
  return false;
}

void check_start_sites(const HoppingChain &chain, const InitialSpec &initial, std::size_t i_max) {
  if (i_max < 2) {
    throw std::invalid_argument("i_max must be at least 2");
  }
  const std::size_t first = initial.start_site(0, i_max, chain.n_sites);
  const std::size_t last = initial.start_site(i_max - 1, i_max, chain.n_sites);
  for (std::size_t site : {first, last}) {
    if (!escape_reachable(chain, site)) {
      throw std::invalid_argument("walker started at site " + std::to_string(site) +
                                  " can never leave the chain");
    }
  }
}

EscapeTimeEnsemble make_ensemble(const HoppingChain &chain, std::vector<double> times,
                                 const InitialSpec &initial, std::uint64_t seed) {
  std::sort(times.begin(), times.end());
  EscapeTimeEnsemble out;
  out.times = std::move(times);
  out.seed = seed;
  out.n_sites = chain.n_sites;
  out.initial = initial;
  out.fingerprint = chain_fingerprint(chain);
  return out;
}

void check_window(std::size_t i_max, std::size_t n_av, std::size_t n_step) {
  if (n_av == 0 || n_step == 0) {
    throw std::invalid_argument("n_av and n_step must be positive");
  }
  if (i_max <= n_av + n_step) {
    throw std::invalid_argument("ensemble too small: need i_max > n_av + n_step");
  }
}

// Smoothed (t_bar_i, A_i / i_max) for every window start i.
std::vector<CurvePoint> smoothed_cumulative(std::span<const double> times, std::size_t n_av) {
  const std::size_t i_max = times.size();
  for (std::size_t i = 1; i < i_max; ++i) {
    if (times[i] < times[i - 1]) {
      throw std::invalid_argument("escape times must be sorted");
    }
  }
  const std::size_t count = i_max - n_av + 1;
  std::vector<CurvePoint> out(count);
  const double offset = 0.5 * static_cast<double>(n_av - 1);
  const double inv = 1.0 / static_cast<double>(n_av);
  for (std::size_t i = 0; i < count; ++i) {
    // Summed directly (not as a running sum) so the mean carries no drift.
    double sum = 0.0;
    for (std::size_t j = i; j < i + n_av; ++j) {
      sum += times[j];
    }
    out[i].t = sum * inv;
    out[i].value = (static_cast<double>(i + 1) + offset) / static_cast<double>(i_max);
  }
  return out;
}

} // namespace

HoppingChain hopping_chain(const ChainGenerator &generator) {
  const std::size_t n = generator.n_sites;
  HoppingChain chain{n, std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t k = 0; k < n; ++k) {
    chain.up[k] = (k + 1 < n) ? generator.off_diagonal[k] : generator.jump_right[n - 1];
    chain.down[k] = (k > 0) ? generator.off_diagonal[k - 1] : generator.jump_left[0];
  }
  return chain;
}

HoppingChain hopping_chain(const TransportGenerator &generator) {
  const std::size_t n = generator.n_sites;
  HoppingChain chain{n, std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t k = 0; k < n; ++k) {
    chain.up[k] = (k + 1 < n) ? generator.lower[k] : generator.escape_right;
    chain.down[k] = (k > 0) ? generator.upper[k - 1] : generator.escape_left;
  }
  return chain;
}

HoppingChain hopping_chain(const RateConfig &config, std::size_t n_sites) {
  return hopping_chain(build_ssh_generator(config, n_sites));
}

double sample_escape_time(const HoppingChain &chain, std::size_t start_site, Philox4x64 &rng,
                          std::uint64_t max_steps) {
  if (start_site < 1 || start_site > chain.n_sites) {
    throw std::invalid_argument("start site out of range");
  }
  if (!escape_reachable(chain, start_site)) {
    throw std::invalid_argument("walker started at site " + std::to_string(start_site) +
                                " can never leave the chain");
  }
  const std::size_t n = chain.n_sites;
  std::size_t site = start_site; // 1-based; 0 and n+1 are outside
  double t = 0.0;
  for (std::uint64_t step = 0; step < max_steps; ++step) {
    const double up = chain.up[site - 1];
    const double total = up + chain.down[site - 1];
    if (!(total > 0.0)) {
      throw std::invalid_argument("walker reached an absorbing interior site");
    }
    t -= std::log(rng.uniform_open_closed()) / total;
    if (rng.uniform01() * total < up) {
      if (++site == n + 1) return t;
    } else {
      if (--site == 0) return t;
    }
  }
  throw StepLimitError("trajectory exceeded the step limit");
}

double sample_escape_time(const RateConfig &config, std::size_t n_sites, std::size_t start_site,
                          Philox4x64 &rng, std::uint64_t max_steps) {
  return sample_escape_time(hopping_chain(config, n_sites), start_site, rng, max_steps);
}

InitialSpec InitialSpec::parse(const std::string &text) {
  if (text == "symmetric" || text == "symmetric_edges") {
    return symmetric();
  }
  if (text.rfind("site:", 0) == 0) {
    try {
      const long site = std::stol(text.substr(5));
      if (site >= 1) {
        return at_site(static_cast<std::size_t>(site));
      }
    } catch (const std::exception &) {
    }
  }
  throw std::invalid_argument("unknown initial spec: " + text);
}

std::string InitialSpec::describe() const {
  return kind == Kind::symmetric_edges ? "symmetric" : "site:" + std::to_string(site);
}

std::size_t InitialSpec::start_site(std::size_t trajectory, std::size_t i_max,
                                    std::size_t n_sites) const {
  if (kind == Kind::site) {
    if (site < 1 || site > n_sites) {
      throw std::invalid_argument("start site out of range");
    }
    return site;
  }
  return trajectory < i_max / 2 ? 1 : n_sites;
}

std::vector<double> InitialSpec::distribution(std::size_t n_sites) const {
  std::vector<double> rho(n_sites, 0.0);
  if (kind == Kind::site) {
    rho.at(site - 1) = 1.0;
  } else {
    rho.front() += 0.5;
    rho.back() += 0.5;
  }
  return rho;
}

void EscapeTimeEnsemble::rescale(double factor, const std::string &unit) {
  if (!(factor > 0.0)) {
    throw std::invalid_argument("time scale must be positive");
  }
  for (double &t : times) {
    t *= factor;
  }
  time_scale *= factor;
  time_unit = unit;
}

std::string chain_fingerprint(const HoppingChain &chain) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  auto mix = [&hash](const void *data, std::size_t size) {
    const auto *bytes = static_cast<const unsigned char *>(data);
    for (std::size_t i = 0; i < size; ++i) {
      hash = (hash ^ bytes[i]) * 0x100000001b3ULL;
    }
  };
  const std::uint64_t n = chain.n_sites;
  mix(&n, sizeof n);
  mix(chain.up.data(), chain.up.size() * sizeof(double));
  mix(chain.down.data(), chain.down.size() * sizeof(double));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

EscapeTimeEnsemble sample_ensemble(const HoppingChain &chain, std::size_t i_max,
                                   const InitialSpec &initial, std::uint64_t master_seed,
                                   std::uint64_t max_steps) {
  check_chain(chain);
  check_start_sites(chain, initial, i_max);
  std::vector<double> times(i_max);
  std::exception_ptr failure;
  const auto count = static_cast<std::int64_t>(i_max);
#pragma omp parallel for schedule(dynamic, 1024)
  for (std::int64_t i = 0; i < count; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      Philox4x64 rng(master_seed, idx);
      times[idx] = sample_escape_time(chain, initial.start_site(idx, i_max, chain.n_sites), rng,
                                      max_steps);
    } catch (...) {
#pragma omp critical(sshwalk_sample_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
  return make_ensemble(chain, std::move(times), initial, master_seed);
}

EscapeTimeEnsemble sample_ensemble(const RateConfig &config, std::size_t n_sites,
                                   std::size_t i_max, const InitialSpec &initial,
                                   std::uint64_t master_seed) {
  return sample_ensemble(hopping_chain(config, n_sites), i_max, initial, master_seed);
}

EscapeTimeEnsemble sample_ensemble_serial(const HoppingChain &chain, std::size_t i_max,
                                          const InitialSpec &initial, std::uint64_t master_seed,
                                          std::uint64_t max_steps) {
  check_chain(chain);
  check_start_sites(chain, initial, i_max);
  std::vector<double> times(i_max);
  for (std::size_t i = 0; i < i_max; ++i) {
    Philox4x64 rng(master_seed, i);
    times[i] = sample_escape_time(chain, initial.start_site(i, i_max, chain.n_sites), rng,
                                  max_steps);
  }
  return make_ensemble(chain, std::move(times), initial, master_seed);
}

std::string to_string(CurveKind kind) {
  return kind == CurveKind::integrated_etd ? "integrated_etd" : "etd";
}

CurveKind parse_curve_kind(const std::string &text) {
  if (text == "integrated_etd") return CurveKind::integrated_etd;
  if (text == "etd") return CurveKind::etd;
  throw std::invalid_argument("unknown curve kind: " + text);
}

std::vector<double> ReconstructedCurve::times() const {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto &p : points) out.push_back(p.t);
  return out;
}

std::vector<double> ReconstructedCurve::values() const {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto &p : points) out.push_back(p.value);
  return out;
}

ReconstructedCurve reconstruct_integrated_etd(std::span<const double> sorted_times,
                                              std::size_t n_av, std::size_t n_step) {
  check_window(sorted_times.size(), n_av, n_step);
  const std::vector<CurvePoint> smooth = smoothed_cumulative(sorted_times, n_av);
  ReconstructedCurve curve;
  curve.kind = CurveKind::integrated_etd;
  curve.n_av = n_av;
  curve.n_step = n_step;
  for (std::size_t i = 0; i < smooth.size(); i += n_step) {
    curve.points.push_back(smooth[i]);
  }
  return curve;
}

ReconstructedCurve reconstruct_integrated_etd(const EscapeTimeEnsemble &ensemble,
                                              std::size_t n_av, std::size_t n_step) {
  return reconstruct_integrated_etd(ensemble.times, n_av, n_step);
}

ReconstructedCurve reconstruct_etd(std::span<const double> sorted_times, std::size_t n_av,
                                   std::size_t n_step) {
  check_window(sorted_times.size(), n_av, n_step);
  const std::vector<CurvePoint> smooth = smoothed_cumulative(sorted_times, n_av);
  ReconstructedCurve curve;
  curve.kind = CurveKind::etd;
  curve.n_av = n_av;
  curve.n_step = n_step;
  std::size_t anchor = 0;
  for (std::size_t i = n_step; i < smooth.size(); i += n_step) {
    const double width = smooth[i].t - smooth[anchor].t;
    if (!(width > 0.0)) {
      continue;
    }
    curve.points.push_back({0.5 * (smooth[i].t + smooth[anchor].t),
                            (smooth[i].value - smooth[anchor].value) / width});
    anchor = i;
  }
  return curve;
}

ReconstructedCurve reconstruct_etd(const EscapeTimeEnsemble &ensemble, std::size_t n_av,
                                   std::size_t n_step) {
  return reconstruct_etd(ensemble.times, n_av, n_step);
}

double ks_distance(std::span<const double> sorted_sample,
                   const std::function<double(double)> &cdf) {
  const double n = static_cast<double>(sorted_sample.size());
  if (sorted_sample.empty()) {
    throw std::invalid_argument("empty sample");
  }
  double d = 0.0;
  for (std::size_t i = 0; i < sorted_sample.size(); ++i) {
    const double f = cdf(sorted_sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

SampleStats sample_stats(std::span<const double> sample) {
  if (sample.size() < 2) {
    throw std::invalid_argument("need at least two samples");
  }
  const double n = static_cast<double>(sample.size());
  double mean = 0.0;
  for (double x : sample) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : sample) var += (x - mean) * (x - mean);
  var /= (n - 1.0);
  return {mean, std::sqrt(var / n)};
}

} // namespace sshwalk
