// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "sshwalk/etd.hpp"
#include "sshwalk/experiment.hpp"
#include "sshwalk/fitting.hpp"
#include "sshwalk/montecarlo.hpp"
#include "sshwalk/spectral.hpp"
#include "sshwalk/topology.hpp"

using namespace sshwalk;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char *format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return v;
}

// Row-major dense products for the inversion checks.
using Dense = std::vector<double>;

Dense dense_generator(const ChainGenerator &g) {
  const std::size_t n = g.n_sites;
  Dense m(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    m[i * n + i] = g.diagonal[i];
    if (i + 1 < n) m[i * n + i + 1] = m[(i + 1) * n + i] = g.off_diagonal[i];
  }
  return m;
}

Dense multiply(const Dense &a, const Dense &b, std::size_t n) {
  Dense c(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) c[i * n + j] += a[i * n + k] * b[k * n + j];
  return c;
}

Outcome winding_invariant() {
  const auto start = std::chrono::steady_clock::now();
  std::size_t checked = 0, wrong = 0;
  for (double alpha : linspace(-0.9, 0.9, 41)) {
    if (std::abs(alpha) < 1e-12) continue;
    const int w = winding_number(RateConfig::from_bias(1.0, alpha)).winding;
    ++checked;
    wrong += w != (alpha < 0 ? 1 : 0);
  }
  const double elapsed = seconds_since(start);
  return {wrong == 0 && checked == 40 && elapsed < 1.0,
          fmt("%zu alphas, %zu wrong, %.3f s", checked, wrong, elapsed)};
}

Outcome spectral_symmetry() {
  double worst_mirror = 0.0, worst_zero = 0.0;
  for (std::size_t n : {10u, 17u, 18u}) {
    for (double alpha : linspace(-0.9, 0.9, 21)) {
      const SpectralDecomposition d = eigendecompose(build_ssh_generator(RateConfig::from_bias(1.0, alpha), n));
      std::vector<double> mirror(d.betas.size());
      std::transform(d.betas.begin(), d.betas.end(), mirror.begin(), [](double b) { return 4.0 - b; });
      std::sort(mirror.begin(), mirror.end());
      for (std::size_t j = 0; j < n; ++j) worst_mirror = std::max(worst_mirror, std::abs(d.betas[j] - mirror[j]));
      if (n == 17) {
        double closest = INFINITY;
        for (double b : d.betas) closest = std::min(closest, std::abs(b - 2.0));
        worst_zero = std::max(worst_zero, closest);
      }
    }
  }
  return {worst_mirror < 1e-10 && worst_zero < 1e-10,
          fmt("max mirror error %.2e, max |beta - 2 gamma_bar| (N=17) %.2e", worst_mirror, worst_zero)};
}

Outcome midgap_phenomenology() {
  const auto inside = [](double alpha, std::size_t n) {
    const RateConfig cfg = RateConfig::from_bias(1.0, alpha);
    return midgap_report(eigendecompose(build_ssh_generator(cfg, n)), cfg, 0.05);
  };
  const MidgapReport r10 = inside(-0.5, 10);
  const MidgapReport r18 = inside(-0.5, 18);
  const auto splitting = [](const MidgapReport &r) {
    return r.count() == 2 ? std::abs(r.states[1].beta - r.states[0].beta) : INFINITY;
  };
  const double s10 = splitting(r10), s18 = splitting(r18);
  std::size_t trivial = 0;
  for (std::size_t n : {10u, 18u}) trivial += inside(0.5, n).count();
  const bool pass = r10.count() == 2 && r18.count() == 2 && s18 < s10 && trivial == 0;
  return {pass, fmt("alpha=-0.5: N=10 %zu states (split %.2e), N=18 %zu states (split %.2e); alpha=+0.5: %zu",
                    r10.count(), s10, r18.count(), s18, trivial)};
}

Outcome parity_selection() {
  double worst_odd = 0.0, worst_identity = 0.0;
  std::size_t odd_states = 0;
  for (double alpha : linspace(-0.9, 0.9, 19)) {
    const RateConfig cfg = RateConfig::from_bias(1.0, alpha);
    for (std::size_t n : {2u, 10u, 18u}) {
      const ChainGenerator g = build_ssh_generator(cfg, n);
      const EtdModel m = analytic_etd(g, symmetric_edges_distribution(n));
      for (const EtdTerm &t : m.terms) {
        if (t.parity == Parity::odd) {
          ++odd_states;
          worst_odd = std::max(worst_odd, std::abs(t.a));
        }
      }
    }
    for (std::size_t n : {3u, 9u, 17u}) {
      const ChainGenerator g = build_ssh_generator(cfg, n);
      const SpectralDecomposition d = eigendecompose(g);
      const std::vector<double> jump = g.jump_total();
      for (const auto &v : d.vectors) {
        double projection = 0.0;
        for (std::size_t i = 0; i < n; ++i) projection += v[i] * jump[i];
        const double identity = cfg.gamma_r() * v.front() + cfg.gamma_l() * v.back();
        worst_identity = std::max(worst_identity, std::abs(projection - identity));
      }
    }
  }
  const bool pass = odd_states > 0 && worst_odd < 1e-12 * 2.0 && worst_identity < 1e-10;
  return {pass, fmt("even N: %zu odd states, max |a_j| %.2e; odd N: max identity error %.2e", odd_states,
                    worst_odd, worst_identity)};
}

Outcome etd_normalization() {
  const auto start = std::chrono::steady_clock::now();
  double worst_sum = 0.0, worst_mu0 = 0.0, worst_ode = 0.0;
  for (double alpha : {-0.8, -0.5, -0.2, 0.0, 0.2, 0.5, 0.8}) {
    for (std::size_t n : {1u, 2u, 5u, 10u, 17u, 20u}) {
      const ChainGenerator g = build_ssh_generator(RateConfig::from_bias(1.0, alpha), n);
      for (const auto &rho0 : {symmetric_edges_distribution(n), site_distribution(n, 1)}) {
        const EtdModel m = analytic_etd(g, rho0);
        worst_sum = std::max(worst_sum, std::abs(m.weight_sum() - 1.0));
        worst_mu0 = std::max(worst_mu0, std::abs(moments_and_cumulants(m, 1).moments[0] - 1.0));
        const OdeSolution ode = ode_oracle(g, rho0, 10.0, 1e-3);
        for (std::size_t i = 0; i < ode.t.size(); ++i) {
          worst_ode = std::max(worst_ode, std::abs(m.density(ode.t[i]) - ode.density[i]));
        }
      }
    }
  }
  const double elapsed = seconds_since(start);
  const bool pass = worst_sum < 1e-10 && worst_mu0 < 1e-10 && worst_ode < 1e-6 && elapsed < 10.0;
  return {pass, fmt("max |sum A - 1| %.2e, max |mu_0 - 1| %.2e, max |P_e - RK4| %.2e, %.2f s", worst_sum,
                    worst_mu0, worst_ode, elapsed)};
}

Outcome monte_carlo_fidelity() {
  const RateConfig cfg = RateConfig::from_bias(1.0, -0.5);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto start = std::chrono::steady_clock::now();
  const EscapeTimeEnsemble e = sample_ensemble(cfg, 10, 100000, InitialSpec::symmetric(), 1);
  const double elapsed = seconds_since(start);
  omp_set_num_threads(saved);
  const EtdModel m = analytic_etd(build_ssh_generator(cfg, 10), symmetric_edges_distribution(10));
  const double ks = ks_distance(e.times, [&](double t) { return m.integrated(t); });
  const double kappa1 = moments_and_cumulants(m, 1).cumulants[1];
  const SampleStats s = sample_stats(e.times);
  const double z = std::abs(s.mean - kappa1) / s.std_error;
  return {ks < 0.006 && z < 3.0 && elapsed < 30.0,
          fmt("KS %.4f, mean %.4f vs kappa_1 %.4f (%.2f s.e.), %.2f s single-threaded", ks, s.mean, kappa1, z,
              elapsed)};
}

Outcome pipeline_end_to_end() {
  ExperimentConfig cfg;
  cfg.n_sites = 10;
  cfg.sampling.i_max = 100000;
  cfg.pipeline.k = 3;
  // Times in units of 1/(2 gamma_bar): the midgap exponent sits at 1.
  const PipelineResult topo = run_pipeline(cfg, -0.5);
  const PipelineResult trivial = run_pipeline(cfg, 0.5);

  const auto near_midgap = [](const FitTerm &t) { return std::abs(t.beta - 1.0) < 0.1; };
  const auto &tt = topo.fit.terms;
  const auto largest = std::max_element(tt.begin(), tt.end(),
                                        [](const FitTerm &a, const FitTerm &b) { return a.weight < b.weight; });
  const bool topo_ok = largest != tt.end() && near_midgap(*largest);
  bool trivial_ok = true;
  for (const FitTerm &t : trivial.fit.terms) trivial_ok &= !(near_midgap(t) && t.weight > 0.1);

  std::string detail = "alpha=-0.5:";
  for (const FitTerm &t : tt) detail += fmt(" (%.3f, %.3f)", t.beta, t.weight);
  detail += "; alpha=+0.5:";
  for (const FitTerm &t : trivial.fit.terms) detail += fmt(" (%.3f, %.3f)", t.beta, t.weight);
  detail += " [beta in 2 gamma_bar]";
  return {topo_ok && trivial_ok, detail};
}

Outcome fit_stability() {
  const RateConfig cfg = RateConfig::from_bias(1.0, -0.5);
  const std::vector<std::size_t> ks{3, 5};
  const std::vector<std::size_t> sizes{10000, 100000};
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  PipelineOptions opts;
  opts.time_scale = cfg.total_rate();
  const std::vector<StabilityCell> cells = fit_stability_sweep(cfg, 10, ks, sizes, seeds, opts);
  const SpreadSummary k3 = beta_spread(cells, 3);
  const SpreadSummary k5 = beta_spread(cells, 5);
  const bool pass = k3.cells_used == 10 && k3.max_spread() < 0.15 && k5.max_spread() > k3.max_spread();
  std::string detail = fmt("K=3 spreads (%zu cells):", k3.cells_used);
  for (double s : k3.spreads) detail += fmt(" %.3f", s);
  detail += fmt("; K=5 max spread %.3f (%zu cells, %zu skipped)", k5.max_spread(), k5.cells_used,
                k5.cells_skipped);
  return {pass, detail};
}

Outcome cumulant_smoothness() {
  const std::vector<double> alphas = linspace(-0.9, 0.9, 41);
  const std::size_t centre = 20;
  std::vector<std::vector<double>> kappa(3, std::vector<double>(alphas.size()));
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const ChainGenerator g = build_ssh_generator(RateConfig::from_bias(1.0, alphas[i]), 10);
    const MomentSet mc = moments_and_cumulants(analytic_etd(g, symmetric_edges_distribution(10)), 3);
    for (int m = 0; m < 3; ++m) kappa[static_cast<std::size_t>(m)][i] = mc.cumulants[static_cast<std::size_t>(m + 1)];
  }
  bool pass = true;
  std::string detail;
  for (std::size_t m = 0; m < 3; ++m) {
    const auto &k = kappa[m];
    std::vector<double> d2(k.size(), 0.0);
    for (std::size_t i = 1; i + 1 < k.size(); ++i) d2[i] = k[i + 1] - 2.0 * k[i] + k[i - 1];
    // Jump of the second difference across alpha = 0 ...
    const double kink = std::max(std::abs(d2[centre] - d2[centre - 1]), std::abs(d2[centre + 1] - d2[centre]));
    // ... against its variation between neighbouring points on either side.
    double neighbour = 0.0;
    for (std::size_t i : {centre - 3, centre - 2, centre + 1, centre + 2}) {
      neighbour = std::max(neighbour, std::abs(d2[i + 1] - d2[i]));
    }
    pass &= kink <= 10.0 * neighbour;
    detail += fmt("%skappa_%zu kink %.2e vs neighbour %.2e", m ? "; " : "", m + 1, kink, neighbour);
  }
  return {pass, detail};
}

Outcome fitting_round_trip() {
  const auto start = std::chrono::steady_clock::now();
  Philox4x64 rng(2024, 0);
  std::size_t recovered = 0;
  double worst_beta = 0.0, worst_a = 0.0;
  for (int c = 0; c < 50; ++c) {
    std::vector<FitTerm> truth(3);
    truth[0].beta = 0.05 * std::pow(10.0, rng.uniform01());
    truth[1].beta = truth[0].beta * (2.0 + 3.0 * rng.uniform01());
    truth[2].beta = truth[1].beta * (2.0 + 3.0 * rng.uniform01());
    double w[3], total = 0.0;
    for (double &x : w) total += (x = -std::log(rng.uniform_open_closed()));
    for (std::size_t j = 0; j < 3; ++j) truth[j].weight = 0.05 + 0.85 * w[j] / total;

    const double t_max = 8.0 / truth[0].beta;
    std::vector<double> t(400), y(400);
    for (std::size_t i = 0; i < t.size(); ++i) {
      t[i] = t_max * static_cast<double>(i) / 399.0;
      y[i] = 1.0;
      for (const FitTerm &term : truth) y[i] -= term.weight * std::exp(-term.beta * t[i]);
    }
    FitOptions opts;
    opts.seed = static_cast<std::uint64_t>(c);
    opts.rate_scale = truth[1].beta;
    const FitResult fit = fit_integrated_etd(t, y, 3, opts);
    if (fit.terms.size() != 3) continue;
    double eb = 0.0, ea = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      eb = std::max(eb, std::abs(fit.terms[j].beta - truth[j].beta) / truth[j].beta);
      ea = std::max(ea, std::abs(fit.terms[j].weight - truth[j].weight));
    }
    worst_beta = std::max(worst_beta, eb);
    worst_a = std::max(worst_a, ea);
    recovered += eb < 1e-3 && ea < 1e-3;
  }
  const double elapsed = seconds_since(start);
  return {recovered == 50 && elapsed < 5.0,
          fmt("%zu/50 recovered, max rel beta error %.2e, max abs A error %.2e, %.2f s", recovered, worst_beta,
              worst_a, elapsed)};
}

Outcome inversion_operator() {
  double worst = 0.0;
  for (std::size_t n : {5u, 7u, 9u, 17u}) {
    for (double alpha : {-0.6, -0.3, 0.3, 0.6}) {
      const RateConfig cfg = RateConfig::from_bias(1.0, alpha);
      const InversionOperator p = build_inversion_operator(cfg, n);
      const Dense l = dense_generator(build_ssh_generator(cfg, n));
      const Dense pp = multiply(p.matrix, p.matrix, n);
      const Dense plp = multiply(multiply(p.matrix, l, n), p.matrix, n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          worst = std::max(worst, std::abs(p.at(i, j) - p.at(j, i)));
          worst = std::max(worst, std::abs(pp[i * n + j] - (i == j ? 1.0 : 0.0)));
          worst = std::max(worst, std::abs(plp[i * n + j] - l[i * n + j]));
        }
      }
    }
  }
  return {worst < 1e-8, fmt("max residual of P=P^T, P^2=1, PLP=L: %.2e", worst)};
}

Outcome feedback_midgap() {
  // Gamma_L,even = gamma_bar = 1; the inner gap separates bands 2 and 3.
  std::size_t neg_with = 0, neg_total = 0, pos_with = 0, pos_total = 0;
  for (double alpha : linspace(-0.9, 0.9, 19)) {
    if (std::abs(alpha) < 1e-12) continue;
    const FeedbackConfig fb = FeedbackConfig::from_bias(1.0, alpha);
    const std::vector<double> cycle{fb.gamma_r, fb.gamma_l_even, fb.gamma_r, fb.gamma_l_odd};
    const std::vector<Band> bands = periodic_bands(cycle);
    for (std::size_t n : {20u, 40u}) {
      const SpectralDecomposition d = eigendecompose(build_feedback_generator(fb, n));
      const std::size_t count = states_in_interval(d, bands[1].upper, bands[2].lower).size();
      if (alpha < 0) {
        ++neg_total;
        neg_with += count == 2;
      } else {
        ++pos_total;
        pos_with += count > 0;
      }
    }
  }
  const bool pass = neg_with == neg_total && pos_with == 0;
  return {pass, fmt("alpha<0: %zu/%zu spectra with 2 inner-gap states; alpha>0: %zu/%zu with any", neg_with,
                    neg_total, pos_with, pos_total)};
}

} // namespace

int main() {
  const std::vector<std::pair<const char *, std::function<Outcome()>>> criteria{
      {"winding invariant", winding_invariant},
      {"spectral symmetry", spectral_symmetry},
      {"midgap phenomenology", midgap_phenomenology},
      {"parity selection rule", parity_selection},
      {"ETD normalization and ODE oracle", etd_normalization},
      {"Monte Carlo fidelity", monte_carlo_fidelity},
      {"pipeline end-to-end", pipeline_end_to_end},
      {"fit stability", fit_stability},
      {"cumulant smoothness", cumulant_smoothness},
      {"fitting round trip", fitting_round_trip},
      {"inversion operator", inversion_operator},
      {"feedback model midgap states", feedback_midgap},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception &ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    failures += !o.pass;
    std::printf("%s  %2zu  %-34s %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failures), criteria.size());
  return failures == 0 ? 0 : 1;
}
