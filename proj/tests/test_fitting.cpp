#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "sshwalk/etd.hpp"
#include "sshwalk/fitting.hpp"

using namespace sshwalk;
using doctest::Approx;

namespace {

struct Series {
  std::vector<double> t;
  std::vector<double> y;
};

Series synthetic(const std::vector<FitTerm> &terms, double t_max, std::size_t n) {
  Series s;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = t_max * static_cast<double>(i) / static_cast<double>(n - 1);
    double y = 1.0;
    for (const FitTerm &term : terms) y -= term.weight * std::exp(-term.beta * t);
    s.t.push_back(t);
    s.y.push_back(y);
  }
  return s;
}

} // namespace

TEST_CASE("three-term round trip") {
  const std::vector<FitTerm> truth{{0.5, 0.6}, {2.0, 0.3}, {3.5, 0.1}};
  const Series s = synthetic(truth, 12.0, 400);
  const FitResult fit = fit_integrated_etd(s.t, s.y, 3);
  CHECK(fit.diagnostics.converged);
  REQUIRE(fit.effective_k() == 3);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(fit.terms[j].beta == Approx(truth[j].beta).epsilon(1e-6));
    CHECK(fit.terms[j].weight == Approx(truth[j].weight).epsilon(1e-6));
  }
  CHECK(fit.residual < 1e-10);
  CHECK(fit.weight_sum() == Approx(1.0).epsilon(1e-10));
  CHECK(fit.k_terms == 3);
}

TEST_CASE("single exponential") {
  const Series s = synthetic({{0.8, 1.0}}, 10.0, 100);
  const FitResult fit = fit_integrated_etd(s.t, s.y, 1);
  REQUIRE(fit.terms.size() == 1);
  CHECK(fit.terms[0].beta == Approx(0.8).epsilon(1e-8));
  CHECK(fit.terms[0].weight == 1.0);
}

TEST_CASE("two-term round trip with a large rate ratio") {
  const std::vector<FitTerm> truth{{0.05, 0.7}, {4.0, 0.3}};
  const Series s = synthetic(truth, 80.0, 800);
  const FitResult fit = fit_integrated_etd(s.t, s.y, 2);
  REQUIRE(fit.terms.size() == 2);
  CHECK(fit.terms[0].beta == Approx(0.05).epsilon(1e-6));
  CHECK(fit.terms[1].beta == Approx(4.0).epsilon(1e-5));
  CHECK(fit.terms[0].weight == Approx(0.7).epsilon(1e-6));
}

TEST_CASE("overcomplete fits merge duplicate exponents") {
  const Series s = synthetic({{1.0, 1.0}}, 10.0, 100);
  const FitResult fit = fit_integrated_etd(s.t, s.y, 3);
  CHECK(fit.residual < 1e-8);
  CHECK(fit.weight_sum() == Approx(1.0).epsilon(1e-10));
  CHECK(fit.effective_k() <= 3);
  for (std::size_t j = 0; j + 1 < fit.terms.size(); ++j) CHECK(fit.terms[j].beta < fit.terms[j + 1].beta);
}

TEST_CASE("fits on sampled data") {
  const RateConfig cfg = RateConfig::from_bias(1.0, -0.5);
  EscapeTimeEnsemble e = sample_ensemble(cfg, 10, 100000, InitialSpec::symmetric(), 1);
  e.rescale(cfg.total_rate(), "1/(2 gamma_bar)");
  const ReconstructedCurve curve = reconstruct_integrated_etd(e);

  double previous = INFINITY;
  for (std::size_t k = 1; k <= 4; ++k) {
    const FitResult fit = fit_integrated_etd(curve, k);
    CHECK(fit.weight_sum() == Approx(1.0).epsilon(1e-10));
    // Each K contains the K-1 model, so the best residual cannot grow.
    CHECK(fit.residual <= previous * (1.0 + 1e-9));
    previous = fit.residual;
    for (const FitTerm &term : fit.terms) CHECK(term.beta > 0.0);
  }

  const FitResult a = fit_integrated_etd(curve, 3, {.random_restarts = 4, .seed = 9});
  const FitResult b = fit_integrated_etd(curve, 3, {.random_restarts = 4, .seed = 9});
  REQUIRE(a.terms.size() == b.terms.size());
  for (std::size_t j = 0; j < a.terms.size(); ++j) CHECK(a.terms[j].beta == b.terms[j].beta);
  CHECK(a.diagnostics.restarts >= 4);
}

TEST_CASE("fit input validation") {
  const Series s = synthetic({{1.0, 1.0}}, 5.0, 20);
  CHECK_THROWS_AS(fit_integrated_etd(s.t, s.y, 0), std::invalid_argument);
  CHECK_THROWS_AS(fit_integrated_etd(s.t, s.y, 7), std::invalid_argument);
  CHECK_THROWS_AS(fit_integrated_etd(s.t, s.y, 6), std::invalid_argument);
  CHECK_THROWS_AS(fit_integrated_etd(s.t, std::vector<double>(19, 0.5), 1), std::invalid_argument);

  ReconstructedCurve density;
  density.kind = CurveKind::etd;
  for (std::size_t i = 0; i < 20; ++i) density.points.push_back({s.t[i], s.y[i]});
  CHECK_THROWS_AS(fit_integrated_etd(density, 1), std::invalid_argument);
}

TEST_CASE("stability sweep ordering and spread") {
  const RateConfig cfg = RateConfig::from_bias(1.0, 0.5);
  const std::vector<std::size_t> ks{1, 2};
  const std::vector<std::size_t> sizes{5000, 10000};
  const std::vector<std::uint64_t> seeds{1, 2};
  PipelineOptions opts;
  opts.n_av = 20;
  opts.n_step = 100;
  opts.time_scale = cfg.total_rate();
  const std::vector<StabilityCell> cells = fit_stability_sweep(cfg, 4, ks, sizes, seeds, opts);
  REQUIRE(cells.size() == 8);
  CHECK(cells[0].k == 1);
  CHECK(cells[0].i_max == 5000);
  CHECK(cells[1].seed == 2);
  CHECK(cells[2].i_max == 10000);
  CHECK(cells[4].k == 2);
  for (const StabilityCell &c : cells) {
    CHECK(c.error.empty());
    CHECK(c.fit.has_value());
  }
  const SpreadSummary one = beta_spread(cells, 1);
  CHECK(one.cells_used == 4);
  REQUIRE(one.spreads.size() == 1);
  CHECK(one.spreads[0] >= 0.0);
  CHECK(one.max_spread() == one.spreads[0]);
}
