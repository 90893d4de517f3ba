#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "sshwalk/eigen_kernels.hpp"
#include "sshwalk/spectral.hpp"

using namespace sshwalk;
using doctest::Approx;

namespace {

Eigen::MatrixXd dense(const ChainGenerator &g) {
  const auto n = static_cast<Eigen::Index>(g.n_sites);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = g.diagonal[static_cast<std::size_t>(i)];
    if (i + 1 < n) {
      m(i, i + 1) = m(i + 1, i) = g.off_diagonal[static_cast<std::size_t>(i)];
    }
  }
  return m;
}

Eigen::MatrixXd dense(const InversionOperator &p) {
  const auto n = static_cast<Eigen::Index>(p.n_sites);
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      m(i, j) = p.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
  }
  return m;
}

// Oracle parity: sign of <v, R v> for the plain reversal R.
Parity reversal_parity(const std::vector<double> &v) {
  double overlap = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) overlap += v[i] * v[v.size() - 1 - i];
  return overlap > 0 ? Parity::even : Parity::odd;
}

} // namespace

TEST_CASE("tridiagonal QL agrees with Eigen on random matrices") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (std::size_t n : {1u, 2u, 3u, 8u, 31u, 100u}) {
    std::vector<double> d(n), e(n > 0 ? n - 1 : 0);
    for (auto &x : d) x = u(rng);
    for (auto &x : e) x = u(rng);
    const SymmetricEigen ours = tridiagonal_eigen(d, e);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = d[i];
      if (i + 1 < n) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i + 1)) = e[i];
        m(static_cast<Eigen::Index>(i + 1), static_cast<Eigen::Index>(i)) = e[i];
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(m);
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(ours.values[j] == Approx(ref.eigenvalues()(static_cast<Eigen::Index>(j))).epsilon(1e-12).scale(3.0));
      // Residual of the returned eigenpair.
      Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(ours.vectors[j].data(), static_cast<Eigen::Index>(n));
      CHECK((m * v - ours.values[j] * v).norm() < 1e-11);
      CHECK(v.norm() == Approx(1.0).epsilon(1e-13));
    }
  }
}

TEST_CASE("tridiagonal QL agrees with Jacobi for small N") {
  for (std::size_t n = 1; n <= 12; ++n) {
    const ChainGenerator g = build_ssh_generator(RateConfig::from_bias(1.0, -0.35), n);
    const SymmetricEigen ql = tridiagonal_eigen(g.diagonal, g.off_diagonal, false);
    std::vector<double> full(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      full[i * n + i] = g.diagonal[i];
      if (i + 1 < n) full[i * n + i + 1] = full[(i + 1) * n + i] = g.off_diagonal[i];
    }
    const SymmetricEigen jac = dense_symmetric_eigen(full, n);
    REQUIRE(ql.values.size() == n);
    for (std::size_t j = 0; j < n; ++j) CHECK(ql.values[j] == Approx(jac.values[j]).epsilon(1e-12).scale(2.0));
  }
}

TEST_CASE("decomposition of the SSH chain") {
  for (double alpha : {-0.7, -0.2, 0.0, 0.4}) {
    for (std::size_t n : {2u, 7u, 10u, 17u}) {
      const ChainGenerator g = build_ssh_generator(RateConfig::from_bias(1.0, alpha), n);
      const SpectralDecomposition d = eigendecompose(g);
      const Eigen::MatrixXd m = dense(g);
      REQUIRE(d.size() == n);
      CHECK(std::is_sorted(d.betas.begin(), d.betas.end()));
      for (std::size_t j = 0; j < n; ++j) {
        const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(d.vectors[j].data(), static_cast<Eigen::Index>(n));
        CHECK((m * v + d.betas[j] * v).norm() < 1e-12);
        const auto first = std::find_if(d.vectors[j].begin(), d.vectors[j].end(),
                                        [](double x) { return std::abs(x) > 1e-14; });
        CHECK(*first > 0.0);
        CHECK(d.betas[j] > 0.0);
        // Chiral symmetry pairs beta with 4 gamma_bar - beta.
        CHECK(d.betas[j] + d.betas[n - 1 - j] == Approx(4.0));
      }
    }
  }
}

TEST_CASE("odd N always has the midgap exponent 2 gamma_bar") {
  for (double alpha : {-0.6, 0.0, 0.5}) {
    for (std::size_t n : {1u, 3u, 9u, 17u}) {
      const SpectralDecomposition d =
          eigendecompose(build_ssh_generator(RateConfig::from_bias(1.5, alpha), n));
      CHECK(d.betas[(n - 1) / 2] == Approx(3.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("generalized inversion") {
  for (double alpha : {-0.8, -0.3, 0.0, 0.3, 0.8}) {
    for (std::size_t n : {3u, 5u, 9u, 17u, 21u}) {
      const RateConfig cfg = RateConfig::from_bias(1.0, alpha);
      const InversionOperator p = build_inversion_operator(cfg, n);
      const Eigen::MatrixXd pm = dense(p);
      const Eigen::MatrixXd lm = dense(build_ssh_generator(cfg, n));
      const auto id = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      CHECK((pm - pm.transpose()).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((pm * pm - id).cwiseAbs().maxCoeff() < 1e-10);
      CHECK((pm * lm * pm - lm).cwiseAbs().maxCoeff() < 1e-10);
      CHECK(p.involution_residual < 1e-10);
      CHECK(p.s == ((n - 1) / 2 % 2 == 0 ? 1.0 : -1.0));
      CHECK(p.r == Approx(-cfg.gamma_l() / cfg.gamma_r()));
    }
  }
  CHECK_THROWS_AS(build_inversion_operator(RateConfig::from_bias(1.0, 0.2), 4), std::invalid_argument);
  CHECK_THROWS_AS(build_inversion_operator(RateConfig::from_bias(1.0, 0.2), 1), std::invalid_argument);
}

TEST_CASE("inversion acts as reversal on the even sublattice") {
  const InversionOperator p = build_inversion_operator(RateConfig::from_bias(1.0, 0.25), 7);
  // Even sites (1-based 2, 4, 6) are 0-based 1, 3, 5.
  CHECK(p.at(1, 5) == 1.0);
  CHECK(p.at(3, 3) == 1.0);
  CHECK(p.at(1, 1) == 0.0);
}

TEST_CASE("parity for even N matches reversal") {
  for (double alpha : {-0.5, 0.5, 0.0}) {
    for (std::size_t n : {2u, 4u, 10u, 16u}) {
      const ChainGenerator g = build_ssh_generator(RateConfig::from_bias(1.0, alpha), n);
      const SpectralDecomposition d = classify_parity(eigendecompose(g), g);
      REQUIRE(d.parities.size() == n);
      std::size_t even = 0;
      for (std::size_t j = 0; j < n; ++j) {
        CHECK(d.parities[j] == reversal_parity(d.vectors[j]));
        even += d.parities[j] == Parity::even;
      }
      CHECK(even == n / 2);
    }
  }
}

TEST_CASE("parity pattern N = 2") {
  const ChainGenerator g = build_ssh_generator(RateConfig::from_bias(1.0, 0.3), 2);
  const SpectralDecomposition d = classify_parity(eigendecompose(g), g);
  CHECK(d.betas[0] == Approx(2.0 - 1.3));
  CHECK(d.parities[0] == Parity::even);
  CHECK(d.parities[1] == Parity::odd);
  CHECK(to_string(Parity::even) == "even");
}

TEST_CASE("parity pattern N = 10") {
  // Bulk states alternate; in the topological phase the two edge states
  // at the band centre form an even/odd pair.
  const ChainGenerator g = build_ssh_generator(RateConfig::from_bias(1.0, -0.5), 10);
  const SpectralDecomposition d = classify_parity(eigendecompose(g), g);
  for (std::size_t j = 0; j + 1 < 10; ++j) CHECK(d.parities[j] != d.parities[j + 1]);
  CHECK(d.parities[0] == Parity::even);
}

TEST_CASE("parity for odd N under the generalized inversion") {
  for (double alpha : {-0.5, 0.5}) {
    for (std::size_t n : {3u, 9u, 17u}) {
      const RateConfig cfg = RateConfig::from_bias(1.0, alpha);
      const ChainGenerator g = build_ssh_generator(cfg, n);
      const SpectralDecomposition d = classify_parity(eigendecompose(g), g);
      const InversionOperator p = build_inversion_operator(cfg, n);
      for (std::size_t j = 0; j < n; ++j) {
        const std::vector<double> pv = p.apply(d.vectors[j]);
        double overlap = 0.0;
        for (std::size_t i = 0; i < n; ++i) overlap += pv[i] * d.vectors[j][i];
        CHECK(std::abs(std::abs(overlap) - 1.0) < 1e-8);
        CHECK(d.parities[j] == (overlap > 0 ? Parity::even : Parity::odd));
      }
    }
  }
}

TEST_CASE("midgap edge states, N = 10") {
  const RateConfig topo = RateConfig::from_bias(1.0, -0.5);
  const MidgapReport r = midgap_report(eigendecompose(build_ssh_generator(topo, 10)), topo);
  CHECK(r.center == 2.0);
  CHECK(r.window == 0.5);
  REQUIRE(r.count() == 2);
  for (const MidgapState &s : r.states) {
    CHECK(s.edge_weight > 0.5);
    CHECK(s.weight_left == Approx(s.weight_right).epsilon(1e-8));
  }

  const RateConfig trivial = RateConfig::from_bias(1.0, 0.5);
  CHECK(midgap_report(eigendecompose(build_ssh_generator(trivial, 10)), trivial).count() == 0);
}

TEST_CASE("midgap zero mode, N = 17") {
  for (double alpha : {-0.5, 0.5}) {
    const RateConfig cfg = RateConfig::from_bias(1.0, alpha);
    const MidgapReport r = midgap_report(eigendecompose(build_ssh_generator(cfg, 17)), cfg);
    REQUIRE(r.count() == 1);
    CHECK(r.states[0].beta == Approx(2.0));
    CHECK(r.states[0].edge_weight > 0.5);
    // The zero mode sits at the end where the weak bond is.
    if (alpha < 0) {
      CHECK(r.states[0].weight_left > r.states[0].weight_right);
    } else {
      CHECK(r.states[0].weight_right > r.states[0].weight_left);
    }
  }
}

TEST_CASE("edge weights") {
  const SpectralDecomposition d = eigendecompose(build_ssh_generator(RateConfig::from_bias(1.0, 0.1), 1));
  CHECK(edge_weights(d) == std::vector<double>{1.0});
}

TEST_CASE("SSH bulk bands") {
  for (double alpha : {-0.6, -0.1, 0.3}) {
    const RateConfig cfg = RateConfig::from_bias(1.0, alpha);
    const std::vector<double> cycle{cfg.gamma_l(), cfg.gamma_r()};
    const std::vector<Band> bands = periodic_bands(cycle);
    REQUIRE(bands.size() == 2);
    const double gap = 2.0 * std::abs(alpha);
    CHECK(bands[0].lower == Approx(0.0).scale(1.0));
    CHECK(bands[0].upper == Approx(2.0 - gap));
    CHECK(bands[1].lower == Approx(2.0 + gap));
    CHECK(bands[1].upper == Approx(4.0));

    const SpectralDecomposition d = eigendecompose(build_ssh_generator(cfg, 40));
    const std::size_t inside = states_in_interval(d, bands[0].upper + 1e-9, bands[1].lower - 1e-9).size();
    CHECK(inside == (alpha < 0 ? 2u : 0u));
  }
  CHECK_THROWS_AS(periodic_bands(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("feedback bands bracket the finite spectrum") {
  const FeedbackConfig fb = FeedbackConfig::from_bias(1.0, 0.4);
  const std::vector<double> cycle{fb.gamma_r, fb.gamma_l_even, fb.gamma_r, fb.gamma_l_odd};
  const std::vector<Band> bands = periodic_bands(cycle);
  REQUIRE(bands.size() == 4);
  for (std::size_t i = 0; i + 1 < 4; ++i) CHECK(bands[i].upper <= bands[i + 1].lower + 1e-12);

  // Bloch oracle: at phase 0 the uniform vector is a zero mode.
  CHECK(bands[0].lower == Approx(0.0).scale(1.0));

  const SpectralDecomposition d = eigendecompose(build_feedback_generator(fb, 81));
  std::size_t outside = 0;
  for (double beta : d.betas) {
    bool in_band = false;
    for (const Band &b : bands) in_band |= (beta >= b.lower - 1e-9 && beta <= b.upper + 1e-9);
    outside += !in_band;
  }
  // Only boundary-bound states may leave the bulk bands.
  CHECK(outside <= 4);
}
