#include "sshwalk/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>

namespace sshwalk {

CountingGenerator counting_generator(const RateConfig &config, double chi) {
  CountingGenerator out;
  out.l_x = config.gamma_l() + config.gamma_r() * std::cos(chi);
  out.l_y = config.gamma_r() * std::sin(chi);
  const std::complex<double> diag(-config.total_rate(), 0.0);
  // l_x sigma_x + l_y sigma_y = [[0, l_x - i l_y], [l_x + i l_y, 0]]
  using C = std::complex<double>;
  out.matrix[0] = {diag, C(out.l_x, -out.l_y)};
  out.matrix[1] = {C(out.l_x, out.l_y), diag};
  return out;
}

std::string to_string(Phase phase) {
  switch (phase) {
  case Phase::trivial:
    return "trivial";
  case Phase::nontrivial:
    return "nontrivial";
  case Phase::critical:
    return "critical";
  }
  return "unknown";
}

WindingResult winding_number(const RateConfig &config, int n_grid) {
  if (n_grid < 16) {
    throw std::invalid_argument("winding grid needs at least 16 points");
  }
  const double tol = 1e-9 * (config.gamma_l() + config.gamma_r());
  double min_norm = std::numeric_limits<double>::infinity();
  double total_angle = 0.0;

  const double step = 2.0 * std::numbers::pi / n_grid;
  auto point = [&](int k) {
    const CountingGenerator c = counting_generator(config, -std::numbers::pi + step * (k % n_grid));
    return std::array<double, 2>{c.l_x, c.l_y};
  };
  std::array<double, 2> prev = point(0);
  for (int k = 1; k <= n_grid; ++k) {
    const std::array<double, 2> cur = point(k);
    min_norm = std::min(min_norm, std::hypot(prev[0], prev[1]));
    const double cross = prev[0] * cur[1] - prev[1] * cur[0];
    const double dot = prev[0] * cur[0] + prev[1] * cur[1];
    total_angle += std::atan2(cross, dot);
    prev = cur;
  }
  if (min_norm < tol) {
    throw GapClosedError(min_norm);
  }

  WindingResult result;
  result.winding = static_cast<int>(std::lround(total_angle / (2.0 * std::numbers::pi)));
  result.zak_phase = 0.5 * result.winding;
  result.phase = result.winding == 0 ? Phase::trivial : Phase::nontrivial;
  return result;
}

namespace {

ChiralCheck chiral_residual(std::span<const double> diagonal, std::span<const double> lower,
                            std::span<const double> upper) {
  ChiralCheck check;
  if (diagonal.empty()) {
    check.symmetric = true;
    return check;
  }
  const auto [lo, hi] = std::minmax_element(diagonal.begin(), diagonal.end());
  check.shift = -0.5 * (*lo + *hi);
  // Lambda keeps the diagonal and flips every nearest-neighbour entry.
  double residual = 0.0;
  for (double d : diagonal) {
    const double shifted = d + check.shift;
    residual = std::max(residual, std::abs(shifted + shifted));
  }
  for (std::size_t k = 0; k < lower.size(); ++k) {
    residual = std::max(residual, std::abs(-lower[k] + lower[k]));
    residual = std::max(residual, std::abs(-upper[k] + upper[k]));
  }
  check.residual = residual;
  check.symmetric = residual < 1e-12;
  return check;
}

} // namespace

ChiralCheck chiral_symmetry_check(const ChainGenerator &generator) {
  return chiral_residual(generator.diagonal, generator.off_diagonal, generator.off_diagonal);
}

ChiralCheck chiral_symmetry_check(const TransportGenerator &generator) {
  return chiral_residual(generator.diagonal, generator.lower, generator.upper);
}

} // namespace sshwalk
