#include "sshwalk/generator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sshwalk {

LocalBlocks build_local_blocks(const RateConfig &config) {
  const double total = config.total_rate();
  LocalBlocks blocks;
  blocks.l0 = {{{-total, config.gamma_l()}, {config.gamma_l(), -total}}};
  blocks.l_plus = {{{0.0, config.gamma_r()}, {0.0, 0.0}}};
  blocks.l_minus = {{{0.0, 0.0}, {config.gamma_r(), 0.0}}};
  return blocks;
}

std::vector<double> ChainGenerator::jump_total() const {
  std::vector<double> j(n_sites);
  for (std::size_t k = 0; k < n_sites; ++k) {
    j[k] = jump_left[k] + jump_right[k];
  }
  return j;
}

std::vector<double> ChainGenerator::apply(std::span<const double> x) const {
  if (x.size() != n_sites) {
    throw std::invalid_argument("vector length does not match generator size");
  }
  std::vector<double> y(n_sites);
  for (std::size_t k = 0; k < n_sites; ++k) {
    double acc = diagonal[k] * x[k];
    if (k > 0) {
      acc += off_diagonal[k - 1] * x[k - 1];
    }
    if (k + 1 < n_sites) {
      acc += off_diagonal[k] * x[k + 1];
    }
    y[k] = acc;
  }
  return y;
}

double ChainGenerator::column_sum_residual() const {
  double worst = 0.0;
  for (std::size_t k = 0; k < n_sites; ++k) {
    double sum = diagonal[k] + jump_left[k] + jump_right[k];
    if (k > 0) {
      sum += off_diagonal[k - 1];
    }
    if (k + 1 < n_sites) {
      sum += off_diagonal[k];
    }
    worst = std::max(worst, std::abs(sum));
  }
  return worst;
}

namespace {

template <class BondFn>
ChainGenerator chain_from_bonds(std::size_t n_sites, BondFn bond) {
  if (n_sites == 0) {
    throw std::invalid_argument("n_sites must be at least 1");
  }
  ChainGenerator gen;
  gen.n_sites = n_sites;
  gen.diagonal.resize(n_sites);
  gen.off_diagonal.resize(n_sites - 1);
  gen.jump_left.assign(n_sites, 0.0);
  gen.jump_right.assign(n_sites, 0.0);
  const long n = static_cast<long>(n_sites);
  for (long k = 1; k < n; ++k) {
    gen.off_diagonal[k - 1] = bond(k);
  }
  gen.jump_left.front() = bond(0);
  gen.jump_right.back() = bond(n);
  for (long site = 1; site <= n; ++site) {
    gen.diagonal[site - 1] = -(bond(site - 1) + bond(site));
  }
  return gen;
}

} // namespace

ChainGenerator build_ssh_generator(const RateConfig &config, std::size_t n_sites) {
  ChainGenerator gen = chain_from_bonds(n_sites, [&](long k) { return config.bond_rate(k); });
  // Every site has one even and one odd bond, so the escape rate is 2 gamma_bar.
  std::fill(gen.diagonal.begin(), gen.diagonal.end(), -config.total_rate());
  gen.source = config;
  return gen;
}

ChainGenerator build_feedback_generator(const FeedbackConfig &config, std::size_t n_sites) {
  config.validate();
  ChainGenerator gen = chain_from_bonds(n_sites, [&](long k) { return config.bond_rate(k); });
  gen.source = config;
  return gen;
}

bool TransportGenerator::is_symmetric(double tol) const {
  for (std::size_t k = 0; k + 1 < n_sites; ++k) {
    if (std::abs(lower[k] - upper[k]) > tol) {
      return false;
    }
  }
  return true;
}

double TransportGenerator::column_sum_residual() const {
  double worst = 0.0;
  for (std::size_t k = 0; k < n_sites; ++k) {
    double sum = diagonal[k];
    if (k > 0) {
      sum += upper[k - 1];
    } else {
      sum += escape_left;
    }
    if (k + 1 < n_sites) {
      sum += lower[k];
    } else {
      sum += escape_right;
    }
    worst = std::max(worst, std::abs(sum));
  }
  return worst;
}

ChainGenerator TransportGenerator::to_chain() const {
  if (!is_symmetric()) {
    throw std::invalid_argument("generator is not symmetric (requires f_L = f_R = 1/2)");
  }
  ChainGenerator gen;
  gen.n_sites = n_sites;
  gen.diagonal = diagonal;
  gen.off_diagonal = lower;
  gen.jump_left.assign(n_sites, 0.0);
  gen.jump_right.assign(n_sites, 0.0);
  gen.jump_left.front() = escape_left;
  gen.jump_right.back() = escape_right;
  return gen;
}

TransportGenerator build_set_generator(const SetLeadConfig &lead, std::size_t n_blocks) {
  lead.validate();
  if (n_blocks == 0) {
    throw std::invalid_argument("n_blocks must be at least 1");
  }
  const double f_l = lead.fermi_l();
  const double f_r = lead.fermi_r();
  // Left lead: occupied (odd site) <-> empty (even site) within one block.
  const double empty_to_left = lead.gamma_tilde_l * (1.0 - f_l); // 2m-1 -> 2m
  const double fill_from_left = lead.gamma_tilde_l * f_l;        // 2m -> 2m-1
  // Right lead: empty dot filled from the right increments m.
  const double fill_from_right = lead.gamma_tilde_r * f_r;        // 2m -> 2m+1
  const double empty_to_right = lead.gamma_tilde_r * (1.0 - f_r); // 2m+1 -> 2m

  TransportGenerator gen;
  gen.n_sites = 2 * n_blocks;
  gen.fermi_l = f_l;
  gen.fermi_r = f_r;
  gen.diagonal.resize(gen.n_sites);
  gen.lower.resize(gen.n_sites - 1);
  gen.upper.resize(gen.n_sites - 1);
  for (std::size_t k = 0; k + 1 < gen.n_sites; ++k) {
    const std::size_t site = k + 1; // bond between site and site+1
    if (site % 2 == 1) {
      gen.lower[k] = empty_to_left;
      gen.upper[k] = fill_from_left;
    } else {
      gen.lower[k] = fill_from_right;
      gen.upper[k] = empty_to_right;
    }
  }
  gen.escape_left = empty_to_right;  // site 1 -> site 0
  gen.escape_right = fill_from_right; // site 2n -> site 2n+1
  for (std::size_t k = 0; k < gen.n_sites; ++k) {
    gen.diagonal[k] = (k % 2 == 0) ? -(empty_to_left + empty_to_right)
                                   : -(fill_from_left + fill_from_right);
  }
  return gen;
}

} // namespace sshwalk
