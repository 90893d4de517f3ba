#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "sshwalk/rates.hpp"

namespace sshwalk {

using Matrix2 = std::array<std::array<double, 2>, 2>;

/// 2x2 blocks of the infinite-chain generator acting on
/// rho_m = (p_{2m-1}, p_{2m}).
struct LocalBlocks {
  Matrix2 l0{};
  Matrix2 l_plus{};
  Matrix2 l_minus{};
};

LocalBlocks build_local_blocks(const RateConfig &config);

/// Symmetric tridiagonal generator of the open section {1, ..., N}.
///
/// `off_diagonal[k-1]` is the rate on the bond between sites k and k+1.
/// The jump vectors hold the rates coupling site 1 to site 0 and site N to
/// site N+1; both have length N with a single nonzero entry.
struct ChainGenerator {
  std::size_t n_sites = 0;
  std::vector<double> diagonal;
  std::vector<double> off_diagonal;
  std::vector<double> jump_left;
  std::vector<double> jump_right;
  /// Parameters the generator was built from, if any.
  std::variant<std::monostate, RateConfig, FeedbackConfig> source;

  /// J = J_1 + J_N.
  std::vector<double> jump_total() const;

  /// y = L x.
  std::vector<double> apply(std::span<const double> x) const;

  /// Largest |column sum| of L plus the jump vectors (zero means
  /// probability conservation on the embedding chain).
  double column_sum_residual() const;

  const RateConfig *rates() const { return std::get_if<RateConfig>(&source); }
};

/// Open SSH section: diagonal -2 gamma_bar, bond k rate gamma_bar - (-1)^k alpha.
ChainGenerator build_ssh_generator(const RateConfig &config, std::size_t n_sites);

/// Four-periodic feedback walk. Diagonal entries are minus the sum of the
/// two adjacent bond rates (boundary bonds included).
ChainGenerator build_feedback_generator(const FeedbackConfig &config, std::size_t n_sites);

/// General tridiagonal rate matrix, not necessarily symmetric.
///
/// `lower[k]` is the rate from site k+1 to k+2 (1-based sites) and
/// `upper[k]` the rate from k+2 back to k+1. `escape_left` is the rate from
/// site 1 to site 0 and `escape_right` the rate from site N to N+1.
struct TransportGenerator {
  std::size_t n_sites = 0;
  std::vector<double> diagonal;
  std::vector<double> lower;
  std::vector<double> upper;
  double escape_left = 0.0;
  double escape_right = 0.0;
  double fermi_l = 0.5;
  double fermi_r = 0.5;

  bool is_symmetric(double tol = 1e-12) const;
  double column_sum_residual() const;

  /// Symmetric view; throws if the matrix is not symmetric.
  ChainGenerator to_chain() const;
};

/// SET generator on 2 n_blocks sites; site 2m-1 holds an occupied dot and
/// site 2m an empty dot after m electrons entered from the right lead.
TransportGenerator build_set_generator(const SetLeadConfig &lead, std::size_t n_blocks);

} // namespace sshwalk
