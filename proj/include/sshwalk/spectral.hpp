#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sshwalk/eigen_kernels.hpp"
#include "sshwalk/generator.hpp"

namespace sshwalk {

enum class Parity { even, odd, none };

std::string to_string(Parity parity);

/// Decay exponents beta_j = -E_j (ascending) with orthonormal eigenvectors.
struct SpectralDecomposition {
  std::vector<double> betas;
  std::vector<std::vector<double>> vectors;
  /// Empty until classify_parity has run.
  std::vector<Parity> parities;

  std::size_t size() const { return betas.size(); }
};

/// Full decomposition of the symmetric tridiagonal generator. Each
/// eigenvector has its first nonzero component positive.
SpectralDecomposition eigendecompose(const ChainGenerator &generator);

/// Generalized inversion P for odd N: P = P^T, P^2 = 1, P L P = L.
///
/// P decouples the sublattices. On even sites it is the plain reversal; on
/// odd sites it is a Hankel matrix whose entry depends on i + j (odd-site
/// indices counted from 0): a r^(i+j) below the anti-diagonal, b on it, and
/// s a r^(i+j-M) above it, with M = (N+1)/2 and r = -gamma_L / gamma_R.
struct InversionOperator {
  std::size_t n_sites = 0;
  /// Row-major N x N.
  std::vector<double> matrix;
  double r = 0.0;
  double a = 0.0;
  double b = 0.0;
  /// Squared norm of the odd-sublattice zero mode, sum_{j<M} r^(2j).
  double sigma = 0.0;
  double s = 0.0;
  double symmetry_residual = 0.0;
  double involution_residual = 0.0;
  double commutation_residual = 0.0;

  double at(std::size_t row, std::size_t col) const { return matrix[row * n_sites + col]; }
  std::vector<double> apply(std::span<const double> x) const;
};

/// Thrown when P fails its own validation.
class InversionValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Requires odd N >= 3 and gamma_R > 0. Validates to 1e-8 before returning.
InversionOperator build_inversion_operator(const RateConfig &config, std::size_t n_sites);

/// Labels every eigenvector even or odd under inversion (even N) or the
/// generalized inversion P (odd N, SSH generators only). Clusters with
/// splitting below 1e-8 * max|L_kk| are first rotated into parity
/// eigenstates. Returns the (possibly rotated) decomposition.
SpectralDecomposition classify_parity(SpectralDecomposition decomposition,
                                      const ChainGenerator &generator);

struct MidgapState {
  std::size_t index = 0;
  double beta = 0.0;
  /// |v_1|^2 + |v_N|^2.
  double edge_weight = 0.0;
  double weight_left = 0.0;
  double weight_right = 0.0;
};

struct MidgapReport {
  double center = 0.0;
  double window = 0.0;
  std::vector<MidgapState> states;
  std::size_t count() const { return states.size(); }
};

/// States with |beta - 2 gamma_bar| < window; the window defaults to |alpha|.
MidgapReport midgap_report(const SpectralDecomposition &decomposition, const RateConfig &config,
                           std::optional<double> window = std::nullopt);

/// |v_1|^2 + |v_N|^2 for every eigenvector.
std::vector<double> edge_weights(const SpectralDecomposition &decomposition);

struct Band {
  double lower = 0.0;
  double upper = 0.0;
};

/// Bulk bands (in beta) of the infinite chain whose bond rates repeat with
/// the given cycle and whose diagonal is minus the sum of adjacent bonds.
/// Band edges of a periodic Jacobi matrix sit at Bloch phase 0 or pi.
std::vector<Band> periodic_bands(std::span<const double> bond_cycle);

/// Indices of eigenvalues strictly inside (lower, upper).
std::vector<std::size_t> states_in_interval(const SpectralDecomposition &decomposition,
                                            double lower, double upper);

} // namespace sshwalk
