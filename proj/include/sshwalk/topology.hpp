#pragma once

#include <array>
#include <complex>
#include <stdexcept>
#include <string>

#include "sshwalk/generator.hpp"
#include "sshwalk/rates.hpp"

namespace sshwalk {

/// Counting-field generator L_chi = -2 gamma_bar 1 + l_x sigma_x + l_y sigma_y.
struct CountingGenerator {
  std::array<std::array<std::complex<double>, 2>, 2> matrix{};
  double l_x = 0.0;
  double l_y = 0.0;
};

CountingGenerator counting_generator(const RateConfig &config, double chi);

enum class Phase { trivial, nontrivial, critical };

std::string to_string(Phase phase);

struct WindingResult {
  int winding = 0;
  double zak_phase = 0.0;
  Phase phase = Phase::trivial;
};

/// Raised when the curve l(chi) touches the origin and the winding is undefined.
class GapClosedError : public std::runtime_error {
public:
  explicit GapClosedError(double min_norm)
      : std::runtime_error("gap closed: min |l(chi)| = " + std::to_string(min_norm)),
        min_norm_(min_norm) {}
  double min_norm() const { return min_norm_; }

private:
  double min_norm_;
};

inline constexpr int kDefaultWindingGrid = 256;

/// Winding of (l_x(chi), l_y(chi)) around the origin for chi running
/// counterclockwise over [-pi, pi]. Requires n_grid >= 16.
WindingResult winding_number(const RateConfig &config, int n_grid = kDefaultWindingGrid);

struct ChiralCheck {
  bool symmetric = false;
  /// max |Lambda (L + c) Lambda + (L + c)| over all entries.
  double residual = 0.0;
  /// The shift c; the midpoint of the diagonal range (2 gamma_bar for SSH).
  double shift = 0.0;
};

/// Tests Lambda (L + c I) Lambda = -(L + c I) with Lambda = diag(+1, -1, ...).
ChiralCheck chiral_symmetry_check(const ChainGenerator &generator);
ChiralCheck chiral_symmetry_check(const TransportGenerator &generator);

} // namespace sshwalk
