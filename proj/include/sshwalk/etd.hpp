#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sshwalk/generator.hpp"
#include "sshwalk/spectral.hpp"

namespace sshwalk {

/// One exponential of the escape-time density, P_e(t) = sum_j a_j e^{-beta_j t}.
struct EtdTerm {
  double beta = 0.0;
  double a = 0.0;
  /// Weight in the integrated form, A_j = a_j / beta_j.
  double weight = 0.0;
  /// |A_j| < 1e-12; kept so the ladder stays complete.
  bool negligible = false;
  Parity parity = Parity::none;
};

struct EtdModel {
  std::vector<EtdTerm> terms;
  std::vector<double> rho0;
  std::vector<double> jump;

  /// P_e(t).
  double density(double t) const;
  /// P_int(t) = 1 - sum_j A_j e^{-beta_j t}.
  double integrated(double t) const;
  double weight_sum() const;
  double min_beta() const;
};

/// Throws std::invalid_argument unless rho0 has length n, entries >= -1e-12
/// and sums to 1 within 1e-10.
void validate_distribution(std::span<const double> rho0, std::size_t n_sites);

/// (delta_{n,1} + delta_{n,N}) / 2.
std::vector<double> symmetric_edges_distribution(std::size_t n_sites);
/// delta_{n,site}, 1-based.
std::vector<double> site_distribution(std::size_t n_sites, std::size_t site);
/// "symmetric" or "site:<k>".
std::vector<double> parse_distribution(const std::string &spec, std::size_t n_sites);

/// a_j = (J . v_j)(v_j . rho0), A_j = a_j / beta_j.
EtdModel etd_coefficients(const SpectralDecomposition &decomposition,
                          const ChainGenerator &generator, std::span<const double> rho0);

/// Convenience: decompose, classify parity, and build the model.
EtdModel analytic_etd(const ChainGenerator &generator, std::span<const double> rho0);

double etd_eval(const EtdModel &model, double t);
double integrated_etd_eval(const EtdModel &model, double t);

struct MomentSet {
  /// mu_0 ... mu_m.
  std::vector<double> moments;
  /// kappa_0 (unused, 0) ... kappa_m.
  std::vector<double> cumulants;
};

/// Closed-form mu_m = sum_j A_j m! / beta_j^m and the matching cumulants.
/// max_order must be in [1, 6].
MomentSet moments_and_cumulants(const EtdModel &model, int max_order);

/// Direct RK4 integration of d rho/dt = L rho together with the escaped
/// probability dq/dt = J . rho.
struct OdeSolution {
  std::vector<double> t;
  std::vector<double> density;
  std::vector<double> integrated;
  /// 1^T rho(t).
  std::vector<double> survival;
  /// Set when dt times the Gershgorin bound of L exceeds 0.5.
  bool stability_warning = false;
};

OdeSolution ode_oracle(const ChainGenerator &generator, std::span<const double> rho0, double t_max,
                       double dt);

} // namespace sshwalk
