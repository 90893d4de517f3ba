#pragma once

#include <optional>

namespace sshwalk {

/// Rates of the staggered random walk.
///
/// The walk is parameterized either by the mean rate gamma_bar and the bias
/// alpha, or by the lead rates gamma_L = gamma_bar + alpha and
/// gamma_R = gamma_bar - alpha. Both forms are kept so callers can read
/// whichever one they need without re-deriving it.
class RateConfig {
public:
  /// Strict construction: requires gamma_bar > 0 and |alpha| < gamma_bar.
  static RateConfig from_bias(double gamma_bar, double alpha);
  static RateConfig from_lead_rates(double gamma_l, double gamma_r);

  /// Accepts the closed interval |alpha| <= gamma_bar, where one of the lead
  /// rates vanishes and the chain splits into dimers.
  static RateConfig from_bias_closed(double gamma_bar, double alpha);

  /// Any consistent subset of {gamma_bar, alpha} and {gamma_L, gamma_R}.
  /// When both pairs are given they must agree to 1e-12.
  static RateConfig from_parameters(std::optional<double> gamma_bar,
                                    std::optional<double> alpha,
                                    std::optional<double> gamma_l,
                                    std::optional<double> gamma_r);

  double gamma_bar() const { return gamma_bar_; }
  double alpha() const { return alpha_; }
  double gamma_l() const { return gamma_l_; }
  double gamma_r() const { return gamma_r_; }

  /// Total escape rate from any site, 2 gamma_bar.
  double total_rate() const { return 2.0 * gamma_bar_; }

  /// Rate on the bond between sites k and k+1: gamma_bar - (-1)^k alpha.
  double bond_rate(long k) const { return (k % 2 == 0) ? gamma_r_ : gamma_l_; }

  /// Both lead rates strictly positive.
  bool is_strict() const { return gamma_l_ > 0.0 && gamma_r_ > 0.0; }

private:
  RateConfig(double gamma_bar, double alpha, double gamma_l, double gamma_r)
      : gamma_bar_(gamma_bar), alpha_(alpha), gamma_l_(gamma_l), gamma_r_(gamma_r) {}

  double gamma_bar_;
  double alpha_;
  double gamma_l_;
  double gamma_r_;
};

/// Leads of a single-electron transistor. Energies are measured in units
/// where k_B = 1.
struct SetLeadConfig {
  double mu_l = 0.0;
  double mu_r = 0.0;
  double temp_l = 1.0;
  double temp_r = 1.0;
  double epsilon_dot = 0.0;
  double gamma_tilde_l = 1.0;
  double gamma_tilde_r = 1.0;

  void validate() const;
  double fermi_l() const;
  double fermi_r() const;
};

/// Fermi occupation 1 / (exp((energy - mu) / temperature) + 1).
double fermi(double energy, double mu, double temperature);

/// Effective rates of the feedback-controlled walk whose bonds repeat with
/// period four: (gamma_R, gamma_L_even, gamma_R, gamma_L_odd, ...).
struct FeedbackConfig {
  double gamma_r = 1.0;
  double gamma_l_even = 1.0;
  double gamma_l_odd = 1.0;

  /// gamma_R = gamma_L_even + alpha, gamma_L_odd = gamma_L_even - alpha.
  static FeedbackConfig from_bias(double gamma_l_even, double alpha);

  /// Left rate modulated by the parity of the counted number m:
  /// gamma_L = gamma_l0 + (-1)^m gamma_l1.
  static FeedbackConfig from_modulation(double gamma_r, double gamma_l0, double gamma_l1);

  void validate() const;

  /// Rate on the bond between sites k and k+1. Bond 1 carries gamma_R.
  double bond_rate(long k) const;
};

} // namespace sshwalk
