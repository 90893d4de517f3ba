#include "sshwalk/rates.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sshwalk {

namespace {

void require_finite(double value, const char *name) {
  if (!std::isfinite(value)) {
    throw std::invalid_argument(std::string(name) + " must be finite");
  }
}

} // namespace

RateConfig RateConfig::from_bias(double gamma_bar, double alpha) {
  require_finite(gamma_bar, "gamma_bar");
  require_finite(alpha, "alpha");
  if (!(gamma_bar > 0.0)) {
    throw std::invalid_argument("gamma_bar must be positive");
  }
  if (!(std::abs(alpha) < gamma_bar)) {
    throw std::invalid_argument("|alpha| must be smaller than gamma_bar (both lead rates positive)");
  }
  return RateConfig(gamma_bar, alpha, gamma_bar + alpha, gamma_bar - alpha);
}

RateConfig RateConfig::from_lead_rates(double gamma_l, double gamma_r) {
  require_finite(gamma_l, "gamma_L");
  require_finite(gamma_r, "gamma_R");
  if (!(gamma_l > 0.0) || !(gamma_r > 0.0)) {
    throw std::invalid_argument("gamma_L and gamma_R must be positive");
  }
  return RateConfig(0.5 * (gamma_l + gamma_r), 0.5 * (gamma_l - gamma_r), gamma_l, gamma_r);
}

RateConfig RateConfig::from_bias_closed(double gamma_bar, double alpha) {
  require_finite(gamma_bar, "gamma_bar");
  require_finite(alpha, "alpha");
  if (!(gamma_bar > 0.0)) {
    throw std::invalid_argument("gamma_bar must be positive");
  }
  if (std::abs(alpha) > gamma_bar) {
    throw std::invalid_argument("|alpha| must not exceed gamma_bar");
  }
  return RateConfig(gamma_bar, alpha, gamma_bar + alpha, gamma_bar - alpha);
}

RateConfig RateConfig::from_parameters(std::optional<double> gamma_bar, std::optional<double> alpha,
                                       std::optional<double> gamma_l,
                                       std::optional<double> gamma_r) {
  const bool has_bias = gamma_bar.has_value() || alpha.has_value();
  const bool has_leads = gamma_l.has_value() || gamma_r.has_value();
  if (has_leads && !(gamma_l && gamma_r)) {
    throw std::invalid_argument("gamma_L and gamma_R must be given together");
  }
  if (!has_leads) {
    if (!gamma_bar) {
      throw std::invalid_argument("gamma_bar is required");
    }
    return from_bias(*gamma_bar, alpha.value_or(0.0));
  }
  RateConfig config = from_lead_rates(*gamma_l, *gamma_r);
  if (has_bias) {
    constexpr double tol = 1e-12;
    if (gamma_bar && std::abs(*gamma_bar - config.gamma_bar()) > tol) {
      throw std::invalid_argument("gamma_bar is inconsistent with gamma_L, gamma_R");
    }
    if (alpha && std::abs(*alpha - config.alpha()) > tol) {
      throw std::invalid_argument("alpha is inconsistent with gamma_L, gamma_R");
    }
  }
  return config;
}

double fermi(double energy, double mu, double temperature) {
  return 1.0 / (std::exp((energy - mu) / temperature) + 1.0);
}

void SetLeadConfig::validate() const {
  if (!(temp_l > 0.0) || !(temp_r > 0.0)) {
    throw std::invalid_argument("lead temperatures must be positive");
  }
  if (!(gamma_tilde_l > 0.0) || !(gamma_tilde_r > 0.0)) {
    throw std::invalid_argument("bare tunnel rates must be positive");
  }
  for (double v : {mu_l, mu_r, epsilon_dot}) {
    require_finite(v, "lead energy");
  }
}

double SetLeadConfig::fermi_l() const { return fermi(epsilon_dot, mu_l, temp_l); }
double SetLeadConfig::fermi_r() const { return fermi(epsilon_dot, mu_r, temp_r); }

FeedbackConfig FeedbackConfig::from_bias(double gamma_l_even, double alpha) {
  FeedbackConfig config{gamma_l_even + alpha, gamma_l_even, gamma_l_even - alpha};
  config.validate();
  return config;
}

FeedbackConfig FeedbackConfig::from_modulation(double gamma_r, double gamma_l0, double gamma_l1) {
  FeedbackConfig config{gamma_r, gamma_l0 + gamma_l1, gamma_l0 - gamma_l1};
  config.validate();
  return config;
}

void FeedbackConfig::validate() const {
  if (!(gamma_r > 0.0) || !(gamma_l_even > 0.0) || !(gamma_l_odd > 0.0)) {
    throw std::invalid_argument("feedback rates must all be positive");
  }
}

double FeedbackConfig::bond_rate(long k) const {
  // Pattern starts at bond 1: (R, L_even, R, L_odd); bond 0 wraps to L_odd.
  const long phase = ((k - 1) % 4 + 4) % 4;
  switch (phase) {
  case 0:
  case 2:
    return gamma_r;
  case 1:
    return gamma_l_even;
  default:
    return gamma_l_odd;
  }
}

} // namespace sshwalk
