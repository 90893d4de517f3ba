#include "sshwalk/etd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sshwalk {

double EtdModel::density(double t) const {
  double sum = 0.0;
  for (const auto &term : terms) {
    sum += term.a * std::exp(-term.beta * t);
  }
  return sum;
}

double EtdModel::integrated(double t) const {
  double sum = 0.0;
  for (const auto &term : terms) {
    sum += term.weight * std::exp(-term.beta * t);
  }
  return 1.0 - sum;
}

double EtdModel::weight_sum() const {
  double sum = 0.0;
  for (const auto &term : terms) {
    sum += term.weight;
  }
  return sum;
}

double EtdModel::min_beta() const {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto &term : terms) {
    if (!term.negligible) {
      lo = std::min(lo, term.beta);
    }
  }
  return lo;
}

void validate_distribution(std::span<const double> rho0, std::size_t n_sites) {
  if (rho0.size() != n_sites) {
    throw std::invalid_argument("initial distribution has wrong length");
  }
  double total = 0.0;
  for (double p : rho0) {
    if (!(p >= -1e-12)) {
      throw std::invalid_argument("initial distribution has a negative entry");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-10) {
    throw std::invalid_argument("initial distribution does not sum to 1");
  }
}

std::vector<double> symmetric_edges_distribution(std::size_t n_sites) {
  std::vector<double> rho(n_sites, 0.0);
  rho.front() += 0.5;
  rho.back() += 0.5;
  return rho;
}

std::vector<double> site_distribution(std::size_t n_sites, std::size_t site) {
  if (site < 1 || site > n_sites) {
    throw std::invalid_argument("start site out of range");
  }
  std::vector<double> rho(n_sites, 0.0);
  rho[site - 1] = 1.0;
  return rho;
}

std::vector<double> parse_distribution(const std::string &spec, std::size_t n_sites) {
  if (spec == "symmetric") {
    return symmetric_edges_distribution(n_sites);
  }
  if (spec.rfind("site:", 0) == 0) {
    std::size_t site = 0;
    try {
      site = std::stoul(spec.substr(5));
    } catch (const std::exception &) {
      throw std::invalid_argument("bad site in distribution spec: " + spec);
    }
    return site_distribution(n_sites, site);
  }
  throw std::invalid_argument("unknown distribution spec: " + spec);
}

EtdModel etd_coefficients(const SpectralDecomposition &decomposition,
                          const ChainGenerator &generator, std::span<const double> rho0) {
  validate_distribution(rho0, generator.n_sites);
  EtdModel model;
  model.rho0.assign(rho0.begin(), rho0.end());
  model.jump = generator.jump_total();
  const std::size_t n = generator.n_sites;
  for (std::size_t j = 0; j < decomposition.size(); ++j) {
    const auto &v = decomposition.vectors[j];
    double jv = 0.0, vr = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      jv += model.jump[k] * v[k];
      vr += v[k] * rho0[k];
    }
    EtdTerm term;
    term.beta = decomposition.betas[j];
    term.a = jv * vr;
    // A zero exponent only occurs for a disconnected (dimerized) chain whose
    // trapped modes never reach the boundary.
    term.weight = term.beta > 1e-12 ? term.a / term.beta : 0.0;
    term.negligible = std::abs(term.weight) < 1e-12;
    if (!decomposition.parities.empty()) {
      term.parity = decomposition.parities[j];
    }
    model.terms.push_back(term);
  }
  return model;
}

EtdModel analytic_etd(const ChainGenerator &generator, std::span<const double> rho0) {
  const SpectralDecomposition decomposition =
      classify_parity(eigendecompose(generator), generator);
  return etd_coefficients(decomposition, generator, rho0);
}

double etd_eval(const EtdModel &model, double t) {
  if (t < 0) {
    throw std::invalid_argument("time must be nonnegative");
  }
  return model.density(t);
}

double integrated_etd_eval(const EtdModel &model, double t) {
  if (t < 0) {
    throw std::invalid_argument("time must be nonnegative");
  }
  return model.integrated(t);
}

MomentSet moments_and_cumulants(const EtdModel &model, int max_order) {
  if (max_order < 1 || max_order > 6) {
    throw std::invalid_argument("moment order must be in [1, 6]");
  }
  const auto m_max = static_cast<std::size_t>(max_order);
  MomentSet out;
  out.moments.assign(m_max + 1, 0.0);
  for (const auto &term : model.terms) {
    if (term.weight == 0.0) {
      continue;
    }
    double factor = term.weight; // A_j m! / beta^m, built up incrementally
    out.moments[0] += factor;
    for (std::size_t m = 1; m <= m_max; ++m) {
      factor *= static_cast<double>(m) / term.beta;
      out.moments[m] += factor;
    }
  }
  // kappa_n = mu_n - sum_{k=1}^{n-1} C(n-1, k-1) kappa_k mu_{n-k}, with mu_0 = 1.
  out.cumulants.assign(m_max + 1, 0.0);
  for (std::size_t n = 1; n <= m_max; ++n) {
    double value = out.moments[n];
    double binom = 1.0; // C(n-1, k-1)
    for (std::size_t k = 1; k < n; ++k) {
      value -= binom * out.cumulants[k] * out.moments[n - k];
      binom = binom * static_cast<double>(n - k) / static_cast<double>(k);
    }
    out.cumulants[n] = value;
  }
  return out;
}

OdeSolution ode_oracle(const ChainGenerator &generator, std::span<const double> rho0, double t_max,
                       double dt) {
  validate_distribution(rho0, generator.n_sites);
  if (!(dt > 0.0) || !(t_max > 0.0)) {
    throw std::invalid_argument("t_max and dt must be positive");
  }
  const std::size_t n = generator.n_sites;
  const std::vector<double> jump = generator.jump_total();
  double bound = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double row = std::abs(generator.diagonal[k]);
    if (k > 0) {
      row += std::abs(generator.off_diagonal[k - 1]);
    }
    if (k + 1 < n) {
      row += std::abs(generator.off_diagonal[k]);
    }
    bound = std::max(bound, row);
  }

  const auto steps = static_cast<std::size_t>(std::ceil(t_max / dt - 1e-9));
  const double h = t_max / static_cast<double>(steps);
  OdeSolution sol;
  sol.stability_warning = h * bound > 0.5;

  // State: rho (n entries) followed by the escaped probability q.
  std::vector<double> state(rho0.begin(), rho0.end());
  state.push_back(0.0);
  auto rhs = [&](const std::vector<double> &x) {
    std::vector<double> dx = generator.apply(std::span<const double>(x.data(), n));
    double flux = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      flux += jump[k] * x[k];
    }
    dx.push_back(flux);
    return dx;
  };
  auto record = [&](double t) {
    double flux = 0.0, survival = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      flux += jump[k] * state[k];
      survival += state[k];
    }
    sol.t.push_back(t);
    sol.density.push_back(flux);
    sol.integrated.push_back(state[n]);
    sol.survival.push_back(survival);
  };

  record(0.0);
  std::vector<double> tmp(n + 1);
  for (std::size_t step = 0; step < steps; ++step) {
    const std::vector<double> k1 = rhs(state);
    for (std::size_t i = 0; i <= n; ++i) tmp[i] = state[i] + 0.5 * h * k1[i];
    const std::vector<double> k2 = rhs(tmp);
    for (std::size_t i = 0; i <= n; ++i) tmp[i] = state[i] + 0.5 * h * k2[i];
    const std::vector<double> k3 = rhs(tmp);
    for (std::size_t i = 0; i <= n; ++i) tmp[i] = state[i] + h * k3[i];
    const std::vector<double> k4 = rhs(tmp);
    for (std::size_t i = 0; i <= n; ++i) {
      state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    record(h * static_cast<double>(step + 1));
  }
  return sol;
}

} // namespace sshwalk
