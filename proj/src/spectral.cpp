#include "sshwalk/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace sshwalk {

std::string to_string(Parity parity) {
  switch (parity) {
  case Parity::even:
    return "even";
  case Parity::odd:
    return "odd";
  case Parity::none:
    return "none";
  }
  return "none";
}

namespace {

void fix_sign(std::vector<double> &v) {
  double largest = 0.0;
  for (double x : v) {
    largest = std::max(largest, std::abs(x));
  }
  for (double x : v) {
    if (std::abs(x) > 1e-10 * largest) {
      if (x < 0) {
        for (double &y : v) {
          y = -y;
        }
      }
      return;
    }
  }
}

double diagonal_scale(const ChainGenerator &generator) {
  double scale = 0.0;
  for (double d : generator.diagonal) {
    scale = std::max(scale, std::abs(d));
  }
  return scale > 0.0 ? scale : 1.0;
}

} // namespace

SpectralDecomposition eigendecompose(const ChainGenerator &generator) {
  if (generator.n_sites == 0) {
    throw std::invalid_argument("empty generator");
  }
  // Eigenvalues of -L come out ascending, which is the beta ordering.
  std::vector<double> neg_diag(generator.diagonal.size());
  std::vector<double> neg_off(generator.off_diagonal.size());
  std::transform(generator.diagonal.begin(), generator.diagonal.end(), neg_diag.begin(),
                 std::negate<>());
  std::transform(generator.off_diagonal.begin(), generator.off_diagonal.end(), neg_off.begin(),
                 std::negate<>());
  SymmetricEigen eig = tridiagonal_eigen(neg_diag, neg_off, true);
  SpectralDecomposition out;
  out.betas = std::move(eig.values);
  out.vectors = std::move(eig.vectors);
  for (auto &v : out.vectors) {
    fix_sign(v);
  }
  return out;
}

std::vector<double> InversionOperator::apply(std::span<const double> x) const {
  std::vector<double> y(n_sites, 0.0);
  for (std::size_t i = 0; i < n_sites; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n_sites; ++j) {
      acc += at(i, j) * x[j];
    }
    y[i] = acc;
  }
  return y;
}

InversionOperator build_inversion_operator(const RateConfig &config, std::size_t n_sites) {
  if (n_sites < 3 || n_sites % 2 == 0) {
    throw std::invalid_argument("generalized inversion needs odd N >= 3");
  }
  if (!(config.gamma_r() > 0.0)) {
    throw std::invalid_argument("generalized inversion needs gamma_R > 0");
  }
  const std::size_t n = n_sites;
  const std::size_t m = (n + 1) / 2; // odd sites
  InversionOperator op;
  op.n_sites = n;
  op.r = -config.gamma_l() / config.gamma_r();
  op.s = ((m - 1) % 2 == 0) ? 1.0 : -1.0;

  std::vector<double> r_pow(2 * m, 1.0);
  for (std::size_t k = 1; k < r_pow.size(); ++k) {
    r_pow[k] = r_pow[k - 1] * op.r;
  }
  op.sigma = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    op.sigma += r_pow[2 * j];
  }
  // The odd-site zero mode z_i = r^i must map to s z.
  op.a = (op.s + r_pow[m]) / op.sigma;
  op.b = op.r * (r_pow[m - 2] * op.a - 1.0);

  op.matrix.assign(n * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t k = i + j;
      double value;
      if (k + 1 < m) {
        value = op.a * r_pow[k];
      } else if (k + 1 == m) {
        value = op.b;
      } else {
        value = op.s * op.a * r_pow[k - m];
      }
      op.matrix[(2 * i) * n + 2 * j] = value;
    }
  }
  for (std::size_t site = 2; site < n; site += 2) {
    op.matrix[(site - 1) * n + (n - site)] = 1.0;
  }

  const ChainGenerator gen = build_ssh_generator(config, n);
  // Dense checks: P = P^T, P^2 = 1, P L P = L.
  std::vector<double> lp(n * n, 0.0); // L P
  for (std::size_t col = 0; col < n; ++col) {
    std::vector<double> pcol(n);
    for (std::size_t row = 0; row < n; ++row) {
      pcol[row] = op.at(row, col);
    }
    const std::vector<double> lcol = gen.apply(pcol);
    for (std::size_t row = 0; row < n; ++row) {
      lp[row * n + col] = lcol[row];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      op.symmetry_residual = std::max(op.symmetry_residual, std::abs(op.at(i, j) - op.at(j, i)));
      double pp = 0.0, plp = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        pp += op.at(i, k) * op.at(k, j);
        plp += op.at(i, k) * lp[k * n + j];
      }
      op.involution_residual = std::max(op.involution_residual, std::abs(pp - (i == j ? 1.0 : 0.0)));
      double l_ij = 0.0;
      if (i == j) {
        l_ij = gen.diagonal[i];
      } else if (i + 1 == j) {
        l_ij = gen.off_diagonal[i];
      } else if (j + 1 == i) {
        l_ij = gen.off_diagonal[j];
      }
      op.commutation_residual = std::max(op.commutation_residual, std::abs(plp - l_ij));
    }
  }
  constexpr double tol = 1e-8;
  if (op.symmetry_residual > tol || op.involution_residual > tol ||
      op.commutation_residual > tol) {
    std::ostringstream msg;
    msg << "generalized inversion failed validation for N=" << n << ", alpha=" << config.alpha()
        << ": |P-P^T|=" << op.symmetry_residual << ", |P^2-1|=" << op.involution_residual
        << ", |PLP-L|=" << op.commutation_residual;
    throw InversionValidationError(msg.str());
  }
  return op;
}

SpectralDecomposition classify_parity(SpectralDecomposition decomposition,
                                      const ChainGenerator &generator) {
  const std::size_t n = generator.n_sites;
  if (decomposition.size() != n) {
    throw std::invalid_argument("decomposition does not match generator");
  }
  std::function<std::vector<double>(const std::vector<double> &)> symmetry =
      [](const std::vector<double> &v) { return std::vector<double>(v.rbegin(), v.rend()); };
  std::optional<InversionOperator> inversion;
  if (n % 2 == 1 && n >= 3 && generator.rates() && generator.rates()->gamma_r() > 0.0) {
    inversion = build_inversion_operator(*generator.rates(), n);
    symmetry = [&inversion](const std::vector<double> &v) { return inversion->apply(v); };
  }

  // Rotate near-degenerate clusters into eigenstates of the symmetry.
  const double degenerate_tol = 1e-8 * diagonal_scale(generator);
  std::size_t start = 0;
  while (start < n) {
    std::size_t stop = start + 1;
    while (stop < n && decomposition.betas[stop] - decomposition.betas[stop - 1] < degenerate_tol) {
      ++stop;
    }
    const std::size_t size = stop - start;
    if (size > 1) {
      std::vector<std::vector<double>> images;
      for (std::size_t a = start; a < stop; ++a) {
        images.push_back(symmetry(decomposition.vectors[a]));
      }
      std::vector<double> block(size * size);
      for (std::size_t a = 0; a < size; ++a) {
        for (std::size_t b = 0; b < size; ++b) {
          double dot = 0.0;
          for (std::size_t k = 0; k < n; ++k) {
            dot += decomposition.vectors[start + a][k] * images[b][k];
          }
          block[a * size + b] = dot;
        }
      }
      // Symmetrize against roundoff before rotating.
      for (std::size_t a = 0; a < size; ++a) {
        for (std::size_t b = a + 1; b < size; ++b) {
          const double avg = 0.5 * (block[a * size + b] + block[b * size + a]);
          block[a * size + b] = block[b * size + a] = avg;
        }
      }
      const SymmetricEigen rot = dense_symmetric_eigen(block, size);
      std::vector<std::vector<double>> rotated(size, std::vector<double>(n, 0.0));
      for (std::size_t c = 0; c < size; ++c) {
        for (std::size_t a = 0; a < size; ++a) {
          const double w = rot.vectors[c][a];
          for (std::size_t k = 0; k < n; ++k) {
            rotated[c][k] += w * decomposition.vectors[start + a][k];
          }
        }
        fix_sign(rotated[c]);
      }
      for (std::size_t c = 0; c < size; ++c) {
        decomposition.vectors[start + c] = std::move(rotated[c]);
      }
    }
    start = stop;
  }

  constexpr double label_tol = 1e-6;
  decomposition.parities.assign(n, Parity::none);
  for (std::size_t j = 0; j < n; ++j) {
    const auto &v = decomposition.vectors[j];
    const std::vector<double> sv = symmetry(v);
    double plus = 0.0, minus = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      plus += (v[k] - sv[k]) * (v[k] - sv[k]);
      minus += (v[k] + sv[k]) * (v[k] + sv[k]);
    }
    if (std::sqrt(plus) < label_tol) {
      decomposition.parities[j] = Parity::even;
    } else if (std::sqrt(minus) < label_tol) {
      decomposition.parities[j] = Parity::odd;
    }
  }
  return decomposition;
}

std::vector<double> edge_weights(const SpectralDecomposition &decomposition) {
  std::vector<double> weights;
  weights.reserve(decomposition.size());
  for (const auto &v : decomposition.vectors) {
    const double first = v.front() * v.front();
    weights.push_back(v.size() > 1 ? first + v.back() * v.back() : first);
  }
  return weights;
}

MidgapReport midgap_report(const SpectralDecomposition &decomposition, const RateConfig &config,
                           std::optional<double> window) {
  MidgapReport report;
  report.center = config.total_rate();
  report.window = window.value_or(std::abs(config.alpha()));
  for (std::size_t j = 0; j < decomposition.size(); ++j) {
    const double beta = decomposition.betas[j];
    if (std::abs(beta - report.center) < report.window) {
      const auto &v = decomposition.vectors[j];
      MidgapState state;
      state.index = j;
      state.beta = beta;
      state.weight_left = v.front() * v.front();
      state.weight_right = v.back() * v.back();
      state.edge_weight = v.size() > 1 ? state.weight_left + state.weight_right : state.weight_left;
      report.states.push_back(state);
    }
  }
  return report;
}

std::vector<Band> periodic_bands(std::span<const double> bond_cycle) {
  const std::size_t p = bond_cycle.size();
  if (p == 0) {
    throw std::invalid_argument("bond cycle must not be empty");
  }
  // Site c sits between bonds c-1 and c; bond p-1 wraps to the next cell.
  auto bloch = [&](double phase_sign) {
    std::vector<double> h(p * p, 0.0);
    for (std::size_t c = 0; c < p; ++c) {
      const double left = bond_cycle[(c + p - 1) % p];
      h[c * p + c] += left + bond_cycle[c]; // -L has +escape rate on the diagonal
    }
    for (std::size_t c = 0; c < p; ++c) {
      const std::size_t next = (c + 1) % p;
      const double sign = (c + 1 == p) ? phase_sign : 1.0;
      const double t = -bond_cycle[c] * sign;
      if (next == c) {
        h[c * p + c] += 2.0 * t;
      } else {
        h[c * p + next] += t;
        h[next * p + c] += t;
      }
    }
    return dense_symmetric_eigen(std::move(h), p).values;
  };
  const std::vector<double> at_zero = bloch(1.0);
  const std::vector<double> at_pi = bloch(-1.0);
  std::vector<Band> bands(p);
  for (std::size_t i = 0; i < p; ++i) {
    bands[i] = {std::min(at_zero[i], at_pi[i]), std::max(at_zero[i], at_pi[i])};
  }
  return bands;
}

std::vector<std::size_t> states_in_interval(const SpectralDecomposition &decomposition,
                                            double lower, double upper) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < decomposition.size(); ++j) {
    if (decomposition.betas[j] > lower && decomposition.betas[j] < upper) {
      out.push_back(j);
    }
  }
  return out;
}

} // namespace sshwalk
