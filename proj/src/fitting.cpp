#define EIGEN_DONT_PARALLELIZE
#include "sshwalk/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "sshwalk/philox.hpp"

namespace sshwalk {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kThetaBound = 30.0;
constexpr double kMergeTolerance = 1e-6;

struct Evaluation {
  double cost = std::numeric_limits<double>::infinity();
  VectorXd residual;
  MatrixXd jacobian;
  /// All K weights, A_K included.
  VectorXd weights;
  double condition = 1.0;
};

struct Problem {
  VectorXd t;
  /// 1 - y: the data the exponential sum has to match.
  VectorXd q;
};

// Residual r = X c - b of the projected problem and, on request, its full
// (Golub-Pereyra) Jacobian in theta = log(beta).
Evaluation evaluate(const Problem &problem, const VectorXd &theta, bool want_jacobian) {
  const Eigen::Index n = problem.t.size();
  const Eigen::Index k = theta.size();
  const VectorXd beta = theta.array().exp();
  MatrixXd e(n, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    e.col(j) = (-beta(j) * problem.t.array()).exp();
  }

  Evaluation ev;
  ev.weights.resize(k);
  if (k == 1) {
    ev.residual = e.col(0) - problem.q;
    ev.weights(0) = 1.0;
    if (want_jacobian) {
      ev.jacobian = (-beta(0) * problem.t.array() * e.col(0).array()).matrix();
    }
    ev.cost = 0.5 * ev.residual.squaredNorm();
    return ev;
  }

  // A_K = 1 - sum_{j<K} A_j turns the model into X c = b.
  const Eigen::Index m = k - 1;
  const MatrixXd x = e.leftCols(m).colwise() - e.col(m);
  const VectorXd b = problem.q - e.col(m);
  Eigen::JacobiSVD<MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd &s = svd.singularValues();
  const double cutoff = s(0) * 1e-13;
  Eigen::Index rank = 0;
  while (rank < m && s(rank) > cutoff && s(rank) > 0.0) ++rank;
  ev.condition = rank == m ? s(0) / s(m - 1) : std::numeric_limits<double>::infinity();

  const MatrixXd u = svd.matrixU().leftCols(rank);
  const MatrixXd v = svd.matrixV().leftCols(rank);
  const VectorXd inv_s = s.head(rank).cwiseInverse();
  const VectorXd c = v * (inv_s.asDiagonal() * (u.transpose() * b));
  ev.residual = x * c - b;
  ev.cost = 0.5 * ev.residual.squaredNorm();
  ev.weights.head(m) = c;
  ev.weights(m) = 1.0 - c.sum();
  if (!want_jacobian) {
    return ev;
  }

  ev.jacobian.resize(n, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const VectorXd te = (problem.t.array() * e.col(j).array()).matrix();
    // d(X c - b)/d theta_j at fixed c.
    const VectorXd du = -ev.weights(j) * beta(j) * te;
    // dX^T r, which feeds the change of c.
    VectorXd w = VectorXd::Zero(m);
    const double proj = beta(j) * te.dot(ev.residual);
    if (j < m) {
      w(j) = -proj;
    } else {
      w.setConstant(proj);
    }
    ev.jacobian.col(j) = du - u * (u.transpose() * du) -
                         u * (inv_s.asDiagonal() * (v.transpose() * w));
  }
  return ev;
}

struct Outcome {
  VectorXd theta;
  Evaluation ev;
  int iterations = 0;
  bool converged = false;
};

VectorXd clamp_theta(VectorXd theta) {
  return theta.cwiseMax(-kThetaBound).cwiseMin(kThetaBound);
}

Outcome levenberg_marquardt(const Problem &problem, VectorXd theta, const FitOptions &options) {
  Outcome out;
  theta = clamp_theta(theta);
  Evaluation ev = evaluate(problem, theta, true);
  double lambda = 1e-3;
  const Eigen::Index k = theta.size();
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    if (ev.cost == 0.0 || !ev.jacobian.allFinite()) {
      out.converged = ev.cost == 0.0;
      break;
    }
    const MatrixXd h = ev.jacobian.transpose() * ev.jacobian;
    const VectorXd g = ev.jacobian.transpose() * ev.residual;
    const double floor = std::max(h.diagonal().maxCoeff() * 1e-12, 1e-300);
    MatrixXd damped = h;
    for (Eigen::Index j = 0; j < k; ++j) {
      damped(j, j) += lambda * std::max(h(j, j), floor);
    }
    const VectorXd delta = damped.ldlt().solve(-g);
    const VectorXd trial = clamp_theta(theta + delta);
    const double step = (trial - theta).norm();
    const bool small = step <= options.tolerance * (theta.norm() + options.tolerance);
    Evaluation trial_ev = evaluate(problem, trial, true);
    if (delta.allFinite() && trial_ev.cost < ev.cost) {
      theta = trial;
      ev = std::move(trial_ev);
      lambda = std::max(lambda / 3.0, 1e-15);
      if (small) {
        out.converged = true;
        ++iter;
        break;
      }
    } else {
      lambda *= 4.0;
      // No downhill step exists at any damping: stationary point.
      if (small || lambda > 1e16) {
        out.converged = true;
        ++iter;
        break;
      }
    }
  }
  out.theta = theta;
  out.ev = std::move(ev);
  out.iterations = iter;
  return out;
}

// Slope of log(1 - y) over the last third of the curve, as a smallest rate.
std::optional<double> tail_rate(const Problem &problem) {
  const Eigen::Index n = problem.t.size();
  double st = 0, sl = 0, stt = 0, stl = 0;
  int count = 0;
  for (Eigen::Index i = n - n / 3; i < n; ++i) {
    if (problem.q(i) > 0.0) {
      const double l = std::log(problem.q(i));
      st += problem.t(i);
      sl += l;
      stt += problem.t(i) * problem.t(i);
      stl += problem.t(i) * l;
      ++count;
    }
  }
  if (count < 2) return std::nullopt;
  const double denom = count * stt - st * st;
  if (!(denom > 0.0)) return std::nullopt;
  const double slope = (count * stl - st * sl) / denom;
  if (!(slope < 0.0)) return std::nullopt;
  return -slope;
}

VectorXd sorted_log(std::vector<double> betas) {
  std::sort(betas.begin(), betas.end());
  VectorXd theta(static_cast<Eigen::Index>(betas.size()));
  for (std::size_t j = 0; j < betas.size(); ++j) {
    theta(static_cast<Eigen::Index>(j)) = std::log(betas[j]);
  }
  return theta;
}

std::vector<double> ladder(std::size_t k, double scale) {
  if (k == 1) return {scale};
  std::vector<double> out(k);
  for (std::size_t j = 0; j < k; ++j) {
    const double f = static_cast<double>(j) / static_cast<double>(k - 1);
    out[j] = scale * 0.3 * std::pow(10.0, f);
  }
  return out;
}

FitResult finalize(const Outcome &best, std::size_t k, std::size_t n_points) {
  std::vector<FitTerm> raw;
  for (Eigen::Index j = 0; j < best.theta.size(); ++j) {
    raw.push_back({std::exp(best.theta(j)), best.ev.weights(j)});
  }
  std::sort(raw.begin(), raw.end(),
            [](const FitTerm &a, const FitTerm &b) { return a.beta < b.beta; });
  FitResult result;
  for (const FitTerm &term : raw) {
    if (!result.terms.empty()) {
      FitTerm &last = result.terms.back();
      if (term.beta - last.beta <= kMergeTolerance * term.beta) {
        const double wa = std::abs(last.weight), wb = std::abs(term.weight);
        last.beta = wa + wb > 0.0 ? (wa * last.beta + wb * term.beta) / (wa + wb)
                                  : 0.5 * (last.beta + term.beta);
        last.weight += term.weight;
        continue;
      }
    }
    result.terms.push_back(term);
  }
  result.residual = std::sqrt(2.0 * best.ev.cost / static_cast<double>(n_points));
  result.k_terms = k;
  result.diagnostics.iterations = best.iterations;
  result.diagnostics.converged = best.converged;
  result.diagnostics.condition = best.ev.condition;
  return result;
}

FitResult fit_recursive(const Problem &problem, std::size_t k, const FitOptions &options) {
  std::vector<VectorXd> starts;
  const double scale = options.rate_scale;
  const std::vector<double> base = ladder(k, scale);
  starts.push_back(sorted_log(base));
  if (const auto tail = tail_rate(problem)) {
    std::vector<double> betas = base;
    betas.front() = *tail;
    starts.push_back(sorted_log(betas));
  }
  if (k > 1) {
    // Growing the best K-1 fit by one term keeps the residual monotone in K.
    const FitResult smaller = fit_recursive(problem, k - 1, options);
    std::vector<double> betas;
    for (const auto &term : smaller.terms) betas.push_back(term.beta);
    while (betas.size() < k - 1) betas.push_back(betas.empty() ? scale : 2.0 * betas.back());
    for (double extra : {2.0 * betas.back(), 0.5 * betas.front()}) {
      std::vector<double> grown = betas;
      grown.push_back(extra);
      starts.push_back(sorted_log(grown));
    }
  }
  const double t_max = problem.t.maxCoeff();
  const double lo = std::min(0.1 * scale, t_max > 0.0 ? 0.5 / t_max : 0.1 * scale);
  const double hi = 30.0 * scale;
  for (std::size_t r = 0; r < options.random_restarts; ++r) {
    Philox4x64 rng(options.seed, 1000 * k + r);
    std::vector<double> betas(k);
    for (double &b : betas) {
      b = lo * std::pow(hi / lo, rng.uniform01());
    }
    starts.push_back(sorted_log(betas));
  }

  std::vector<Outcome> outcomes(starts.size());
  const auto count = static_cast<std::int64_t>(starts.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < count; ++i) {
    outcomes[static_cast<std::size_t>(i)] =
        levenberg_marquardt(problem, starts[static_cast<std::size_t>(i)], options);
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < outcomes.size(); ++i) {
    if (outcomes[i].ev.cost < outcomes[best].ev.cost) best = i;
  }
  FitResult result = finalize(outcomes[best], k, static_cast<std::size_t>(problem.t.size()));
  result.diagnostics.restarts = starts.size();
  result.diagnostics.best_start = best;
  return result;
}

} // namespace

double FitResult::weight_sum() const {
  double sum = 0.0;
  for (const auto &term : terms) sum += term.weight;
  return sum;
}

FitResult fit_integrated_etd(std::span<const double> t, std::span<const double> y, std::size_t k,
                             const FitOptions &options) {
  if (k < 1 || k > 6) {
    throw std::invalid_argument("number of fit terms must be in [1, 6]");
  }
  if (t.size() != y.size()) {
    throw std::invalid_argument("time and value arrays differ in length");
  }
  if (t.size() < 4 * k) {
    throw std::invalid_argument("need at least 4K curve points");
  }
  if (!(options.rate_scale > 0.0) || options.max_iterations < 1 || !(options.tolerance > 0.0)) {
    throw std::invalid_argument("invalid fit options");
  }
  Problem problem;
  problem.t.resize(static_cast<Eigen::Index>(t.size()));
  problem.q.resize(static_cast<Eigen::Index>(t.size()));
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i]) || !std::isfinite(y[i]) || t[i] < 0.0) {
      throw std::invalid_argument("curve must be finite with nonnegative times");
    }
    problem.t(static_cast<Eigen::Index>(i)) = t[i];
    problem.q(static_cast<Eigen::Index>(i)) = 1.0 - y[i];
  }
  return fit_recursive(problem, k, options);
}

FitResult fit_integrated_etd(const ReconstructedCurve &curve, std::size_t k,
                             const FitOptions &options) {
  if (curve.kind != CurveKind::integrated_etd) {
    throw std::invalid_argument("fitting needs an integrated ETD curve");
  }
  const std::vector<double> t = curve.times();
  const std::vector<double> y = curve.values();
  return fit_integrated_etd(t, y, k, options);
}

std::vector<StabilityCell> fit_stability_sweep(const RateConfig &config, std::size_t n_sites,
                                               std::span<const std::size_t> k_list,
                                               std::span<const std::size_t> i_max_list,
                                               std::span<const std::uint64_t> seeds,
                                               const PipelineOptions &options) {
  if (k_list.empty() || i_max_list.empty() || seeds.empty()) {
    throw std::invalid_argument("sweep lists must be nonempty");
  }
  const std::size_t ni = i_max_list.size(), ns = seeds.size();
  std::vector<StabilityCell> cells(k_list.size() * ni * ns);
  const HoppingChain chain = hopping_chain(config, n_sites);
  for (std::size_t ii = 0; ii < ni; ++ii) {
    for (std::size_t si = 0; si < ns; ++si) {
      std::optional<ReconstructedCurve> curve;
      std::string error;
      try {
        EscapeTimeEnsemble ensemble =
            sample_ensemble(chain, i_max_list[ii], options.initial, seeds[si]);
        ensemble.rescale(options.time_scale, "scaled");
        curve = reconstruct_integrated_etd(ensemble, options.n_av, options.n_step);
      } catch (const std::exception &ex) {
        error = ex.what();
      }
      for (std::size_t ki = 0; ki < k_list.size(); ++ki) {
        StabilityCell &cell = cells[(ki * ni + ii) * ns + si];
        cell.k = k_list[ki];
        cell.i_max = i_max_list[ii];
        cell.seed = seeds[si];
        if (!curve) {
          cell.error = error;
          continue;
        }
        try {
          FitOptions fit = options.fit;
          fit.seed = seeds[si];
          cell.fit = fit_integrated_etd(*curve, k_list[ki], fit);
        } catch (const std::exception &ex) {
          cell.error = ex.what();
        }
      }
    }
  }
  return cells;
}

double SpreadSummary::max_spread() const {
  double out = 0.0;
  for (double s : spreads) out = std::max(out, s);
  return out;
}

SpreadSummary beta_spread(std::span<const StabilityCell> cells, std::size_t k) {
  SpreadSummary summary;
  summary.k = k;
  std::vector<double> lo(k, std::numeric_limits<double>::infinity());
  std::vector<double> hi(k, -std::numeric_limits<double>::infinity());
  std::vector<double> sum(k, 0.0);
  for (const auto &cell : cells) {
    if (cell.k != k) continue;
    if (!cell.fit || cell.fit->effective_k() != k) {
      ++summary.cells_skipped;
      continue;
    }
    ++summary.cells_used;
    for (std::size_t j = 0; j < k; ++j) {
      const double b = cell.fit->terms[j].beta;
      lo[j] = std::min(lo[j], b);
      hi[j] = std::max(hi[j], b);
      sum[j] += b;
    }
  }
  if (summary.cells_used > 0) {
    for (std::size_t j = 0; j < k; ++j) {
      const double mean = sum[j] / static_cast<double>(summary.cells_used);
      summary.spreads.push_back((hi[j] - lo[j]) / mean);
    }
  }
  return summary;
}

} // namespace sshwalk
