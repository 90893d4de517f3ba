#include "sshwalk/eigen_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace sshwalk {

namespace {

SymmetricEigen sorted_result(const std::vector<double> &values, const std::vector<double> &columns,
                             std::size_t n, bool want_vectors) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  SymmetricEigen out;
  out.values.reserve(n);
  for (std::size_t idx : order) {
    out.values.push_back(values[idx]);
    if (want_vectors) {
      std::vector<double> v(n);
      for (std::size_t k = 0; k < n; ++k) {
        v[k] = columns[k * n + idx];
      }
      out.vectors.push_back(std::move(v));
    }
  }
  return out;
}

} // namespace

SymmetricEigen tridiagonal_eigen(std::span<const double> diagonal,
                                 std::span<const double> off_diagonal, bool want_vectors) {
  const std::size_t n = diagonal.size();
  if (n == 0) {
    return {};
  }
  if (off_diagonal.size() + 1 != n) {
    throw std::invalid_argument("off-diagonal must have n - 1 entries");
  }
  std::vector<double> d(diagonal.begin(), diagonal.end());
  std::vector<double> e(n, 0.0);
  std::copy(off_diagonal.begin(), off_diagonal.end(), e.begin());

  // z[k * n + i]: component k of eigenvector i.
  std::vector<double> z;
  if (want_vectors) {
    z.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      z[i * n + i] = 1.0;
    }
  }

  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr int max_sweeps = 60;
  double shift_total = 0.0;
  double tst1 = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    std::size_t m = l;
    while (m < n - 1 && std::abs(e[m]) > eps * tst1) {
      ++m;
    }
    if (m > l) {
      int sweeps = 0;
      do {
        if (++sweeps > max_sweeps) {
          throw ConvergenceError("tridiagonal QL failed to converge");
        }
        // Wilkinson-style shift from the leading 2x2 block.
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) {
          r = -r;
        }
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::size_t i = l + 2; i < n; ++i) {
          d[i] -= h;
        }
        shift_total += h;

        // Implicit QL sweep from m back to l.
        p = d[m];
        double c = 1.0, c2 = 1.0, c3 = 1.0;
        const double el1 = e[l + 1];
        double s = 0.0, s2 = 0.0;
        for (std::size_t ii = m; ii-- > l;) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[ii];
          h = c * p;
          r = std::hypot(p, e[ii]);
          e[ii + 1] = s * r;
          s = e[ii] / r;
          c = p / r;
          p = c * d[ii] - s * g;
          d[ii + 1] = h + s * (c * g + s * d[ii]);
          if (want_vectors) {
            for (std::size_t k = 0; k < n; ++k) {
              double &zi = z[k * n + ii];
              double &zi1 = z[k * n + ii + 1];
              h = zi1;
              zi1 = s * zi + c * h;
              zi = c * zi - s * h;
            }
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += shift_total;
    e[l] = 0.0;
  }
  return sorted_result(d, z, n, want_vectors);
}

SymmetricEigen dense_symmetric_eigen(std::vector<double> a, std::size_t n) {
  if (a.size() != n * n) {
    throw std::invalid_argument("matrix size mismatch");
  }
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    v[i * n + i] = 1.0;
  }
  auto at = [n](std::vector<double> &m, std::size_t i, std::size_t j) -> double & {
    return m[i * n + j];
  };
  constexpr int max_sweeps = 100;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      scale += at(a, i, i) * at(a, i, i);
      for (std::size_t j = i + 1; j < n; ++j) {
        off += at(a, i, j) * at(a, i, j);
      }
    }
    if (off <= 1e-30 * std::max(scale, 1e-300)) {
      std::vector<double> values(n);
      for (std::size_t i = 0; i < n; ++i) {
        values[i] = at(a, i, i);
      }
      return sorted_result(values, v, n, true);
    }
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = at(a, p, q);
        if (apq == 0.0) {
          continue;
        }
        const double theta = (at(a, q, q) - at(a, p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::hypot(t, 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = at(a, k, p);
          const double akq = at(a, k, q);
          at(a, k, p) = c * akp - s * akq;
          at(a, k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = at(a, p, k);
          const double aqk = at(a, q, k);
          at(a, p, k) = c * apk - s * aqk;
          at(a, q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = at(v, k, p);
          const double vkq = at(v, k, q);
          at(v, k, p) = c * vkp - s * vkq;
          at(v, k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  throw ConvergenceError("Jacobi rotations failed to converge");
}

} // namespace sshwalk
