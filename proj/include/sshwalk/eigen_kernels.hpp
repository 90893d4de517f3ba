#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace sshwalk {

class ConvergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Eigenpairs of a real symmetric matrix, eigenvalues ascending.
/// `vectors[j]` is the unit eigenvector belonging to `values[j]`.
struct SymmetricEigen {
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;
};

/// Implicit-shift QL on a symmetric tridiagonal matrix.
/// Throws ConvergenceError if an eigenvalue needs more than 60 sweeps.
SymmetricEigen tridiagonal_eigen(std::span<const double> diagonal,
                                 std::span<const double> off_diagonal, bool want_vectors = true);

/// Cyclic Jacobi rotations on a small dense symmetric matrix (row-major n x n).
SymmetricEigen dense_symmetric_eigen(std::vector<double> matrix, std::size_t n);

} // namespace sshwalk
