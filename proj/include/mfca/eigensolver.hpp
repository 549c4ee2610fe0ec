#pragma once

// Top eigenpairs of complex Hermitian matrices.
//
// Dense matrices go through Householder tridiagonalization + implicit QL
// (Eigen::SelfAdjointEigenSolver). Large or sparse matrices use a block
// Lanczos iteration with full reorthogonalization and thick restarts,
// started from a block seeded by a hash of the matrix so repeated solves
// are bit-identical.

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace mfca {

struct MatrixEntry {
  int i = 0;
  int j = 0;
  std::complex<double> value;
};

class HermitianMatrix {
 public:
  using Sparse = Eigen::SparseMatrix<std::complex<double>, Eigen::RowMajor>;

  HermitianMatrix() = default;

  // Uses the upper triangle of `m` and mirrors it; the diagonal keeps its
  // real part only.
  static HermitianMatrix dense(const Eigen::MatrixXcd& m);
  // Entries with i ≤ j; the lower triangle is the implicit conjugate mirror.
  // Diagonal entries must be real. Duplicate positions are rejected.
  static HermitianMatrix sparse(int n, const std::vector<MatrixEntry>& upper);

  int size() const { return n_; }
  bool is_dense() const { return is_dense_; }
  // Fraction of nonzero entries (both triangles counted).
  double density() const;
  double frobenius_norm() const;

  Eigen::MatrixXcd multiply(const Eigen::MatrixXcd& x) const;
  Eigen::MatrixXcd to_dense() const;

  // D H D for a real diagonal D given by `scale`.
  HermitianMatrix scaled(const std::vector<double>& scale) const;

  // Fingerprint of the stored entries, used to seed iterative solves.
  std::uint64_t hash() const;

  const Eigen::MatrixXcd& dense_storage() const { return dense_; }
  const Sparse& sparse_storage() const { return sparse_; }

 private:
  int n_ = 0;
  bool is_dense_ = true;
  Eigen::MatrixXcd dense_;
  Sparse sparse_;
};

struct EigenPairs {
  std::vector<double> values;  // descending
  Eigen::MatrixXcd vectors;    // n × m, orthonormal columns
  double max_residual = 0.0;   // max_r ‖H v_r − λ_r v_r‖₂
};

enum class SolverPath { automatic, dense, lanczos };

struct SolverOptions {
  SolverPath path = SolverPath::automatic;
  // Relative residual tolerance; 0 selects 1e-10 (dense) or 1e-8 (Lanczos).
  double tol = 0.0;
  // Overrides the hash-derived seed of the Lanczos start block.
  std::optional<std::uint64_t> start_seed;
  // 0 selects 10·m restarts.
  int max_restarts = 0;
};

inline constexpr int kDenseSizeCap = 4096;

// The m algebraically largest eigenpairs. Throws InvalidArgument for m
// outside [1, n] and ConvergenceError when the restart cap is hit.
EigenPairs top_eigenpairs(const HermitianMatrix& h, int m, const SolverOptions& options = {});
EigenPairs top_eigenpairs(const HermitianMatrix& h, int m, double tol);

// All eigenpairs, descending; dense path, n ≤ 4096 (CapabilityError otherwise).
EigenPairs full_spectrum(const HermitianMatrix& h);

}  // namespace mfca
