#include "mfca/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <utility>

#include <Eigen/Eigenvalues>

#include "mfca/error.hpp"

namespace mfca {

namespace {

constexpr double kDenseTol = 1e-10;
constexpr double kLanczosTol = 1e-8;
// Below this size the dense solver is always cheaper.
constexpr int kSmallDense = 256;
constexpr double kSparseDensity = 0.05;

std::uint64_t fnv_mix(std::uint64_t h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

double residual_norm(const HermitianMatrix& h, const Eigen::MatrixXcd& vectors,
                     const std::vector<double>& values) {
  if (vectors.cols() == 0) return 0.0;
  const Eigen::MatrixXcd av = h.multiply(vectors);
  double worst = 0.0;
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    worst = std::max(worst, (av.col(c) - values[c] * vectors.col(c)).norm());
  }
  return worst;
}

EigenPairs dense_solve(const HermitianMatrix& h, int m) {
  if (h.size() > kDenseSizeCap) {
    throw CapabilityError("dense eigensolver limited to n <= " + std::to_string(kDenseSizeCap));
  }
  const Eigen::MatrixXcd a = h.to_dense();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a);
  if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed", -1.0);
  const int n = h.size();
  EigenPairs out;
  out.values.resize(m);
  out.vectors.resize(n, m);
  for (int r = 0; r < m; ++r) {
    out.values[r] = es.eigenvalues()(n - 1 - r);
    out.vectors.col(r) = es.eigenvectors().col(n - 1 - r);
  }
  out.max_residual = residual_norm(h, out.vectors, out.values);
  return out;
}

Eigen::MatrixXcd random_block(std::mt19937_64& gen, int n, int cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXcd x(n, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < n; ++r) {
      const double re = normal(gen);
      const double im = normal(gen);
      x(r, c) = {re, im};
    }
  return x;
}

// Orthonormalizes the columns of y against q (two classical Gram–Schmidt
// passes) and among themselves. Columns that collapse are replaced by fresh
// random directions so the basis keeps growing.
Eigen::MatrixXcd orthonormalize(const Eigen::MatrixXcd& q, Eigen::MatrixXcd y,
                                std::mt19937_64& gen) {
  const int n = static_cast<int>(y.rows());
  Eigen::MatrixXcd out(n, 0);
  for (Eigen::Index c = 0; c < y.cols(); ++c) {
    Eigen::VectorXcd v = y.col(c);
    for (int attempt = 0; attempt < 4; ++attempt) {
      const double before = v.norm();
      for (int pass = 0; pass < 2; ++pass) {
        if (q.cols() > 0) v -= q * (q.adjoint() * v);
        if (out.cols() > 0) v -= out * (out.adjoint() * v);
      }
      const double after = v.norm();
      if (after > 1e-10 * std::max(before, 1e-300) && after > 1e-300) {
        out.conservativeResize(Eigen::NoChange, out.cols() + 1);
        out.col(out.cols() - 1) = v / after;
        break;
      }
      v = random_block(gen, n, 1).col(0);
    }
  }
  return out;
}

EigenPairs lanczos_solve(const HermitianMatrix& h, int m, double tol_abs, std::uint64_t seed,
                         int max_restarts) {
  const int n = h.size();
  const int keep = std::min(n, 2 * m);
  const int max_basis = std::min(n, std::max(8 * m, 60));

  std::mt19937_64 gen(seed);
  Eigen::MatrixXcd q = orthonormalize(Eigen::MatrixXcd(n, 0), random_block(gen, n, m), gen);
  Eigen::MatrixXcd w = h.multiply(q);
  // Columns [from, to) of q whose images span the next Krylov block.
  Eigen::Index from = 0;
  Eigen::Index to = q.cols();

  double best = std::numeric_limits<double>::infinity();
  for (int restart = 0;; ++restart) {
    while (q.cols() < max_basis) {
      const Eigen::Index width = std::min<Eigen::Index>(to - from, max_basis - q.cols());
      Eigen::MatrixXcd y = orthonormalize(q, w.middleCols(from, width), gen);
      if (y.cols() == 0) break;
      const Eigen::MatrixXcd wy = h.multiply(y);
      const Eigen::Index old = q.cols();
      q.conservativeResize(Eigen::NoChange, old + y.cols());
      q.rightCols(y.cols()) = y;
      w.conservativeResize(Eigen::NoChange, old + y.cols());
      w.rightCols(y.cols()) = wy;
      from = old;
      to = q.cols();
    }

    Eigen::MatrixXcd t = q.adjoint() * w;
    t = (0.5 * (t + t.adjoint())).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(t);
    const Eigen::Index dim = t.rows();
    const int take = static_cast<int>(std::min<Eigen::Index>(dim, keep));
    Eigen::MatrixXcd s(dim, take);
    std::vector<double> theta(take);
    for (int r = 0; r < take; ++r) {
      theta[r] = es.eigenvalues()(dim - 1 - r);
      s.col(r) = es.eigenvectors().col(dim - 1 - r);
    }
    const Eigen::MatrixXcd x = q * s;
    const Eigen::MatrixXcd ax = w * s;

    double worst = 0.0;
    for (int r = 0; r < m; ++r) worst = std::max(worst, (ax.col(r) - theta[r] * x.col(r)).norm());
    best = std::min(best, worst);
    if (worst <= tol_abs || dim >= n) {
      EigenPairs out;
      out.values.assign(theta.begin(), theta.begin() + m);
      out.vectors = x.leftCols(m);
      out.max_residual = residual_norm(h, out.vectors, out.values);
      if (out.max_residual <= tol_abs || dim >= n) return out;
      best = std::min(best, out.max_residual);
    }
    if (restart >= max_restarts) {
      throw ConvergenceError("Lanczos did not converge after " + std::to_string(max_restarts) +
                                 " restarts (best residual " + std::to_string(best) + ")",
                             best);
    }
    // Thick restart on the leading Ritz vectors; their images follow by
    // linearity, and the next block is A times the wanted ones.
    q = x;
    w = ax;
    from = 0;
    to = std::min<Eigen::Index>(q.cols(), m);
  }
}

}  // namespace

HermitianMatrix HermitianMatrix::dense(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols()) throw InvalidArgument("HermitianMatrix: matrix must be square");
  HermitianMatrix h;
  h.n_ = static_cast<int>(m.rows());
  h.is_dense_ = true;
  h.dense_ = m.triangularView<Eigen::Upper>();
  for (int i = 0; i < h.n_; ++i) {
    h.dense_(i, i) = m(i, i).real();
    for (int j = i + 1; j < h.n_; ++j) h.dense_(j, i) = std::conj(m(i, j));
  }
  return h;
}

HermitianMatrix HermitianMatrix::sparse(int n, const std::vector<MatrixEntry>& upper) {
  if (n < 0) throw InvalidArgument("HermitianMatrix: negative dimension");
  std::vector<Eigen::Triplet<std::complex<double>>> trips;
  trips.reserve(upper.size() * 2);
  std::set<std::pair<int, int>> seen;
  for (const MatrixEntry& e : upper) {
    if (e.i < 0 || e.j >= n || e.i > e.j) {
      throw InvalidArgument("HermitianMatrix: sparse entries need 0 <= i <= j < n");
    }
    if (!seen.emplace(e.i, e.j).second) throw InvalidArgument("HermitianMatrix: duplicate entry");
    if (e.i == e.j) {
      if (e.value.imag() != 0.0) throw InvalidArgument("HermitianMatrix: diagonal must be real");
      trips.emplace_back(e.i, e.i, e.value);
    } else {
      trips.emplace_back(e.i, e.j, e.value);
      trips.emplace_back(e.j, e.i, std::conj(e.value));
    }
  }
  HermitianMatrix h;
  h.n_ = n;
  h.is_dense_ = false;
  h.sparse_.resize(n, n);
  h.sparse_.setFromTriplets(trips.begin(), trips.end());
  h.sparse_.makeCompressed();
  return h;
}

double HermitianMatrix::density() const {
  if (n_ == 0) return 0.0;
  const double total = static_cast<double>(n_) * n_;
  if (!is_dense_) return static_cast<double>(sparse_.nonZeros()) / total;
  return static_cast<double>((dense_.array() != std::complex<double>(0.0)).count()) / total;
}

double HermitianMatrix::frobenius_norm() const {
  return is_dense_ ? dense_.norm() : sparse_.norm();
}

Eigen::MatrixXcd HermitianMatrix::multiply(const Eigen::MatrixXcd& x) const {
  if (x.rows() != n_) throw InvalidArgument("HermitianMatrix::multiply: size mismatch");
  if (is_dense_) return dense_ * x;
  return sparse_ * x;
}

Eigen::MatrixXcd HermitianMatrix::to_dense() const {
  if (is_dense_) return dense_;
  return Eigen::MatrixXcd(sparse_);
}

HermitianMatrix HermitianMatrix::scaled(const std::vector<double>& scale) const {
  if (static_cast<int>(scale.size()) != n_) throw InvalidArgument("scaled: size mismatch");
  HermitianMatrix out = *this;
  if (is_dense_) {
    for (int j = 0; j < n_; ++j)
      for (int i = 0; i < n_; ++i) out.dense_(i, j) *= scale[i] * scale[j];
  } else {
    for (int r = 0; r < out.sparse_.outerSize(); ++r)
      for (Sparse::InnerIterator it(out.sparse_, r); it; ++it) {
        it.valueRef() *= scale[it.row()] * scale[it.col()];
      }
  }
  return out;
}

std::uint64_t HermitianMatrix::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  h = fnv_mix(h, &n_, sizeof n_);
  if (is_dense_) {
    h = fnv_mix(h, dense_.data(), sizeof(std::complex<double>) * dense_.size());
  } else {
    h = fnv_mix(h, sparse_.valuePtr(), sizeof(std::complex<double>) * sparse_.nonZeros());
    h = fnv_mix(h, sparse_.innerIndexPtr(), sizeof(int) * sparse_.nonZeros());
  }
  return h;
}

EigenPairs top_eigenpairs(const HermitianMatrix& h, int m, const SolverOptions& options) {
  const int n = h.size();
  if (m < 1 || m > n) throw InvalidArgument("top_eigenpairs: need 1 <= m <= n");
  SolverPath path = options.path;
  if (path == SolverPath::automatic) {
    const bool large = n > kDenseSizeCap;
    const bool sparse = h.density() < kSparseDensity;
    path = (n > kSmallDense && (large || sparse)) ? SolverPath::lanczos : SolverPath::dense;
  }
  if (path == SolverPath::dense) {
    const double tol = options.tol > 0.0 ? options.tol : kDenseTol;
    EigenPairs out = dense_solve(h, m);
    const double limit = tol * std::max(1.0, h.frobenius_norm());
    if (out.max_residual > limit) {
      throw ConvergenceError("dense eigensolver residual above tolerance", out.max_residual);
    }
    return out;
  }
  const double tol = options.tol > 0.0 ? options.tol : kLanczosTol;
  const std::uint64_t seed = options.start_seed.value_or(h.hash());
  const int restarts = options.max_restarts > 0 ? options.max_restarts : 10 * m;
  return lanczos_solve(h, m, tol * std::max(1.0, h.frobenius_norm()), seed, restarts);
}

EigenPairs top_eigenpairs(const HermitianMatrix& h, int m, double tol) {
  SolverOptions o;
  o.tol = tol;
  return top_eigenpairs(h, m, o);
}

EigenPairs full_spectrum(const HermitianMatrix& h) {
  if (h.size() > kDenseSizeCap) {
    throw CapabilityError("full_spectrum limited to n <= " + std::to_string(kDenseSizeCap));
  }
  if (h.size() == 0) return {};
  return dense_solve(h, h.size());
}

}  // namespace mfca
