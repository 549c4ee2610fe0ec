#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "mfca/eigensolver.hpp"
#include "mfca/error.hpp"
#include "property_suite.hpp"

using namespace mfca;
using mfca::testing::random_hermitian;
using cd = std::complex<double>;

namespace {

// det(A) by cofactor expansion along rows, memoized on the set of used columns.
cd cofactor_det(const Eigen::MatrixXcd& a) {
  const int n = static_cast<int>(a.rows());
  std::vector<cd> memo(1u << n, cd(0.0, 0.0));
  std::vector<char> known(1u << n, 0);
  std::function<cd(int, unsigned)> rec = [&](int row, unsigned used) -> cd {
    if (row == n) return 1.0;
    if (known[used]) return memo[used];
    cd sum = 0.0;
    int sign_index = 0;
    for (int c = 0; c < n; ++c) {
      if (used & (1u << c)) continue;
      const double sign = (sign_index % 2 == 0) ? 1.0 : -1.0;
      ++sign_index;
      if (a(row, c) != cd(0.0, 0.0)) sum += sign * a(row, c) * rec(row + 1, used | (1u << c));
    }
    known[used] = 1;
    memo[used] = sum;
    return sum;
  };
  return rec(0, 0u);
}

double char_poly(const Eigen::MatrixXcd& h, double lambda) {
  const Eigen::MatrixXcd shifted = h - lambda * Eigen::MatrixXcd::Identity(h.rows(), h.cols());
  return cofactor_det(shifted).real();
}

// Roots of the characteristic polynomial by sign changes and bisection.
std::vector<double> char_roots(const Eigen::MatrixXcd& h) {
  const double r = h.norm() + 1.0;
  const int cells = 20000;
  std::vector<double> roots;
  double x0 = -r;
  double f0 = char_poly(h, x0);
  for (int c = 1; c <= cells; ++c) {
    const double x1 = -r + 2.0 * r * c / cells;
    const double f1 = char_poly(h, x1);
    if ((f0 < 0) != (f1 < 0)) {
      double lo = x0, hi = x1, flo = f0;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * r; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = char_poly(h, mid);
        if ((fm < 0) == (flo < 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    x0 = x1;
    f0 = f1;
  }
  std::sort(roots.rbegin(), roots.rend());
  return roots;
}

}  // namespace

TEST_CASE("trivial spectra") {
  const HermitianMatrix id = HermitianMatrix::dense(Eigen::MatrixXcd::Identity(5, 5));
  const EigenPairs e = top_eigenpairs(id, 3);
  REQUIRE(e.values.size() == 3);
  for (double v : e.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));

  Eigen::MatrixXcd m(2, 2);
  m << 0, cd(0, 1), cd(0, -1), 0;
  const EigenPairs p = top_eigenpairs(HermitianMatrix::dense(m), 2);
  CHECK(p.values[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(p.values[1] == doctest::Approx(-1.0).epsilon(1e-14));

  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(4, 4);
  d.diagonal() << 3.0, -1.0, 7.0, 0.5;
  const EigenPairs f = full_spectrum(HermitianMatrix::dense(d));
  CHECK(f.values == std::vector<double>{7.0, 3.0, 0.5, -1.0});
}

TEST_CASE("random 8x8 Hermitian matches the characteristic-polynomial oracle") {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 3; ++trial) {
    const Eigen::MatrixXcd a = random_hermitian(rng, 8);
    const std::vector<double> roots = char_roots(a);
    REQUIRE(roots.size() == 8);
    const EigenPairs e = top_eigenpairs(HermitianMatrix::dense(a), 8);
    for (int r = 0; r < 8; ++r) CHECK(std::abs(e.values[r] - roots[r]) < 1e-8);
  }
}

TEST_CASE("full_spectrum preserves trace and Frobenius norm") {
  std::mt19937_64 rng(72);
  for (int n : {3, 20, 64}) {
    const Eigen::MatrixXcd a = random_hermitian(rng, n);
    const HermitianMatrix h = HermitianMatrix::dense(a);
    const EigenPairs e = full_spectrum(h);
    double sum = 0.0, sq = 0.0;
    for (double v : e.values) {
      sum += v;
      sq += v * v;
    }
    CHECK(std::abs(sum - a.trace().real()) < 1e-9 * n);
    CHECK(std::abs(sq - a.squaredNorm()) < 1e-9 * n);
    CHECK(std::abs(h.frobenius_norm() - a.norm()) < 1e-12 * a.norm());
  }
}

TEST_CASE("Lanczos agrees with the dense path and is deterministic") {
  std::mt19937_64 rng(73);
  std::normal_distribution<double> g;
  std::bernoulli_distribution keep(0.01);
  const int n = 700;
  std::vector<MatrixEntry> upper;
  for (int i = 0; i < n; ++i) {
    upper.push_back({i, i, {g(rng), 0.0}});
    for (int j = i + 1; j < n; ++j) {
      if (keep(rng)) upper.push_back({i, j, {g(rng), g(rng)}});
    }
  }
  const HermitianMatrix h = HermitianMatrix::sparse(n, upper);
  CHECK_FALSE(h.is_dense());
  CHECK(h.density() < 0.05);
  SolverOptions lanczos;
  lanczos.path = SolverPath::lanczos;
  SolverOptions dense;
  dense.path = SolverPath::dense;
  const EigenPairs a = top_eigenpairs(h, 10, lanczos);
  const EigenPairs b = top_eigenpairs(h, 10, dense);
  for (int r = 0; r < 10; ++r) CHECK(std::abs(a.values[r] - b.values[r]) < 1e-8 * h.frobenius_norm());
  const EigenPairs c = top_eigenpairs(h, 10, lanczos);
  CHECK(a.values == c.values);
  CHECK(a.vectors == c.vectors);
  CHECK(a.max_residual <= 1e-8 * h.frobenius_norm());
}

TEST_CASE("convergence failure carries the best residual") {
  std::mt19937_64 rng(74);
  const HermitianMatrix h = HermitianMatrix::dense(random_hermitian(rng, 400));
  SolverOptions o;
  o.path = SolverPath::lanczos;
  o.tol = 1e-15;
  o.max_restarts = 1;
  try {
    (void)top_eigenpairs(h, 20, o);
    FAIL("expected a convergence error");
  } catch (const ConvergenceError& e) {
    CHECK(e.best_residual() > 0.0);
  }
}

TEST_CASE("argument and storage validation") {
  const HermitianMatrix id = HermitianMatrix::dense(Eigen::MatrixXcd::Identity(3, 3));
  CHECK_THROWS_AS(top_eigenpairs(id, 0), InvalidArgument);
  CHECK_THROWS_AS(top_eigenpairs(id, 4), InvalidArgument);
  CHECK_THROWS_AS(HermitianMatrix::dense(Eigen::MatrixXcd::Zero(2, 3)), InvalidArgument);
  CHECK_THROWS_AS(HermitianMatrix::sparse(3, {{0, 0, {1.0, 0.5}}}), InvalidArgument);
  CHECK_THROWS_AS(HermitianMatrix::sparse(3, {{1, 0, {1.0, 0.0}}}), InvalidArgument);
  CHECK_THROWS_AS(HermitianMatrix::sparse(3, {{0, 3, {1.0, 0.0}}}), InvalidArgument);
  CHECK_THROWS_AS(HermitianMatrix::sparse(3, {{0, 1, {1.0, 0.0}}, {0, 1, {2.0, 0.0}}}),
                  InvalidArgument);
  const HermitianMatrix big = HermitianMatrix::sparse(kDenseSizeCap + 1, {});
  CHECK_THROWS_AS(full_spectrum(big), CapabilityError);

  Eigen::MatrixXcd m(2, 2);
  m << cd(1.0, 0.3), cd(2.0, 1.0), cd(9.0, 9.0), cd(4.0, 0.0);
  const Eigen::MatrixXcd d = HermitianMatrix::dense(m).to_dense();
  CHECK(d(0, 0) == cd(1.0, 0.0));
  CHECK(d(1, 0) == cd(2.0, -1.0));
  CHECK(d == d.adjoint());

  const HermitianMatrix s = HermitianMatrix::sparse(3, {{0, 1, {0.0, 2.0}}, {2, 2, {5.0, 0.0}}});
  const Eigen::MatrixXcd sd = s.to_dense();
  CHECK(sd(1, 0) == cd(0.0, -2.0));
  CHECK(s.density() == doctest::Approx(3.0 / 9.0));
  const Eigen::MatrixXcd x = Eigen::MatrixXcd::Random(3, 2);
  CHECK((s.multiply(x) - sd * x).norm() < 1e-15);
  const Eigen::MatrixXcd scaled = s.scaled({2.0, 3.0, 0.5}).to_dense();
  CHECK(scaled(0, 1) == cd(0.0, 12.0));
  CHECK(scaled(2, 2) == cd(1.25, 0.0));
  CHECK(s.hash() == HermitianMatrix::sparse(3, {{0, 1, {0.0, 2.0}}, {2, 2, {5.0, 0.0}}}).hash());
  CHECK(s.hash() != HermitianMatrix::sparse(3, {{0, 1, {0.0, 2.5}}, {2, 2, {5.0, 0.0}}}).hash());
}
