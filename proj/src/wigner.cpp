#include "mfca/wigner.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "mfca/error.hpp"

namespace mfca {

namespace {

void check_weight(int ell) {
  if (ell < 0) throw InvalidArgument("Wigner weight must be non-negative");
  if (ell > kMaxWignerWeight) {
    throw CapabilityError("Wigner weight " + std::to_string(ell) + " exceeds the cap of " +
                          std::to_string(kMaxWignerWeight));
  }
}

void check_indices(int ell, int m, int n) {
  check_weight(ell);
  if (std::abs(m) > ell || std::abs(n) > ell) {
    throw InvalidArgument("Wigner index out of range: |m|, |n| must not exceed ell");
  }
}

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

// Branch m ≥ |n|, where both Jacobi parameters are non-negative.
double wigner_d_canonical(int ell, int m, int n, double theta) {
  const double half = 0.5 * theta;
  const double log_pref = 0.5 * (log_factorial(ell - m) + log_factorial(ell + m) -
                                 log_factorial(ell - n) - log_factorial(ell + n));
  const double s = std::sin(half);
  const double c = std::cos(half);
  const double trig = std::pow(s, m - n) * std::pow(c, m + n);
  return std::exp(log_pref) * trig * jacobi_poly(ell - m, m - n, m + n, std::cos(theta));
}

}  // namespace

double jacobi_poly(int n, int a, int b, double x) {
  if (n < 0) throw InvalidArgument("jacobi_poly: degree must be non-negative");
  if (n == 0) return 1.0;
  const double ad = a;
  const double bd = b;
  double p_prev = 1.0;
  double p = (ad + 1.0) + (ad + bd + 2.0) * (x - 1.0) / 2.0;
  for (int k = 2; k <= n; ++k) {
    const double kd = k;
    const double s = 2.0 * kd + ad + bd;
    const double c1 = 2.0 * kd * (kd + ad + bd) * (s - 2.0);
    const double c2 = (s - 1.0) * (s * (s - 2.0) * x + ad * ad - bd * bd);
    const double c3 = 2.0 * (kd + ad - 1.0) * (kd + bd - 1.0) * s;
    const double next = (c2 * p - c3 * p_prev) / c1;
    p_prev = p;
    p = next;
  }
  return p;
}

double wigner_d(int ell, int m, int n, double theta) {
  check_indices(ell, m, n);
  const auto parity = [](int e) { return (e % 2 == 0) ? 1.0 : -1.0; };
  if (m >= std::abs(n)) return wigner_d_canonical(ell, m, n, theta);
  if (n >= std::abs(m)) return parity(m - n) * wigner_d_canonical(ell, n, m, theta);
  if (-m >= std::abs(n)) return parity(m - n) * wigner_d_canonical(ell, -m, -n, theta);
  return wigner_d_canonical(ell, -n, -m, theta);
}

Eigen::MatrixXd wigner_d_matrix(int ell, double theta) {
  check_weight(ell);
  const int dim = 2 * ell + 1;
  Eigen::MatrixXd d(dim, dim);
  for (int m = -ell; m <= ell; ++m)
    for (int n = -ell; n <= ell; ++n)
      d(wigner_index(ell, m), wigner_index(ell, n)) = wigner_d(ell, m, n, theta);
  return d;
}

std::complex<double> wigner_D(int ell, int m, int n, const Rotation& x) {
  check_indices(ell, m, n);
  const EulerAngles e = to_euler(x);
  return std::polar(1.0, -m * e.phi) * wigner_d(ell, m, n, e.theta) * std::polar(1.0, -n * e.psi);
}

WignerDMatrix wigner_D_matrix(int ell, const Rotation& x) {
  check_weight(ell);
  const EulerAngles e = to_euler(x);
  const Eigen::MatrixXd d = wigner_d_matrix(ell, e.theta);
  WignerDMatrix out{ell, Eigen::MatrixXcd(2 * ell + 1, 2 * ell + 1)};
  for (int m = -ell; m <= ell; ++m) {
    const std::complex<double> left = std::polar(1.0, -m * e.phi);
    for (int n = -ell; n <= ell; ++n) {
      const int r = wigner_index(ell, m);
      const int c = wigner_index(ell, n);
      out.entries(r, c) = left * d(r, c) * std::polar(1.0, -n * e.psi);
    }
  }
  return out;
}

ExtrinsicColumn extrinsic_column(int k, const Rotation& x) {
  if (k < 1) throw InvalidArgument("extrinsic_column: k must be positive");
  check_weight(k);
  const EulerAngles e = to_euler(x);
  ExtrinsicColumn out{k, Eigen::VectorXcd(2 * k + 1)};
  const std::complex<double> right = std::polar(1.0, k * e.psi);
  for (int m = -k; m <= k; ++m) {
    out.values(wigner_index(k, m)) = std::polar(1.0, -m * e.phi) * wigner_d(k, m, -k, e.theta) * right;
  }
  return out;
}

}  // namespace mfca
