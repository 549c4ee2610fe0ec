#include "mfca/spectral.hpp"

#include <cmath>
#include <cstdint>
#include <cstdlib>

#include "mfca/angles.hpp"
#include "mfca/error.hpp"
#include "mfca/wigner.hpp"

namespace mfca {

namespace {

// Exact in 64 bits while the running product fits, log-space afterwards.
long double binomial(int n, int r) {
  if (r < 0 || r > n) return 0.0L;
  r = std::min(r, n - r);
  std::uint64_t acc = 1;
  for (int i = 1; i <= r; ++i) {
    std::uint64_t next = 0;
    // acc * (n - r + i) / i stays integral at every step.
    if (__builtin_mul_overflow(acc, static_cast<std::uint64_t>(n - r + i), &next)) {
      return std::exp(std::lgamma(static_cast<long double>(n) + 1.0L) -
                      std::lgamma(static_cast<long double>(r) + 1.0L) -
                      std::lgamma(static_cast<long double>(n - r) + 1.0L));
    }
    acc = next / static_cast<std::uint64_t>(i);
  }
  return static_cast<long double>(acc);
}

long double ipow(long double x, int e) {
  long double r = 1.0L;
  while (e > 0) {
    if (e & 1) r *= x;
    x *= x;
    e >>= 1;
  }
  return r;
}

long double incomplete_beta_ld(long double x, int a, int b) {
  // B(x;a,b) = B(a,b) · P[Binomial(a+b−1, x) ≥ a]; all terms positive.
  const int total = a + b - 1;
  long double tail = 0.0L;
  for (int j = a; j <= total; ++j) {
    tail += binomial(total, j) * ipow(x, j) * ipow(1.0L - x, total - j);
  }
  const long double complete = 1.0L / (static_cast<long double>(total) * binomial(total - 1, a - 1));
  return complete * tail;
}

void check_h(double h) {
  if (!(h >= 0.0 && h <= 2.0)) throw InvalidArgument("bandwidth h must lie in [0, 2]");
}

}  // namespace

double incomplete_beta(double x, int a, int b) {
  if (a < 1 || b < 1) throw InvalidArgument("incomplete_beta: a and b must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument("incomplete_beta: x must lie in [0, 1]");
  return static_cast<double>(incomplete_beta_ld(x, a, b));
}

double lambda_analytic(int n, int k, double h) {
  check_h(h);
  k = std::abs(k);
  if (n < k) return 0.0;
  const long double x = static_cast<long double>(h) / 2.0L;
  long double sum = 0.0L;
  for (int nu = 0; nu <= n - k; ++nu) {
    const long double term =
        binomial(n - k, nu) * binomial(n + k, nu) * incomplete_beta_ld(x, nu + 1, n - nu + 1);
    sum += (nu % 2 == 0) ? term : -term;
  }
  return static_cast<double>(sum);
}

double lambda_quadrature(int n, int k, double h) {
  check_h(h);
  k = std::abs(k);
  if (n < k) return 0.0;
  const int nodes = (n + k + 3) / 2;  // ⌈(n+k+2)/2⌉
  const GaussRule rule = gauss_legendre(nodes);
  const double half = 0.5 * h;
  const double mid = 1.0 - half;
  double sum = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double z = mid + half * rule.nodes[i];
    sum += rule.weights[i] * std::pow(1.0 + z, k) * jacobi_poly(n - k, 0, 2 * k, z);
  }
  return std::ldexp(sum * half, -(k + 1));
}

double lambda_taylor(int n, int k, double h) {
  const double q = static_cast<double>(n) * n + n - static_cast<double>(k) * k;
  return 0.5 * h - q * h * h / 8.0;
}

double lambda_top(int k, double h) {
  k = std::abs(k);
  return (1.0 - std::pow(1.0 - 0.5 * h, k + 1)) / (k + 1);
}

double lambda_second(int k, double h) {
  k = std::abs(k);
  const double x = 0.5 * h;
  const double kd = k;
  return -kd / (kd + 1.0) * (1.0 - std::pow(1.0 - x, k + 2)) / (kd + 2.0) +
         (2.0 * kd + 1.0) / (kd + 1.0) * x * std::pow(1.0 - x, k + 1);
}

double lambda_third(int k, double h) {
  k = std::abs(k);
  const double x = 0.5 * h;
  const double kd = k;
  return kd / (kd + 2.0) * (1.0 - std::pow(1.0 - x, k + 3)) / (kd + 3.0) +
         2.0 / (kd + 2.0) * x * std::pow(1.0 - x, k + 2) -
         (2.0 * kd + 1.0) * x * x * std::pow(1.0 - x, k + 1);
}

double spectral_gap(int k, double h) {
  k = std::abs(k);
  const double kd = k;
  const double num = std::ldexp(1.0, k + 2) - std::pow(2.0 - h, k + 1) * ((kd + 1.0) * h + 2.0);
  return num / (std::ldexp(1.0, k + 1) * (kd + 2.0));
}

double second_gap(int k, double h) { return lambda_second(k, h) - lambda_third(k, h); }

double delta_k(int k) {
  if (k < 1) throw InvalidArgument("delta_k: k must be positive");
  return 1.0 / (k + 1.0);
}

EigenvalueTable eigenvalue_table(int k, double h, int n_max) {
  k = std::abs(k);
  if (n_max < k) throw InvalidArgument("eigenvalue_table: n_max must be at least k");
  check_h(h);
  EigenvalueTable t{k, h, {}};
  t.values.reserve(n_max - k + 1);
  for (int n = k; n <= n_max; ++n) {
    t.values.push_back({n, lambda_quadrature(n, k, h), 2 * n + 1});
  }
  return t;
}

GaussRule gauss_legendre(int count) {
  if (count < 1) throw InvalidArgument("gauss_legendre: need at least one node");
  GaussRule rule{std::vector<double>(count), std::vector<double>(count)};
  const int half = (count + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (count + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= count; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p2) / j;
      }
      dp = count * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0, p1 = 0.0;
    for (int j = 1; j <= count; ++j) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p2) / j;
    }
    dp = count * (x * p0 - p1) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[count - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[count - 1 - i] = w;
  }
  if (count % 2 == 1) rule.nodes[count / 2] = 0.0;
  return rule;
}

}  // namespace mfca
