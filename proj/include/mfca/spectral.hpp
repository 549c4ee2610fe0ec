#pragma once

// Eigenvalues λ_n^(k)(h) of the localized frequency-k transport operator on
// the sphere (cap bandwidth h = 1 − cos a) and the associated spectral gaps.
//
// All functions take the frequency by absolute value; for n < |k| the
// eigenvalue vanishes identically.

#include <vector>

namespace mfca {

// B(x; a, b) = ∫₀ˣ w^{a−1}(1−w)^{b−1} dw for positive integers a, b.
double incomplete_beta(double x, int a, int b);

// Σ_{ν=0}^{n−k} (−1)^ν C(n−k,ν) C(n+k,ν) B(h/2; ν+1, n−ν+1).
double lambda_analytic(int n, int k, double h);

// 2^{−(k+1)} ∫_{1−h}^{1} (1+z)^k P_{n−k}^{(0,2k)}(z) dz by Gauss–Legendre.
double lambda_quadrature(int n, int k, double h);

// Second-order small-h model h/2 − (n² + n − k²) h² / 8.
double lambda_taylor(int n, int k, double h);

// Closed forms for n = k, k+1, k+2.
double lambda_top(int k, double h);
double lambda_second(int k, double h);
double lambda_third(int k, double h);

// λ_k^(k)(h) − λ_{k+1}^(k)(h) in closed form
//   (2^{k+2} − (2−h)^{k+1}((k+1)h + 2)) / (2^{k+1}(k+2)).
double spectral_gap(int k, double h);

// λ_{k+1}^(k)(h) − λ_{k+2}^(k)(h), from the closed forms.
double second_gap(int k, double h);

// Maximizer of λ_{k+1}^(k) over (0, 2]: 1/(k+1).
double delta_k(int k);

struct EigenvalueEntry {
  int n = 0;
  double value = 0.0;
  int multiplicity = 0;  // 2n + 1
};

struct EigenvalueTable {
  int k = 0;
  double h = 0.0;
  std::vector<EigenvalueEntry> values;  // n = k, …, n_max
};

EigenvalueTable eigenvalue_table(int k, double h, int n_max);

// Gauss–Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule gauss_legendre(int count);

}  // namespace mfca
