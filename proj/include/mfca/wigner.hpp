#pragma once

// Jacobi polynomials and Wigner d/D matrices.
//
// Index convention (used everywhere in the project): the entry (m, n) of a
// weight-ℓ matrix, m, n ∈ {−ℓ, …, ℓ}, lives at array position
// (wigner_index(ℓ, m), wigner_index(ℓ, n)) = (m + ℓ, n + ℓ).

#include <complex>

#include <Eigen/Dense>

#include "mfca/so3.hpp"

namespace mfca {

inline constexpr int kMaxWignerWeight = 64;

constexpr int wigner_index(int ell, int m) { return m + ell; }

// P_n^{(a,b)}(x) by the three-term recurrence.
double jacobi_poly(int n, int a, int b, double x);

// d^ℓ_{mn}(θ) via the Jacobi form
//   d^ℓ_{mn}(θ) = sqrt[(ℓ−m)!(ℓ+m)! / ((ℓ−n)!(ℓ+n)!)]
//                 · sin(θ/2)^{m−n} cos(θ/2)^{m+n} P_{ℓ−m}^{(m−n, m+n)}(cos θ)
// for m ≥ |n|, extended to all (m, n) by d_{mn} = (−1)^{m−n} d_{nm} = d_{−n,−m}.
double wigner_d(int ell, int m, int n, double theta);

// The full real (2ℓ+1)×(2ℓ+1) d-matrix.
Eigen::MatrixXd wigner_d_matrix(int ell, double theta);

// D^ℓ_{mn}(x) = e^{−ιmφ} d^ℓ_{mn}(ϑ) e^{−ιnψ} with (φ, ϑ, ψ) = to_euler(x).
std::complex<double> wigner_D(int ell, int m, int n, const Rotation& x);

struct WignerDMatrix {
  int ell = 0;
  Eigen::MatrixXcd entries;

  std::complex<double> at(int m, int n) const {
    return entries(wigner_index(ell, m), wigner_index(ell, n));
  }
};

WignerDMatrix wigner_D_matrix(int ell, const Rotation& x);

// D^k_{·,−k}(x): the column of D^k with n = −k, as a unit vector in C^{2k+1}.
struct ExtrinsicColumn {
  int k = 0;
  Eigen::VectorXcd values;
};

ExtrinsicColumn extrinsic_column(int k, const Rotation& x);

}  // namespace mfca
