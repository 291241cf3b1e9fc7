// SPDX-License-Identifier: Apache-2.0
#pragma once

// Radau IIA Butcher tableaux and the factorizations of A and A^{-1} that the
// stage solvers are built on:
//   * Crout LU of A^{-1} (unit upper factor), whose lower factor L defines the
//     real stage-parallel preconditioner,
//   * the real eigen-decomposition of L,
//   * the complex eigen-decomposition of A^{-1} used by the direct path.

#include "spirk/dense.hpp"

#include <complex>
#include <vector>

namespace spirk {

inline constexpr int kMaxStages = 9;

struct ButcherTableau
{
  int stages = 0;
  Matrix a;               // stages x stages
  std::vector<double> b;  // quadrature weights
  std::vector<double> c;  // collocation nodes, c.back() == 1
  Matrix a_inv;
};

struct TriangularFactors
{
  Matrix lower;  // L
  Matrix upper;  // U, unit diagonal
};

// L = basis * diag(lambdas) * basis_inv. The basis is unit lower triangular.
struct RealSpectralFactors
{
  std::vector<double> lambdas;
  Matrix basis;
  Matrix basis_inv;
};

// One independently solvable block of the diagonalized stage system: either a
// complex-conjugate eigenvalue pair (represented by the member with Im > 0)
// or a lone real eigenvalue.
struct SpectralBlock
{
  std::complex<double> lambda;
  int column = 0;           // column of `basis` holding the representative eigenvector
  int partner_column = -1;  // column of the conjugate eigenvector, -1 for a real eigenvalue

  bool is_real() const noexcept { return partner_column < 0; }
};

// A^{-1} = basis * diag(eigenvalues) * basis_inv in complex arithmetic.
// Conjugate pairs occupy adjacent columns (representative first); real
// eigenvalues come last.
struct ComplexSpectralFactors
{
  std::vector<SpectralBlock> blocks;
  std::vector<std::complex<double>> eigenvalues;  // per column of `basis`
  ComplexMatrix basis;
  ComplexMatrix basis_inv;
};

// Throws ConfigError for stage counts outside [1, kMaxStages].
ButcherTableau radau_iia(int stages);

// A = L U with U unit upper triangular. Throws FactorizationError on a zero pivot.
TriangularFactors crout_lu(const Matrix &a);

// Eigen-decomposition of a lower triangular matrix with distinct diagonal
// entries; eigenvectors are scaled so their first nonzero entry is 1.
// Throws SpectralError for (nearly) repeated diagonal entries.
RealSpectralFactors spectral_real(const Matrix &lower);

// Eigen-decomposition of a real diagonalizable matrix via Hessenberg reduction
// and shifted QR. Throws SpectralError if the iteration does not converge or
// the eigenvalues do not come in conjugate pairs.
ComplexSpectralFactors spectral_complex(const Matrix &a);

// Max-norm of S diag(lambda) S^{-1} - target; used by tests and the CLI export.
double reconstruction_error(const RealSpectralFactors &f, const Matrix &target);
double reconstruction_error(const ComplexSpectralFactors &f, const Matrix &target);

}  // namespace spirk
