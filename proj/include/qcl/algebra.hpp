#pragma once

#include "qcl/types.hpp"

namespace qcl {

// --- validity predicates ---------------------------------------------------

bool is_anti_hermitian(const Matrix& x, double rel_tol = 1e-12);
bool is_traceless(const Matrix& x, double rel_tol = 1e-12);
bool is_unitary(const Matrix& u, double tol = 1e-10);
bool is_special_unitary(const Matrix& u, double unitary_tol = 1e-10,
                        double det_tol = 1e-9);

// Throws InvalidInput if x is not a traceless anti-Hermitian square matrix.
void check_algebra_element(const Matrix& x, const Tolerances& tol = {});

// Anti-Hermitian traceless part of an arbitrary square matrix.
AlgebraElement project_su(const Matrix& a);

// --- basis and inner product -----------------------------------------------

// Generalized Gell-Mann family in anti-Hermitian form, orthonormal under
// inner(). Ordering convention (stable): i-symmetric pairs in lexicographic
// (j,k) order, then real antisymmetric pairs, then i-diagonal generators.
BasisSet standard_basis(int n);

// Re Tr(X†Y). Real by construction on anti-Hermitian arguments; a residual
// imaginary part beyond roundoff signals corrupted inputs.
double inner(const AlgebraElement& x, const AlgebraElement& y);

AlgebraElement commutator(const AlgebraElement& x, const AlgebraElement& y);

// U†XU, the trajectory-frame translation used throughout.
AlgebraElement adjoint_action(const UnitaryMatrix& u, const AlgebraElement& x);

// Coordinates of x over an orthonormal basis, and the inverse.
RealVector basis_coordinates(const BasisSet& basis, const AlgebraElement& x);
AlgebraElement from_basis_coordinates(const BasisSet& basis,
                                      const RealVector& coords);

// --- exponentials ------------------------------------------------------------

// Eigendecomposition of the Hermitian matrix iX, so X = −i V Λ V†.
struct SpectralDecomposition {
  RealVector eigenvalues;  // of iX, ascending
  Matrix eigenvectors;
};
SpectralDecomposition spectral(const AlgebraElement& x);

// exp(dt·X) with exactly exponentiated phases.
UnitaryMatrix expm(const AlgebraElement& x, double dt = 1.0);
UnitaryMatrix expm(const SpectralDecomposition& sd, double dt = 1.0);

// ∫_0^delta exp(−sX) Y exp(sX) ds in closed form (divided-difference kernel
// in the eigenbasis of iX). The workhorse behind exact derivatives.
Matrix conjugation_integral(const SpectralDecomposition& sd, const Matrix& y,
                            double delta);

// Directional derivative d/dε exp(dt(X+εD)) at ε = 0.
Matrix exp_frechet(const AlgebraElement& x, const AlgebraElement& d, double dt);

// --- random generation -------------------------------------------------------

enum class RescaleMode { Renormalize, Reject };

// Gaussian coefficients over standard_basis(n), deterministic in the seed,
// scaled so the Frobenius norm does not exceed norm_bound.
AlgebraElement random_element(int n, std::uint64_t seed, double norm_bound,
                              RescaleMode mode = RescaleMode::Renormalize);

// Haar-like special unitary (QR of a complex Ginibre matrix, phases fixed,
// determinant normalized).
UnitaryMatrix random_special_unitary(int n, std::uint64_t seed);

}  // namespace qcl
