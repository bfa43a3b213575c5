#include "qcl/algebra.hpp"

#include <cmath>
#include <random>

namespace qcl {

namespace {

void require_square(const Matrix& x, const char* who) {
  if (x.rows() != x.cols() || x.rows() < 1) {
    throw InvalidDimension(std::string(who) + ": matrix must be square n×n");
  }
}

void require_same_dim(const Matrix& x, const Matrix& y, const char* who) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw DimensionMismatch(std::string(who) + ": dimension mismatch (" +
                            std::to_string(x.rows()) + " vs " +
                            std::to_string(y.rows()) + ")");
  }
}

}  // namespace

bool is_anti_hermitian(const Matrix& x, double rel_tol) {
  const double scale = std::max(1.0, x.norm());
  return (x + x.adjoint()).norm() <= rel_tol * scale;
}

bool is_traceless(const Matrix& x, double rel_tol) {
  const double scale = std::max(1.0, x.norm());
  return std::abs(x.trace()) <= rel_tol * scale;
}

bool is_unitary(const Matrix& u, double tol) {
  const Matrix gram = u.adjoint() * u;
  return (gram - Matrix::Identity(u.rows(), u.cols())).norm() <= tol;
}

bool is_special_unitary(const Matrix& u, double unitary_tol, double det_tol) {
  return is_unitary(u, unitary_tol) &&
         std::abs(u.determinant() - Complex(1.0, 0.0)) <= det_tol;
}

void check_algebra_element(const Matrix& x, const Tolerances& tol) {
  require_square(x, "check_algebra_element");
  if (!is_anti_hermitian(x, tol.anti_hermitian)) {
    throw InvalidInput("algebra element is not anti-Hermitian");
  }
  if (!is_traceless(x, tol.trace)) {
    throw InvalidInput("algebra element is not traceless");
  }
}

AlgebraElement project_su(const Matrix& a) {
  require_square(a, "project_su");
  Matrix skew = 0.5 * (a - a.adjoint());
  const Complex tr = skew.trace() / static_cast<double>(a.rows());
  skew.diagonal().array() -= tr;
  return skew;
}

BasisSet standard_basis(int n) {
  if (n < 2) {
    throw InvalidDimension("standard_basis: need n >= 2, got " +
                           std::to_string(n));
  }
  BasisSet basis;
  basis.reserve(static_cast<std::size_t>(n) * n - 1);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  const Complex i_unit(0.0, 1.0);

  // i (E_jk + E_kj) / √2
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      Matrix b = Matrix::Zero(n, n);
      b(j, k) = i_unit * inv_sqrt2;
      b(k, j) = i_unit * inv_sqrt2;
      basis.push_back(std::move(b));
    }
  }
  // (E_jk − E_kj) / √2
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      Matrix b = Matrix::Zero(n, n);
      b(j, k) = Complex(inv_sqrt2, 0.0);
      b(k, j) = Complex(-inv_sqrt2, 0.0);
      basis.push_back(std::move(b));
    }
  }
  // i diag(1,…,1,−l,0,…) / √(l(l+1))
  for (int l = 1; l < n; ++l) {
    Matrix b = Matrix::Zero(n, n);
    const double norm = std::sqrt(static_cast<double>(l) * (l + 1));
    for (int m = 0; m < l; ++m) {
      b(m, m) = i_unit / norm;
    }
    b(l, l) = -i_unit * static_cast<double>(l) / norm;
    basis.push_back(std::move(b));
  }
  return basis;
}

double inner(const AlgebraElement& x, const AlgebraElement& y) {
  require_same_dim(x, y, "inner");
  const Complex value = (x.adjoint() * y).trace();
  const double scale = std::max(1.0, x.norm() * y.norm());
  if (std::abs(value.imag()) > 1e-12 * scale) {
    throw NumericalFailure("inner: non-real pairing, imaginary part " +
                           std::to_string(value.imag()));
  }
  return value.real();
}

AlgebraElement commutator(const AlgebraElement& x, const AlgebraElement& y) {
  require_same_dim(x, y, "commutator");
  return x * y - y * x;
}

AlgebraElement adjoint_action(const UnitaryMatrix& u, const AlgebraElement& x) {
  require_same_dim(u, x, "adjoint_action");
  return u.adjoint() * x * u;
}

RealVector basis_coordinates(const BasisSet& basis, const AlgebraElement& x) {
  RealVector coords(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) {
    coords(static_cast<Eigen::Index>(i)) = inner(basis[i], x);
  }
  return coords;
}

AlgebraElement from_basis_coordinates(const BasisSet& basis,
                                      const RealVector& coords) {
  if (basis.empty() || coords.size() != static_cast<Eigen::Index>(basis.size())) {
    throw DimensionMismatch("from_basis_coordinates: coordinate count " +
                            std::to_string(coords.size()) + " vs basis size " +
                            std::to_string(basis.size()));
  }
  Matrix x = Matrix::Zero(basis[0].rows(), basis[0].cols());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    x += coords(static_cast<Eigen::Index>(i)) * basis[i];
  }
  return x;
}

SpectralDecomposition spectral(const AlgebraElement& x) {
  require_square(x, "spectral");
  if (!x.allFinite()) {
    throw NumericalFailure("spectral: non-finite entries");
  }
  const Matrix hermitian = Complex(0.0, 1.0) * x;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("spectral: eigendecomposition failed");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

UnitaryMatrix expm(const SpectralDecomposition& sd, double dt) {
  const Eigen::Index n = sd.eigenvalues.size();
  Vector phases(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    phases(j) = std::polar(1.0, -dt * sd.eigenvalues(j));
  }
  return sd.eigenvectors * phases.asDiagonal() * sd.eigenvectors.adjoint();
}

UnitaryMatrix expm(const AlgebraElement& x, double dt) {
  if (!std::isfinite(dt)) {
    throw NumericalFailure("expm: non-finite time step");
  }
  return expm(spectral(x), dt);
}

Matrix conjugation_integral(const SpectralDecomposition& sd, const Matrix& y,
                            double delta) {
  const Eigen::Index n = sd.eigenvalues.size();
  if (y.rows() != n || y.cols() != n) {
    throw DimensionMismatch("conjugation_integral: dimension mismatch");
  }
  const Matrix& v = sd.eigenvectors;
  Matrix m = v.adjoint() * y * v;
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      // ∫_0^Δ e^{isδ} ds = Δ e^{iΔδ/2} sin(Δδ/2)/(Δδ/2), exact at δ = 0.
      const double d = sd.eigenvalues(a) - sd.eigenvalues(b);
      const double half = 0.5 * delta * d;
      const double sinc = (half == 0.0) ? 1.0 : std::sin(half) / half;
      m(a, b) *= delta * sinc * std::polar(1.0, half);
    }
  }
  return v * m * v.adjoint();
}

Matrix exp_frechet(const AlgebraElement& x, const AlgebraElement& d, double dt) {
  require_same_dim(x, d, "exp_frechet");
  const SpectralDecomposition sd = spectral(x);
  return expm(sd, dt) * conjugation_integral(sd, d, dt);
}

AlgebraElement random_element(int n, std::uint64_t seed, double norm_bound,
                              RescaleMode mode) {
  if (n < 2) {
    throw InvalidDimension("random_element: need n >= 2");
  }
  if (!(norm_bound > 0.0)) {
    throw InvalidInput("random_element: norm_bound must be positive");
  }
  const BasisSet basis = standard_basis(n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    RealVector coords(static_cast<Eigen::Index>(basis.size()));
    for (Eigen::Index i = 0; i < coords.size(); ++i) {
      coords(i) = gauss(rng);
    }
    const double norm = coords.norm();
    if (norm == 0.0) {
      continue;  // astronomically unlikely; resample
    }
    if (norm > norm_bound) {
      if (mode == RescaleMode::Reject) {
        continue;
      }
      coords *= norm_bound / norm;
    }
    return from_basis_coordinates(basis, coords);
  }
  // Rejection only plausibly exhausts attempts for tiny bounds; fall back to
  // a renormalized draw so the contract (a nonzero element) always holds.
  RealVector coords(static_cast<Eigen::Index>(basis.size()));
  for (Eigen::Index i = 0; i < coords.size(); ++i) {
    coords(i) = gauss(rng);
  }
  coords *= norm_bound / coords.norm();
  return from_basis_coordinates(basis, coords);
}

UnitaryMatrix random_special_unitary(int n, std::uint64_t seed) {
  if (n < 2) {
    throw InvalidDimension("random_special_unitary: need n >= 2");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix g(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      g(r, c) = Complex(gauss(rng), gauss(rng));
    }
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix the phase ambiguity of QR, then pull the determinant phase out.
  for (int c = 0; c < n; ++c) {
    const Complex d = r(c, c);
    q.col(c) *= (std::abs(d) > 0.0) ? d / std::abs(d) : Complex(1.0, 0.0);
  }
  const Complex det = q.determinant();
  q *= std::polar(1.0, -std::arg(det) / static_cast<double>(n));
  return q;
}

}  // namespace qcl
