#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qcl/algebra.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace qcl;

namespace {

Matrix pauli_x() {
  Matrix m(2, 2);
  m << Complex(0, 0), Complex(1, 0), Complex(1, 0), Complex(0, 0);
  return m;
}

Matrix pauli_y() {
  Matrix m(2, 2);
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << Complex(1, 0), Complex(0, 0), Complex(0, 0), Complex(-1, 0);
  return m;
}

const Complex kI(0.0, 1.0);

}  // namespace

TEST_CASE("standard basis has the right count and norms") {
  for (int n : {2, 3, 4, 5}) {
    const BasisSet basis = standard_basis(n);
    CHECK(basis.size() == static_cast<std::size_t>(n * n - 1));
    for (const auto& b : basis) {
      CHECK(is_anti_hermitian(b));
      CHECK(is_traceless(b));
      CHECK(inner(b, b) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  CHECK(standard_basis(4).size() == 15);
  CHECK_THROWS_AS(standard_basis(1), InvalidDimension);
}

TEST_CASE("standard basis Gram matrix is the identity") {
  for (int n : {2, 4}) {
    const BasisSet basis = standard_basis(n);
    for (std::size_t i = 0; i < basis.size(); ++i) {
      for (std::size_t j = 0; j < basis.size(); ++j) {
        const double expected = i == j ? 1.0 : 0.0;
        CHECK(std::abs(inner(basis[i], basis[j]) - expected) <= 1e-12);
      }
    }
  }
}

TEST_CASE("inner product basics") {
  const Matrix sz = kI * pauli_z() / std::sqrt(2.0);
  const Matrix sx = kI * pauli_x() / std::sqrt(2.0);
  CHECK(inner(sz, sx) == doctest::Approx(0.0));
  CHECK(inner(sz, sz) == doctest::Approx(sz.squaredNorm()).epsilon(1e-14));

  const AlgebraElement x = random_element(3, 11, 2.0);
  const AlgebraElement y = random_element(3, 12, 2.0);
  CHECK(inner(x, y) ==
        doctest::Approx(oracles::inner_direct(x, y)).epsilon(1e-12));
  CHECK(std::abs(inner(x, y) - inner(y, x)) <= 1e-12);

  // Bilinearity on random triples.
  const AlgebraElement z = random_element(3, 13, 2.0);
  const double lhs = inner(x, 0.7 * y + 1.3 * z);
  const double rhs = 0.7 * inner(x, y) + 1.3 * inner(x, z);
  CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));

  Matrix wrong(3, 3);
  CHECK_THROWS_AS(inner(x, random_element(2, 1, 1.0)), DimensionMismatch);
}

TEST_CASE("commutator identities") {
  const AlgebraElement x = random_element(4, 21, 1.0);
  CHECK(commutator(x, x).norm() <= 1e-14);

  // [iσx, iσy] = −2 iσz
  const Matrix lhs = commutator(kI * pauli_x(), kI * pauli_y());
  CHECK((lhs + 2.0 * kI * pauli_z()).norm() <= 1e-14);

  for (int seed = 0; seed < 5; ++seed) {
    const AlgebraElement a = random_element(3, oracles::mix(31, seed), 1.0);
    const AlgebraElement b = random_element(3, oracles::mix(32, seed), 1.0);
    const AlgebraElement c = random_element(3, oracles::mix(33, seed), 1.0);
    const Matrix jacobi = commutator(a, commutator(b, c)) +
                          commutator(b, commutator(c, a)) +
                          commutator(c, commutator(a, b));
    CHECK(jacobi.norm() <= 1e-12);
    CHECK(is_anti_hermitian(commutator(a, b)));
    CHECK(is_traceless(commutator(a, b)));
  }
}

TEST_CASE("adjoint action preserves the pairing") {
  const AlgebraElement x = random_element(3, 41, 1.0);
  const Matrix eye = Matrix::Identity(3, 3);
  CHECK((adjoint_action(eye, x) - x).norm() <= 1e-15);

  const UnitaryMatrix u = random_special_unitary(3, 42);
  const AlgebraElement y = random_element(3, 43, 1.0);
  CHECK(std::abs(inner(adjoint_action(u, x), adjoint_action(u, x)) -
                 inner(x, x)) <= 1e-10);
  CHECK(std::abs(inner(adjoint_action(u, x), adjoint_action(u, y)) -
                 inner(x, y)) <= 1e-10);
}

TEST_CASE("expm basics and group law") {
  const Matrix zero = Matrix::Zero(3, 3);
  CHECK((expm(zero, 1.7) - Matrix::Identity(3, 3)).norm() <= 1e-14);

  // exp(π·iσz) = −I
  const Matrix flip = expm(kI * pauli_z(), M_PI);
  CHECK((flip + Matrix::Identity(2, 2)).norm() <= 1e-12);

  const AlgebraElement x = random_element(4, 51, 1.5);
  const Matrix taylor = oracles::expm_taylor(x, 0.1);
  CHECK((expm(x, 0.1) - taylor).norm() <= 1e-12);

  // Same-generator composition.
  const Matrix composed = expm(x, 0.3) * expm(x, 0.9);
  CHECK((composed - expm(x, 1.2)).norm() <= 1e-10);

  const Matrix u = expm(x, 2.0);
  CHECK(is_special_unitary(u));
}

TEST_CASE("exp_frechet matches central differences") {
  CHECK(exp_frechet(random_element(3, 1, 1.0), Matrix::Zero(3, 3), 0.7).norm() <=
        1e-14);

  // Derivative of exp at zero is dt·D.
  const AlgebraElement d0 = random_element(3, 2, 1.0);
  CHECK((exp_frechet(Matrix::Zero(3, 3), d0, 0.9) - 0.9 * d0).norm() <= 1e-12);

  const double h = 1e-6;
  for (int n : {2, 3, 4}) {
    for (int seed = 0; seed < 100; ++seed) {
      const AlgebraElement x =
          random_element(n, oracles::mix(61 + n, seed), 1.5);
      const AlgebraElement d =
          random_element(n, oracles::mix(71 + n, seed), 1.5);
      const double dt = 0.1 + 0.05 * (seed % 7);
      const Matrix analytic = exp_frechet(x, d, dt);
      const Matrix fd =
          (oracles::expm_taylor(x + h * d, dt, 80) -
           oracles::expm_taylor(x - h * d, dt, 80)) /
          (2.0 * h);
      CHECK((analytic - fd).norm() <=
            1e-6 * std::max(1.0, analytic.norm()));
    }
  }
}

TEST_CASE("random elements are deterministic and valid") {
  const AlgebraElement a = random_element(4, 123, 1.0);
  const AlgebraElement b = random_element(4, 123, 1.0);
  CHECK((a - b).norm() == 0.0);  // bit-for-bit

  for (int seed = 0; seed < 1000; ++seed) {
    const AlgebraElement x = random_element(4, static_cast<std::uint64_t>(seed),
                                            1.0);
    CHECK(is_anti_hermitian(x));
    CHECK(is_traceless(x));
    CHECK(x.norm() <= 1.0 + 1e-12);
    CHECK(x.norm() > 0.0);
  }
}

TEST_CASE("random coefficients look standard normal before rescaling") {
  const BasisSet basis = standard_basis(2);
  double sum = 0.0, sum_sq = 0.0;
  int count = 0;
  for (int seed = 0; seed < 10000; ++seed) {
    // Large bound: no rescaling, raw Gaussian coefficients.
    const AlgebraElement x =
        random_element(2, static_cast<std::uint64_t>(seed), 1e9);
    for (const auto& b : basis) {
      const double c = inner(b, x);
      sum += c;
      sum_sq += c * c;
      ++count;
    }
  }
  const double mean = sum / count;
  const double variance = sum_sq / count - mean * mean;
  CHECK(std::abs(mean) <= 0.05);
  CHECK(variance == doctest::Approx(1.0).epsilon(0.10));
}

TEST_CASE("random special unitaries satisfy the group invariants") {
  for (int seed = 0; seed < 50; ++seed) {
    const UnitaryMatrix u =
        random_special_unitary(3, static_cast<std::uint64_t>(seed));
    CHECK(is_special_unitary(u));
  }
}

TEST_CASE("basis coordinates round-trip") {
  const BasisSet basis = standard_basis(3);
  const AlgebraElement x = random_element(3, 7, 2.0);
  const RealVector coords = basis_coordinates(basis, x);
  CHECK((from_basis_coordinates(basis, coords) - x).norm() <= 1e-12);
}

TEST_CASE("operation outputs satisfy the element invariants") {
  for (int seed = 0; seed < 20; ++seed) {
    const AlgebraElement x = random_element(3, oracles::mix(81, seed), 1.0);
    const AlgebraElement y = random_element(3, oracles::mix(82, seed), 1.0);
    const UnitaryMatrix u = random_special_unitary(3, oracles::mix(83, seed));
    check_algebra_element(commutator(x, y));
    check_algebra_element(adjoint_action(u, x));
    check_algebra_element(project_su(Matrix::Random(3, 3)));
  }
}
