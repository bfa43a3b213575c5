#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qcl/dynamics.hpp"
#include "qcl/io.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace qcl;

namespace {

const Complex kI(0.0, 1.0);

Matrix pauli(int which) {
  Matrix m(2, 2);
  switch (which) {
    case 0:
      m << 0, 1, 1, 0;
      break;
    case 1:
      m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
      break;
    default:
      m << 1, 0, 0, -1;
      break;
  }
  return m;
}

ControlSystem qubit_system(double drift_scale = 1.0, double coupling = 1.0) {
  ControlSystem system;
  system.dim = 2;
  system.drift = drift_scale * kI * pauli(2) / std::sqrt(2.0);
  system.generators = {coupling * kI * pauli(0) / std::sqrt(2.0)};
  return system;
}

}  // namespace

TEST_CASE("free evolution of a driftless system is the identity") {
  ControlSystem system = qubit_system();
  system.drift = Matrix::Zero(2, 2);
  const ControlField field = zero_field(1, 8, 4.0, 1.0);
  const Trajectory trajectory = propagate(system, field);
  CHECK((trajectory.final_op() - Matrix::Identity(2, 2)).norm() <= 1e-13);
}

TEST_CASE("single piece reproduces the closed-form exponential") {
  const ControlSystem system = qubit_system();
  ControlField field = zero_field(1, 1, 3.0, 2.0);
  field.coeffs(0, 0) = 0.8;
  const Trajectory trajectory = propagate(system, field);
  const Matrix expected =
      expm(system.drift + 0.8 * system.generators[0], 3.0);
  CHECK((trajectory.final_op() - expected).norm() <= 1e-12);
}

TEST_CASE("propagation matches a fine-step RK4 integration") {
  const ControlSystem system = random_system(4, 901, 1.0);
  const ControlField field = random_field(1, 100, 5.0, 1.0, 902);
  const Trajectory trajectory = propagate(system, field);
  // 1000 RK4 sub-steps per piece = 1e5 total at step T/1e5.
  const Matrix reference = oracles::propagate_rk4(system, field, 1000);
  CHECK((trajectory.final_op() - reference).norm() <= 1e-7);
}

TEST_CASE("boundary operators stay special unitary and consistent") {
  const ControlSystem system = random_system(3, 911, 1.2);
  const ControlField field = random_field(1, 32, 6.0, 1.5, 912);
  const Trajectory trajectory = propagate(system, field);
  CHECK(trajectory.boundary_ops.size() == 33);
  CHECK((trajectory.boundary_ops[0] - Matrix::Identity(3, 3)).norm() == 0.0);
  const double dt = field.piece_duration();
  for (int k = 0; k < field.pieces; ++k) {
    CHECK(is_special_unitary(trajectory.boundary_ops[k + 1]));
    const Matrix step = expm(piece_generator(system, field, k), dt);
    CHECK((trajectory.boundary_ops[k + 1] -
           step * trajectory.boundary_ops[k])
              .norm() <= 1e-10);
  }
}

TEST_CASE("doubling the piece count with repeated values is exact") {
  const ControlSystem system = random_system(3, 921, 1.0);
  const ControlField coarse = random_field(1, 16, 4.0, 1.0, 922);
  ControlField fine = zero_field(1, 32, 4.0, 1.0);
  for (int k = 0; k < 16; ++k) {
    fine.coeffs(0, 2 * k) = coarse.coeffs(0, k);
    fine.coeffs(0, 2 * k + 1) = coarse.coeffs(0, k);
  }
  const Matrix u_coarse = propagate(system, coarse).final_op();
  const Matrix u_fine = propagate(system, fine).final_op();
  CHECK((u_coarse - u_fine).norm() <= 1e-10);
}

TEST_CASE("jacobian of the fully actuated driftless zero field") {
  const int n = 3;
  const ControlSystem system = fully_actuated_system(n);
  const ControlField field = zero_field(n * n - 1, 1, 2.5, 1.0);
  const JacobianReport report = endpoint_jacobian(system, field);
  // U_t ≡ I: column (j, 0) is 2.5 × the j-th coordinate vector.
  CHECK((report.columns - 2.5 * RealMatrix::Identity(n * n - 1, n * n - 1))
            .norm() <= 1e-12);
  CHECK(report.rank == n * n - 1);
  CHECK(report.corank == 0);
}

TEST_CASE("single generator and piece has rank one") {
  const ControlSystem system = qubit_system();
  const ControlField field = zero_field(1, 1, 1.0, 1.0);
  const JacobianReport report = endpoint_jacobian(system, field);
  CHECK(report.columns.cols() == 1);
  CHECK(report.rank == 1);
  CHECK(report.corank == 2);
}

TEST_CASE("jacobian columns match finite-difference probing") {
  const double h = 1e-6;
  const BasisSet basis = standard_basis(2);
  for (int trial = 0; trial < 5; ++trial) {
    const ControlSystem system =
        random_system(2, oracles::mix(931, trial), 1.0);
    const ControlField field =
        random_field(1, 5, 3.0, 1.5, oracles::mix(932, trial));
    const JacobianReport report = endpoint_jacobian(system, field);
    for (int k = 0; k < field.pieces; ++k) {
      const Matrix fd = oracles::endpoint_column_fd(system, field, 0, k, h);
      const RealVector fd_coords = basis_coordinates(basis, project_su(fd));
      const RealVector analytic = report.columns.col(column_index(0, k, 5));
      CHECK((analytic - fd_coords).norm() <=
            1e-5 * std::max(1.0, analytic.norm()));
    }
  }
}

TEST_CASE("jacobian column norms never exceed the piece budget") {
  const ControlSystem system = random_system(3, 941, 1.3);
  const ControlField field = random_field(1, 7, 4.2, 1.0, 942);
  const JacobianReport report = endpoint_jacobian(system, field);
  const double budget =
      field.piece_duration() * system.generators[0].norm() + 1e-12;
  for (Eigen::Index c = 0; c < report.columns.cols(); ++c) {
    CHECK(report.columns.col(c).norm() <= budget);
  }
}

TEST_CASE("gradient vanishes at the kinematic maximum") {
  const ControlSystem system = qubit_system();
  const ControlField field = random_field(1, 8, 5.0, 2.0, 951);
  const Matrix u_final = propagate(system, field).final_op();
  const Objective objective = Objective::gate_j2(u_final);
  const RealMatrix gradient = objective_gradient(system, field, objective);
  CHECK(gradient.norm() <= 1e-9);
}

TEST_CASE("gradient matches finite differences across objectives") {
  const double h = 1e-6;
  int checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = trial % 2 == 0 ? 2 : 3;
    const int p = trial % 3 == 0 ? 16 : 4;
    const ControlSystem system =
        random_system(n, oracles::mix(961, trial), 1.0);
    const ControlField field =
        random_field(1, p, 3.0, 1.5, oracles::mix(962, trial), 0.6);
    Objective objective;
    switch (trial % 4) {
      case 0:
        objective = Objective::gate_j2(
            random_special_unitary(n, oracles::mix(963, trial)));
        break;
      case 1:
        objective = Objective::gate_j1(
            random_special_unitary(n, oracles::mix(964, trial)));
        break;
      case 2: {
        Vector psi0 = Vector::Zero(n);
        psi0(0) = 1.0;
        Vector psi1 =
            random_special_unitary(n, oracles::mix(965, trial)).col(0);
        objective = Objective::state_transfer(psi0, psi1);
        break;
      }
      default: {
        const UnitaryMatrix v =
            random_special_unitary(n, oracles::mix(966, trial));
        Vector psi0 = Vector::Zero(n);
        psi0(0) = 1.0;
        const Matrix rho0 = psi0 * psi0.adjoint();
        RealVector diag(n);
        for (int i = 0; i < n; ++i) {
          diag(i) = i;
        }
        const Matrix obs =
            v * diag.cast<Complex>().asDiagonal() * v.adjoint();
        objective = Objective::expectation(rho0, obs);
        break;
      }
    }
    const RealMatrix gradient = objective_gradient(system, field, objective);
    const double scale = std::max(gradient.cwiseAbs().maxCoeff(), 1e-6);
    for (int k = 0; k < p; ++k) {
      const double fd = oracles::objective_fd(system, field, objective, 0, k, h);
      CHECK(std::abs(gradient(0, k) - fd) <= 1e-6 * scale);
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("zero coupling gives a zero gradient") {
  ControlSystem system = qubit_system();
  system.generators = {Matrix::Zero(2, 2)};
  const ControlField field = random_field(1, 6, 2.0, 1.0, 971);
  const Objective objective =
      Objective::gate_j2(random_special_unitary(2, 972));
  CHECK(objective_gradient(system, field, objective).norm() == 0.0);
}

TEST_CASE("adjoint orbit sampling") {
  // Diagonal system: anything diagonal is preserved along the orbit.
  ControlSystem system;
  system.dim = 2;
  system.drift = kI * pauli(2);
  system.generators = {0.5 * kI * pauli(2)};
  const ControlField field = random_field(1, 4, 2.0, 1.0, 981);
  const Trajectory trajectory = propagate(system, field);
  const AlgebraElement x = kI * pauli(2) / std::sqrt(2.0);
  const auto samples = adjoint_orbit_samples(trajectory, x, 3);
  CHECK(samples.size() == 13);
  for (const auto& s : samples) {
    CHECK((s - x).norm() <= 1e-12);
  }

  // Generic system: first sample is X itself and the norm is conserved.
  const ControlSystem generic = random_system(3, 982, 1.0);
  const ControlField generic_field = random_field(1, 5, 3.0, 1.0, 983);
  const Trajectory generic_traj = propagate(generic, generic_field);
  const AlgebraElement y = random_element(3, 984, 1.0);
  const auto orbit = adjoint_orbit_samples(generic_traj, y, 4);
  CHECK((orbit.front() - y).norm() == 0.0);
  for (const auto& s : orbit) {
    CHECK(std::abs(inner(s, s) - inner(y, y)) <= 1e-10);
  }
}

TEST_CASE("orbit derivative obeys the adjoint equation") {
  const ControlSystem system = random_system(3, 991, 1.0);
  const ControlField field = random_field(1, 4, 2.0, 1.0, 992);
  const Trajectory trajectory = propagate(system, field);
  const AlgebraElement& b = system.generators[0];
  const int samples_per_piece = 512;
  const auto samples = adjoint_orbit_samples(trajectory, b, samples_per_piece);
  const double delta =
      field.piece_duration() / static_cast<double>(samples_per_piece);
  // Check interior points of each piece against Ad_{U_t}([b, H_k]).
  for (int k = 0; k < field.pieces; ++k) {
    const AlgebraElement h_k = piece_generator(system, field, k);
    const SpectralDecomposition sd = spectral(h_k);
    for (int s = 64; s + 64 < samples_per_piece; s += 128) {
      const int index = k * samples_per_piece + s;
      const Matrix fd =
          (samples[index + 1] - samples[index - 1]) / (2.0 * delta);
      const UnitaryMatrix u =
          expm(sd, delta * s) * trajectory.boundary_ops[k];
      const Matrix expected = adjoint_action(u, commutator(b, h_k));
      CHECK((fd - expected).norm() <= 1e-5 * std::max(1.0, expected.norm()));
    }
  }
}

TEST_CASE("control fields round-trip through JSON at full precision") {
  ControlField field = random_field(2, 9, 7.0, 2.0, 1001);
  field.coeffs(0, 0) = 1.0 / 3.0;
  field.coeffs(1, 8) = std::nextafter(2.0, 0.0);
  const Json j = to_json(field);
  const ControlField back = field_from_json(Json::parse(j.dump()));
  CHECK(back.total_time == field.total_time);
  CHECK(back.pieces == field.pieces);
  CHECK(back.kappa == field.kappa);
  CHECK((back.coeffs - field.coeffs).norm() == 0.0);
}

TEST_CASE("invalid inputs are rejected") {
  const ControlSystem system = qubit_system();
  ControlField field = zero_field(1, 4, 2.0, 1.0);
  field.coeffs(0, 2) = 1.5;  // beyond kappa
  CHECK_THROWS_AS(propagate(system, field), InvalidInput);

  ControlField mismatched = zero_field(2, 4, 2.0, 1.0);
  CHECK_THROWS_AS(propagate(system, mismatched), DimensionMismatch);

  ControlField bad_time = zero_field(1, 4, -1.0, 1.0);
  CHECK_THROWS_AS(propagate(system, bad_time), InvalidInput);
}
