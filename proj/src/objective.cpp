#include "qcl/objective.hpp"

#include <algorithm>
#include <cmath>

namespace qcl {

const char* to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::J1Gate:
      return "J1_gate";
    case ObjectiveKind::J2Gate:
      return "J2_gate";
    case ObjectiveKind::StateTransfer:
      return "state_transfer";
    case ObjectiveKind::Observable:
      return "observable";
  }
  return "unknown";
}

ObjectiveKind objective_kind_from_string(const std::string& name) {
  if (name == "J1_gate") return ObjectiveKind::J1Gate;
  if (name == "J2_gate") return ObjectiveKind::J2Gate;
  if (name == "state_transfer") return ObjectiveKind::StateTransfer;
  if (name == "observable") return ObjectiveKind::Observable;
  throw ConfigError("unknown objective kind: " + name);
}

int Objective::dim() const {
  switch (kind) {
    case ObjectiveKind::J1Gate:
    case ObjectiveKind::J2Gate:
      return static_cast<int>(target.rows());
    case ObjectiveKind::StateTransfer:
      return static_cast<int>(psi_initial.size());
    case ObjectiveKind::Observable:
      return static_cast<int>(rho0.rows());
  }
  return 0;
}

double Objective::kinematic_max() const {
  const double n = static_cast<double>(dim());
  switch (kind) {
    case ObjectiveKind::J1Gate:
      return n;
    case ObjectiveKind::J2Gate:
      return n * n;
    case ObjectiveKind::StateTransfer:
      return 1.0;
    case ObjectiveKind::Observable: {
      // max over U of Tr(O U ρ₀ U†) pairs the spectra in matching order.
      Eigen::SelfAdjointEigenSolver<Matrix> o(observable);
      Eigen::SelfAdjointEigenSolver<Matrix> r(rho0);
      return o.eigenvalues().dot(r.eigenvalues());
    }
  }
  return 0.0;
}

Objective Objective::gate_j1(UnitaryMatrix target) {
  Objective obj;
  obj.kind = ObjectiveKind::J1Gate;
  obj.target = std::move(target);
  return obj;
}

Objective Objective::gate_j2(UnitaryMatrix target) {
  Objective obj;
  obj.kind = ObjectiveKind::J2Gate;
  obj.target = std::move(target);
  return obj;
}

Objective Objective::state_transfer(Vector psi_initial, Vector psi_final) {
  Objective obj;
  obj.kind = ObjectiveKind::StateTransfer;
  obj.psi_initial = std::move(psi_initial);
  obj.psi_final = std::move(psi_final);
  return obj;
}

Objective Objective::expectation(Matrix rho0, Matrix observable) {
  Objective obj;
  obj.kind = ObjectiveKind::Observable;
  obj.rho0 = std::move(rho0);
  obj.observable = std::move(observable);
  return obj;
}

void check_objective(const Objective& objective, const Tolerances& tol) {
  switch (objective.kind) {
    case ObjectiveKind::J1Gate:
    case ObjectiveKind::J2Gate:
      if (!is_special_unitary(objective.target, tol.unitarity,
                              tol.special_det)) {
        throw InvalidInput("objective target is not special unitary");
      }
      break;
    case ObjectiveKind::StateTransfer: {
      if (objective.psi_initial.size() != objective.psi_final.size()) {
        throw DimensionMismatch("state vectors differ in dimension");
      }
      if (std::abs(objective.psi_initial.norm() - 1.0) > 1e-12 ||
          std::abs(objective.psi_final.norm() - 1.0) > 1e-12) {
        throw InvalidInput("state vectors must be unit normalized");
      }
      break;
    }
    case ObjectiveKind::Observable: {
      if (objective.rho0.rows() != objective.observable.rows()) {
        throw DimensionMismatch("rho0 and observable differ in dimension");
      }
      if ((objective.observable - objective.observable.adjoint()).norm() >
          1e-12 * std::max(1.0, objective.observable.norm())) {
        throw InvalidInput("observable must be Hermitian");
      }
      if (std::abs(objective.rho0.trace() - Complex(1.0, 0.0)) > 1e-10) {
        throw InvalidInput("rho0 must have unit trace");
      }
      Eigen::SelfAdjointEigenSolver<Matrix> es(objective.rho0);
      if (es.eigenvalues().minCoeff() < -1e-10) {
        throw InvalidInput("rho0 must be positive semidefinite");
      }
      break;
    }
  }
}

namespace {

void require_dim(const Objective& objective, const UnitaryMatrix& u) {
  if (objective.dim() != u.rows() || u.rows() != u.cols()) {
    throw DimensionMismatch("objective/unitary dimension mismatch");
  }
}

}  // namespace

double evaluate(const Objective& objective, const UnitaryMatrix& u) {
  require_dim(objective, u);
  switch (objective.kind) {
    case ObjectiveKind::J1Gate:
      return (objective.target.adjoint() * u).trace().real();
    case ObjectiveKind::J2Gate:
      return std::norm((objective.target.adjoint() * u).trace());
    case ObjectiveKind::StateTransfer:
      return std::norm(
          objective.psi_final.dot(u * objective.psi_initial));
    case ObjectiveKind::Observable:
      return (objective.observable * u * objective.rho0 * u.adjoint())
          .trace()
          .real();
  }
  return 0.0;
}

AlgebraElement riemannian_gradient(const Objective& objective,
                                   const UnitaryMatrix& u) {
  require_dim(objective, u);
  switch (objective.kind) {
    case ObjectiveKind::J1Gate:
      return project_su(u.adjoint() * objective.target);
    case ObjectiveKind::J2Gate: {
      const Complex overlap = (objective.target.adjoint() * u).trace();
      return project_su(2.0 * overlap * (u.adjoint() * objective.target));
    }
    case ObjectiveKind::StateTransfer: {
      const Complex amp = objective.psi_final.dot(u * objective.psi_initial);
      const Matrix outer = (u.adjoint() * objective.psi_final) *
                           objective.psi_initial.adjoint();
      return project_su(2.0 * amp * outer);
    }
    case ObjectiveKind::Observable: {
      const Matrix q = u.adjoint() * objective.observable * u;
      return commutator(q, objective.rho0);
    }
  }
  return AlgebraElement();
}

}  // namespace qcl
