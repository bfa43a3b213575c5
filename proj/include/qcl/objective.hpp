#pragma once

#include "qcl/algebra.hpp"

namespace qcl {

enum class ObjectiveKind { J1Gate, J2Gate, StateTransfer, Observable };

const char* to_string(ObjectiveKind kind);
ObjectiveKind objective_kind_from_string(const std::string& name);

// An objective on SU(n). Gate kinds carry a target unitary; state transfer a
// pair of unit vectors; observable an initial density matrix and a Hermitian
// operator.
struct Objective {
  ObjectiveKind kind = ObjectiveKind::J2Gate;
  UnitaryMatrix target;
  Vector psi_initial;
  Vector psi_final;
  Matrix rho0;
  Matrix observable;

  int dim() const;
  // Largest value attainable on SU(n): n for the real-trace gate overlap,
  // n² for its phase-invariant square, 1 for state transfer, and the sorted
  // eigenvalue pairing of (observable, rho0) for expectations.
  double kinematic_max() const;

  static Objective gate_j1(UnitaryMatrix target);
  static Objective gate_j2(UnitaryMatrix target);
  static Objective state_transfer(Vector psi_initial, Vector psi_final);
  static Objective expectation(Matrix rho0, Matrix observable);
};

void check_objective(const Objective& objective, const Tolerances& tol = {});

double evaluate(const Objective& objective, const UnitaryMatrix& u);

// Translated gradient ξ = proj_su(U† ∇J|_U): the unique su(n) element with
// d/dh J(U exp(hδ))|_0 = inner(ξ, δ) for every direction δ.
AlgebraElement riemannian_gradient(const Objective& objective,
                                   const UnitaryMatrix& u);

}  // namespace qcl
