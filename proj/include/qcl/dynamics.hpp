#pragma once

#include "qcl/objective.hpp"

namespace qcl {

// Piecewise-constant control coefficients a_{j,k} over p equal pieces of
// [0, T], piece k covering [Tk/p, T(k+1)/p). Magnitudes are bounded by kappa.
struct ControlField {
  double total_time = 0.0;
  int pieces = 0;
  double kappa = 0.0;
  RealMatrix coeffs;  // num_generators × pieces

  int num_generators() const { return static_cast<int>(coeffs.rows()); }
  double piece_duration() const { return total_time / pieces; }
};

void check_field(const ControlField& field);

ControlField zero_field(int num_generators, int pieces, double total_time,
                        double kappa);
// Coefficients uniform in [−scale·κ, scale·κ], deterministic in the seed.
ControlField random_field(int num_generators, int pieces, double total_time,
                          double kappa, std::uint64_t seed, double scale = 1.0);

// Drift element plus control generators, all in su(n).
struct ControlSystem {
  int dim = 0;
  AlgebraElement drift;
  std::vector<AlgebraElement> generators;
};

void check_system(const ControlSystem& system, const Tolerances& tol = {});

// Random drift/generator pair(s) with Frobenius norms bounded by norm_bound.
ControlSystem random_system(int n, std::uint64_t seed, double norm_bound,
                            int num_generators = 1);
// All n²−1 basis directions independently actuated; optional drift.
ControlSystem fully_actuated_system(int n);
ControlSystem fully_actuated_system(int n, AlgebraElement drift);

// Generator of motion on piece k: drift + Σ_j a_{j,k} b_j.
AlgebraElement piece_generator(const ControlSystem& system,
                               const ControlField& field, int piece);

// Propagators at piece boundaries; boundary_ops[0] = I, boundary_ops[p] = U_T.
struct Trajectory {
  ControlSystem system;
  ControlField field;
  std::vector<UnitaryMatrix> boundary_ops;

  const UnitaryMatrix& final_op() const { return boundary_ops.back(); }
};

Trajectory propagate(const ControlSystem& system, const ControlField& field);

// Column layout of the end-point Jacobian: generator j, piece k ↦ j·p + k,
// matching the row-major flattening of ControlField::coeffs.
inline int column_index(int generator, int piece, int pieces) {
  return generator * pieces + piece;
}

// Left-translated derivative of the end-point map over the coefficient grid.
// Column (j,k) holds basis coordinates of ∫_{I_k} U_t† b_j U_t dt, evaluated
// in closed form piece by piece.
struct JacobianReport {
  int dim = 0;                 // n
  int num_generators = 0;
  int pieces = 0;
  RealMatrix columns;          // (n²−1) × (num_generators·pieces)
  RealVector singular_values;  // descending
  double rank_threshold = 0.0;
  int rank = 0;
  int corank = 0;
};

JacobianReport endpoint_jacobian(const ControlSystem& system,
                                 const ControlField& field,
                                 const Tolerances& tol = {});

// Jacobian of the restricted map with the listed columns removed (fixed
// parameters are no longer variables). Pairs are (generator, piece).
JacobianReport restricted_jacobian(const ControlSystem& system,
                                   const ControlField& field,
                                   const std::vector<std::pair<int, int>>& fixed,
                                   const Tolerances& tol = {});

// Exact gradient of J∘V_T over the coefficients, shaped like field.coeffs.
RealMatrix objective_gradient(const ControlSystem& system,
                              const ControlField& field,
                              const Objective& objective);
// Variant reusing a precomputed Jacobian and translated gradient.
RealMatrix objective_gradient(const JacobianReport& report,
                              const AlgebraElement& xi, const BasisSet& basis);

// U(t)† X U(t) on a uniform grid with samples_per_piece points per piece,
// plus the final time. Interior values use the piece eigenbasis exactly.
std::vector<AlgebraElement> adjoint_orbit_samples(const Trajectory& trajectory,
                                                  const AlgebraElement& x,
                                                  int samples_per_piece);

}  // namespace qcl
