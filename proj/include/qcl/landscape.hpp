#pragma once

#include "qcl/singularity.hpp"

namespace qcl {

struct AscentOptions {
  int max_iters = 2000;
  double step0 = 1.0;
  double backtrack = 0.5;   // step shrink factor
  double armijo_c = 1e-4;   // sufficient-increase coefficient
  int max_backtracks = 40;
  double grad_tol = 1e-9;   // terminate when ‖gradient‖_F falls below
  double value_tol = 1e-4;  // terminate when 1 − value/kinematic_max falls below
  double first_step_cap = 0.1;  // ×κ cap on the first proposed coefficient change
  std::uint64_t seed = 0;       // recorded for reproducibility
};

enum class Termination { Converged, MaxIters, Stalled };
const char* to_string(Termination reason);

struct RunRecord {
  std::uint64_t seed = 0;
  int iterations = 0;
  std::vector<double> objective_trace;  // value after each accepted step
  ControlField final_field;
  double final_value = 0.0;
  double final_grad_norm = 0.0;
  Termination termination = Termination::MaxIters;
  std::string classification;  // filled by callers that also classify
  AscentOptions options;       // step-size policy snapshot
};

// Backtracking (Armijo) gradient ascent over the control coefficients with a
// box clip to [−κ, κ]. The objective trace is non-decreasing.
RunRecord gradient_ascent(const ControlSystem& system,
                          const ControlField& field0,
                          const Objective& objective,
                          const AscentOptions& options = {});

// Symmetric matrix of second derivatives of J∘V_T over the flattened
// coefficients (index j·p + k), by central differences of the exact gradient
// with step h_rel·κ.
RealMatrix hessian(const ControlSystem& system, const ControlField& field,
                   const Objective& objective, double h_rel = 1e-4);

enum class CriticalTag {
  Regular,
  KinematicCritical,
  SingularCritical,
  SecondOrderCritical,
  GlobalOptimum,
};
const char* to_string(CriticalTag tag);

// Classifies the control against the objective. Trap candidates are exactly
// the SecondOrderCritical results (GlobalOptimum short-circuits them).
CriticalTag classify_critical(const ControlSystem& system,
                              const ControlField& field,
                              const Objective& objective,
                              const JacobianReport& report,
                              const Tolerances& tol = {});

}  // namespace qcl
