#pragma once

#include "qcl/landscape.hpp"

namespace qcl {

// A unit direction B together with the residuals of the two consistency
// conditions a singular control must satisfy at t = 0.
struct SingularSeed {
  AlgebraElement direction;
  double r0 = 0.0;  // inner(b, B)
  double r1 = 0.0;  // inner([b, a], B)
};

// Normalizes raw (optionally after projecting it onto the orthogonal
// complement of span{b, [b,a]}, which makes r0 = r1 = 0 up to roundoff).
SingularSeed make_singular_seed(const ControlSystem& system,
                                const AlgebraElement& raw, bool project = true);

struct SingularControl {
  std::vector<double> samples;          // E on each integration step
  Trajectory trajectory;                // steps-piece trajectory
  std::vector<double> invariant_trace;  // inner(U_t† b U_t, B) per step start
  double max_invariant = 0.0;
  double min_denominator = 0.0;
};

// Self-consistent forward integration of the implicit singular-control
// formula: at each step E is the ratio of adjoint-orbit pairings of the
// nested commutators [a,[b,a]] and [b,[b,a]] against B. Aborts with
// DegenerateDenominator when the ratio loses meaning.
SingularControl synthesize_singular_control(const ControlSystem& system,
                                            const AlgebraElement& direction,
                                            double total_time, int steps,
                                            double denom_tol = 1e-6);

// Piece-averaged resampling of a finely sampled control onto p pieces.
ControlField resample_to_field(const std::vector<double>& samples,
                               double total_time, int pieces, double kappa);

struct SearchOptions {
  int restarts = 10;
  int iters = 60;
  double sigma = 1e-2;  // SPSA perturbation scale
  double eta0 = 0.2;    // initial step, decaying as eta0/(1 + k/tau)
  double tau = 20.0;
  int synth_steps = 1000;
  int max_seed_attempts = 100;  // feasible-B draws per restart
  bool project_seed = true;
  double convergence_slack = 1e-6;  // declare only when f ≥ (1−slack)·‖ξ‖
  double verify_grad_tol = 1e-8;
};

struct RestartRecord {
  std::uint64_t seed = 0;
  int iterations = 0;
  bool feasible = false;  // a bound-respecting B was found
  int rejections = 0;     // κ-bound or degenerate-denominator draws discarded
  double best_value = 0.0;
  double xi_norm = 0.0;
  double final_grad_norm = 0.0;
  int final_corank = 0;
  bool converged = false;
  bool verified = false;        // passed the independent gate
  bool false_positive = false;  // converged but failed verification
  AlgebraElement direction;
  std::vector<double> history;  // objective value per iteration
};

struct SearchRecord {
  std::uint64_t seed = 0;
  std::vector<RestartRecord> restarts;
  int total_rejections = 0;
  double best_value = 0.0;
  bool any_converged = false;
  bool any_verified = false;
};

// Stochastic ascent over unit directions B maximizing inner(B, ξ) at the end
// point of the synthesized control, resampled onto p pieces; B whose control
// violates |E| ≤ κ are rejected. Each restart is independently verified
// (gradient norm and corank at the synthesized control). Throws AllRejected
// when no restart finds a feasible direction.
SearchRecord singular_critical_search(const ControlSystem& system,
                                      const Objective& objective,
                                      double total_time, int pieces,
                                      double kappa,
                                      const SearchOptions& options,
                                      std::uint64_t seed);

struct ScanPoint {
  double value = 0.0;  // the fixed coefficient K
  int corank = 0;
  double residual = 0.0;
  bool kinematic = false;  // translated gradient vanished; residual undefined
};

// Holds a_{j_fix,k_fix} at each K and reports rank data of the restricted
// end-point map (the fixed column removed). Residuals need an objective.
std::vector<ScanPoint> fix_parameter_scan(const ControlSystem& system,
                                          const ControlField& field, int j_fix,
                                          int k_fix,
                                          const std::vector<double>& values,
                                          const Objective* objective = nullptr,
                                          const Tolerances& tol = {});

struct CascadeFix {
  int generator = 0;
  int piece = 0;
  double value = 0.0;
};

struct CascadeStep {
  CascadeFix fix;
  int corank = 0;
  double residual = 0.0;
  bool kinematic = false;
  int larc_dim = 0;  // closure of drift + generators still carrying free pieces
  bool transversality_failed = false;
};

struct CascadeReport {
  std::vector<CascadeStep> steps;
  bool stopped_early = false;
};

// Applies fixes in order, re-examining the restricted map after each; stops
// early when transversality fails at a non-kinematic point.
CascadeReport restriction_cascade(const ControlSystem& system,
                                  const ControlField& field,
                                  const std::vector<CascadeFix>& fixes,
                                  const Objective* objective = nullptr,
                                  const Tolerances& tol = {});

}  // namespace qcl
