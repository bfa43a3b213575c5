#pragma once

#include "qcl/dynamics.hpp"

namespace qcl {

// Count of singular values above rank_tol·σ_max; corank is the deficiency
// against dim su(n) = n²−1. rank_tol ≤ 0 selects the report's own threshold.
int numerical_rank(const RealVector& singular_values, double threshold);
int corank(const JacobianReport& report, double rank_tol = -1.0);

struct TransversalityResult {
  bool transverse = false;
  double residual = 0.0;  // ‖projection of ξ onto col span‖ / ‖ξ‖
};

// Whether some admissible variation moves the end point along xi: projects
// xi onto the column span of the report (via singular vectors above the rank
// threshold). Throws KinematicCritical when ‖xi‖ = 0.
TransversalityResult is_transverse_to_level_set(const JacobianReport& report,
                                                const AlgebraElement& xi,
                                                double tol = 1e-6);

// Dimension of the Lie algebra generated by {drift} ∪ generators, by
// commutator closure with incremental orthogonalization. Controllable iff
// the result is n²−1.
int larc_dimension(const ControlSystem& system, double growth_tol = 1e-10);

struct SingularityMargin {
  bool safe = false;
  double margin = 0.0;  // 2π − dt·(λ_max − λ_min)
};

// Appendix-style sufficient condition for a piece exponential to be free of
// derivative singularities: the spectral spread of the piece generator times
// its duration stays below 2π.
SingularityMargin exp_singularity_margin(const AlgebraElement& h_piece,
                                         double dt);

// Rank of the end-point derivative of t ↦ U_t ψ₀ seen in projective space:
// Jacobian columns pushed onto the state and projected off the real span of
// {ψ_T, iψ_T}. Full rank is 2n−2.
int state_map_rank(const ControlSystem& system, const ControlField& field,
                   const Vector& psi0, const Tolerances& tol = {});

}  // namespace qcl
