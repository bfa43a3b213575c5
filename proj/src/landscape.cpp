#include "qcl/landscape.hpp"

#include <algorithm>
#include <cmath>

namespace qcl {

const char* to_string(Termination reason) {
  switch (reason) {
    case Termination::Converged:
      return "converged";
    case Termination::MaxIters:
      return "max_iters";
    case Termination::Stalled:
      return "stalled";
  }
  return "unknown";
}

const char* to_string(CriticalTag tag) {
  switch (tag) {
    case CriticalTag::Regular:
      return "regular";
    case CriticalTag::KinematicCritical:
      return "kinematic_critical";
    case CriticalTag::SingularCritical:
      return "singular_critical";
    case CriticalTag::SecondOrderCritical:
      return "second_order_critical";
    case CriticalTag::GlobalOptimum:
      return "global_optimum";
  }
  return "unknown";
}

namespace {

RealMatrix clip_coeffs(RealMatrix coeffs, double kappa) {
  return coeffs.cwiseMax(-kappa).cwiseMin(kappa);
}

double evaluate_field(const ControlSystem& system, const ControlField& field,
                      const Objective& objective) {
  return evaluate(objective, propagate(system, field).final_op());
}

}  // namespace

RunRecord gradient_ascent(const ControlSystem& system,
                          const ControlField& field0,
                          const Objective& objective,
                          const AscentOptions& options) {
  check_field(field0);
  RunRecord record;
  record.seed = options.seed;
  record.options = options;

  ControlField field = field0;
  const double kappa = field.kappa;
  const double max_value = objective.kinematic_max();
  const BasisSet basis = standard_basis(system.dim);

  double value = evaluate_field(system, field, objective);
  record.objective_trace.push_back(value);
  double step = options.step0;
  bool first_step = true;
  record.termination = Termination::MaxIters;

  for (int iter = 0; iter < options.max_iters; ++iter) {
    const JacobianReport report = endpoint_jacobian(system, field);
    const Trajectory trajectory = propagate(system, field);
    const AlgebraElement xi =
        riemannian_gradient(objective, trajectory.final_op());
    const RealMatrix gradient = objective_gradient(report, xi, basis);
    const double grad_norm = gradient.norm();
    record.final_grad_norm = grad_norm;
    record.iterations = iter;

    if (grad_norm <= options.grad_tol ||
        value >= max_value * (1.0 - options.value_tol)) {
      record.termination = Termination::Converged;
      break;
    }

    if (first_step) {
      const double largest = gradient.cwiseAbs().maxCoeff();
      if (largest > 0.0) {
        step = std::min(step, options.first_step_cap * kappa / largest);
      }
      first_step = false;
    }

    bool accepted = false;
    for (int back = 0; back < options.max_backtracks; ++back) {
      ControlField candidate = field;
      candidate.coeffs = clip_coeffs(field.coeffs + step * gradient, kappa);
      const double predicted =
          (gradient.array() * (candidate.coeffs - field.coeffs).array()).sum();
      if (predicted <= 0.0) {
        step *= options.backtrack;
        continue;
      }
      const double candidate_value =
          evaluate_field(system, candidate, objective);
      if (candidate_value >= value + options.armijo_c * predicted) {
        field = std::move(candidate);
        value = candidate_value;
        record.objective_trace.push_back(value);
        accepted = true;
        step *= 2.0;  // let the next trial step grow back
        break;
      }
      step *= options.backtrack;
    }
    if (!accepted) {
      record.termination = Termination::Stalled;
      record.iterations = iter + 1;
      break;
    }
    record.iterations = iter + 1;
  }

  record.final_field = field;
  record.final_value = value;
  if (record.termination != Termination::Stalled &&
      record.iterations >= options.max_iters) {
    record.termination = Termination::MaxIters;
  }
  return record;
}

RealMatrix hessian(const ControlSystem& system, const ControlField& field,
                   const Objective& objective, double h_rel) {
  check_field(field);
  const int p = field.pieces;
  const int num_gen = field.num_generators();
  const int dim = num_gen * p;
  const double h = h_rel * field.kappa;
  RealMatrix result(dim, dim);

  ControlField probe = field;
  for (int j = 0; j < num_gen; ++j) {
    for (int k = 0; k < p; ++k) {
      const int col = column_index(j, k, p);
      const double base = field.coeffs(j, k);
      probe.coeffs(j, k) = base + h;
      const RealMatrix plus = objective_gradient(system, probe, objective);
      probe.coeffs(j, k) = base - h;
      const RealMatrix minus = objective_gradient(system, probe, objective);
      probe.coeffs(j, k) = base;
      const RealMatrix derivative = (plus - minus) / (2.0 * h);
      for (int jj = 0; jj < num_gen; ++jj) {
        for (int kk = 0; kk < p; ++kk) {
          result(column_index(jj, kk, p), col) = derivative(jj, kk);
        }
      }
    }
  }
  return 0.5 * (result + result.transpose());
}

CriticalTag classify_critical(const ControlSystem& system,
                              const ControlField& field,
                              const Objective& objective,
                              const JacobianReport& report,
                              const Tolerances& tol) {
  const Trajectory trajectory = propagate(system, field);
  const double value = evaluate(objective, trajectory.final_op());
  const double max_value = objective.kinematic_max();
  if (value >= max_value * (1.0 - tol.value_gap)) {
    return CriticalTag::GlobalOptimum;
  }

  const AlgebraElement xi =
      riemannian_gradient(objective, trajectory.final_op());
  const BasisSet basis = standard_basis(system.dim);
  const RealMatrix gradient = objective_gradient(report, xi, basis);
  const double grad_threshold =
      tol.grad_critical * field.kappa * std::sqrt(field.pieces);
  if (gradient.norm() > grad_threshold) {
    return CriticalTag::Regular;
  }

  const double xi_threshold = tol.grad_critical * std::max(1.0, max_value);
  if (xi.norm() <= xi_threshold) {
    return CriticalTag::KinematicCritical;
  }
  if (report.corank <= 0) {
    // Gradient under threshold but the Jacobian spans everything: a marginal
    // regular point, not a singular one.
    return CriticalTag::Regular;
  }

  const RealMatrix h = hessian(system, field, objective);
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(h);
  const double scale = std::max(1.0, h.norm());
  const bool negative_semidefinite =
      es.eigenvalues().maxCoeff() <= tol.hessian_nsd * scale;
  // A vanishing Hessian carries no second-order evidence; keep the tag at
  // singular_critical for fully decoupled directions.
  const bool vanishing = h.norm() <= tol.hessian_nsd;
  if (negative_semidefinite && !vanishing) {
    return CriticalTag::SecondOrderCritical;
  }
  return CriticalTag::SingularCritical;
}

}  // namespace qcl
