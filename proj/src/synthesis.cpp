#include "qcl/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace qcl {

SingularSeed make_singular_seed(const ControlSystem& system,
                                const AlgebraElement& raw, bool project) {
  check_system(system);
  if (system.generators.size() != 1) {
    throw InvalidInput("singular seeds are defined for single-generator systems");
  }
  const AlgebraElement& b = system.generators[0];
  const AlgebraElement bracket = commutator(b, system.drift);

  AlgebraElement direction = raw;
  if (project) {
    // Gram-Schmidt frame for span{b, [b,a]}, then remove those components.
    std::vector<AlgebraElement> frame;
    for (const AlgebraElement* v : {&b, &bracket}) {
      AlgebraElement w = *v;
      for (const auto& q : frame) {
        w -= inner(q, w) * q;
      }
      const double norm = w.norm();
      if (norm > 1e-12 * std::max(1.0, v->norm())) {
        frame.push_back(w / norm);
      }
    }
    for (const auto& q : frame) {
      direction -= inner(q, direction) * q;
    }
  }
  const double norm = direction.norm();
  if (norm <= 1e-12) {
    throw InvalidInput(
        "singular seed vanishes after projection; pick another direction");
  }
  direction /= norm;

  SingularSeed seed;
  seed.direction = std::move(direction);
  seed.r0 = inner(b, seed.direction);
  seed.r1 = inner(bracket, seed.direction);
  return seed;
}

SingularControl synthesize_singular_control(const ControlSystem& system,
                                            const AlgebraElement& direction,
                                            double total_time, int steps,
                                            double denom_tol) {
  check_system(system);
  if (system.generators.size() != 1) {
    throw InvalidInput("singular synthesis needs a single-generator system");
  }
  if (steps < 100) {
    throw InvalidInput("singular synthesis needs steps >= 100");
  }
  if (std::abs(direction.norm() - 1.0) > 1e-10) {
    throw InvalidInput("singular synthesis needs a unit-norm direction");
  }

  const AlgebraElement& a = system.drift;
  const AlgebraElement& b = system.generators[0];
  const AlgebraElement bracket = commutator(b, a);     // [b, a]
  const AlgebraElement num_op = commutator(a, bracket);  // [a, [b, a]]
  const AlgebraElement den_op = commutator(b, bracket);  // [b, [b, a]]

  const double dt = total_time / steps;
  SingularControl control;
  control.samples.reserve(static_cast<std::size_t>(steps));
  control.invariant_trace.reserve(static_cast<std::size_t>(steps) + 1);
  control.min_denominator = std::numeric_limits<double>::infinity();

  Trajectory trajectory;
  trajectory.system = system;
  trajectory.field = zero_field(1, steps, total_time,
                                std::numeric_limits<double>::infinity());
  trajectory.boundary_ops.reserve(static_cast<std::size_t>(steps) + 1);
  trajectory.boundary_ops.push_back(Matrix::Identity(system.dim, system.dim));

  UnitaryMatrix u = Matrix::Identity(system.dim, system.dim);
  for (int step = 0; step < steps; ++step) {
    const double numerator = inner(adjoint_action(u, num_op), direction);
    const double denominator = inner(adjoint_action(u, den_op), direction);
    control.min_denominator =
        std::min(control.min_denominator, std::abs(denominator));
    if (std::abs(denominator) < denom_tol * (std::abs(numerator) + 1.0)) {
      throw DegenerateDenominator(
          "singular-control denominator degenerates at t = " +
              std::to_string(step * dt),
          step * dt);
    }
    const double amplitude = -numerator / denominator;
    control.samples.push_back(amplitude);
    control.invariant_trace.push_back(inner(adjoint_action(u, b), direction));
    trajectory.field.coeffs(0, step) = amplitude;

    u = expm(a + amplitude * b, dt) * u;
    trajectory.boundary_ops.push_back(u);
  }
  control.invariant_trace.push_back(inner(adjoint_action(u, b), direction));
  control.max_invariant = 0.0;
  for (double g : control.invariant_trace) {
    control.max_invariant = std::max(control.max_invariant, std::abs(g));
  }
  trajectory.field.kappa =
      std::max(1.0, 2.0 * std::abs(trajectory.field.coeffs.cwiseAbs().maxCoeff()));
  control.trajectory = std::move(trajectory);
  return control;
}

ControlField resample_to_field(const std::vector<double>& samples,
                               double total_time, int pieces, double kappa) {
  if (pieces < 1 || samples.size() < static_cast<std::size_t>(pieces)) {
    throw InvalidInput("resample_to_field: need at least one sample per piece");
  }
  ControlField field = zero_field(1, pieces, total_time, kappa);
  const std::size_t count = samples.size();
  for (int k = 0; k < pieces; ++k) {
    // Sample index range covered by piece k; averages preserve the bound.
    const std::size_t begin = static_cast<std::size_t>(k) * count / pieces;
    const std::size_t end =
        static_cast<std::size_t>(k + 1) * count / pieces;
    double sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      sum += samples[i];
    }
    field.coeffs(0, k) =
        std::clamp(sum / static_cast<double>(end - begin), -kappa, kappa);
  }
  return field;
}

namespace {

struct Evaluation {
  bool feasible = false;
  double value = 0.0;
  double xi_norm = 0.0;
  ControlField field;
};

Evaluation evaluate_direction(const ControlSystem& system,
                              const Objective& objective,
                              const AlgebraElement& direction,
                              double total_time, int pieces, double kappa,
                              int synth_steps) {
  Evaluation eval;
  SingularControl control;
  try {
    control = synthesize_singular_control(system, direction, total_time,
                                          synth_steps);
  } catch (const DegenerateDenominator&) {
    return eval;
  }
  for (double e : control.samples) {
    if (std::abs(e) > kappa) {
      return eval;
    }
  }
  eval.field = resample_to_field(control.samples, total_time, pieces, kappa);
  const Trajectory trajectory = propagate(system, eval.field);
  const AlgebraElement xi =
      riemannian_gradient(objective, trajectory.final_op());
  eval.xi_norm = xi.norm();
  eval.value = inner(direction, xi);
  eval.feasible = true;
  return eval;
}

AlgebraElement normalize_direction(const ControlSystem& system,
                                   AlgebraElement direction, bool project) {
  const SingularSeed seed = make_singular_seed(system, direction, project);
  return seed.direction;
}

}  // namespace

SearchRecord singular_critical_search(const ControlSystem& system,
                                      const Objective& objective,
                                      double total_time, int pieces,
                                      double kappa,
                                      const SearchOptions& options,
                                      std::uint64_t seed) {
  check_system(system);
  if (system.generators.size() != 1) {
    throw InvalidInput("singular search needs a single-generator system");
  }
  const int coord_dim = system.dim * system.dim - 1;
  const BasisSet basis = standard_basis(system.dim);

  SearchRecord record;
  record.seed = seed;

  for (int restart = 0; restart < options.restarts; ++restart) {
    RestartRecord run;
    run.seed = seed + static_cast<std::uint64_t>(restart);
    std::mt19937_64 rng(run.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);

    // Draw feasible starting directions under the magnitude bound.
    AlgebraElement direction;
    Evaluation current;
    for (int attempt = 0; attempt < options.max_seed_attempts; ++attempt) {
      RealVector coords(coord_dim);
      for (int i = 0; i < coord_dim; ++i) {
        coords(i) = gauss(rng);
      }
      AlgebraElement candidate;
      try {
        candidate = normalize_direction(
            system, from_basis_coordinates(basis, coords),
            options.project_seed);
      } catch (const InvalidInput&) {
        ++run.rejections;
        continue;
      }
      const Evaluation eval =
          evaluate_direction(system, objective, candidate, total_time, pieces,
                             kappa, options.synth_steps);
      if (eval.feasible) {
        direction = candidate;
        current = eval;
        break;
      }
      ++run.rejections;
    }
    if (!current.feasible) {
      record.total_rejections += run.rejections;
      record.restarts.push_back(std::move(run));
      continue;
    }

    run.feasible = true;
    run.best_value = current.value;
    run.xi_norm = current.xi_norm;
    run.direction = direction;
    ControlField best_field = current.field;

    for (int iter = 0; iter < options.iters; ++iter) {
      run.iterations = iter + 1;
      // Two-point simultaneous perturbation on the sphere.
      RealVector delta(coord_dim);
      for (int i = 0; i < coord_dim; ++i) {
        delta(i) = coin(rng) ? 1.0 : -1.0;
      }
      const AlgebraElement perturbation = from_basis_coordinates(basis, delta);
      auto probe = [&](double sign) {
        try {
          const AlgebraElement candidate = normalize_direction(
              system, direction + sign * options.sigma * perturbation,
              options.project_seed);
          return evaluate_direction(system, objective, candidate, total_time,
                                    pieces, kappa, options.synth_steps);
        } catch (const InvalidInput&) {
          return Evaluation{};
        }
      };
      const Evaluation plus = probe(1.0);
      const Evaluation minus = probe(-1.0);
      if (!plus.feasible || !minus.feasible) {
        ++run.rejections;
        run.history.push_back(current.value);
        continue;
      }
      // Rademacher entries make the inverse perturbation the perturbation
      // itself, so the estimated gradient is slope·Δ.
      const double slope =
          (plus.value - minus.value) / (2.0 * options.sigma);
      const double eta = options.eta0 / (1.0 + iter / options.tau);
      AlgebraElement updated;
      try {
        updated = normalize_direction(
            system, direction + eta * slope * perturbation,
            options.project_seed);
      } catch (const InvalidInput&) {
        ++run.rejections;
        run.history.push_back(current.value);
        continue;
      }
      const Evaluation next =
          evaluate_direction(system, objective, updated, total_time, pieces,
                             kappa, options.synth_steps);
      if (next.feasible) {
        direction = updated;
        current = next;
        if (current.value > run.best_value) {
          run.best_value = current.value;
          run.xi_norm = current.xi_norm;
          run.direction = direction;
          best_field = current.field;
        }
      } else {
        ++run.rejections;
      }
      run.history.push_back(current.value);
    }

    // Declaration and the independent verification gate.
    const RealMatrix gradient =
        objective_gradient(system, best_field, objective);
    run.final_grad_norm = gradient.norm();
    const JacobianReport report = endpoint_jacobian(system, best_field);
    run.final_corank = report.corank;
    run.converged =
        run.best_value >= (1.0 - options.convergence_slack) * run.xi_norm &&
        run.final_grad_norm <= options.verify_grad_tol;
    run.verified = run.final_grad_norm <= options.verify_grad_tol &&
                   run.final_corank > 0;
    run.false_positive = run.converged && !run.verified;

    record.total_rejections += run.rejections;
    record.best_value = std::max(record.best_value, run.best_value);
    record.any_converged = record.any_converged || run.converged;
    record.any_verified = record.any_verified || run.verified;
    record.restarts.push_back(std::move(run));
  }

  const bool any_feasible =
      std::any_of(record.restarts.begin(), record.restarts.end(),
                  [](const RestartRecord& r) { return r.feasible; });
  if (!any_feasible) {
    throw AllRejected(
        "singular search: every restart was rejected by the magnitude bound");
  }
  return record;
}

namespace {

ScanPoint examine_restricted(const ControlSystem& system,
                             const ControlField& field,
                             const std::vector<std::pair<int, int>>& fixed,
                             const Objective* objective,
                             const Tolerances& tol) {
  ScanPoint point;
  const JacobianReport report = restricted_jacobian(system, field, fixed, tol);
  point.corank = report.corank;
  if (objective != nullptr) {
    const Trajectory trajectory = propagate(system, field);
    const AlgebraElement xi =
        riemannian_gradient(*objective, trajectory.final_op());
    try {
      point.residual =
          is_transverse_to_level_set(report, xi, tol.transversality).residual;
    } catch (const KinematicCritical&) {
      point.kinematic = true;
    }
  }
  return point;
}

}  // namespace

std::vector<ScanPoint> fix_parameter_scan(const ControlSystem& system,
                                          const ControlField& field, int j_fix,
                                          int k_fix,
                                          const std::vector<double>& values,
                                          const Objective* objective,
                                          const Tolerances& tol) {
  check_field(field);
  if (static_cast<int>(system.generators.size()) !=
      system.dim * system.dim - 1) {
    throw InvalidInput("fix_parameter_scan expects a fully actuated system");
  }
  if (j_fix < 0 || j_fix >= field.num_generators() || k_fix < 0 ||
      k_fix >= field.pieces) {
    throw InvalidInput("fix_parameter_scan: index out of range");
  }
  std::vector<ScanPoint> points;
  points.reserve(values.size());
  ControlField probe = field;
  for (double value : values) {
    if (std::abs(value) > field.kappa) {
      throw InvalidInput("fix_parameter_scan: fixed value exceeds kappa");
    }
    probe.coeffs(j_fix, k_fix) = value;
    ScanPoint point =
        examine_restricted(system, probe, {{j_fix, k_fix}}, objective, tol);
    point.value = value;
    points.push_back(point);
  }
  return points;
}

CascadeReport restriction_cascade(const ControlSystem& system,
                                  const ControlField& field,
                                  const std::vector<CascadeFix>& fixes,
                                  const Objective* objective,
                                  const Tolerances& tol) {
  check_field(field);
  for (std::size_t i = 0; i < fixes.size(); ++i) {
    for (std::size_t j = i + 1; j < fixes.size(); ++j) {
      if (fixes[i].generator == fixes[j].generator &&
          fixes[i].piece == fixes[j].piece) {
        throw InvalidInput("restriction_cascade: duplicate fix");
      }
    }
  }

  CascadeReport report;
  ControlField current = field;
  std::vector<std::pair<int, int>> fixed;
  std::vector<int> free_pieces(system.generators.size(),
                               field.pieces);
  for (const CascadeFix& fix : fixes) {
    if (std::abs(fix.value) > field.kappa) {
      throw InvalidInput("restriction_cascade: fixed value exceeds kappa");
    }
    current.coeffs(fix.generator, fix.piece) = fix.value;
    fixed.emplace_back(fix.generator, fix.piece);
    --free_pieces[static_cast<std::size_t>(fix.generator)];

    CascadeStep step;
    step.fix = fix;
    const ScanPoint point =
        examine_restricted(system, current, fixed, objective, tol);
    step.corank = point.corank;
    step.residual = point.residual;
    step.kinematic = point.kinematic;

    ControlSystem effective;
    effective.dim = system.dim;
    effective.drift = system.drift;
    for (std::size_t j = 0; j < system.generators.size(); ++j) {
      if (free_pieces[j] > 0) {
        effective.generators.push_back(system.generators[j]);
      }
    }
    step.larc_dim = effective.generators.empty()
                        ? 0
                        : larc_dimension(effective, tol.larc_growth);

    if (objective != nullptr && !point.kinematic &&
        point.residual <= tol.transversality) {
      step.transversality_failed = true;
      report.steps.push_back(step);
      report.stopped_early = true;
      break;
    }
    report.steps.push_back(step);
  }
  return report;
}

}  // namespace qcl
