#include "qcl/dynamics.hpp"

#include <cmath>
#include <random>

namespace qcl {

void check_field(const ControlField& field) {
  if (!(field.total_time > 0.0)) {
    throw InvalidInput("control field: total time must be positive");
  }
  if (field.pieces < 1) {
    throw InvalidInput("control field: need at least one piece");
  }
  if (!(field.kappa > 0.0)) {
    throw InvalidInput("control field: kappa must be positive");
  }
  if (field.coeffs.cols() != field.pieces || field.coeffs.rows() < 1) {
    throw InvalidInput("control field: coefficient shape mismatch");
  }
  if (field.coeffs.cwiseAbs().maxCoeff() > field.kappa * (1.0 + 1e-12)) {
    throw InvalidInput("control field: coefficient exceeds kappa bound");
  }
}

ControlField zero_field(int num_generators, int pieces, double total_time,
                        double kappa) {
  ControlField field;
  field.total_time = total_time;
  field.pieces = pieces;
  field.kappa = kappa;
  field.coeffs = RealMatrix::Zero(num_generators, pieces);
  return field;
}

ControlField random_field(int num_generators, int pieces, double total_time,
                          double kappa, std::uint64_t seed, double scale) {
  ControlField field = zero_field(num_generators, pieces, total_time, kappa);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-scale * kappa, scale * kappa);
  for (int j = 0; j < num_generators; ++j) {
    for (int k = 0; k < pieces; ++k) {
      field.coeffs(j, k) = std::clamp(uniform(rng), -kappa, kappa);
    }
  }
  return field;
}

void check_system(const ControlSystem& system, const Tolerances& tol) {
  if (system.dim < 2) {
    throw InvalidDimension("control system: need dim >= 2");
  }
  if (system.generators.empty()) {
    throw InvalidInput("control system: generator list must be non-empty");
  }
  if (system.drift.rows() != system.dim || system.drift.cols() != system.dim) {
    throw DimensionMismatch("control system: drift dimension mismatch");
  }
  check_algebra_element(system.drift, tol);
  for (const auto& g : system.generators) {
    if (g.rows() != system.dim || g.cols() != system.dim) {
      throw DimensionMismatch("control system: generator dimension mismatch");
    }
    check_algebra_element(g, tol);
  }
}

ControlSystem random_system(int n, std::uint64_t seed, double norm_bound,
                            int num_generators) {
  ControlSystem system;
  system.dim = n;
  system.drift = random_element(n, seed, norm_bound);
  for (int j = 0; j < num_generators; ++j) {
    system.generators.push_back(
        random_element(n, seed + 1 + static_cast<std::uint64_t>(j), norm_bound));
  }
  return system;
}

ControlSystem fully_actuated_system(int n) {
  return fully_actuated_system(n, Matrix::Zero(n, n));
}

ControlSystem fully_actuated_system(int n, AlgebraElement drift) {
  ControlSystem system;
  system.dim = n;
  system.drift = std::move(drift);
  system.generators = standard_basis(n);
  return system;
}

AlgebraElement piece_generator(const ControlSystem& system,
                               const ControlField& field, int piece) {
  AlgebraElement h = system.drift;
  for (std::size_t j = 0; j < system.generators.size(); ++j) {
    h += field.coeffs(static_cast<Eigen::Index>(j), piece) *
         system.generators[j];
  }
  return h;
}

namespace {

void check_pair(const ControlSystem& system, const ControlField& field) {
  check_system(system);
  check_field(field);
  if (field.num_generators() != static_cast<int>(system.generators.size())) {
    throw DimensionMismatch("field rows do not match system generator count");
  }
}

}  // namespace

Trajectory propagate(const ControlSystem& system, const ControlField& field) {
  check_pair(system, field);
  Trajectory trajectory{system, field, {}};
  trajectory.boundary_ops.reserve(static_cast<std::size_t>(field.pieces) + 1);
  trajectory.boundary_ops.push_back(Matrix::Identity(system.dim, system.dim));
  const double dt = field.piece_duration();
  for (int k = 0; k < field.pieces; ++k) {
    const UnitaryMatrix step = expm(piece_generator(system, field, k), dt);
    trajectory.boundary_ops.push_back(step * trajectory.boundary_ops.back());
  }
  return trajectory;
}

namespace {

// Shared core: columns of the end-point derivative in basis coordinates,
// optionally skipping fixed (generator, piece) pairs.
RealMatrix jacobian_columns(const ControlSystem& system,
                            const ControlField& field,
                            const std::vector<std::pair<int, int>>* fixed) {
  const Trajectory trajectory = propagate(system, field);
  const BasisSet basis = standard_basis(system.dim);
  const int p = field.pieces;
  const int num_gen = field.num_generators();
  const double dt = field.piece_duration();

  std::vector<char> skip(static_cast<std::size_t>(num_gen) * p, 0);
  int kept = num_gen * p;
  if (fixed != nullptr) {
    for (const auto& [j, k] : *fixed) {
      if (j < 0 || j >= num_gen || k < 0 || k >= p) {
        throw InvalidInput("fixed parameter index out of range");
      }
      if (!skip[static_cast<std::size_t>(column_index(j, k, p))]) {
        skip[static_cast<std::size_t>(column_index(j, k, p))] = 1;
        --kept;
      }
    }
  }

  RealMatrix columns(static_cast<Eigen::Index>(basis.size()), kept);
  int out = 0;
  std::vector<int> order(static_cast<std::size_t>(num_gen) * p);
  // Column order follows the full-grid layout with fixed columns removed.
  for (int j = 0; j < num_gen; ++j) {
    for (int k = 0; k < p; ++k) {
      order[static_cast<std::size_t>(column_index(j, k, p))] =
          skip[static_cast<std::size_t>(column_index(j, k, p))] ? -1 : out++;
    }
  }

  for (int k = 0; k < p; ++k) {
    const SpectralDecomposition sd =
        spectral(piece_generator(system, field, k));
    const UnitaryMatrix& u_start = trajectory.boundary_ops[k];
    for (int j = 0; j < num_gen; ++j) {
      const int col = order[static_cast<std::size_t>(column_index(j, k, p))];
      if (col < 0) {
        continue;
      }
      const Matrix integral =
          conjugation_integral(sd, system.generators[j], dt);
      const AlgebraElement translated = adjoint_action(u_start, integral);
      for (std::size_t i = 0; i < basis.size(); ++i) {
        columns(static_cast<Eigen::Index>(i), col) =
            inner(basis[i], translated);
      }
    }
  }
  return columns;
}

JacobianReport report_from_columns(const ControlSystem& system,
                                   const ControlField& field,
                                   RealMatrix columns, const Tolerances& tol) {
  JacobianReport report;
  report.dim = system.dim;
  report.num_generators = field.num_generators();
  report.pieces = field.pieces;
  report.columns = std::move(columns);
  Eigen::JacobiSVD<RealMatrix> svd(report.columns);
  report.singular_values = svd.singularValues();
  const double sigma_max =
      report.singular_values.size() > 0 ? report.singular_values(0) : 0.0;
  const double dim_factor = std::sqrt(static_cast<double>(
      std::max(report.columns.rows(), report.columns.cols())));
  report.rank_threshold = tol.rank_rel * dim_factor * sigma_max;
  report.rank = 0;
  for (Eigen::Index i = 0; i < report.singular_values.size(); ++i) {
    if (report.singular_values(i) > report.rank_threshold) {
      ++report.rank;
    }
  }
  report.corank = static_cast<int>(report.columns.rows()) - report.rank;
  return report;
}

}  // namespace

JacobianReport endpoint_jacobian(const ControlSystem& system,
                                 const ControlField& field,
                                 const Tolerances& tol) {
  return report_from_columns(system, field,
                             jacobian_columns(system, field, nullptr), tol);
}

JacobianReport restricted_jacobian(const ControlSystem& system,
                                   const ControlField& field,
                                   const std::vector<std::pair<int, int>>& fixed,
                                   const Tolerances& tol) {
  return report_from_columns(system, field,
                             jacobian_columns(system, field, &fixed), tol);
}

RealMatrix objective_gradient(const JacobianReport& report,
                              const AlgebraElement& xi, const BasisSet& basis) {
  const RealVector xi_coords = basis_coordinates(basis, xi);
  const RealVector flat = report.columns.transpose() * xi_coords;
  RealMatrix gradient(report.num_generators, report.pieces);
  for (int j = 0; j < report.num_generators; ++j) {
    for (int k = 0; k < report.pieces; ++k) {
      gradient(j, k) = flat(column_index(j, k, report.pieces));
    }
  }
  return gradient;
}

RealMatrix objective_gradient(const ControlSystem& system,
                              const ControlField& field,
                              const Objective& objective) {
  if (objective.dim() != system.dim) {
    throw DimensionMismatch("objective/system dimension mismatch");
  }
  const JacobianReport report = endpoint_jacobian(system, field);
  const Trajectory trajectory = propagate(system, field);
  const AlgebraElement xi =
      riemannian_gradient(objective, trajectory.final_op());
  return objective_gradient(report, xi, standard_basis(system.dim));
}

std::vector<AlgebraElement> adjoint_orbit_samples(const Trajectory& trajectory,
                                                  const AlgebraElement& x,
                                                  int samples_per_piece) {
  if (samples_per_piece < 1) {
    throw InvalidInput("adjoint_orbit_samples: need samples_per_piece >= 1");
  }
  if (x.rows() != trajectory.system.dim || x.cols() != trajectory.system.dim) {
    throw DimensionMismatch("adjoint_orbit_samples: dimension mismatch");
  }
  const int p = trajectory.field.pieces;
  const double dt = trajectory.field.piece_duration();
  std::vector<AlgebraElement> samples;
  samples.reserve(static_cast<std::size_t>(p) * samples_per_piece + 1);
  for (int k = 0; k < p; ++k) {
    const SpectralDecomposition sd =
        spectral(piece_generator(trajectory.system, trajectory.field, k));
    const UnitaryMatrix& u_start = trajectory.boundary_ops[k];
    for (int s = 0; s < samples_per_piece; ++s) {
      if (s == 0) {
        samples.push_back(adjoint_action(u_start, x));
        continue;
      }
      const double offset = dt * s / samples_per_piece;
      const UnitaryMatrix u = expm(sd, offset) * u_start;
      samples.push_back(adjoint_action(u, x));
    }
  }
  samples.push_back(adjoint_action(trajectory.boundary_ops.back(), x));
  return samples;
}

}  // namespace qcl
