#include "qcl/singularity.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace qcl {

int numerical_rank(const RealVector& singular_values, double threshold) {
  int rank = 0;
  for (Eigen::Index i = 0; i < singular_values.size(); ++i) {
    if (singular_values(i) > threshold) {
      ++rank;
    }
  }
  return rank;
}

int corank(const JacobianReport& report, double rank_tol) {
  double threshold = report.rank_threshold;
  if (rank_tol >= 0.0) {
    const double sigma_max =
        report.singular_values.size() > 0 ? report.singular_values(0) : 0.0;
    threshold = rank_tol * sigma_max;
  }
  const int rank = numerical_rank(report.singular_values, threshold);
  return static_cast<int>(report.columns.rows()) - rank;
}

TransversalityResult is_transverse_to_level_set(const JacobianReport& report,
                                                const AlgebraElement& xi,
                                                double tol) {
  const BasisSet basis = standard_basis(report.dim);
  const RealVector xi_coords = basis_coordinates(basis, xi);
  const double xi_norm = xi_coords.norm();
  if (xi_norm == 0.0) {
    throw KinematicCritical(
        "transversality undefined: translated gradient vanishes");
  }
  Eigen::JacobiSVD<RealMatrix> svd(report.columns, Eigen::ComputeThinU);
  const RealVector& sigma = svd.singularValues();
  double projected_sq = 0.0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > report.rank_threshold) {
      const double component = svd.matrixU().col(i).dot(xi_coords);
      projected_sq += component * component;
    }
  }
  TransversalityResult result;
  result.residual = std::sqrt(projected_sq) / xi_norm;
  result.transverse = result.residual > tol;
  return result;
}

int larc_dimension(const ControlSystem& system, double growth_tol) {
  check_system(system);
  const BasisSet basis = standard_basis(system.dim);
  const int full_dim = static_cast<int>(basis.size());

  // Orthonormal span in basis coordinates plus the elements that produced it;
  // new directions come from commutators of span elements.
  std::vector<RealVector> span;
  std::vector<AlgebraElement> elements;
  auto try_insert = [&](const AlgebraElement& candidate) {
    const RealVector coords = basis_coordinates(basis, candidate);
    const double scale = coords.norm();
    if (scale <= growth_tol) {
      return false;
    }
    RealVector residual = coords;
    for (const auto& q : span) {
      residual -= q.dot(residual) * q;
    }
    // Second orthogonalization pass keeps the span numerically tight.
    for (const auto& q : span) {
      residual -= q.dot(residual) * q;
    }
    if (residual.norm() <= growth_tol * scale) {
      return false;
    }
    span.push_back(residual / residual.norm());
    elements.push_back(candidate / scale);
    return true;
  };

  try_insert(system.drift);
  for (const auto& g : system.generators) {
    try_insert(g);
  }

  std::size_t processed = 0;
  while (processed < elements.size() &&
         static_cast<int>(span.size()) < full_dim) {
    const AlgebraElement current = elements[processed];
    for (std::size_t i = 0; i <= processed; ++i) {
      if (static_cast<int>(span.size()) >= full_dim) {
        break;
      }
      try_insert(commutator(elements[i], current));
    }
    ++processed;
  }
  return static_cast<int>(span.size());
}

SingularityMargin exp_singularity_margin(const AlgebraElement& h_piece,
                                         double dt) {
  if (!(dt > 0.0)) {
    throw InvalidInput("exp_singularity_margin: need dt > 0");
  }
  const SpectralDecomposition sd = spectral(h_piece);
  const double gap =
      sd.eigenvalues(sd.eigenvalues.size() - 1) - sd.eigenvalues(0);
  SingularityMargin result;
  result.margin = 2.0 * M_PI - dt * gap;
  result.safe = result.margin > 0.0;
  return result;
}

int state_map_rank(const ControlSystem& system, const ControlField& field,
                   const Vector& psi0, const Tolerances& tol) {
  if (psi0.size() != system.dim) {
    throw DimensionMismatch("state_map_rank: state dimension mismatch");
  }
  if (std::abs(psi0.norm() - 1.0) > 1e-10) {
    throw InvalidInput("state_map_rank: psi0 must be unit normalized");
  }
  const JacobianReport report = endpoint_jacobian(system, field, tol);
  const Trajectory trajectory = propagate(system, field);
  const UnitaryMatrix& u_final = trajectory.final_op();
  const Vector psi_final = u_final * psi0;
  const Vector psi_final_i = Complex(0.0, 1.0) * psi_final;
  const BasisSet basis = standard_basis(system.dim);

  auto real_dot = [](const Vector& a, const Vector& b) {
    return a.dot(b).real();
  };

  const int cols = static_cast<int>(report.columns.cols());
  RealMatrix state_columns(2 * system.dim, cols);
  for (int c = 0; c < cols; ++c) {
    const AlgebraElement direction =
        from_basis_coordinates(basis, report.columns.col(c));
    Vector v = u_final * (direction * psi0);
    v -= real_dot(psi_final, v) * psi_final;
    v -= real_dot(psi_final_i, v) * psi_final_i;
    state_columns.col(c).head(system.dim) = v.real();
    state_columns.col(c).tail(system.dim) = v.imag();
  }

  Eigen::JacobiSVD<RealMatrix> svd(state_columns);
  const RealVector& sigma = svd.singularValues();
  const double sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;
  const double dim_factor = std::sqrt(static_cast<double>(
      std::max(state_columns.rows(), state_columns.cols())));
  return numerical_rank(sigma, tol.rank_rel * dim_factor * sigma_max);
}

}  // namespace qcl
