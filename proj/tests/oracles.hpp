// Independent reference computations for the test suites. Everything here
// deliberately avoids the closed-form code paths it is used to check.
#pragma once

#include "qcl/landscape.hpp"

#include <cmath>
#include <random>

namespace qcl::oracles {

// Truncated Taylor series for exp(dt·X).
inline Matrix expm_taylor(const Matrix& x, double dt, int terms = 60) {
  const Eigen::Index n = x.rows();
  Matrix sum = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  for (int k = 1; k <= terms; ++k) {
    term = term * x * (dt / k);
    sum += term;
  }
  return sum;
}

// Classic fixed-step RK4 for dU/dt = H(t) U with H constant on each piece.
inline Matrix propagate_rk4(const ControlSystem& system,
                            const ControlField& field, int steps_per_piece) {
  Matrix u = Matrix::Identity(system.dim, system.dim);
  const double h = field.piece_duration() / steps_per_piece;
  for (int k = 0; k < field.pieces; ++k) {
    const Matrix hk = piece_generator(system, field, k);
    for (int s = 0; s < steps_per_piece; ++s) {
      const Matrix k1 = hk * u;
      const Matrix k2 = hk * (u + 0.5 * h * k1);
      const Matrix k3 = hk * (u + 0.5 * h * k2);
      const Matrix k4 = hk * (u + h * k3);
      u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }
  return u;
}

// Direct entrywise sum for Re Tr(X†Y).
inline double inner_direct(const Matrix& x, const Matrix& y) {
  double sum = 0.0;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      sum += (std::conj(x(r, c)) * y(r, c)).real();
    }
  }
  return sum;
}

// Rank by Gaussian elimination with full pivoting.
inline int rank_by_elimination(RealMatrix m, double threshold) {
  const Eigen::Index rows = m.rows();
  const Eigen::Index cols = m.cols();
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  int rank = 0;
  Eigen::Index row = 0, col = 0;
  while (row < rows && col < cols) {
    Eigen::Index pivot_r = row, pivot_c = col;
    double best = 0.0;
    for (Eigen::Index r = row; r < rows; ++r) {
      for (Eigen::Index c = col; c < cols; ++c) {
        if (std::abs(m(r, c)) > best) {
          best = std::abs(m(r, c));
          pivot_r = r;
          pivot_c = c;
        }
      }
    }
    if (best <= threshold * scale) {
      break;
    }
    m.row(row).swap(m.row(pivot_r));
    m.col(col).swap(m.col(pivot_c));
    for (Eigen::Index r = row + 1; r < rows; ++r) {
      const double factor = m(r, col) / m(row, col);
      m.row(r) -= factor * m.row(row);
    }
    ++rank;
    ++row;
    ++col;
  }
  return rank;
}

// Central finite difference of the composed objective w.r.t. one coefficient.
inline double objective_fd(const ControlSystem& system,
                           const ControlField& field,
                           const Objective& objective, int j, int k,
                           double h) {
  ControlField plus = field;
  plus.coeffs(j, k) += h;
  ControlField minus = field;
  minus.coeffs(j, k) -= h;
  const double f_plus = evaluate(objective, propagate(system, plus).final_op());
  const double f_minus =
      evaluate(objective, propagate(system, minus).final_op());
  return (f_plus - f_minus) / (2.0 * h);
}

// Central finite difference of U_T w.r.t. one coefficient, left-translated.
inline Matrix endpoint_column_fd(const ControlSystem& system,
                                 const ControlField& field, int j, int k,
                                 double h) {
  ControlField plus = field;
  plus.coeffs(j, k) += h;
  ControlField minus = field;
  minus.coeffs(j, k) -= h;
  const Matrix u_plus = propagate(system, plus).final_op();
  const Matrix u_minus = propagate(system, minus).final_op();
  const Matrix u = propagate(system, field).final_op();
  return u.adjoint() * ((u_plus - u_minus) / (2.0 * h));
}

// Greedy (1+1)-style random search over the coefficient box; an optimizer
// that shares nothing with the gradient machinery.
inline double hill_climb_best(const ControlSystem& system,
                              const ControlField& field0,
                              const Objective& objective, int iters,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ControlField field = field0;
  double best = evaluate(objective, propagate(system, field).final_op());
  double sigma = 0.3 * field.kappa;
  int since_improvement = 0;
  for (int i = 0; i < iters; ++i) {
    ControlField candidate = field;
    for (int j = 0; j < field.num_generators(); ++j) {
      for (int k = 0; k < field.pieces; ++k) {
        candidate.coeffs(j, k) = std::clamp(
            candidate.coeffs(j, k) + sigma * gauss(rng), -field.kappa,
            field.kappa);
      }
    }
    const double value =
        evaluate(objective, propagate(system, candidate).final_op());
    if (value > best) {
      best = value;
      field = candidate;
      since_improvement = 0;
    } else if (++since_improvement > 20) {
      sigma = std::max(1e-4 * field.kappa, 0.7 * sigma);
      since_improvement = 0;
    }
  }
  return best;
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  return a * 0x9E3779B97F4A7C15ULL + b + 0x1234567ULL;
}

}  // namespace qcl::oracles
