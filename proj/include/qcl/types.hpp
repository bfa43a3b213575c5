#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qcl {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

// Algebra elements (traceless anti-Hermitian) and unitaries are plain dense
// matrices; validity is a runtime property checked where it matters.
using AlgebraElement = Matrix;
using UnitaryMatrix = Matrix;
using BasisSet = std::vector<AlgebraElement>;

// All numerical thresholds in one place. Defaults are the contract values;
// every entry can be overridden per call or through the CLI --tol-* flags.
struct Tolerances {
  double anti_hermitian = 1e-12;  // relative Frobenius residual of X + X†
  double trace = 1e-12;           // relative |Tr X|
  double unitarity = 1e-10;       // ‖U†U − I‖_F
  double special_det = 1e-9;      // |det U − 1|
  double orthonormality = 1e-12;  // Gram-matrix deviation for bases
  double rank_rel = 1e-8;         // × √(max dim) × σ_max for numerical rank
  double transversality = 1e-6;   // normalized residual threshold
  double larc_growth = 1e-10;     // relative residual admitting a new span direction
  double grad_critical = 1e-8;    // × κ√p: gradient norm below which a control is critical
  double value_gap = 1e-3;        // relative gap from the kinematic maximum
  double hessian_nsd = 1e-6;      // eigenvalue slack for negative semidefiniteness
  double denom_guard = 1e-6;      // singular-control denominator guard
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidDimension : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Transversality is undefined where the translated gradient vanishes; callers
// must branch on this instead of reading a residual.
class KinematicCritical : public Error {
 public:
  using Error::Error;
};

// The implicit singular-control formula divides by an adjoint-orbit pairing;
// when it degenerates the construction has no first-order continuation.
class DegenerateDenominator : public Error {
 public:
  DegenerateDenominator(const std::string& what, double time)
      : Error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_ = 0.0;
};

class AllRejected : public Error {
 public:
  using Error::Error;
};

}  // namespace qcl
