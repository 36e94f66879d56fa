#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dnls {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};
inline constexpr int kMaxDim = 3;

// Integer lattice point; components beyond the grid dimension are zero.
using Mode = std::array<int, kMaxDim>;

/// Raised when a structural invariant (reality, Hamiltonian structure, ...)
/// is found broken at runtime.
class InvariantViolation : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline Mode operator+(const Mode& a, const Mode& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Mode operator-(const Mode& a, const Mode& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Mode operator-(const Mode& a) { return {-a[0], -a[1], -a[2]}; }

inline double norm_sq(const Mode& a) {
    return double(a[0]) * a[0] + double(a[1]) * a[1] + double(a[2]) * a[2];
}

/// Japanese bracket <xi> = (1 + |xi|^2)^{1/2}, Euclidean.
inline double japanese(const Mode& a) { return std::sqrt(1.0 + norm_sq(a)); }

}  // namespace dnls
