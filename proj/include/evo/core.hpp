#ifndef EVO_CORE_HPP_
#define EVO_CORE_HPP_

// Scalar/matrix aliases, error types and the small amount of dense linear
// algebra shared by every module.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace evo {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr cplx kI{0.0, 1.0};
inline const double kSqrt2Pi = std::sqrt(2.0 * std::numbers::pi);

/// Base class of everything the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on the arguments was violated (bad grid, mismatched
/// dimensions, non-finite data, out-of-domain parameter).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An evaluation point lies outside the analyticity domain of a symbol or
/// kernel transform.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A per-frequency system matrix could not be inverted.
class SingularSystem : public Error {
 public:
  SingularSystem(const std::string& what, std::size_t index, double xi)
      : Error(what), index_(index), xi_(xi) {}
  std::size_t index() const { return index_; }
  double xi() const { return xi_; }

 private:
  std::size_t index_;
  double xi_;
};

/// Tolerance used for Hermiticity and commutation checks.
inline constexpr double kStructureTol = 1e-12;

inline Mat hermitian_part(const Mat& a) { return 0.5 * (a + a.adjoint()); }

/// Smallest eigenvalue of (A + A*)/2.
inline double hermitian_part_min_eig(const Mat& a) {
  if (a.rows() != a.cols()) throw InvalidArgument("hermitian_part_min_eig: matrix is not square");
  if (a.size() == 0) throw InvalidArgument("hermitian_part_min_eig: empty matrix");
  if (a.rows() == 1) return a(0, 0).real();
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(a), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error("hermitian_part_min_eig: eigensolver did not converge");
  return es.eigenvalues().minCoeff();
}

/// Largest eigenvalue of (A + A*)/2.
inline double hermitian_part_max_eig(const Mat& a) { return -hermitian_part_min_eig(-a); }

/// Operator 2-norm (largest singular value).
inline double spectral_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  if (a.rows() == 1 && a.cols() == 1) return std::abs(a(0, 0));
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues()(0);
}

inline bool is_square(const Mat& a) { return a.rows() == a.cols(); }

inline bool is_hermitian(const Mat& a, double tol = kStructureTol) {
  if (!is_square(a)) return false;
  if (a.size() == 0) return true;
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

inline bool all_finite(const Mat& a) { return a.allFinite(); }

}  // namespace evo

#endif  // EVO_CORE_HPP_
