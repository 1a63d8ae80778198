#ifndef EVO_SPATIAL_OPERATORS_HPP_
#define EVO_SPATIAL_OPERATORS_HPP_

// Finite-dimensional monotone operators A and the 1D mixed-type div/grad
// system whose type switches between hyperbolic, parabolic and elliptic.

#include "evo/core.hpp"

#include <vector>

namespace evo {

/// Re <Ax|x> >= 0 margin: lambda_min of the Hermitian part.
inline double check_maximal_monotone(const Mat& a) {
  if (!is_square(a)) throw InvalidArgument("check_maximal_monotone: matrix is not square");
  return hermitian_part_min_eig(a);
}

/// Everywhere-defined monotone operator on C^n. In finite dimensions every
/// such operator is maximal monotone.
class SpatialOperator {
 public:
  explicit SpatialOperator(Mat matrix) : matrix_(std::move(matrix)) {
    if (!is_square(matrix_) || matrix_.rows() == 0) throw InvalidArgument("SpatialOperator: matrix must be square");
    if (!matrix_.allFinite()) throw InvalidArgument("SpatialOperator: non-finite entries");
    margin_ = check_maximal_monotone(matrix_);
    if (margin_ < -kStructureTol) throw InvalidArgument("SpatialOperator: operator is not monotone");
  }

  static SpatialOperator zero(std::size_t n) {
    return SpatialOperator(Mat::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)));
  }

  const Mat& matrix() const { return matrix_; }
  double monotone_margin() const { return margin_; }
  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }

 private:
  Mat matrix_;
  double margin_ = 0.0;
};

struct GradPair {
  Mat grad;  // (p+1) x p
  Mat div;   // p x (p+1), equal to -grad^*
};

/// Forward-difference gradient from p interior nodes to p+1 edges with
/// homogeneous Dirichlet closure, and its negative adjoint.
inline GradPair build_grad_1d(std::size_t p, double dx) {
  if (p < 2) throw InvalidArgument("build_grad_1d: need at least two nodes");
  if (!(dx > 0.0)) throw InvalidArgument("build_grad_1d: spacing must be positive");
  const auto np = static_cast<Eigen::Index>(p);
  Mat g = Mat::Zero(np + 1, np);
  for (Eigen::Index e = 0; e <= np; ++e) {
    if (e < np) g(e, e) = 1.0 / dx;
    if (e > 0) g(e, e - 1) = -1.0 / dx;
  }
  Mat d = -g.adjoint();
  return {std::move(g), std::move(d)};
}

/// Nodes x_i = (i+1) dx with x_i in the open interval (a, b).
inline std::vector<int> indicator_from_interval(std::size_t p, double dx, double a, double b) {
  std::vector<int> ind(p, 0);
  for (std::size_t i = 0; i < p; ++i) {
    const double x = static_cast<double>(i + 1) * dx;
    ind[i] = (x > a && x < b) ? 1 : 0;
  }
  return ind;
}

struct MixedTypeSystem {
  std::size_t p = 0;
  double dx = 0.0;
  std::vector<int> indicator0;
  std::vector<int> indicator1;
  double c = 0.0;
  Mat m0;  // blockdiag(diag(chi0 + chi1), diag(chi0 on edges))
  Mat m1;  // c I
  Mat a;   // [[0, div], [grad, 0]], exactly skew
  std::size_t dim() const { return 2 * p + 1; }
};

/// Edge e sits between nodes e-1 and e; it carries indicator 1 iff every
/// adjacent node does (boundary edges have one neighbour).
inline std::vector<int> edge_indicator(const std::vector<int>& node_indicator) {
  const std::size_t p = node_indicator.size();
  std::vector<int> edges(p + 1, 0);
  for (std::size_t e = 0; e <= p; ++e) {
    const bool left = e == 0 || node_indicator[e - 1] == 1;
    const bool right = e == p || node_indicator[e] == 1;
    edges[e] = (left && right) ? 1 : 0;
  }
  return edges;
}

inline MixedTypeSystem build_mixed_type_system(std::size_t p, double dx, const std::vector<int>& indicator0,
                                               const std::vector<int>& indicator1, double c) {
  if (indicator0.size() != p || indicator1.size() != p)
    throw InvalidArgument("build_mixed_type_system: indicator length must equal the node count");
  if (!(c > 0.0)) throw InvalidArgument("build_mixed_type_system: c must be positive");
  for (std::size_t i = 0; i < p; ++i) {
    if ((indicator0[i] != 0 && indicator0[i] != 1) || (indicator1[i] != 0 && indicator1[i] != 1))
      throw InvalidArgument("build_mixed_type_system: indicators must be 0/1 valued");
    if (indicator0[i] * indicator1[i] != 0) throw InvalidArgument("build_mixed_type_system: indicators overlap");
  }
  const GradPair gd = build_grad_1d(p, dx);
  MixedTypeSystem s;
  s.p = p;
  s.dx = dx;
  s.indicator0 = indicator0;
  s.indicator1 = indicator1;
  s.c = c;
  const auto np = static_cast<Eigen::Index>(p);
  const auto n = 2 * np + 1;
  s.m0 = Mat::Zero(n, n);
  for (Eigen::Index i = 0; i < np; ++i) s.m0(i, i) = static_cast<double>(indicator0[i] + indicator1[i]);
  const auto edges = edge_indicator(indicator0);
  for (Eigen::Index e = 0; e <= np; ++e) s.m0(np + e, np + e) = static_cast<double>(edges[e]);
  s.m1 = c * Mat::Identity(n, n);
  s.a = Mat::Zero(n, n);
  s.a.block(0, np, np, np + 1) = gd.div;
  s.a.block(np, 0, np + 1, np) = gd.grad;
  return s;
}

}  // namespace evo

#endif  // EVO_SPATIAL_OPERATORS_HPP_
