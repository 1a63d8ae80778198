#ifndef EVO_FREQUENCY_SOLVER_HPP_
#define EVO_FREQUENCY_SOLVER_HPP_

// Solution operator of (d/dt M(d/dt^{-1}) + A) u = f by one dense solve per
// frequency, the integro-differential variant, convolution routines and the
// initial-value reformulation with a cutoff function.

#include "evo/core.hpp"
#include "evo/material_laws.hpp"
#include "evo/signal.hpp"
#include "evo/spatial_operators.hpp"
#include "evo/weighted_signals.hpp"

#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace evo {

struct EvolutionaryProblem {
  MaterialLawSymbol symbol;
  SpatialOperator a;
  Weight rho;
  Signal f;

  EvolutionaryProblem(MaterialLawSymbol s, SpatialOperator op, Weight w, Signal rhs)
      : symbol(std::move(s)), a(std::move(op)), rho(w), f(std::move(rhs)) {
    if (symbol.dim() != a.dim() || symbol.dim() != f.dim())
      throw InvalidArgument("EvolutionaryProblem: symbol, operator and forcing dimensions differ");
    if (!(rho.rho > 0.0) || !std::isfinite(rho.rho))
      throw InvalidArgument("EvolutionaryProblem: rho must be positive for a forward-causal solution");
  }
};

struct SolveOptions {
  unsigned threads = 1;
  /// Frequency matrices with reciprocal condition below this are singular.
  double rcond_tol = 1e-14;
  double edge_error_tol = kEdgeErrorTol;
};

struct SolveResult {
  Signal u;
  double residual = 0.0;
  double forcing_edge_mass = 0.0;
  double solution_edge_mass = 0.0;
  std::string family;
  std::vector<std::string> warnings;
};

namespace detail {

/// Runs body(j) for j in [0, n) on up to `threads` workers with a fixed
/// strided assignment, so results do not depend on scheduling.
inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
  const unsigned workers = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (workers == 1) {
    for (std::size_t j = 0; j < n; ++j) body(j);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t j = w; j < n; j += workers) body(j);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

using FrequencyMatrix = std::function<Mat(double xi)>;

/// Row j of the result is (system(xi_j)^{-1} F_j^T)^T.
inline Mat solve_rows(const SpectralSignal& F, const FrequencyMatrix& system, const SolveOptions& opt) {
  Mat out(F.values.rows(), F.values.cols());
  parallel_for(F.size(), opt.threads, [&](std::size_t j) {
    const auto row = static_cast<Eigen::Index>(j);
    const double xi = F.grid.xi(j);
    Eigen::PartialPivLU<Mat> lu(system(xi));
    if (!(lu.rcond() > opt.rcond_tol))
      throw SingularSystem("frequency operator is singular at index " + std::to_string(j) + ", xi = " +
                               format_double(xi),
                           j, xi);
    out.row(row) = lu.solve(F.values.row(row).transpose()).transpose();
  });
  return out;
}

inline Mat multiply_rows(const SpectralSignal& F, const FrequencyMatrix& op, unsigned threads) {
  Mat out(F.values.rows(), F.values.cols());
  parallel_for(F.size(), threads, [&](std::size_t j) {
    const auto row = static_cast<Eigen::Index>(j);
    out.row(row) = (op(F.grid.xi(j)) * F.values.row(row).transpose()).transpose();
  });
  return out;
}

inline Signal apply_frequency_operator(const Signal& u, Weight w, const FrequencyMatrix& op, unsigned threads = 1) {
  SpectralSignal U = fourier_laplace(u, w);
  U.values = multiply_rows(U, op, threads);
  return inverse_fourier_laplace(U);
}

inline double relative_residual(const Signal& lhs, const Signal& rhs, Weight w) {
  const double err = weighted_norm(lhs - rhs, w);
  const double ref = weighted_norm(rhs, w);
  return ref > 0.0 ? err / ref : err;
}

inline void check_edge(const Signal& f, Weight w, const SolveOptions& opt, SolveResult& r) {
  r.forcing_edge_mass = edge_mass(f, w);
  if (r.forcing_edge_mass > opt.edge_error_tol)
    throw InvalidArgument("forcing edge mass " + format_double(r.forcing_edge_mass) +
                          " is too large; extend the grid or use a decaying forcing");
  for (auto& s : edge_mass_warnings(r.forcing_edge_mass)) r.warnings.push_back("forcing: " + s);
}

inline void finish(SolveResult& r, Weight w) {
  r.solution_edge_mass = edge_mass(r.u, w);
  for (auto& s : edge_mass_warnings(r.solution_edge_mass)) r.warnings.push_back("solution: " + s);
}

}  // namespace detail

/// (i xi + rho) M(1/(i xi + rho)) + A.
inline Mat frequency_matrix(const EvolutionaryProblem& P, double xi) {
  return eval_frequency_operator(P.symbol, xi, P.rho.rho) + P.a.matrix();
}

/// Left-hand side of the evolutionary equation applied to u.
inline Signal apply_forward(const EvolutionaryProblem& P, const Signal& u, unsigned threads = 1) {
  Signal::check_compatible(u, P.f);
  return detail::apply_frequency_operator(u, P.rho, [&](double xi) { return frequency_matrix(P, xi); }, threads);
}

inline SolveResult solve(const EvolutionaryProblem& P, const SolveOptions& opt = {}) {
  SolveResult r{Signal::zeros(P.f.grid(), P.f.dim()), 0.0, 0.0, 0.0, {}, {}};
  r.family = family_name(P.symbol.family());
  detail::check_edge(P.f, P.rho, opt, r);
  SpectralSignal F = fourier_laplace(P.f, P.rho);
  F.values = detail::solve_rows(F, [&](double xi) { return frequency_matrix(P, xi); }, opt);
  r.u = inverse_fourier_laplace(F);
  r.residual = detail::relative_residual(apply_forward(P, r.u, opt.threads), P.f, P.rho);
  detail::finish(r, P.rho);
  return r;
}

/// Solves d/dt u + (1 - C*) B u = f with B = c + A through the equivalent
/// form (d/dt (1 - C*)^{-1} + B) u = (1 - C*)^{-1} f. The residual is
/// measured on the first form.
inline SolveResult solve_integro(const Kernel& C, double c, const SpatialOperator& a, const Signal& f, Weight rho,
                                 const SolveOptions& opt = {}) {
  if (!kernel_admissibility(C).ok()) throw InvalidArgument("solve_integro: kernel is not admissible");
  if (!(c > 0.0)) throw InvalidArgument("solve_integro: c must be positive");
  if (!(rho.rho > 0.0)) throw InvalidArgument("solve_integro: rho must be positive");
  if (C.dim() != a.dim() || C.dim() != f.dim()) throw InvalidArgument("solve_integro: dimension mismatch");
  SolveResult r{Signal::zeros(f.grid(), f.dim()), 0.0, 0.0, 0.0, {}, {}};
  r.family = "integro";
  detail::check_edge(f, rho, opt, r);
  const Mat b = c * detail::identity(C.dim()) + a.matrix();
  const double rh = rho.rho;
  const auto resolvent = [&](double xi) { return detail::resolvent_of_kernel(kernel_multiplier(C, xi, rh)); };

  SpectralSignal F = fourier_laplace(f, rho);
  F.values = detail::multiply_rows(F, resolvent, opt.threads);
  F.values = detail::solve_rows(
      F, [&](double xi) -> Mat { return cplx(rh, xi) * resolvent(xi) + b; }, opt);
  r.u = inverse_fourier_laplace(F);

  const auto original = [&](double xi) -> Mat {
    const Mat k = kernel_multiplier(C, xi, rh);
    return cplx(rh, xi) * detail::identity(C.dim()) + (detail::identity(C.dim()) - k) * b;
  };
  r.residual = detail::relative_residual(detail::apply_frequency_operator(r.u, rho, original, opt.threads), f, rho);
  detail::finish(r, rho);
  return r;
}

/// (C*u)(t_k) by the trapezoid rule over t_0..t_k; u is taken as zero before t_0.
inline Signal convolve_time(const Kernel& C, const Signal& u) {
  if (C.dim() != u.dim()) throw InvalidArgument("convolve_time: dimension mismatch");
  const std::size_t n = u.size();
  const double dt = u.grid().dt();
  std::vector<Mat> taps(n);
  for (std::size_t m = 0; m < n; ++m) taps[m] = kernel_eval(C, static_cast<double>(m) * dt);
  Mat out = Mat::Zero(u.values().rows(), u.values().cols());
  for (std::size_t k = 1; k < n; ++k) {
    Vec acc = Vec::Zero(static_cast<Eigen::Index>(u.dim()));
    for (std::size_t l = 0; l <= k; ++l) {
      const double w = (l == 0 || l == k) ? 0.5 : 1.0;
      acc += w * (taps[k - l] * u.values().row(static_cast<Eigen::Index>(l)).transpose());
    }
    out.row(static_cast<Eigen::Index>(k)) = dt * acc.transpose();
  }
  return Signal(u.grid(), std::move(out));
}

/// C*u as the Fourier-Laplace multiplier sqrt(2pi) C^(xi - i rho).
inline Signal convolve_spectral(const Kernel& C, const Signal& u, Weight rho) {
  if (C.dim() != u.dim()) throw InvalidArgument("convolve_spectral: dimension mismatch");
  return detail::apply_frequency_operator(u, rho, [&](double xi) { return kernel_multiplier(C, xi, rho.rho); });
}

// ---------------------------------------------------------------------------
// Initial value problems.

/// 1 on [0,1], 2 - t on (1,2), 0 elsewhere.
inline double cutoff_phi(double t) {
  if (t >= 0.0 && t <= 1.0) return 1.0;
  if (t > 1.0 && t < 2.0) return 2.0 - t;
  return 0.0;
}

/// phi(t / s): breakpoints 0, s, 2s.
inline double cutoff_phi(double t, double s) { return cutoff_phi(t / s); }

/// How samples that land exactly on a jump of the cutoff data are valued.
/// Mean-value sampling (the average of both one-sided limits) keeps the
/// spectral solve first-order accurate at the jump; literal sampling uses the
/// pointwise definitions.
enum class JumpSampling { kMeanValue, kLiteral };

struct IvpProblem {
  Mat m0;
  Mat m1;
  SpatialOperator a;
  Vec u0;
  Signal f;
  Weight rho;
  /// Cutoff scale s.
  double scale = 1.0;
  JumpSampling jumps = JumpSampling::kMeanValue;

  IvpProblem(Mat m0_, Mat m1_, SpatialOperator a_, Vec u0_, Signal f_, Weight rho_, double scale_ = 1.0)
      : m0(std::move(m0_)), m1(std::move(m1_)), a(std::move(a_)), u0(std::move(u0_)), f(std::move(f_)),
        rho(rho_), scale(scale_) {
    const auto n = static_cast<Eigen::Index>(a.dim());
    if (m0.rows() != n || m1.rows() != n || u0.size() != n || f.dim() != a.dim())
      throw InvalidArgument("IvpProblem: dimension mismatch");
    if (!u0.allFinite()) throw InvalidArgument("IvpProblem: u0 must be finite");
    if (!(scale > 0.0)) throw InvalidArgument("IvpProblem: cutoff scale must be positive");
    const auto start = support_lower_bound(f, 1e-14);
    if (start && *start < 0.0) throw InvalidArgument("IvpProblem: forcing must vanish for t < 0");
  }
};

namespace detail {

inline bool on_point(double t, double b, double dt) { return std::abs(t - b) <= 1e-9 * dt; }

}  // namespace detail

/// g = f + chi_(s,2s) M0 u0 / s - phi_s (M1 + A) u0.
inline Signal ivp_assemble_rhs(const IvpProblem& Q) {
  const double s = Q.scale;
  const double dt = Q.f.grid().dt();
  const bool mean = Q.jumps == JumpSampling::kMeanValue;
  const Vec jump_term = Q.m0 * Q.u0 / s;
  const Vec damp_term = (Q.m1 + Q.a.matrix()) * Q.u0;
  Mat g = Q.f.values();
  for (std::size_t k = 0; k < Q.f.size(); ++k) {
    const double t = Q.f.time(k);
    double chi = (t > s && t < 2.0 * s) ? 1.0 : 0.0;
    double phi = cutoff_phi(t, s);
    if (mean && (detail::on_point(t, s, dt) || detail::on_point(t, 2.0 * s, dt))) chi = 0.5;
    if (mean && detail::on_point(t, 0.0, dt)) phi = 0.5;
    const auto row = static_cast<Eigen::Index>(k);
    g.row(row) += (chi * jump_term - phi * damp_term).transpose();
  }
  return Signal(Q.f.grid(), std::move(g));
}

struct IvpResult {
  SolveResult solve;  // of the shifted problem for v = u - phi u0
  Signal u;
  double initial_gap = 0.0;
};

inline IvpResult ivp_solve(const IvpProblem& Q, const SolveOptions& opt = {}) {
  EvolutionaryProblem P(MaterialLawSymbol::dae(Q.m0, Q.m1), Q.a, Q.rho, ivp_assemble_rhs(Q));
  SolveResult v = solve(P, opt);
  Mat u = v.u.values();
  for (std::size_t k = 0; k < v.u.size(); ++k)
    u.row(static_cast<Eigen::Index>(k)) += cutoff_phi(v.u.time(k), Q.scale) * Q.u0.transpose();
  Signal us(v.u.grid(), std::move(u));
  const std::size_t k0 = us.grid().first_index_at_or_after(0.0);
  if (k0 >= us.size()) throw InvalidArgument("ivp_solve: the grid contains no t >= 0");
  const double gap = (Q.m0 * (us.at(k0) - Q.u0)).norm();
  return IvpResult{std::move(v), std::move(us), gap};
}

}  // namespace evo

#endif  // EVO_FREQUENCY_SOLVER_HPP_
