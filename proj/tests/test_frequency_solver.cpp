#include "evo/frequency_solver.hpp"

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

namespace evo {
namespace {

Mat scalar(cplx v) { return Mat::Constant(1, 1, v); }

double bump(double t, double start, double width) {
  const double x = (t - start - 0.5 * width) / (0.5 * width);
  return std::abs(x) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - x * x)) : 0.0;
}

/// chi_[0,inf)(t) e^{-t}, valued 1/2 at the jump.
double step_exp(double t) {
  if (t == 0.0) return 0.5;
  return t > 0.0 ? std::exp(-t) : 0.0;
}

double gaussian(double t, double c, double s) { return std::exp(-((t - c) / s) * ((t - c) / s)); }

Signal scalar_signal(const TimeGrid& g, const std::function<double(double)>& p) {
  return Signal::separable(g, Vec::Ones(1), p);
}

double max_abs_interior(const Signal& a, const std::function<double(double)>& exact, double frac = 0.1) {
  const std::size_t n = a.size();
  const auto lo = static_cast<std::size_t>(frac * static_cast<double>(n));
  double err = 0.0;
  for (std::size_t k = lo; k < n - lo; ++k) err = std::max(err, std::abs(a.values()(k, 0) - exact(a.time(k))));
  return err;
}

TEST(Solve, ScalarDaeMatchesClosedForm) {
  const TimeGrid g(-1.0, 1.0 / 128.0, 4096);
  EvolutionaryProblem P(MaterialLawSymbol::dae(scalar(1.0), scalar(2.0)), SpatialOperator::zero(1), Weight(0.1),
                        scalar_signal(g, step_exp));
  const auto r = solve(P);
  const auto exact = [](double t) { return t >= 0.0 ? std::exp(-t) - std::exp(-2.0 * t) : 0.0; };
  EXPECT_LT(max_abs_interior(r.u, exact), 1e-6);
  EXPECT_LT(r.residual, 1e-10);
}

TEST(Solve, ZeroForcing) {
  const TimeGrid g(0.0, 0.1, 64);
  EvolutionaryProblem P(MaterialLawSymbol::dae(scalar(1.0), scalar(2.0)), SpatialOperator::zero(1), Weight(0.5),
                        Signal::zeros(g, 1));
  const auto r = solve(P);
  EXPECT_EQ(r.u.values().norm(), 0.0);
  EXPECT_EQ(r.residual, 0.0);
}

TEST(Solve, PureAlgebraicIsPointwise) {
  const TimeGrid g(-2.0, 1.0 / 32.0, 512);
  Mat m1(2, 2);
  m1 << 2.0, 0.5, 0.5, 1.0;
  Mat a(2, 2);
  a << 0.0, 1.0, -1.0, 0.0;
  Vec dir(2);
  dir << 1.0, cplx(0.0, 2.0);
  const Signal f = Signal::separable(g, dir, [](double t) { return gaussian(t, 4.0, 1.0); });
  EvolutionaryProblem P(MaterialLawSymbol::dae(Mat::Zero(2, 2), m1), SpatialOperator(a), Weight(0.3), f);
  const auto r = solve(P);
  const Mat inv = (m1 + a).inverse();
  double err = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) err = std::max(err, (r.u.at(k) - inv * f.at(k)).norm());
  EXPECT_LT(err, 1e-10);
  EXPECT_LT(r.residual, 1e-10);
}

TEST(ApplyForward, InvertsSolve) {
  const TimeGrid g(-2.0, 1.0 / 32.0, 512);
  Mat m0 = Mat::Zero(2, 2);
  m0(0, 0) = 1.0;
  EvolutionaryProblem P(MaterialLawSymbol::delay(m0, 2.0 * Mat::Identity(2, 2), -0.5),
                        SpatialOperator(Mat::Identity(2, 2)), Weight(0.4),
                        Signal::separable(g, Vec::Ones(2), [](double t) { return bump(t, 1.0, 2.0); }));
  const auto r = solve(P);
  const Signal back = apply_forward(P, r.u);
  EXPECT_LT(weighted_norm(back - P.f, P.rho) / weighted_norm(P.f, P.rho), 1e-10);
  EXPECT_EQ(apply_forward(P, Signal::zeros(g, 2)).values().norm(), 0.0);
}

TEST(ApplyForward, ExponentialIsSingleBin) {
  const double rho = 0.6;
  const TimeGrid g(-1.0, 1.0 / 16.0, 128);
  Mat m0(2, 2), m1(2, 2);
  m0 << 1.0, 0.0, 0.0, 0.0;
  m1 << 2.0, 1.0, -1.0, 3.0;
  Vec c0(2);
  c0 << 1.0, cplx(0.5, -1.0);
  const Signal u = Signal::separable(g, c0, [&](double t) { return std::exp(rho * t); });
  EvolutionaryProblem P(MaterialLawSymbol::dae(m0, m1), SpatialOperator::zero(2), Weight(rho), Signal::zeros(g, 2));
  const Signal out = apply_forward(P, u);
  const Vec expect = rho * m0 * c0 + m1 * c0;
  for (std::size_t k = 0; k < g.size(); ++k)
    EXPECT_LT((out.at(k) - std::exp(rho * g.time(k)) * expect).norm(), 1e-10 * std::exp(rho * g.time(k)));
}

TEST(Solve, DelayMatchesMethodOfSteps) {
  // u' + 2u + u(t - 1) = bump, u = 0 before the forcing starts.
  const double dt = 1.0 / 128.0;
  const TimeGrid g(-2.0, dt, 4096);
  const auto f = [](double t) { return bump(t, 0.0, 2.0); };
  EvolutionaryProblem P(MaterialLawSymbol::delay(scalar(1.0), scalar(2.0), -1.0), SpatialOperator::zero(1),
                        Weight(0.2), scalar_signal(g, f));
  const auto r = solve(P);
  EXPECT_LT(r.residual, 1e-10);
  // Crank-Nicolson on a finer grid with the delayed term taken from history.
  const int sub = 4;
  const double h = dt / sub;
  const int lag = static_cast<int>(std::lround(1.0 / h));
  const std::size_t steps = static_cast<std::size_t>(20.0 / h);
  std::vector<double> u(steps + 1, 0.0);
  const auto past = [&](std::size_t k) { return k >= static_cast<std::size_t>(lag) ? u[k - lag] : 0.0; };
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * h;
    const double rhs = u[k] + 0.5 * h * (f(t) - 2.0 * u[k] - past(k) + f(t + h) - past(k + 1));
    u[k + 1] = rhs / (1.0 + h);
  }
  double err = 0.0;
  for (std::size_t k = 0; k <= steps; k += sub) {
    const std::size_t idx = g.first_index_at_or_after(static_cast<double>(k) * h);
    err = std::max(err, std::abs(r.u.values()(idx, 0) - u[k]));
  }
  EXPECT_LT(err, 1e-5);
}

TEST(SolveIntegro, ZeroKernelReducesToDae) {
  const TimeGrid g(-2.0, 1.0 / 32.0, 512);
  const Signal f = scalar_signal(g, [](double t) { return bump(t, 0.0, 3.0); });
  Mat a = Mat::Zero(1, 1);
  a(0, 0) = 0.5;
  const auto ri = solve_integro(Kernel::zero(1, 0.5), 1.5, SpatialOperator(a), f, Weight(0.3));
  EvolutionaryProblem P(MaterialLawSymbol::dae(scalar(1.0), scalar(1.5)), SpatialOperator(a), Weight(0.3), f);
  const auto rd = solve(P);
  EXPECT_LT((ri.u.values() - rd.u.values()).norm() / rd.u.values().norm(), 1e-12);
  EXPECT_LT(ri.residual, 1e-10);
}

TEST(SolveIntegro, MatchesVolterraOracle) {
  const double dt = 1.0 / 256.0;
  const TimeGrid g(-2.0, dt, 8192);
  const Kernel C = Kernel::scalar(0.25, 1.0, 0.5);
  const auto r = solve_integro(C, 1.0, SpatialOperator::zero(1), scalar_signal(g, step_exp), Weight(0.1));
  EXPECT_LT(r.residual, 1e-10);
  const std::size_t steps = static_cast<std::size_t>(20.0 / dt);
  const auto u = oracle::volterra_trapezoid(
      [](double t) { return Eigen::MatrixXd::Constant(1, 1, 0.25 * std::exp(-t)); }, Eigen::MatrixXd::Identity(1, 1),
      [](double t) { return Eigen::VectorXd::Constant(1, t >= 0.0 ? std::exp(-t) : 0.0); }, 0.0, dt, steps);
  // The sample on the forcing jump carries an O(dt) error; all others are O(dt^2).
  double err = 0.0;
  for (std::size_t k = 1; k <= steps; ++k) {
    const std::size_t idx = g.first_index_at_or_after(static_cast<double>(k) * dt);
    err = std::max(err, std::abs(r.u.values()(idx, 0) - u[k](0)));
  }
  EXPECT_LT(err, 1e-4);
  EXPECT_LT(std::abs(r.u.values()(g.first_index_at_or_after(0.0), 0)), dt);
}

TEST(SolveIntegro, RejectsBadInput) {
  const TimeGrid g(0.0, 0.1, 64);
  const Signal f = Signal::zeros(g, 1);
  EXPECT_THROW(solve_integro(Kernel::scalar(0.8, 1.0, 0.5), 1.0, SpatialOperator::zero(1), f, Weight(0.3)),
               InvalidArgument);
  EXPECT_THROW(solve_integro(Kernel::scalar(0.2, 1.0, 0.5), 1.0, SpatialOperator::zero(1), f, Weight(-0.3)),
               InvalidArgument);
}

/// Pre-support mass relative to the peak.
double pre_support_mass(const Signal& u, double a) {
  double worst = 0.0;
  for (std::size_t k = 0; k < u.size() && u.time(k) < a; ++k) worst = std::max(worst, u.norm_at(k));
  return worst / u.max_norm();
}

TEST(Causality, AllFamilies) {
  const TimeGrid g(-2.0, 1.0 / 128.0, 4096);
  const Signal f = scalar_signal(g, [](double t) { return bump(t, 2.0, 2.0); });
  const Weight w(0.2);
  const auto dae = solve(EvolutionaryProblem(MaterialLawSymbol::dae(scalar(1.0), scalar(2.0)),
                                             SpatialOperator::zero(1), w, f));
  const auto delay = solve(EvolutionaryProblem(MaterialLawSymbol::delay(scalar(1.0), scalar(2.0), -1.0),
                                               SpatialOperator::zero(1), w, f));
  const auto integro = solve_integro(Kernel::scalar(0.25, 1.0, 0.5), 1.0, SpatialOperator::zero(1), f, w);
  for (const auto* r : {&dae, &delay, &integro}) {
    EXPECT_LT(pre_support_mass(r->u, 2.0), 1e-8) << r->family;
    EXPECT_LT(r->residual, 1e-10);
  }
}

TEST(Solve, RhoIndependence) {
  const TimeGrid g(-2.0, 1.0 / 64.0, 1024);
  const Signal f = scalar_signal(g, [](double t) { return gaussian(t, 2.0, 0.5); });
  for (const auto& M : {MaterialLawSymbol::dae(scalar(1.0), scalar(2.0)),
                        MaterialLawSymbol::delay(scalar(1.0), scalar(2.0), -0.5),
                        MaterialLawSymbol::integro(Kernel::scalar(0.25, 1.0, 0.5), 1.0)}) {
    const auto a = solve(EvolutionaryProblem(M, SpatialOperator::zero(1), Weight(0.5), f));
    const auto b = solve(EvolutionaryProblem(M, SpatialOperator::zero(1), Weight(2.0), f));
    const double peak = a.u.max_norm();
    double err = 0.0;
    for (std::size_t k = g.size() / 10; k < g.size() - g.size() / 10; ++k)
      err = std::max(err, (a.u.at(k) - b.u.at(k)).norm());
    EXPECT_LT(err / peak, 1e-6);
  }
}

TEST(Solve, Linearity) {
  std::mt19937 rng(8);
  const TimeGrid g(-2.0, 1.0 / 32.0, 512);
  Mat m0 = Mat::Identity(2, 2);
  m0(1, 1) = 0.0;
  Mat a(2, 2);
  a << 0.0, 1.0, -1.0, 0.0;
  const auto M = MaterialLawSymbol::dae(m0, Mat::Identity(2, 2));
  const Signal f = Signal::separable(g, Vec::Ones(2), [](double t) { return bump(t, 0.0, 2.0); });
  Vec d(2);
  d << 1.0, -2.0;
  const Signal h = Signal::separable(g, d, [](double t) { return gaussian(t, 3.0, 0.7); });
  const cplx alpha(0.7, -0.2), beta(-1.3, 0.4);
  const auto run = [&](const Signal& rhs) { return solve(EvolutionaryProblem(M, SpatialOperator(a), Weight(0.5), rhs)).u; };
  const Signal lhs = run(alpha * f + beta * h);
  const Signal rhs = alpha * run(f) + beta * run(h);
  EXPECT_LT((lhs.values() - rhs.values()).norm() / rhs.values().norm(), 1e-12);
}

TEST(Solve, SingularSystemReportsFrequency) {
  const TimeGrid g(-1.0, 0.1, 64);
  EvolutionaryProblem P(MaterialLawSymbol::dae(scalar(0.0), scalar(0.0)), SpatialOperator::zero(1), Weight(0.5),
                        scalar_signal(g, [](double t) { return gaussian(t, 2.0, 0.5); }));
  try {
    solve(P);
    FAIL() << "expected SingularSystem";
  } catch (const SingularSystem& e) {
    EXPECT_EQ(e.index(), 0U);
    EXPECT_DOUBLE_EQ(e.xi(), g.xi(0));
  }
}

TEST(Solve, RejectsEdgeMassAndBadWeight) {
  const TimeGrid g(0.0, 0.1, 64);
  const auto M = MaterialLawSymbol::dae(scalar(1.0), scalar(2.0));
  EXPECT_THROW(solve(EvolutionaryProblem(M, SpatialOperator::zero(1), Weight(0.01), scalar_signal(g, [](double) { return 1.0; }))),
               InvalidArgument);
  EXPECT_THROW(EvolutionaryProblem(M, SpatialOperator::zero(1), Weight(0.0), Signal::zeros(g, 1)), InvalidArgument);
  EXPECT_THROW(EvolutionaryProblem(M, SpatialOperator::zero(2), Weight(1.0), Signal::zeros(g, 1)), InvalidArgument);
}

TEST(Solve, ThreadCountDoesNotChangeBits) {
  const TimeGrid g(-2.0, 1.0 / 32.0, 512);
  Mat m0 = Mat::Identity(3, 3);
  Mat a = Mat::Zero(3, 3);
  a(0, 1) = 1.0;
  a(1, 0) = -1.0;
  EvolutionaryProblem P(MaterialLawSymbol::dae(m0, Mat::Identity(3, 3)), SpatialOperator(a), Weight(0.5),
                        Signal::separable(g, Vec::Ones(3), [](double t) { return bump(t, 0.0, 2.0); }));
  SolveOptions four;
  four.threads = 4;
  const auto r1 = solve(P);
  const auto r4 = solve(P, four);
  EXPECT_EQ(r1.u.values(), r4.u.values());
  EXPECT_EQ(r1.residual, r4.residual);
}

TEST(Convolution, ZeroInput) {
  const TimeGrid g(0.0, 0.1, 32);
  EXPECT_EQ(convolve_time(Kernel::scalar(0.25, 1.0, 0.5), Signal::zeros(g, 1)).values().norm(), 0.0);
}

TEST(Convolution, IndicatorClosedFormSecondOrder) {
  const double gamma = 0.25, beta = 1.0;
  const auto C = Kernel::scalar(gamma, beta, 0.5);
  double prev = 0.0;
  for (double dt : {1.0 / 32.0, 1.0 / 64.0}) {
    const TimeGrid g(0.0, dt, static_cast<std::size_t>(8.0 / dt));
    const Signal u = scalar_signal(g, [](double) { return 1.0; });
    const Signal cu = convolve_time(C, u);
    double err = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double t = g.time(k);
      err = std::max(err, std::abs(cu.values()(k, 0) - gamma * (1.0 - std::exp(-beta * t)) / beta));
    }
    EXPECT_LT(err, 0.05 * dt * dt);
    if (prev > 0.0) EXPECT_NEAR(prev / err, 4.0, 0.1);
    prev = err;
  }
}

TEST(Convolution, SpectralAgreesWithQuadrature) {
  const auto C = Kernel::scalar(0.25, 1.0, 0.5);
  double prev = 0.0;
  for (double dt : {1.0 / 256.0, 1.0 / 512.0}) {
    const TimeGrid g(-2.0, dt, static_cast<std::size_t>(16.0 / dt));
    const Signal u = scalar_signal(g, [](double t) { return gaussian(t, 2.0, 0.5); });
    const Signal a = convolve_spectral(C, u, Weight(0.5));
    const Signal b = convolve_time(C, u);
    double err = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) err = std::max(err, std::abs(a.values()(k, 0) - b.values()(k, 0)));
    EXPECT_LT(err, 1e-4);
    if (prev > 0.0) EXPECT_NEAR(prev / err, 4.0, 0.4);
    prev = err;
  }
}

TEST(Cutoff, Values) {
  EXPECT_EQ(cutoff_phi(0.5), 1.0);
  EXPECT_EQ(cutoff_phi(1.5), 0.5);
  EXPECT_EQ(cutoff_phi(-1.0), 0.0);
  EXPECT_EQ(cutoff_phi(3.0), 0.0);
  EXPECT_EQ(cutoff_phi(0.0), 1.0);
  EXPECT_EQ(cutoff_phi(1.0), 1.0);
  EXPECT_EQ(cutoff_phi(2.0), 0.0);
  EXPECT_EQ(cutoff_phi(3.0, 2.0), 0.5);
}

IvpProblem scalar_ivp(const TimeGrid& g, double u0, const Signal& f) {
  return IvpProblem(scalar(1.0), scalar(2.0), SpatialOperator::zero(1), Vec::Constant(1, u0), f, Weight(0.2));
}

TEST(IvpRhs, ZeroInitialValueKeepsForcing) {
  const TimeGrid g(-2.0, 1.0 / 16.0, 512);
  const Signal f = scalar_signal(g, step_exp);
  const Signal rhs = ivp_assemble_rhs(scalar_ivp(g, 0.0, f));
  EXPECT_EQ(rhs.values(), f.values());
}

TEST(IvpRhs, ScalarSubstitution) {
  const TimeGrid g(-2.0, 1.0 / 16.0, 512);
  IvpProblem q = scalar_ivp(g, 1.0, Signal::zeros(g, 1));
  q.jumps = JumpSampling::kLiteral;
  const Signal literal = ivp_assemble_rhs(q);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double t = g.time(k);
    const double chi = (t > 1.0 && t < 2.0) ? 1.0 : 0.0;
    EXPECT_EQ(literal.values()(k, 0).real(), chi - 2.0 * cutoff_phi(t));
    if (t >= 2.0) EXPECT_EQ(literal.values()(k, 0), cplx(0.0, 0.0));
  }
  q.jumps = JumpSampling::kMeanValue;
  const Signal mean = ivp_assemble_rhs(q);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double t = g.time(k);
    if (t == 0.0) EXPECT_EQ(mean.values()(k, 0).real(), -1.0);
    else if (t == 1.0) EXPECT_EQ(mean.values()(k, 0).real(), 0.5 - 2.0);
    else if (t == 2.0) EXPECT_EQ(mean.values()(k, 0).real(), 0.5);
    else EXPECT_EQ(mean.values()(k, 0), literal.values()(k, 0));
  }
}

TEST(IvpRhs, RejectsEarlyForcing) {
  const TimeGrid g(-2.0, 1.0 / 16.0, 512);
  EXPECT_THROW(scalar_ivp(g, 1.0, scalar_signal(g, [](double t) { return gaussian(t, 0.0, 1.0); })), InvalidArgument);
}

TEST(IvpSolve, ScalarDecay) {
  const double dt = 1.0 / 256.0;
  const TimeGrid g(-2.0, dt, 4096);
  const auto r = ivp_solve(scalar_ivp(g, 1.0, Signal::zeros(g, 1)));
  EXPECT_LT(r.solve.residual, 1e-10);
  EXPECT_LE(r.initial_gap, 10.0 * dt);
  // Within a few samples of the cutoff breakpoints 0, 1, 2 the error is O(dt).
  double err = 0.0;
  double at_breaks = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double t = g.time(k);
    if (t < 0.0) continue;
    const double e = std::abs(r.u.values()(k, 0) - std::exp(-2.0 * t));
    const bool near = t < 8 * dt || std::abs(t - 1.0) < 8 * dt || std::abs(t - 2.0) < 8 * dt;
    (near ? at_breaks : err) = std::max(near ? at_breaks : err, e);
  }
  EXPECT_LT(err, 1e-4);
  EXPECT_LT(at_breaks, dt);
}

TEST(IvpSolve, GapShrinksLinearly) {
  std::vector<double> gaps;
  for (double dt : {1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0}) {
    const TimeGrid g(-4.0, dt, static_cast<std::size_t>(32.0 / dt));
    gaps.push_back(ivp_solve(scalar_ivp(g, 1.0, Signal::zeros(g, 1))).initial_gap);
  }
  EXPECT_NEAR(gaps[0] / gaps[1], 2.0, 0.2);
  EXPECT_NEAR(gaps[1] / gaps[2], 2.0, 0.2);
}

TEST(IvpSolve, ZeroInitialValueIsPlainSolve) {
  const TimeGrid g(-1.0, 1.0 / 64.0, 2048);
  const Signal f = scalar_signal(g, step_exp);
  const auto r = ivp_solve(scalar_ivp(g, 0.0, f));
  const auto s = solve(EvolutionaryProblem(MaterialLawSymbol::dae(scalar(1.0), scalar(2.0)), SpatialOperator::zero(1),
                                           Weight(0.2), f));
  EXPECT_EQ(r.u.values(), s.u.values());
  EXPECT_EQ(ivp_solve(scalar_ivp(g, 0.0, Signal::zeros(g, 1))).initial_gap, 0.0);
}

TEST(IvpSolve, AlgebraicHasNoGap) {
  const TimeGrid g(-2.0, 1.0 / 32.0, 1024);
  const IvpProblem q(scalar(0.0), scalar(2.0), SpatialOperator::zero(1), Vec::Constant(1, 1.0), Signal::zeros(g, 1),
                     Weight(0.2));
  EXPECT_EQ(ivp_solve(q).initial_gap, 0.0);
}

}  // namespace
}  // namespace evo
