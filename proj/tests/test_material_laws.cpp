#include "evo/material_laws.hpp"

#include <gtest/gtest.h>

#include <random>

namespace evo {
namespace {

Mat scalar(cplx v) { return Mat::Constant(1, 1, v); }

MaterialLawSymbol scalar_dae() { return MaterialLawSymbol::dae(scalar(1.0), scalar(2.0)); }
MaterialLawSymbol scalar_delay() { return MaterialLawSymbol::delay(scalar(1.0), scalar(2.0), -1.0); }
MaterialLawSymbol scalar_integro() { return MaterialLawSymbol::integro(Kernel::scalar(0.25, 1.0, 0.5), 1.0); }

Mat hermitian(std::mt19937& rng, int n) {
  std::normal_distribution<double> d;
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cplx(d(rng), d(rng));
  return 0.5 * (a + a.adjoint());
}

TEST(EvalSymbol, ScalarFamilies) {
  EXPECT_NEAR(std::abs(eval_symbol(scalar_dae(), 0.5)(0, 0) - 2.0), 0.0, 1e-15);
  EXPECT_NEAR(eval_symbol(scalar_delay(), 1.0)(0, 0).real(), 3.0 + std::exp(-1.0), 1e-14);
  EXPECT_NEAR(eval_symbol(scalar_integro(), 1.0)(0, 0).real(), 1.0 / 0.875 + 1.0, 1e-14);
  EXPECT_NEAR(eval_symbol(scalar_integro(), 1.0)(0, 0).real(), 2.142857142857143, 1e-12);
}

TEST(EvalSymbol, DomainErrors) {
  EXPECT_NO_THROW(eval_symbol(scalar_dae(), 0.0));
  EXPECT_THROW(eval_symbol(scalar_delay(), 0.0), DomainError);
  EXPECT_THROW(eval_symbol(scalar_integro(), 0.0), DomainError);
  // 1/z = -0.6 lies inside the excluded ball for nu0 = 0.5.
  EXPECT_THROW(eval_symbol(scalar_integro(), -1.0 / 0.6), DomainError);
  CustomLaw law{1, [](cplx z) { return scalar(1.0 / (z - 2.0)); }, {cplx(2.0, 0.0)}, {}};
  const auto custom = MaterialLawSymbol::custom(law);
  EXPECT_THROW(eval_symbol(custom, 2.0), DomainError);
  EXPECT_THROW(shifted_symbol(custom, 0.1, 0.5), InvalidArgument);
}

TEST(EvalSymbol, ConstructionChecks) {
  EXPECT_THROW(MaterialLawSymbol::dae(scalar(-1.0), scalar(2.0)), InvalidArgument);
  Mat nonherm(2, 2);
  nonherm << 1.0, 1.0, 0.0, 1.0;
  EXPECT_THROW(MaterialLawSymbol::dae(nonherm, Mat::Identity(2, 2)), InvalidArgument);
  EXPECT_THROW(MaterialLawSymbol::delay(scalar(1.0), scalar(2.0), 0.5), InvalidArgument);
  EXPECT_THROW(MaterialLawSymbol::integro(Kernel::scalar(0.8, 1.0, 0.5), 1.0), InvalidArgument);
  EXPECT_THROW(MaterialLawSymbol::integro(Kernel::scalar(0.25, 1.0, 0.5), 0.0), InvalidArgument);
  EXPECT_THROW(Kernel::scalar(0.25, -1.0, 0.5), InvalidArgument);
}

TEST(FrequencyOperator, ScalarValues) {
  EXPECT_NEAR(std::abs(eval_frequency_operator(scalar_dae(), 0.0, 1.0)(0, 0) - 3.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(eval_frequency_operator(scalar_delay(), 0.0, 0.0)(0, 0) - 3.0), 0.0, 1e-15);
}

TEST(FrequencyOperator, ConsistentWithSymbol) {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> xi_d(-20.0, 20.0), rho_d(0.05, 3.0);
  const auto k2 = Kernel(2, {KernelMode{Mat::Identity(2, 2) * 0.1, 2.0}, KernelMode{Mat::Identity(2, 2) * 0.05, 1.5}}, 0.5);
  Mat m0 = Mat::Zero(2, 2);
  m0(0, 0) = 1.0;
  Mat m1(2, 2);
  m1 << 2.0, cplx(0.0, 1.0), cplx(0.0, 1.0), 3.0;
  const std::vector<MaterialLawSymbol> laws{scalar_dae(), scalar_delay(), scalar_integro(),
                                            MaterialLawSymbol::dae(m0, m1), MaterialLawSymbol::delay(m0, m1, -0.7),
                                            MaterialLawSymbol::integro(k2, 0.8)};
  for (const auto& M : laws) {
    for (int i = 0; i < 50; ++i) {
      const double xi = xi_d(rng), rho = rho_d(rng);
      const cplx s(rho, xi);
      const Mat direct = s * eval_symbol(M, 1.0 / s);
      const Mat simplified = eval_frequency_operator(M, xi, rho);
      EXPECT_LT((direct - simplified).norm() / simplified.norm(), 1e-12);
    }
  }
}

TEST(ShiftedSymbol, NoShiftIsSymbol) {
  for (const auto& M : {scalar_dae(), scalar_delay(), scalar_integro()}) {
    const cplx z(0.7, 0.3);
    EXPECT_LT((shifted_symbol(M, 0.0, z) - eval_symbol(M, z)).norm(), 1e-15);
  }
}

TEST(ShiftedSymbol, RemovablePoint) {
  EXPECT_NEAR(std::abs(shifted_symbol(scalar_dae(), 1.0, 1.0)(0, 0) - 2.0), 0.0, 1e-15);
  for (const auto& M : {scalar_dae(), scalar_delay(), scalar_integro()}) {
    const double nu = 0.4;
    const Mat at = shifted_symbol(M, nu, 1.0 / nu);
    const Mat near = shifted_symbol(M, nu, cplx(1.0 / nu + 1e-7, 1e-7));
    EXPECT_TRUE(at.allFinite());
    EXPECT_LT((at - near).norm(), 1e-5);
  }
}

TEST(ShiftedSymbol, MatchesDefinitionAwayFromRemovablePoint) {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double nu = 0.3;
  for (const auto& M : {scalar_dae(), scalar_delay(), scalar_integro()}) {
    for (int i = 0; i < 40; ++i) {
      const cplx z = 1.0 + cplx(u(rng), u(rng)) * 0.9;  // inside B(1, 1)
      if (std::abs(z - 1.0 / nu) < 1e-3) continue;
      const cplx a = 1.0 - nu * z;
      const Mat def = a * eval_symbol(M, z / a);
      EXPECT_LT((shifted_symbol(M, nu, z) - def).norm() / def.norm(), 1e-12);
    }
  }
}

TEST(Kernel, Evaluation) {
  const auto C = Kernel::scalar(0.25, 1.0, 0.5);
  EXPECT_EQ(kernel_eval(C, -0.1)(0, 0), cplx(0.0, 0.0));
  EXPECT_DOUBLE_EQ(kernel_eval(C, 0.0)(0, 0).real(), 0.25);
  EXPECT_NEAR(kernel_eval(C, std::log(2.0))(0, 0).real(), 0.125, 1e-15);
}

TEST(Kernel, Transform) {
  const auto C = Kernel::scalar(0.25, 1.0, 0.5);
  EXPECT_NEAR(kernel_hat(C, 0.0)(0, 0).real(), 0.0997356, 1e-7);
  const cplx expect = 0.25 / (kSqrt2Pi * cplx(0.5, 1.0));
  EXPECT_LT(std::abs(kernel_hat(C, cplx(1.0, 0.5))(0, 0) - expect), 1e-15);
  EXPECT_EQ(kernel_hat(Kernel::scalar(0.0, 1.0, 0.5), 0.3)(0, 0), cplx(0.0, 0.0));
  EXPECT_THROW(kernel_hat(C, cplx(0.0, 0.6)), DomainError);
}

TEST(Kernel, ReflectionSymmetry) {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const Kernel C(2, {KernelMode{hermitian(rng, 2) * 0.1, 1.5}, KernelMode{Mat::Identity(2, 2) * 0.05, 2.0}}, 0.5);
  for (int i = 0; i < 20; ++i) {
    const cplx z(u(rng), std::min(0.5, u(rng)));
    EXPECT_LT((kernel_hat(C, -std::conj(z)) - kernel_hat(C, z).adjoint()).norm(), 1e-14);
  }
}

TEST(Kernel, WeightedL1) {
  const auto C = Kernel::scalar(0.25, 1.0, 0.5);
  EXPECT_NEAR(kernel_weighted_l1(C, 0.5), 0.5, 1e-10);
  EXPECT_NEAR(kernel_weighted_l1(Kernel::scalar(0.3, 2.0, 0.5), 0.0), 0.15, 1e-10);
  EXPECT_EQ(kernel_weighted_l1(Kernel::zero(2, 0.5), 0.3), 0.0);
  EXPECT_THROW(kernel_weighted_l1(C, 1.0), InvalidArgument);
  double prev = -1.0;
  for (double nu = -1.0; nu < 0.95; nu += 0.1) {
    const double v = kernel_weighted_l1(C, nu);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(Kernel, MultiplierBoundedByWeightedL1) {
  const Kernel C(1, {KernelMode{scalar(0.2), 1.0}, KernelMode{scalar(0.1), 3.0}}, 0.5);
  for (double rho : {-0.5, -0.2, 0.0, 1.0}) {
    const double bound = kernel_weighted_l1(C, -rho);
    for (double xi = -30.0; xi <= 30.0; xi += 0.25)
      EXPECT_LE(spectral_norm(kernel_multiplier(C, xi, rho)), bound + 1e-12);
  }
}

TEST(Kernel, Admissibility) {
  EXPECT_TRUE(kernel_admissibility(Kernel::scalar(0.25, 1.0, 0.5)).ok());
  const auto heavy = kernel_admissibility(Kernel::scalar(0.6, 1.0, 0.5));
  EXPECT_FALSE(heavy.l1_ok);
  EXPECT_FALSE(kernel_admissibility(Kernel::scalar(0.1, 0.4, 0.5)).decay_ok);
}

TEST(HermitianPart, MinEigenvalue) {
  EXPECT_DOUBLE_EQ(hermitian_part_min_eig(2.0 * Mat::Identity(2, 2)), 2.0);
  Mat skew(2, 2);
  skew << 0.0, 1.0, -1.0, 0.0;
  EXPECT_NEAR(hermitian_part_min_eig(skew), 0.0, 1e-15);
  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 3.0;
  EXPECT_NEAR(hermitian_part_min_eig(d + 5.0 * skew), 1.0, 1e-14);
}

}  // namespace
}  // namespace evo
