#ifndef EVO_MATERIAL_LAWS_HPP_
#define EVO_MATERIAL_LAWS_HPP_

// Material-law symbols z -> M(z) for the DAE, delay and integro-differential
// families plus user supplied symbols, and the exponential-sum convolution
// kernels used by the integro family.

#include "evo/core.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace evo {

// ---------------------------------------------------------------------------
// Kernels C(t) = sum_j Gamma_j exp(-beta_j t) for t >= 0, zero for t < 0.

struct KernelMode {
  Mat gamma;
  double beta;
};

class Kernel {
 public:
  /// Only shapes, finiteness, beta_j > 0 and nu0 > 0 are enforced here; the
  /// structural conditions (Hermitian, commuting, weighted L1 < 1) are checked
  /// by kernel_admissibility() and check_kernel_conditions().
  Kernel(std::size_t dim, std::vector<KernelMode> modes, double nu0)
      : dim_(dim), modes_(std::move(modes)), nu0_(nu0) {
    if (dim == 0) throw InvalidArgument("Kernel: dimension must be positive");
    if (!(nu0 > 0.0) || !std::isfinite(nu0)) throw InvalidArgument("Kernel: nu0 must be positive");
    for (const auto& m : modes_) {
      if (static_cast<std::size_t>(m.gamma.rows()) != dim || static_cast<std::size_t>(m.gamma.cols()) != dim)
        throw InvalidArgument("Kernel: mode matrix has wrong shape");
      if (!m.gamma.allFinite()) throw InvalidArgument("Kernel: non-finite mode matrix");
      if (!(m.beta > 0.0) || !std::isfinite(m.beta)) throw InvalidArgument("Kernel: beta must be positive");
    }
  }

  static Kernel scalar(double gamma, double beta, double nu0) {
    return Kernel(1, {KernelMode{Mat::Constant(1, 1, gamma), beta}}, nu0);
  }
  static Kernel zero(std::size_t dim, double nu0) { return Kernel(dim, {}, nu0); }

  std::size_t dim() const { return dim_; }
  const std::vector<KernelMode>& modes() const { return modes_; }
  double nu0() const { return nu0_; }
  double beta_min() const {
    double b = std::numeric_limits<double>::infinity();
    for (const auto& m : modes_) b = std::min(b, m.beta);
    return b;
  }

 private:
  std::size_t dim_;
  std::vector<KernelMode> modes_;
  double nu0_;
};

inline Mat kernel_eval(const Kernel& C, double t) {
  const auto n = static_cast<Eigen::Index>(C.dim());
  Mat out = Mat::Zero(n, n);
  if (t < 0.0) return out;
  for (const auto& m : C.modes()) out += std::exp(-m.beta * t) * m.gamma;
  return out;
}

/// C^(z) = (2pi)^{-1/2} int_0^inf exp(-i t z) C(t) dt, closed form on Im z <= nu0.
inline Mat kernel_hat(const Kernel& C, cplx z) {
  if (z.imag() > C.nu0()) throw DomainError("kernel_hat: Im z exceeds nu0");
  const auto n = static_cast<Eigen::Index>(C.dim());
  Mat out = Mat::Zero(n, n);
  for (const auto& m : C.modes()) out += m.gamma / (m.beta + kI * z);
  return out / kSqrt2Pi;
}

/// sqrt(2pi) C^(xi - i rho) = sum_j Gamma_j / (beta_j + rho + i xi): the
/// Fourier-Laplace multiplier of u -> C * u at weight rho.
inline Mat kernel_multiplier(const Kernel& C, double xi, double rho) {
  if (-rho > C.nu0()) throw DomainError("kernel_multiplier: rho below -nu0");
  const auto n = static_cast<Eigen::Index>(C.dim());
  Mat out = Mat::Zero(n, n);
  const cplx s(rho, xi);
  for (const auto& m : C.modes()) out += m.gamma / (m.beta + s);
  return out;
}

/// int_0^inf ||C(t)||_2 exp(nu t) dt: Gauss-Kronrod on [0, T*] plus the
/// analytic tail bound, with T* chosen so that the tail is below 1e-12.
inline double kernel_weighted_l1(const Kernel& C, double nu) {
  if (C.modes().empty()) return 0.0;
  if (nu >= C.beta_min()) throw InvalidArgument("kernel_weighted_l1: nu >= beta_min, the integral diverges");
  const double count = static_cast<double>(C.modes().size());
  double t_star = 0.0;
  for (const auto& m : C.modes()) {
    const double g = spectral_norm(m.gamma);
    const double decay = m.beta - nu;
    if (g == 0.0) continue;
    t_star = std::max(t_star, std::log(count * g / (decay * 1e-12)) / decay);
  }
  double tail = 0.0;
  for (const auto& m : C.modes()) {
    const double decay = m.beta - nu;
    tail += spectral_norm(m.gamma) * std::exp(-decay * t_star) / decay;
  }
  if (t_star == 0.0) return 0.0;
  const auto integrand = [&](double t) { return spectral_norm(kernel_eval(C, t)) * std::exp(nu * t); };
  using boost::math::quadrature::gauss_kronrod;
  const double body = gauss_kronrod<double, 31>::integrate(integrand, 0.0, t_star, 20, 1e-14);
  return body + tail;
}

struct KernelAdmissibility {
  bool hermitian = true;
  bool commuting = true;
  bool decay_ok = true;  // beta_min > nu0
  double weighted_l1 = 0.0;  // at nu0, +inf when decay fails
  bool l1_ok = true;
  double max_hermitian_defect = 0.0;
  double max_commutator = 0.0;
  bool ok() const { return hermitian && commuting && decay_ok && l1_ok; }
};

/// Conditions that do not need frequency sampling: Hermitian modes, pairwise
/// commuting modes, beta_min > nu0 and weighted L1 norm at nu0 below one.
inline KernelAdmissibility kernel_admissibility(const Kernel& C) {
  KernelAdmissibility r;
  const auto& modes = C.modes();
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const double d = (modes[i].gamma - modes[i].gamma.adjoint()).cwiseAbs().maxCoeff();
    r.max_hermitian_defect = std::max(r.max_hermitian_defect, d);
    for (std::size_t j = i + 1; j < modes.size(); ++j) {
      const Mat comm = modes[i].gamma * modes[j].gamma - modes[j].gamma * modes[i].gamma;
      r.max_commutator = std::max(r.max_commutator, spectral_norm(comm));
    }
  }
  r.hermitian = r.max_hermitian_defect <= kStructureTol;
  r.commuting = r.max_commutator <= kStructureTol;
  r.decay_ok = C.beta_min() > C.nu0();
  r.weighted_l1 = r.decay_ok ? kernel_weighted_l1(C, C.nu0()) : std::numeric_limits<double>::infinity();
  r.l1_ok = r.weighted_l1 < 1.0;
  return r;
}

// ---------------------------------------------------------------------------
// Symbols.

/// M(z) = M0 + z M1.
struct DaeLaw {
  Mat m0;
  Mat m1;
};

/// M(z) = M0 + z exp(h/z) + z M1, h < 0.
struct DelayLaw {
  Mat m0;
  Mat m1;
  double h;
};

/// M(z) = (1 - sqrt(2pi) C^(-i/z))^{-1} + c z.
struct IntegroLaw {
  Kernel kernel;
  double c;
};

/// Pointwise symbol supplied by the caller.
struct CustomLaw {
  std::size_t dim = 0;
  std::function<Mat(cplx)> eval;
  /// Points where eval must not be called.
  std::vector<cplx> singularities;
  /// Optional closed form of z -> (1 - nu z) M(z / (1 - nu z)) including the
  /// removable point z = 1/nu.
  std::function<Mat(double, cplx)> shifted;
};

enum class LawFamily { kDae, kDelay, kIntegro, kCustom };

inline const char* family_name(LawFamily f) {
  switch (f) {
    case LawFamily::kDae: return "dae";
    case LawFamily::kDelay: return "delay";
    case LawFamily::kIntegro: return "integro";
    case LawFamily::kCustom: return "custom";
  }
  return "unknown";
}

class MaterialLawSymbol {
 public:
  using Variant = std::variant<DaeLaw, DelayLaw, IntegroLaw, CustomLaw>;

  static MaterialLawSymbol dae(Mat m0, Mat m1) {
    check_pair(m0, m1, "dae");
    return MaterialLawSymbol(DaeLaw{std::move(m0), std::move(m1)});
  }

  static MaterialLawSymbol delay(Mat m0, Mat m1, double h) {
    check_pair(m0, m1, "delay");
    if (!(h < 0.0) || !std::isfinite(h)) throw InvalidArgument("delay: h must be negative");
    return MaterialLawSymbol(DelayLaw{std::move(m0), std::move(m1), h});
  }

  static MaterialLawSymbol integro(Kernel kernel, double c) {
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("integro: c must be positive");
    const auto adm = kernel_admissibility(kernel);
    if (!adm.ok()) throw InvalidArgument("integro: kernel is not admissible");
    return MaterialLawSymbol(IntegroLaw{std::move(kernel), c});
  }

  static MaterialLawSymbol custom(CustomLaw law) {
    if (law.dim == 0 || !law.eval) throw InvalidArgument("custom: dimension and evaluator are required");
    return MaterialLawSymbol(std::move(law));
  }

  LawFamily family() const { return static_cast<LawFamily>(law_.index()); }
  const Variant& law() const { return law_; }

  std::size_t dim() const {
    return std::visit(
        [](const auto& l) -> std::size_t {
          using T = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<T, IntegroLaw>) return l.kernel.dim();
          else if constexpr (std::is_same_v<T, CustomLaw>) return l.dim;
          else return static_cast<std::size_t>(l.m0.rows());
        },
        law_);
  }

  /// Radius parameter nu0 of the excluded ball B[-1/(2nu0), 1/(2nu0)] outside
  /// which the symbol is analytic; +inf when the symbol is analytic on C\{0}
  /// (or entire).
  double analyticity_nu() const {
    if (const auto* l = std::get_if<IntegroLaw>(&law_)) return l->kernel.nu0();
    return std::numeric_limits<double>::infinity();
  }

 private:
  explicit MaterialLawSymbol(Variant v) : law_(std::move(v)) {}

  static void check_pair(const Mat& m0, const Mat& m1, const char* who) {
    if (!is_square(m0) || !is_square(m1) || m0.rows() != m1.rows() || m0.rows() == 0)
      throw InvalidArgument(std::string(who) + ": M0 and M1 must be square of equal size");
    if (!m0.allFinite() || !m1.allFinite()) throw InvalidArgument(std::string(who) + ": non-finite coefficients");
    if (!is_hermitian(m0)) throw InvalidArgument(std::string(who) + ": M0 must be selfadjoint");
    if (hermitian_part_min_eig(m0) < -kStructureTol)
      throw InvalidArgument(std::string(who) + ": M0 must be non-negative");
  }

  Variant law_;
};

namespace detail {

inline Mat identity(std::size_t n) {
  return Mat::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
}

/// (I - K)^{-1} by LU; a near-singular factor means the admissibility
/// guarantee ||K|| < 1 was violated.
inline Mat resolvent_of_kernel(const Mat& k) {
  const Mat a = identity(static_cast<std::size_t>(k.rows())) - k;
  Eigen::PartialPivLU<Mat> lu(a);
  if (!(lu.rcond() > 1e-14)) throw Error("integro symbol: I - sqrt(2pi) C^ is singular; kernel admissibility violated");
  return lu.inverse();
}

/// sum_j Gamma_j z / (1 + (beta_j - nu) z) = sqrt(2pi) C^(-i(1/z - nu)),
/// continuous through z = 0.
inline Mat kernel_in_z(const Kernel& C, double nu, cplx z) {
  const auto n = static_cast<Eigen::Index>(C.dim());
  Mat out = Mat::Zero(n, n);
  for (const auto& m : C.modes()) out += m.gamma * (z / (1.0 + (m.beta - nu) * z));
  return out;
}

inline void check_custom_point(const CustomLaw& l, cplx z) {
  for (const auto& s : l.singularities)
    if (std::abs(z - s) <= 1e-14 * std::max(1.0, std::abs(s)))
      throw DomainError("custom symbol evaluated at a declared singularity");
}

}  // namespace detail

/// M(z).
inline Mat eval_symbol(const MaterialLawSymbol& M, cplx z) {
  return std::visit(
      [&](const auto& l) -> Mat {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, DaeLaw>) {
          return l.m0 + z * l.m1;
        } else if constexpr (std::is_same_v<T, DelayLaw>) {
          if (z == 0.0) throw DomainError("delay symbol: z = 0 is not in the domain");
          return l.m0 + z * std::exp(l.h / z) * detail::identity(M.dim()) + z * l.m1;
        } else if constexpr (std::is_same_v<T, IntegroLaw>) {
          if (z == 0.0) throw DomainError("integro symbol: z = 0 is not in the domain");
          if (!((1.0 / z).real() > -l.kernel.nu0()))
            throw DomainError("integro symbol: z lies in the excluded ball B[-1/(2nu0), 1/(2nu0)]");
          return detail::resolvent_of_kernel(detail::kernel_in_z(l.kernel, 0.0, z)) +
                 z * l.c * detail::identity(M.dim());
        } else {
          detail::check_custom_point(l, z);
          return l.eval(z);
        }
      },
      M.law());
}

/// (i xi + rho) M(1/(i xi + rho)) in a per-family simplified form that does
/// not evaluate M near z = 0.
inline Mat eval_frequency_operator(const MaterialLawSymbol& M, double xi, double rho) {
  const cplx s(rho, xi);
  return std::visit(
      [&](const auto& l) -> Mat {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, DaeLaw>) {
          return s * l.m0 + l.m1;
        } else if constexpr (std::is_same_v<T, DelayLaw>) {
          Mat out = s * l.m0 + l.m1;
          out.diagonal().array() += std::exp(s * l.h);
          return out;
        } else if constexpr (std::is_same_v<T, IntegroLaw>) {
          Mat out = s * detail::resolvent_of_kernel(kernel_multiplier(l.kernel, xi, rho));
          out.diagonal().array() += l.c;
          return out;
        } else {
          if (s == 0.0) throw DomainError("custom symbol: frequency operator undefined at i xi + rho = 0");
          return s * eval_symbol(M, 1.0 / s);
        }
      },
      M.law());
}

/// Analytic extension of z -> (1 - nu z) M(z / (1 - nu z)).
inline Mat shifted_symbol(const MaterialLawSymbol& M, double nu, cplx z) {
  return std::visit(
      [&](const auto& l) -> Mat {
        using T = std::decay_t<decltype(l)>;
        const cplx a = 1.0 - nu * z;
        if constexpr (std::is_same_v<T, DaeLaw>) {
          return a * l.m0 + z * l.m1;
        } else if constexpr (std::is_same_v<T, DelayLaw>) {
          Mat out = a * l.m0 + z * l.m1;
          // z exp((1/z - nu) h) -> 0 as z -> 0 inside B(r, r) since h < 0.
          if (z != 0.0) out.diagonal().array() += z * std::exp((1.0 / z - nu) * l.h);
          return out;
        } else if constexpr (std::is_same_v<T, IntegroLaw>) {
          Mat out = a * detail::resolvent_of_kernel(detail::kernel_in_z(l.kernel, nu, z));
          out.diagonal().array() += l.c * z;
          return out;
        } else {
          if (!l.shifted) throw InvalidArgument("shifted_symbol: custom symbol has no extension rule");
          return l.shifted(nu, z);
        }
      },
      M.law());
}

}  // namespace evo

#endif  // EVO_MATERIAL_LAWS_HPP_
