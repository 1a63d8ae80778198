#ifndef EVO_WEIGHTED_SIGNALS_HPP_
#define EVO_WEIGHTED_SIGNALS_HPP_

// Exponentially weighted signal spaces on a uniform grid: inner products,
// the discrete Fourier-Laplace pair, derivative, antiderivative and time
// translation.
//
// The transform pair is
//   F(xi_j) = dt/sqrt(2pi) * sum_k exp(-i xi_j t_k) exp(-rho t_k) f(t_k)
//   f(t_k)  = exp(rho t_k) * dxi/sqrt(2pi) * sum_j exp(i xi_j t_k) F(xi_j)
// and is exactly unitary between the weighted grid inner product and the
// dxi-weighted frequency sum, because dt*dxi*N = 2pi.

#include "evo/core.hpp"
#include "evo/signal.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <optional>

namespace evo {

/// Default edge-mass level above which transform results carry a warning.
inline constexpr double kEdgeWarnTol = 1e-8;
/// Edge-mass level above which solvers refuse to run.
inline constexpr double kEdgeErrorTol = 1e-3;

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// In-place unnormalized DFT of every column. sign = FFTW_FORWARD (-1) or
/// FFTW_BACKWARD (+1).
inline void fft_columns(Mat& data, int sign) {
  const int n = static_cast<int>(data.rows());
  auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * static_cast<std::size_t>(n)));
  if (buf == nullptr) throw Error("fftw_malloc failed");
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(n, buf, buf, sign, FFTW_ESTIMATE);
  }
  auto* cbuf = reinterpret_cast<cplx*>(buf);
  for (Eigen::Index c = 0; c < data.cols(); ++c) {
    for (int k = 0; k < n; ++k) cbuf[k] = data(k, c);
    fftw_execute(plan);
    for (int k = 0; k < n; ++k) data(k, c) = cbuf[k];
  }
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
}

inline double alternating_sign(std::size_t k) { return (k & 1U) ? -1.0 : 1.0; }

}  // namespace detail

/// sum_k <f(t_k)|g(t_k)> exp(-2 rho t_k) dt, conjugate-linear in f.
inline cplx weighted_inner(const Signal& f, const Signal& g, Weight w) {
  Signal::check_compatible(f, g);
  const TimeGrid& grid = f.grid();
  cplx acc{0.0, 0.0};
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    acc += f.values().row(row).dot(g.values().row(row)) * std::exp(-2.0 * w.rho * grid.time(k));
  }
  return acc * grid.dt();
}

inline double weighted_norm(const Signal& f, Weight w) {
  const TimeGrid& grid = f.grid();
  double acc = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k)
    acc += f.values().row(static_cast<Eigen::Index>(k)).squaredNorm() * std::exp(-2.0 * w.rho * grid.time(k));
  return std::sqrt(acc * grid.dt());
}

/// max(|e^{-rho t} f| at the first and last sample) / max_k |e^{-rho t_k} f(t_k)|.
/// Zero for the zero signal.
inline double edge_mass(const Signal& f, Weight w) {
  double peak = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k)
    peak = std::max(peak, f.norm_at(k) * std::exp(-w.rho * f.time(k)));
  if (peak == 0.0) return 0.0;
  const std::size_t last = f.size() - 1;
  const double first_v = f.norm_at(0) * std::exp(-w.rho * f.time(0));
  const double last_v = f.norm_at(last) * std::exp(-w.rho * f.time(last));
  return std::max(first_v, last_v) / peak;
}

inline std::vector<std::string> edge_mass_warnings(double mass, double tol = kEdgeWarnTol) {
  if (mass <= tol) return {};
  return {"edge mass " + format_double(mass) + " exceeds " + format_double(tol) +
          "; periodic wrap-around may contaminate the result"};
}

inline SpectralSignal fourier_laplace(const Signal& f, Weight w) {
  if (!std::isfinite(w.rho)) throw InvalidArgument("fourier_laplace: weight must be finite");
  const TimeGrid& grid = f.grid();
  const std::size_t n = grid.size();
  Mat data(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(f.dim()));
  for (std::size_t k = 0; k < n; ++k) {
    const double s = detail::alternating_sign(k) * std::exp(-w.rho * grid.time(k));
    data.row(static_cast<Eigen::Index>(k)) = s * f.values().row(static_cast<Eigen::Index>(k));
  }
  detail::fft_columns(data, FFTW_FORWARD);
  const double scale = grid.dt() / kSqrt2Pi;
  for (std::size_t j = 0; j < n; ++j) {
    const cplx phase = scale * std::exp(-kI * (grid.xi(j) * grid.t0()));
    data.row(static_cast<Eigen::Index>(j)) *= phase;
  }
  if (!data.allFinite()) throw InvalidArgument("fourier_laplace: transform overflowed");
  SpectralSignal out{grid, w, std::move(data), 0.0, {}};
  out.edge_mass = edge_mass(f, w);
  out.warnings = edge_mass_warnings(out.edge_mass);
  return out;
}

inline Signal inverse_fourier_laplace(const SpectralSignal& F) {
  const TimeGrid& grid = F.grid;
  const std::size_t n = grid.size();
  if (static_cast<std::size_t>(F.values.rows()) != n) throw InvalidArgument("inverse_fourier_laplace: length mismatch");
  if (!F.values.allFinite()) throw InvalidArgument("inverse_fourier_laplace: non-finite spectrum");
  Mat data(F.values.rows(), F.values.cols());
  for (std::size_t j = 0; j < n; ++j)
    data.row(static_cast<Eigen::Index>(j)) =
        std::exp(kI * (grid.xi(j) * grid.t0())) * F.values.row(static_cast<Eigen::Index>(j));
  detail::fft_columns(data, FFTW_BACKWARD);
  const double scale = grid.dxi() / kSqrt2Pi;
  for (std::size_t k = 0; k < n; ++k) {
    const double s = scale * detail::alternating_sign(k) * std::exp(F.weight.rho * grid.time(k));
    data.row(static_cast<Eigen::Index>(k)) *= s;
  }
  if (!data.allFinite()) throw InvalidArgument("inverse_fourier_laplace: result overflowed");
  return Signal(grid, std::move(data));
}

/// Multiplies every frequency row by a scalar symbol m(xi_j).
template <typename Symbol>
SpectralSignal apply_scalar_multiplier(SpectralSignal F, Symbol&& m) {
  for (std::size_t j = 0; j < F.size(); ++j)
    F.values.row(static_cast<Eigen::Index>(j)) *= m(F.grid.xi(j));
  return F;
}

/// d/dt realized as multiplication by (i xi + rho).
inline Signal derivative(const Signal& f, Weight w) {
  const double rho = w.rho;
  return inverse_fourier_laplace(
      apply_scalar_multiplier(fourier_laplace(f, w), [rho](double xi) { return cplx(rho, xi); }));
}

enum class AntiderivativeMode { kSpectral, kTimeDomain };

/// Inverse of derivative. Spectral mode multiplies by 1/(i xi + rho); time-domain
/// mode is the cumulative trapezoid integral from t0 (requires rho > 0, the
/// forward-causal case, and f vanishing before t0).
inline Signal antiderivative(const Signal& f, Weight w, AntiderivativeMode mode = AntiderivativeMode::kSpectral) {
  if (w.rho == 0.0) throw InvalidArgument("antiderivative: rho = 0 lies in the continuous spectrum of d/dt");
  if (mode == AntiderivativeMode::kSpectral) {
    const double rho = w.rho;
    return inverse_fourier_laplace(
        apply_scalar_multiplier(fourier_laplace(f, w), [rho](double xi) { return 1.0 / cplx(rho, xi); }));
  }
  if (w.rho < 0.0) throw InvalidArgument("antiderivative: time-domain mode integrates from the left and needs rho > 0");
  const double dt = f.grid().dt();
  Mat out = Mat::Zero(f.values().rows(), f.values().cols());
  for (Eigen::Index k = 1; k < out.rows(); ++k)
    out.row(k) = out.row(k - 1) + 0.5 * dt * (f.values().row(k - 1) + f.values().row(k));
  return Signal(f.grid(), std::move(out));
}

enum class TranslateMode { kSpectral, kIndex };

/// (tau_h f)(t) = f(t + h) for h = -m*dt, m >= 0. Both modes are exact
/// circular shifts of the weighted signal exp(-rho t) f.
inline Signal translate(const Signal& f, double h, Weight w, TranslateMode mode = TranslateMode::kIndex) {
  const double dt = f.grid().dt();
  if (h > 0.0) throw InvalidArgument("translate: h > 0 is backward causal");
  const double m_real = -h / dt;
  const double m_round = std::round(m_real);
  if (std::abs(m_real - m_round) > 1e-9 * std::max(1.0, m_real))
    throw InvalidArgument("translate: h must be an integer multiple of dt");
  const auto m = static_cast<std::size_t>(m_round);
  const std::size_t n = f.size();
  if (mode == TranslateMode::kSpectral) {
    const double rho = w.rho;
    const double hq = -static_cast<double>(m) * dt;
    return inverse_fourier_laplace(apply_scalar_multiplier(
        fourier_laplace(f, w), [rho, hq](double xi) { return std::exp(cplx(rho, xi) * hq); }));
  }
  const TimeGrid& grid = f.grid();
  const double hq = -static_cast<double>(m) * dt;
  Mat out(f.values().rows(), f.values().cols());
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = (k + n - (m % n)) % n;
    const double gain = std::exp(w.rho * (grid.time(k) + hq) - w.rho * grid.time(src));
    out.row(static_cast<Eigen::Index>(k)) = gain * f.values().row(static_cast<Eigen::Index>(src));
  }
  return Signal(grid, std::move(out));
}

/// Smallest t_k with |f(t_k)| > floor * max_k |f(t_k)|; nullopt for f = 0.
inline std::optional<double> support_lower_bound(const Signal& f, double floor) {
  if (!(floor > 0.0)) throw InvalidArgument("support_lower_bound: floor must be positive");
  const double peak = f.max_norm();
  if (peak == 0.0) return std::nullopt;
  for (std::size_t k = 0; k < f.size(); ++k)
    if (f.norm_at(k) > floor * peak) return f.time(k);
  return std::nullopt;
}

}  // namespace evo

#endif  // EVO_WEIGHTED_SIGNALS_HPP_
