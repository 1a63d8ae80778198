#ifndef EVO_ANALYSIS_HPP_
#define EVO_ANALYSIS_HPP_

// Empirical checks on computed solutions: log-linear tail fits, weighted norm
// profiles and forward causality.

#include "evo/core.hpp"
#include "evo/signal.hpp"
#include "evo/weighted_signals.hpp"

#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <utility>
#include <vector>

namespace evo {

struct DecayFit {
  double rate = 0.0;
  double intercept = 0.0;
  double t_a = 0.0;
  double t_b = 0.0;
  double rms_residual = 0.0;
  std::size_t samples_used = 0;
};

inline constexpr std::size_t kMinFitSamples = 8;
inline constexpr double kDefaultFitFloor = 1e-13;
// The tail window stops this factor above the post-peak minimum of |u|, where
// discretisation noise (growing like e^{rho t}) takes over from the decay.
inline constexpr double kNoiseClearance = 1e3;

/// Least-squares line through (t_k, ln|u(t_k)|) for t_k in [t_a, t_b] and
/// |u(t_k)| > floor; rate = -slope.
inline DecayFit fit_decay_rate(const Signal& u, double t_a, double t_b, double floor = kDefaultFitFloor) {
  if (!(t_a < t_b)) throw InvalidArgument("fit_decay_rate: empty window");
  if (t_a < u.grid().t0() - 1e-12 || t_b > u.grid().t_end() + 1e-12)
    throw InvalidArgument("fit_decay_rate: window leaves the grid");
  std::vector<double> ts;
  std::vector<double> ys;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double t = u.time(k);
    const double v = u.norm_at(k);
    if (t < t_a || t > t_b || !(v > floor)) continue;
    ts.push_back(t);
    ys.push_back(std::log(v));
  }
  if (ts.size() < kMinFitSamples)
    throw InvalidArgument("fit_decay_rate: only " + std::to_string(ts.size()) + " samples above the floor");
  const double n = static_cast<double>(ts.size());
  double mt = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    mt += ts[i];
    my += ys[i];
  }
  mt /= n;
  my /= n;
  double stt = 0.0;
  double sty = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += (ts[i] - mt) * (ts[i] - mt);
    sty += (ts[i] - mt) * (ys[i] - my);
  }
  const double slope = sty / stt;
  DecayFit fit;
  fit.rate = -slope;
  fit.intercept = my - slope * mt;
  fit.t_a = t_a;
  fit.t_b = t_b;
  fit.samples_used = ts.size();
  double ss = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double r = ys[i] - (fit.intercept + slope * ts[i]);
    ss += r * r;
  }
  fit.rms_residual = std::sqrt(ss / n);
  return fit;
}

/// [t_peak + 0.2 (T - t_peak), T - 0.1 (T - t_peak)] with t_peak = argmax |u|.
/// T is the grid end unless |u| has an interior post-peak minimum (a noise
/// floor); then T is the first time |u| falls to kNoiseClearance times it, or
/// the minimum itself when the decay spans fewer decades than that.
inline std::pair<double, double> auto_tail_window(const Signal& u) {
  std::size_t peak = 0;
  for (std::size_t k = 1; k < u.size(); ++k)
    if (u.norm_at(k) > u.norm_at(peak)) peak = k;
  std::size_t trough = peak;
  for (std::size_t k = peak; k < u.size(); ++k)
    if (u.norm_at(k) < u.norm_at(trough)) trough = k;
  std::size_t end = u.size() - 1;
  if (trough < end) {
    end = trough;
    const double level = kNoiseClearance * u.norm_at(trough);
    for (std::size_t k = peak + 1; k < trough; ++k)
      if (u.norm_at(k) <= level) {
        end = k;
        break;
      }
  }
  const double tp = u.time(peak);
  const double T = u.time(end);
  return {tp + 0.2 * (T - tp), T - 0.1 * (T - tp)};
}

/// (mu, ||u||_mu) for each mu. On a finite grid every value is finite; compare
/// profiles over two grid lengths to judge boundedness.
inline std::vector<std::pair<double, double>> weighted_norm_profile(const Signal& u, const std::vector<double>& mus) {
  std::vector<std::pair<double, double>> out;
  out.reserve(mus.size());
  for (double mu : mus) out.emplace_back(mu, weighted_norm(u, Weight(mu)));
  return out;
}

inline void write_profile_csv(std::ostream& os, const std::vector<std::pair<double, double>>& profile) {
  os << "mu,norm\n";
  for (const auto& [mu, v] : profile) os << format_double(mu) << ',' << format_double(v) << '\n';
}

/// max_{t_k < a} |u_f - u_g| / max_k |u_f| where u_x = solver(x).
inline double causality_check(const std::function<Signal(const Signal&)>& solver, const Signal& f, const Signal& g,
                              double a) {
  Signal::check_compatible(f, g);
  for (std::size_t k = 0; k < f.size() && f.time(k) < a; ++k)
    if (f.at(k) != g.at(k)) throw InvalidArgument("causality_check: inputs differ before a");
  const Signal uf = solver(f);
  const Signal ug = solver(g);
  const double peak = uf.max_norm();
  double worst = 0.0;
  for (std::size_t k = 0; k < uf.size() && uf.time(k) < a; ++k)
    worst = std::max(worst, (uf.at(k) - ug.at(k)).norm());
  if (peak == 0.0) return worst;
  return worst / peak;
}

inline double default_margin(double nu_certified) { return 0.05 * nu_certified + 0.01; }

struct StabilityVerdict {
  bool passed = false;
  DecayFit fit;
  double nu_certified = 0.0;
  double margin = 0.0;
};

/// Passes iff the tail fit over auto_tail_window(u) has rate >= nu - margin.
inline StabilityVerdict verify_stability(const Signal& u, double nu_certified, std::optional<double> margin = {}) {
  StabilityVerdict v;
  v.nu_certified = nu_certified;
  v.margin = margin.value_or(default_margin(nu_certified));
  const auto [ta, tb] = auto_tail_window(u);
  v.fit = fit_decay_rate(u, ta, tb);
  v.passed = v.fit.rate >= nu_certified - v.margin;
  return v;
}

inline std::string to_kv(const StabilityVerdict& v) {
  std::ostringstream os;
  os << "fitted_rate=" << format_double(v.fit.rate) << '\n';
  os << "intercept=" << format_double(v.fit.intercept) << '\n';
  os << "window_start=" << format_double(v.fit.t_a) << '\n';
  os << "window_end=" << format_double(v.fit.t_b) << '\n';
  os << "rms_residual=" << format_double(v.fit.rms_residual) << '\n';
  os << "samples_used=" << v.fit.samples_used << '\n';
  os << "nu_certified=" << format_double(v.nu_certified) << '\n';
  os << "margin=" << format_double(v.margin) << '\n';
  os << "passed=" << (v.passed ? 1 : 0) << '\n';
  return os.str();
}

}  // namespace evo

#endif  // EVO_ANALYSIS_HPP_
