#ifndef EVO_TOOLS_CLI_COMMANDS_HPP_
#define EVO_TOOLS_CLI_COMMANDS_HPP_

// certify / solve / ivp / verify pipelines. Each returns the process exit
// code: 0 success, 1 analytic failure, 2 usage or configuration error.

#include "cli_config.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace evo::cli {

enum ExitCode : int { kOk = 0, kAnalyticFailure = 1, kConfigError = 2 };

struct Model {
  MaterialLawSymbol symbol;
  SpatialOperator a;
  std::optional<Kernel> kernel;  // integro family
  double c = 0.0;
};

namespace detail {

inline Mat polynomial_symbol(const std::vector<Mat>& p, cplx z) {
  Mat out = p.back();
  for (std::size_t k = p.size() - 1; k-- > 0;) out = (z * out + p[k]).eval();
  return out;
}

/// (1 - nu z) M(z / (1 - nu z)) = sum_k P_k z^k (1 - nu z)^{1-k}.
inline Mat polynomial_shifted(const std::vector<Mat>& p, double nu, cplx z) {
  const cplx a = 1.0 - nu * z;
  Mat out = a * p[0];
  cplx zk = 1.0;
  cplx ak = 1.0;  // a^{k-1}
  for (std::size_t k = 1; k < p.size(); ++k) {
    zk *= z;
    if (k >= 2) ak *= a;
    if (p[k].isZero(0.0)) continue;
    if (ak == 0.0) throw DomainError("custom symbol: shifted symbol has a pole at z = 1/nu");
    out += (zk / ak) * p[k];
  }
  return out;
}

inline MaterialLawSymbol custom_polynomial(const std::vector<Mat>& p) {
  const auto n = p[0].rows();
  for (const auto& m : p)
    if (m.rows() != n || m.cols() != n) throw ConfigError("custom: coefficients must be square of equal size");
  CustomLaw law;
  law.dim = static_cast<std::size_t>(n);
  law.eval = [p](cplx z) { return polynomial_symbol(p, z); };
  law.shifted = [p](double nu, cplx z) { return polynomial_shifted(p, nu, z); };
  return MaterialLawSymbol::custom(std::move(law));
}

}  // namespace detail

inline Model build_model(const RunConfig& cfg) {
  try {
    if (cfg.family == "mixed1d") {
      const auto& m = cfg.mixed;
      const double dx = m.length / static_cast<double>(m.p + 1);
      const auto sys = build_mixed_type_system(m.p, dx, indicator_from_interval(m.p, dx, m.omega0_a, m.omega0_b),
                                               indicator_from_interval(m.p, dx, m.omega1_a, m.omega1_b), m.c);
      return Model{MaterialLawSymbol::dae(sys.m0, sys.m1), SpatialOperator(sys.a), std::nullopt, 0.0};
    }
    std::optional<MaterialLawSymbol> symbol;
    std::optional<Kernel> kernel;
    if (cfg.family == "dae") {
      symbol = MaterialLawSymbol::dae(cfg.m0, cfg.m1);
    } else if (cfg.family == "delay") {
      symbol = MaterialLawSymbol::delay(cfg.m0, cfg.m1, cfg.h);
    } else if (cfg.family == "integro") {
      std::size_t dim = cfg.a ? static_cast<std::size_t>(cfg.a->rows()) : 1;
      if (!cfg.kernel.modes.empty()) dim = static_cast<std::size_t>(cfg.kernel.modes[0].gamma.rows());
      kernel = Kernel(dim, cfg.kernel.modes, cfg.kernel.nu0);
      symbol = MaterialLawSymbol::integro(*kernel, cfg.c);
    } else {
      symbol = detail::custom_polynomial(cfg.coefficients);
    }
    SpatialOperator a = cfg.a ? SpatialOperator(*cfg.a) : SpatialOperator::zero(symbol->dim());
    if (a.dim() != symbol->dim()) throw ConfigError("A has the wrong dimension");
    return Model{std::move(*symbol), std::move(a), std::move(kernel), cfg.c};
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

/// Smooth bump exp(1 - 1/(1 - x^2)) on [start, start + width], peak 1.
inline double pulse_profile(double t, double start, double width) {
  const double x = (t - start - 0.5 * width) / (0.5 * width);
  if (std::abs(x) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - x * x));
}

/// exp(-a (t - start)) for t > start, 1/2 at t = start, 0 before.
inline double step_exp_profile(double t, double start, double a, double dt) {
  if (std::abs(t - start) <= 1e-9 * dt) return 0.5;
  if (t < start) return 0.0;
  return std::exp(-a * (t - start));
}

inline Signal build_forcing(const RunConfig& cfg, const TimeGrid& grid, std::size_t dim) {
  const auto& f = cfg.forcing;
  if (f.type == "csv") {
    Signal s = [&] {
      try {
        return read_csv(f.path);
      } catch (const Error& e) {
        throw ConfigError(std::string("forcing csv: ") + e.what());
      }
    }();
    const auto& g = s.grid();
    if (g.size() != grid.size() || std::abs(g.t0() - grid.t0()) > 1e-9 || std::abs(g.dt() - grid.dt()) > 1e-12)
      throw ConfigError("forcing csv does not match the configured grid");
    if (s.dim() != dim) throw ConfigError("forcing csv has the wrong dimension");
    return Signal(grid, s.values());
  }
  if (f.type == "zero") return Signal::zeros(grid, dim);
  Vec dir = f.direction ? *f.direction : Vec::Ones(static_cast<Eigen::Index>(dim));
  if (static_cast<std::size_t>(dir.size()) != dim) throw ConfigError("forcing direction has the wrong dimension");
  dir *= f.amplitude;
  if (f.type == "pulse") {
    if (!(f.width > 0.0)) throw ConfigError("pulse width must be positive");
    return Signal::separable(grid, dir, [&](double t) { return pulse_profile(t, f.start, f.width); });
  }
  const double dt = grid.dt();
  return Signal::separable(grid, dir, [&](double t) { return step_exp_profile(t, f.start, f.rate, dt); });
}

/// Closed-form rate of the family; +inf for the pure algebraic DAE.
inline std::optional<double> closed_form_rate(const Model& m) {
  try {
    if (const auto* l = std::get_if<DaeLaw>(&m.symbol.law())) return dae_rate(l->m0, l->m1);
    if (const auto* l = std::get_if<DelayLaw>(&m.symbol.law())) return delay_rate(l->m0, l->m1, l->h);
    if (m.kernel) return integro_rate(*m.kernel, m.c);
  } catch (const Error&) {
  }
  return std::nullopt;
}

/// Configured nu, or 0.9 times the (capped) closed-form rate.
inline double effective_nu(RunConfig& cfg, const Model& m) {
  if (cfg.nu) return *cfg.nu;
  const auto rate = closed_form_rate(m);
  if (!rate) throw ConfigError("no closed-form rate for this family; set 'nu'");
  cfg.nu = 0.9 * std::min(*rate, cfg.sampling.rate_cap);
  return *cfg.nu;
}

namespace detail {

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw Error("cannot write " + p.string());
  os << text;
}

inline void write_echo(const std::filesystem::path& out, const RunConfig& cfg) {
  write_file(out / "resolved_config.json", resolved_json(cfg).dump(2) + "\n");
}

inline std::string metadata_kv(const std::string& command, const RunConfig& cfg, const SolveResult& r) {
  std::ostringstream os;
  os << "command=" << command << '\n';
  os << "family=" << cfg.family << '\n';
  os << "solver=" << r.family << '\n';
  os << "rho=" << format_double(cfg.rho) << '\n';
  os << "t0=" << format_double(cfg.t0) << '\n';
  os << "dt=" << format_double(cfg.dt) << '\n';
  os << "n_steps=" << cfg.n_steps << '\n';
  os << "residual=" << format_double(r.residual) << '\n';
  os << "forcing_edge_mass=" << format_double(r.forcing_edge_mass) << '\n';
  os << "solution_edge_mass=" << format_double(r.solution_edge_mass) << '\n';
  os << "warnings=" << r.warnings.size() << '\n';
  for (std::size_t i = 0; i < r.warnings.size(); ++i) os << "warning_" << i << '=' << r.warnings[i] << '\n';
  return os.str();
}

inline SolveResult run_solver(const RunConfig& cfg, const Model& m, unsigned threads) {
  const TimeGrid grid(cfg.t0, cfg.dt, cfg.n_steps);
  const Signal f = build_forcing(cfg, grid, m.symbol.dim());
  SolveOptions opt;
  opt.threads = threads;
  if (m.kernel) return solve_integro(*m.kernel, m.c, m.a, f, Weight(cfg.rho), opt);
  return solve(EvolutionaryProblem(m.symbol, m.a, Weight(cfg.rho), f), opt);
}

inline std::string certification_kv(const CertificationReport& r, const Model& m) {
  return to_kv(r) + "spatial_monotone_margin=" + format_double(m.a.monotone_margin()) + "\n";
}

}  // namespace detail

inline constexpr double kSolveResidualTol = 1e-8;

inline int cmd_certify(RunConfig cfg, const std::filesystem::path& out, unsigned /*threads*/ = 1) {
  const Model m = build_model(cfg);
  const double nu = effective_nu(cfg, m);
  std::filesystem::create_directories(out);
  const CertificationReport r = certify(m.symbol, nu, cfg.sampling);
  detail::write_file(out / "report.txt", to_text(r));
  detail::write_file(out / "report.kv", detail::certification_kv(r, m));
  detail::write_echo(out, cfg);
  return r.passed() ? kOk : kAnalyticFailure;
}

inline int cmd_solve(RunConfig cfg, const std::filesystem::path& out, unsigned threads = 1) {
  const Model m = build_model(cfg);
  std::filesystem::create_directories(out);
  detail::write_echo(out, cfg);
  const SolveResult r = detail::run_solver(cfg, m, threads);
  write_csv((out / "solution.csv").string(), r.u);
  detail::write_file(out / "metadata.kv", detail::metadata_kv("solve", cfg, r));
  return r.residual <= kSolveResidualTol ? kOk : kAnalyticFailure;
}

inline int cmd_ivp(RunConfig cfg, const std::filesystem::path& out, unsigned threads = 1) {
  if (cfg.family != "dae" && cfg.family != "mixed1d") throw ConfigError("ivp requires the dae or mixed1d family");
  const Model m = build_model(cfg);
  const auto& law = std::get<DaeLaw>(m.symbol.law());
  const auto n = static_cast<Eigen::Index>(m.symbol.dim());
  if (!cfg.u0) cfg.u0 = Vec::Zero(n);
  if (cfg.u0->size() != n) throw ConfigError("u0 has the wrong dimension");
  const TimeGrid grid(cfg.t0, cfg.dt, cfg.n_steps);
  const Signal f = build_forcing(cfg, grid, m.symbol.dim());
  std::optional<IvpProblem> q;
  try {
    q.emplace(law.m0, law.m1, m.a, *cfg.u0, f, Weight(cfg.rho), cfg.ivp_scale);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  std::filesystem::create_directories(out);
  detail::write_echo(out, cfg);
  SolveOptions opt;
  opt.threads = threads;
  const IvpResult r = ivp_solve(*q, opt);
  const double tol = 10.0 * cfg.dt * (law.m0 * *cfg.u0).norm() + 1e-12;
  write_csv((out / "solution.csv").string(), r.u);
  std::string meta = detail::metadata_kv("ivp", cfg, r.solve);
  meta += "initial_gap=" + format_double(r.initial_gap) + "\n";
  meta += "initial_gap_tolerance=" + format_double(tol) + "\n";
  detail::write_file(out / "metadata.kv", meta);
  return r.initial_gap <= tol ? kOk : kAnalyticFailure;
}

inline int cmd_verify(RunConfig cfg, const std::filesystem::path& out, unsigned threads = 1) {
  const Model m = build_model(cfg);
  const double nu = effective_nu(cfg, m);
  std::filesystem::create_directories(out);
  detail::write_echo(out, cfg);
  const CertificationReport cert = certify(m.symbol, nu, cfg.sampling);
  detail::write_file(out / "report.txt", to_text(cert));
  detail::write_file(out / "report.kv", detail::certification_kv(cert, m));
  if (!cert.passed()) return kAnalyticFailure;

  const SolveResult r = detail::run_solver(cfg, m, threads);
  write_csv((out / "solution.csv").string(), r.u);
  detail::write_file(out / "metadata.kv", detail::metadata_kv("verify", cfg, r));
  if (r.residual > kSolveResidualTol) return kAnalyticFailure;

  const double nu_certified = (cert.closed_form_rate && !cert.rate_unbounded) ? *cert.closed_form_rate : nu;
  std::string decay;
  bool passed = false;
  try {
    const StabilityVerdict v = verify_stability(r.u, nu_certified, cfg.margin);
    decay = to_kv(v);
    passed = v.passed;
  } catch (const InvalidArgument& e) {
    decay = std::string("fit_error=") + e.what() + "\nnu_certified=" + format_double(nu_certified) + "\npassed=0\n";
  }
  detail::write_file(out / "decay.kv", decay);
  return passed ? kOk : kAnalyticFailure;
}

/// Loads the config, runs the command and maps exceptions to exit codes.
template <typename Command>
int run_command(Command cmd, const std::string& config_path, const std::string& out, unsigned threads,
                std::ostream& err = std::cerr) {
  try {
    return cmd(load_config(config_path), std::filesystem::path(out), threads);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const SingularSystem& e) {
    err << "singular system: " << e.what() << '\n';
    return kAnalyticFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
}

}  // namespace evo::cli

#endif  // EVO_TOOLS_CLI_COMMANDS_HPP_
