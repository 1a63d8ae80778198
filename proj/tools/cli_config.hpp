#ifndef EVO_TOOLS_CLI_CONFIG_HPP_
#define EVO_TOOLS_CLI_CONFIG_HPP_

// JSON run configuration for the evo command-line tool. Every optional field
// has an explicit default that is written back by resolved_json().

#include "evo/evo.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace evo::cli {

using json = nlohmann::json;

/// Malformed or inconsistent configuration (exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct ForcingSpec {
  std::string type = "pulse";  // pulse | step_exp | csv | zero
  double start = 0.0;
  double width = 2.0;  // pulse
  double rate = 1.0;   // step_exp decay rate a
  double amplitude = 1.0;
  std::string path;  // csv, resolved against the config directory
  std::optional<Vec> direction;
};

struct KernelSpec {
  double nu0 = 0.0;
  std::vector<KernelMode> modes;
};

struct MixedSpec {
  std::size_t p = 48;
  double length = 1.0;
  double omega0_a = 0.0, omega0_b = 1.0 / 3.0;
  double omega1_a = 1.0 / 3.0, omega1_b = 2.0 / 3.0;
  double c = 1.0;
};

struct RunConfig {
  std::string family;  // dae | delay | integro | mixed1d | custom
  Mat m0, m1;
  std::optional<Mat> a;
  double h = -1.0;
  KernelSpec kernel;
  double c = 1.0;
  MixedSpec mixed;
  std::vector<Mat> coefficients;  // custom: M(z) = sum_k P_k z^k
  double t0 = 0.0;
  double dt = 1.0 / 64.0;
  std::size_t n_steps = 1024;
  double rho = 0.5;
  ForcingSpec forcing;
  std::optional<double> nu;
  SamplingConfig sampling;
  std::optional<Vec> u0;
  double ivp_scale = 1.0;
  std::optional<double> margin;
};

namespace detail {

inline cplx parse_entry(const json& e) {
  if (e.is_number()) return {e.get<double>(), 0.0};
  if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
    return {e[0].get<double>(), e[1].get<double>()};
  throw ConfigError("matrix entry must be a number or a [re, im] pair");
}

/// A number (1x1) or a list of rows of entries.
inline Mat parse_matrix(const json& j, const std::string& what) {
  try {
    if (j.is_number()) return Mat::Constant(1, 1, parse_entry(j));
    if (!j.is_array() || j.empty() || !j[0].is_array()) throw ConfigError("expected a list of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Mat m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const json& row = j[static_cast<std::size_t>(r)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw ConfigError("ragged rows");
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = parse_entry(row[static_cast<std::size_t>(c)]);
    }
    return m;
  } catch (const ConfigError& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

inline Vec parse_vector(const json& j, const std::string& what) {
  if (j.is_number()) return Vec::Constant(1, parse_entry(j));
  if (!j.is_array() || j.empty()) throw ConfigError(what + ": expected a list");
  Vec v(static_cast<Eigen::Index>(j.size()));
  try {
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = parse_entry(j[i]);
  } catch (const ConfigError& e) {
    throw ConfigError(what + ": " + e.what());
  }
  return v;
}

inline json matrix_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(row);
  }
  return rows;
}

inline json vector_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v(i).real(), v(i).imag()});
  return out;
}

// Absent and null both mean "use the default"; the echo writes unset optionals as null.
inline bool has(const json& j, const char* key) { return j.contains(key) && !j.at(key).is_null(); }

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!has(j, key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("field '") + key + "' has the wrong type");
  }
}

inline const json& require(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
  return j.at(key);
}

inline std::pair<double, double> parse_interval(const json& j, const char* key, std::pair<double, double> fallback) {
  if (!has(j, key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ConfigError(std::string("field '") + key + "' must be [a, b]");
  return {v[0].get<double>(), v[1].get<double>()};
}

}  // namespace detail

inline RunConfig parse_config(const json& j, const std::filesystem::path& base_dir = {}) {
  using namespace detail;
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig cfg;
  cfg.family = get_or<std::string>(j, "family", "");
  if (cfg.family == "dae" || cfg.family == "delay") {
    cfg.m0 = parse_matrix(require(j, "M0"), "M0");
    cfg.m1 = parse_matrix(require(j, "M1"), "M1");
    if (cfg.family == "delay") cfg.h = get_or<double>(j, "h", -1.0);
  } else if (cfg.family == "integro") {
    const json& k = require(j, "kernel");
    cfg.kernel.nu0 = get_or<double>(k, "nu0", 0.0);
    for (const auto& m : require(k, "modes")) {
      cfg.kernel.modes.push_back(KernelMode{parse_matrix(require(m, "gamma"), "kernel gamma"),
                                            get_or<double>(m, "beta", 0.0)});
    }
    cfg.c = get_or<double>(j, "c", 1.0);
  } else if (cfg.family == "mixed1d") {
    const json m = j.contains("mixed1d") ? j.at("mixed1d") : json::object();
    cfg.mixed.p = get_or<std::size_t>(m, "p", cfg.mixed.p);
    cfg.mixed.length = get_or<double>(m, "length", cfg.mixed.length);
    std::tie(cfg.mixed.omega0_a, cfg.mixed.omega0_b) =
        parse_interval(m, "omega0", {cfg.mixed.omega0_a, cfg.mixed.omega0_b});
    std::tie(cfg.mixed.omega1_a, cfg.mixed.omega1_b) =
        parse_interval(m, "omega1", {cfg.mixed.omega1_a, cfg.mixed.omega1_b});
    cfg.mixed.c = get_or<double>(m, "c", cfg.mixed.c);
  } else if (cfg.family == "custom") {
    for (const auto& p : require(j, "coefficients")) cfg.coefficients.push_back(parse_matrix(p, "coefficient"));
    if (cfg.coefficients.empty()) throw ConfigError("custom: at least one coefficient is required");
  } else {
    throw ConfigError("family must be one of dae, delay, integro, mixed1d, custom");
  }
  if (has(j, "A")) cfg.a = parse_matrix(j.at("A"), "A");

  const json& g = require(j, "grid");
  cfg.t0 = get_or<double>(g, "t0", cfg.t0);
  cfg.dt = get_or<double>(g, "dt", cfg.dt);
  cfg.n_steps = get_or<std::size_t>(g, "n_steps", cfg.n_steps);
  cfg.rho = get_or<double>(j, "rho", cfg.rho);

  if (has(j, "forcing")) {
    const json& f = j.at("forcing");
    cfg.forcing.type = get_or<std::string>(f, "type", cfg.forcing.type);
    cfg.forcing.start = get_or<double>(f, "start", cfg.forcing.start);
    cfg.forcing.width = get_or<double>(f, "width", cfg.forcing.width);
    cfg.forcing.rate = get_or<double>(f, "a", cfg.forcing.rate);
    cfg.forcing.amplitude = get_or<double>(f, "amplitude", cfg.forcing.amplitude);
    if (has(f, "direction")) cfg.forcing.direction = parse_vector(f.at("direction"), "forcing direction");
    if (cfg.forcing.type == "csv") {
      std::filesystem::path p = get_or<std::string>(f, "path", "");
      if (p.empty()) throw ConfigError("csv forcing needs a path");
      if (p.is_relative()) p = base_dir / p;
      if (!std::filesystem::exists(p)) throw ConfigError("forcing file " + p.string() + " does not exist");
      cfg.forcing.path = p.string();
    } else if (cfg.forcing.type != "pulse" && cfg.forcing.type != "step_exp" && cfg.forcing.type != "zero") {
      throw ConfigError("forcing type must be pulse, step_exp, csv or zero");
    }
  }

  if (has(j, "nu")) cfg.nu = get_or<double>(j, "nu", 0.0);
  if (has(j, "sampling")) {
    const json& s = j.at("sampling");
    auto& sc = cfg.sampling;
    sc.sigma_max = get_or<double>(s, "sigma_max", sc.sigma_max);
    sc.n_sigma = get_or<std::size_t>(s, "n_sigma", sc.n_sigma);
    sc.tau_max = get_or<double>(s, "tau_max", sc.tau_max);
    sc.n_tau = get_or<std::size_t>(s, "n_tau", sc.n_tau);
    sc.radii = get_or<std::vector<double>>(s, "radii", sc.radii);
    sc.rate_cap = get_or<double>(s, "rate_cap", sc.rate_cap);
  }
  if (has(j, "u0")) cfg.u0 = parse_vector(j.at("u0"), "u0");
  if (has(j, "ivp")) cfg.ivp_scale = get_or<double>(j.at("ivp"), "scale", cfg.ivp_scale);
  if (has(j, "margin")) cfg.margin = get_or<double>(j, "margin", 0.0);

  if (!(cfg.rho > 0.0)) throw ConfigError("rho must be positive");
  if (!(cfg.dt > 0.0)) throw ConfigError("grid.dt must be positive");
  if (cfg.n_steps < 8 || (cfg.n_steps & (cfg.n_steps - 1)) != 0)
    throw ConfigError("grid.n_steps must be a power of two and at least 8");
  if (cfg.nu && !(*cfg.nu >= 0.0)) throw ConfigError("nu must be non-negative");
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j, std::filesystem::path(path).parent_path());
}

/// The configuration with every default filled in.
inline json resolved_json(const RunConfig& cfg) {
  using detail::matrix_json;
  json j;
  j["family"] = cfg.family;
  if (cfg.family == "dae" || cfg.family == "delay") {
    j["M0"] = matrix_json(cfg.m0);
    j["M1"] = matrix_json(cfg.m1);
    if (cfg.family == "delay") j["h"] = cfg.h;
  } else if (cfg.family == "integro") {
    json modes = json::array();
    for (const auto& m : cfg.kernel.modes) modes.push_back({{"gamma", matrix_json(m.gamma)}, {"beta", m.beta}});
    j["kernel"] = {{"nu0", cfg.kernel.nu0}, {"modes", modes}};
    j["c"] = cfg.c;
  } else if (cfg.family == "mixed1d") {
    const auto& m = cfg.mixed;
    j["mixed1d"] = {{"p", m.p},
                    {"length", m.length},
                    {"omega0", {m.omega0_a, m.omega0_b}},
                    {"omega1", {m.omega1_a, m.omega1_b}},
                    {"c", m.c}};
  } else if (cfg.family == "custom") {
    json cs = json::array();
    for (const auto& p : cfg.coefficients) cs.push_back(matrix_json(p));
    j["coefficients"] = cs;
  }
  j["A"] = cfg.a ? matrix_json(*cfg.a) : json(nullptr);
  j["grid"] = {{"t0", cfg.t0}, {"dt", cfg.dt}, {"n_steps", cfg.n_steps}};
  j["rho"] = cfg.rho;
  json f = {{"type", cfg.forcing.type},
            {"start", cfg.forcing.start},
            {"width", cfg.forcing.width},
            {"a", cfg.forcing.rate},
            {"amplitude", cfg.forcing.amplitude}};
  if (cfg.forcing.type == "csv") f["path"] = cfg.forcing.path;
  f["direction"] = cfg.forcing.direction ? detail::vector_json(*cfg.forcing.direction) : json(nullptr);
  j["forcing"] = f;
  j["nu"] = cfg.nu ? json(*cfg.nu) : json(nullptr);
  const auto& s = cfg.sampling;
  j["sampling"] = {{"sigma_max", s.sigma_max}, {"n_sigma", s.n_sigma}, {"tau_max", s.tau_max},
                   {"n_tau", s.n_tau},         {"radii", s.radii},     {"rate_cap", s.rate_cap}};
  j["u0"] = cfg.u0 ? detail::vector_json(*cfg.u0) : json(nullptr);
  j["ivp"] = {{"scale", cfg.ivp_scale}};
  j["margin"] = cfg.margin ? json(*cfg.margin) : json(nullptr);
  return j;
}

}  // namespace evo::cli

#endif  // EVO_TOOLS_CLI_CONFIG_HPP_
