#ifndef EVO_SIGNAL_HPP_
#define EVO_SIGNAL_HPP_

// Uniformly sampled vector-valued signals and their frequency-domain
// counterparts.

#include "evo/core.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

namespace evo {

/// Uniform time grid t_k = t0 + k*dt, k = 0..n_steps-1, together with its
/// centered conjugate frequency grid xi_j = 2*pi*(j - n_steps/2)/(n_steps*dt).
class TimeGrid {
 public:
  TimeGrid(double t0, double dt, std::size_t n_steps) : t0_(t0), dt_(dt), n_(n_steps) {
    if (!std::isfinite(t0)) throw InvalidArgument("TimeGrid: t0 must be finite");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("TimeGrid: dt must be positive");
    if (n_steps < 8 || (n_steps & (n_steps - 1)) != 0)
      throw InvalidArgument("TimeGrid: n_steps must be a power of two and at least 8");
  }

  double t0() const { return t0_; }
  double dt() const { return dt_; }
  std::size_t size() const { return n_; }
  double time(std::size_t k) const { return t0_ + static_cast<double>(k) * dt_; }
  double t_end() const { return time(n_ - 1); }

  double dxi() const { return 2.0 * std::numbers::pi / (static_cast<double>(n_) * dt_); }
  double xi(std::size_t j) const {
    return dxi() * (static_cast<double>(j) - static_cast<double>(n_ / 2));
  }

  /// Index of the first sample with t_k >= t (n_steps if none).
  std::size_t first_index_at_or_after(double t) const {
    const double x = std::ceil((t - t0_) / dt_ - 1e-9);
    if (x <= 0.0) return 0;
    if (x >= static_cast<double>(n_)) return n_;
    return static_cast<std::size_t>(x);
  }

  friend bool operator==(const TimeGrid& a, const TimeGrid& b) {
    return a.t0_ == b.t0_ && a.dt_ == b.dt_ && a.n_ == b.n_;
  }

 private:
  double t0_;
  double dt_;
  std::size_t n_;
};

/// Exponential weight rho (1/s) of the space H_{rho,0}.
struct Weight {
  double rho;
  constexpr explicit Weight(double r) : rho(r) {}
};

/// Time samples of a C^n-valued function. Row k of values() is the state at
/// t_k.
class Signal {
 public:
  Signal(TimeGrid grid, Mat values) : grid_(grid), values_(std::move(values)) {
    if (static_cast<std::size_t>(values_.rows()) != grid_.size())
      throw InvalidArgument("Signal: number of rows must equal the number of time steps");
    if (values_.cols() < 1) throw InvalidArgument("Signal: dimension must be at least 1");
    if (!values_.allFinite()) throw InvalidArgument("Signal: non-finite sample");
  }

  static Signal zeros(TimeGrid grid, std::size_t dim) {
    return Signal(grid, Mat::Zero(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(dim)));
  }

  /// Samples fn(t) at every grid time.
  static Signal sample(TimeGrid grid, std::size_t dim, const std::function<Vec(double)>& fn) {
    Mat v(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t k = 0; k < grid.size(); ++k) {
      Vec x = fn(grid.time(k));
      if (static_cast<std::size_t>(x.size()) != dim) throw InvalidArgument("Signal::sample: wrong vector length");
      v.row(static_cast<Eigen::Index>(k)) = x.transpose();
    }
    return Signal(grid, std::move(v));
  }

  /// Scalar profile times a fixed state vector.
  static Signal separable(TimeGrid grid, const Vec& direction, const std::function<double(double)>& profile) {
    Mat v(static_cast<Eigen::Index>(grid.size()), direction.size());
    for (std::size_t k = 0; k < grid.size(); ++k)
      v.row(static_cast<Eigen::Index>(k)) = profile(grid.time(k)) * direction.transpose();
    return Signal(grid, std::move(v));
  }

  const TimeGrid& grid() const { return grid_; }
  std::size_t size() const { return grid_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(values_.cols()); }
  const Mat& values() const { return values_; }
  double time(std::size_t k) const { return grid_.time(k); }
  Vec at(std::size_t k) const { return values_.row(static_cast<Eigen::Index>(k)).transpose(); }

  /// Euclidean norm of the state at t_k.
  double norm_at(std::size_t k) const { return values_.row(static_cast<Eigen::Index>(k)).norm(); }

  double max_norm() const {
    double m = 0.0;
    for (std::size_t k = 0; k < size(); ++k) m = std::max(m, norm_at(k));
    return m;
  }

  friend Signal operator+(const Signal& a, const Signal& b) {
    check_compatible(a, b);
    return Signal(a.grid_, a.values_ + b.values_);
  }
  friend Signal operator-(const Signal& a, const Signal& b) {
    check_compatible(a, b);
    return Signal(a.grid_, a.values_ - b.values_);
  }
  friend Signal operator*(cplx s, const Signal& a) { return Signal(a.grid_, s * a.values_); }

  static void check_compatible(const Signal& a, const Signal& b) {
    if (!(a.grid_ == b.grid_)) throw InvalidArgument("signals live on different grids");
    if (a.dim() != b.dim()) throw InvalidArgument("signals have different dimensions");
  }

 private:
  TimeGrid grid_;
  Mat values_;
};

/// Samples of the Fourier-Laplace transform on the centered frequency grid.
/// Row j of values() belongs to grid().xi(j).
struct SpectralSignal {
  TimeGrid grid;
  Weight weight;
  Mat values;
  /// Edge mass of the weighted input the spectrum was computed from.
  double edge_mass = 0.0;
  std::vector<std::string> warnings;

  std::size_t size() const { return grid.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(values.cols()); }
};

// ---------------------------------------------------------------------------
// CSV: header t,re_0,im_0,...; one row per sample; %.17g.

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline void write_csv(std::ostream& os, const Signal& s) {
  os << 't';
  for (std::size_t i = 0; i < s.dim(); ++i) os << ",re_" << i << ",im_" << i;
  os << '\n';
  for (std::size_t k = 0; k < s.size(); ++k) {
    os << format_double(s.time(k));
    for (std::size_t i = 0; i < s.dim(); ++i) {
      const cplx v = s.values()(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i));
      os << ',' << format_double(v.real()) << ',' << format_double(v.imag());
    }
    os << '\n';
  }
}

inline void write_csv(const std::string& path, const Signal& s) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path + " for writing");
  write_csv(os, s);
}

/// Reads a signal written by write_csv. The grid is reconstructed from the
/// time column, which must be uniform.
inline Signal read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidArgument("csv: empty input");
  std::size_t cols = 1;
  for (char ch : line) cols += (ch == ',');
  if (cols < 3 || (cols - 1) % 2 != 0) throw InvalidArgument("csv: header must be t,re_0,im_0,...");
  const std::size_t dim = (cols - 1) / 2;
  std::vector<double> times;
  std::vector<cplx> data;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw InvalidArgument("csv: cannot parse '" + cell + "'");
      }
    }
    if (row.size() != cols) throw InvalidArgument("csv: row has wrong number of columns");
    times.push_back(row[0]);
    for (std::size_t i = 0; i < dim; ++i) data.emplace_back(row[1 + 2 * i], row[2 + 2 * i]);
  }
  if (times.size() < 2) throw InvalidArgument("csv: need at least two rows");
  const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double expect = times.front() + static_cast<double>(k) * dt;
    if (std::abs(times[k] - expect) > 1e-9 * std::max(1.0, std::abs(expect)))
      throw InvalidArgument("csv: time column is not uniform");
  }
  TimeGrid grid(times.front(), dt, times.size());
  Mat v(static_cast<Eigen::Index>(times.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t k = 0; k < times.size(); ++k)
    for (std::size_t i = 0; i < dim; ++i)
      v(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = data[k * dim + i];
  return Signal(grid, std::move(v));
}

inline Signal read_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidArgument("cannot open " + path);
  return read_csv(is);
}

}  // namespace evo

#endif  // EVO_SIGNAL_HPP_
