#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "geoqm/errors.hpp"

namespace geoqm {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};

/// Uniform time grid t_k = t0 + k*dt, k = 0..steps (steps+1 nodes).
struct TimeGrid {
  double t0 = 0.0;
  double t1 = 1.0;
  int steps = 1;

  TimeGrid() = default;
  TimeGrid(double start, double end, int n) : t0(start), t1(end), steps(n) {
    if (!(end >= start) || !std::isfinite(start) || !std::isfinite(end)) {
      throw Error(Errc::InvalidArgument, "time grid needs finite t1 >= t0");
    }
    if (n < 1) throw Error(Errc::InvalidArgument, "time grid needs steps >= 1");
  }

  double dt() const { return (t1 - t0) / steps; }
  int size() const { return steps + 1; }
  double time(int k) const { return k == steps ? t1 : t0 + k * dt(); }
  double midpoint(int k) const { return 0.5 * (time(k) + time(k + 1)); }

  std::vector<double> times() const {
    std::vector<double> out(static_cast<size_t>(size()));
    for (int k = 0; k < size(); ++k) out[static_cast<size_t>(k)] = time(k);
    return out;
  }

  /// Index of the node at time t; throws GridMismatch if t is not a node.
  int node_index(double t) const {
    if (steps == 0 || t1 == t0) {
      if (t == t0) return 0;
      throw Error(Errc::GridMismatch, "time is not a grid node");
    }
    const double pos = (t - t0) / dt();
    const double k = std::round(pos);
    if (k < 0 || k > steps || std::abs(pos - k) > 1e-9) {
      throw Error(Errc::GridMismatch, "time " + std::to_string(t) + " is not a grid node");
    }
    return static_cast<int>(k);
  }

  bool operator==(const TimeGrid&) const = default;
};

/// t -> Matrix on a uniform grid, either evaluated from a closed form on demand or
/// held as samples at the grid nodes. Sampled operators answer only at nodes; their
/// midpoint value is the mean of the two adjacent samples.
class TimeDependentOperator {
 public:
  using Generator = std::function<Matrix(double)>;

  TimeDependentOperator(TimeGrid grid, Generator generator)
      : grid_(grid), generator_(std::move(generator)) {
    if (!generator_) throw Error(Errc::InvalidArgument, "empty generator");
    const Matrix first = generator_(grid_.t0);
    rows_ = first.rows();
    cols_ = first.cols();
  }

  TimeDependentOperator(TimeGrid grid, std::vector<Matrix> samples)
      : grid_(grid), samples_(std::make_shared<const std::vector<Matrix>>(std::move(samples))) {
    if (static_cast<int>(samples_->size()) != grid_.size()) {
      throw Error(Errc::GridMismatch, "sample count must equal grid size");
    }
    rows_ = samples_->front().rows();
    cols_ = samples_->front().cols();
    for (const auto& s : *samples_) {
      if (s.rows() != rows_ || s.cols() != cols_) {
        throw Error(Errc::DimensionMismatch, "samples differ in dimension");
      }
    }
  }

  const TimeGrid& grid() const { return grid_; }
  Eigen::Index dim() const { return rows_; }
  bool has_generator() const { return static_cast<bool>(generator_); }

  Matrix node(int k) const {
    if (generator_) return generator_(grid_.time(k));
    return (*samples_)[static_cast<size_t>(k)];
  }

  /// Value at the centre of interval [t_k, t_{k+1}].
  Matrix midpoint(int k) const {
    if (generator_) return generator_(grid_.midpoint(k));
    return 0.5 * ((*samples_)[static_cast<size_t>(k)] + (*samples_)[static_cast<size_t>(k + 1)]);
  }

  Matrix at(double t) const {
    if (generator_) return generator_(t);
    return node(grid_.node_index(t));
  }

  std::vector<Matrix> samples() const {
    if (samples_) return *samples_;
    std::vector<Matrix> out;
    out.reserve(static_cast<size_t>(grid_.size()));
    for (int k = 0; k < grid_.size(); ++k) out.push_back(node(k));
    return out;
  }

  /// Same operator on another grid. Only closed-form operators can be moved.
  TimeDependentOperator on_grid(TimeGrid grid) const {
    if (!generator_) throw Error(Errc::GridMismatch, "sampled operators cannot be resampled");
    return TimeDependentOperator(grid, generator_);
  }

 private:
  TimeGrid grid_;
  Generator generator_;
  std::shared_ptr<const std::vector<Matrix>> samples_;
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
};

}  // namespace geoqm
