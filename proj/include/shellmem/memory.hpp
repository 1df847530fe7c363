#pragma once

#include <functional>
#include <vector>

#include "shellmem/geometry.hpp"
#include "shellmem/material.hpp"

namespace shellmem {

/// Uniform grid t_n = n T / N on [0, T].
class TimeGrid {
 public:
  TimeGrid(double T, int N);
  double T() const { return T_; }
  int N() const { return N_; }
  double dt() const { return T_ / N_; }
  double t(int n) const { return n == N_ ? T_ : n * dt(); }

 private:
  double T_;
  int N_;
};

/// Coefficients of one exact exponential-integrator step
///   H_{n+1} = decay * H_n + w0 * f_n + w1 * f_{n+1},
/// exact when f is linear on [t_n, t_{n+1}].
struct ConvWeights {
  double decay = 1.0;
  double w0 = 0.0;
  double w1 = 0.0;
};

ConvWeights conv_weights(double k, double dt);

/// One step of H(t) = int_0^t e^{-k(t-s)} f(s) ds.
double conv_step(double H_n, double f_n, double f_np1, double k, double dt);

/// Recursive convolution values H(t_0..t_N) for samples f(t_0..t_N).
std::vector<double> convolve(const std::vector<double>& f, double k, const TimeGrid& grid);

/// Independent scalar channels sharing one decay rate and step size.
class MemoryAccumulator {
 public:
  MemoryAccumulator(std::size_t channels, double k, double dt);

  /// Advances every channel by one step given f at t_n and t_{n+1}.
  void step(const double* f_n, const double* f_np1);
  void reset();

  std::size_t channels() const { return state_.size(); }
  double value(std::size_t c) const { return state_[c]; }
  const std::vector<double>& values() const { return state_; }
  std::vector<double>& values() { return state_; }
  const ConvWeights& weights() const { return w_; }
  double decay_rate() const { return k_; }

 private:
  double k_;
  ConvWeights w_;
  std::vector<double> state_;
};

/// e_{a||3}(t) = (1/rho) int_0^t e^{-(2mu/rho)(t-s)} a_{as} F^{s3}(s) ds.
/// Input: lowered force a_{as} F^{s3} sampled on the grid.
std::vector<Vec2> shear_closure(const std::vector<Vec2>& lowered_force, const MaterialParams& params,
                                const TimeGrid& grid);

/// e_{3||3}(t) = 1/(theta+rho) conv_k(F33) - theta/(theta+rho) (tr(t) + Lambda conv_k(tr)),
/// with tr = a^{ab} e_{a||b}.
std::vector<double> normal_closure(const std::vector<double>& F33, const std::vector<double>& trace,
                                   const MaterialParams& params, const TimeGrid& grid);

/// Sign convention for the memory term of phi^{ab}.
///  - Consistent: -theta Lambda/(theta+rho) conv_k(F33) a^{ab}, which is what the
///    limit of the 3D equations produces (derived from the normal closure).
///  - AsPrinted: +theta Lambda/(theta+rho) conv_k(F33) a^{ab}.
enum class PhiConvention { Consistent, AsPrinted };

/// F^{ij}(t, y, x3), symmetric contravariant components.
using ForceSampler = std::function<Mat3(double t, const Vec2& y, double x3)>;

/// phi^{ab}(t_n) at one point y for n = 0..N.
std::vector<Mat2> phi_ab(const ForceSampler& F, const Vec2& y, const Mat2& a_ctr, const MaterialParams& params,
                         const TimeGrid& grid, int n_gauss = 4, PhiConvention conv = PhiConvention::Consistent);

/// Streaming evaluation of phi^{ab} at a fixed set of points, one time level at a
/// time.  Only the convolution of the thickness-integrated F33 is kept.
class PhiStream {
 public:
  struct Point {
    Vec2 y;
    Mat2 a_ctr;
  };
  PhiStream(ForceSampler F, std::vector<Point> points, const MaterialParams& params, const TimeGrid& grid,
            int n_gauss = 4, PhiConvention conv = PhiConvention::Consistent);

  /// Values at t_n; must be called with n = 0, 1, 2, ... in order.
  const std::vector<Mat2>& at(int n);

 private:
  void sample(int n, std::vector<Mat2>& Fab, std::vector<double>& F33) const;

  ForceSampler F_;
  std::vector<Point> points_;
  MaterialParams params_;
  TimeGrid grid_;
  int n_gauss_;
  double sign_;
  int next_ = 0;
  MemoryAccumulator conv_;
  std::vector<double> F33_prev_;
  std::vector<Mat2> out_;
};

}  // namespace shellmem
