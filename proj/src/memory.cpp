#include "shellmem/memory.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "shellmem/mesh.hpp"

namespace shellmem {

TimeGrid::TimeGrid(double T, int N) : T_(T), N_(N) {
  if (!(T > 0.0)) throw std::invalid_argument("TimeGrid: T must be > 0");
  if (N < 1) throw std::invalid_argument("TimeGrid: N must be >= 1");
}

namespace {

// phi1(x) = (1 - e^{-x}) / x,  phi2(x) = (1 - e^{-x}(1 + x)) / x^2
void phi_functions(double x, double& p1, double& p2) {
  if (x < 0.1) {
    // alternating series; 20 terms are far below round-off for x < 0.1
    double term1 = 1.0, term2 = 0.5;  // n = 0 terms: 1/1!, 1/2!
    p1 = 0.0;
    p2 = 0.0;
    double fact = 1.0;  // (n+1)!
    double xn = 1.0;    // (-x)^n
    for (int n = 0; n < 20; ++n) {
      if (n > 0) {
        xn *= -x;
        fact *= (n + 1);
      }
      term1 = xn / fact;
      term2 = xn * (n + 1) / (fact * (n + 2));
      p1 += term1;
      p2 += term2;
    }
    return;
  }
  if (x > 700.0) {
    p1 = 1.0 / x;
    p2 = 1.0 / (x * x);
    return;
  }
  const double em = std::exp(-x);
  p1 = -std::expm1(-x) / x;
  p2 = (1.0 - em * (1.0 + x)) / (x * x);
}

}  // namespace

ConvWeights conv_weights(double k, double dt) {
  if (!(k > 0.0) || !(dt > 0.0)) throw std::invalid_argument("conv_weights: k and dt must be > 0");
  const double x = k * dt;
  double p1, p2;
  phi_functions(x, p1, p2);
  ConvWeights w;
  w.decay = x > 700.0 ? 0.0 : std::exp(-x);
  w.w0 = dt * p2;
  w.w1 = dt * (p1 - p2);
  return w;
}

double conv_step(double H_n, double f_n, double f_np1, double k, double dt) {
  const ConvWeights w = conv_weights(k, dt);
  return w.decay * H_n + w.w0 * f_n + w.w1 * f_np1;
}

std::vector<double> convolve(const std::vector<double>& f, double k, const TimeGrid& grid) {
  if (f.size() != static_cast<std::size_t>(grid.N() + 1))
    throw std::invalid_argument("convolve: need N+1 samples");
  const ConvWeights w = conv_weights(k, grid.dt());
  std::vector<double> H(f.size(), 0.0);
  for (std::size_t n = 0; n + 1 < f.size(); ++n) H[n + 1] = w.decay * H[n] + w.w0 * f[n] + w.w1 * f[n + 1];
  return H;
}

MemoryAccumulator::MemoryAccumulator(std::size_t channels, double k, double dt)
    : k_(k), w_(conv_weights(k, dt)), state_(channels, 0.0) {}

void MemoryAccumulator::step(const double* f_n, const double* f_np1) {
  for (std::size_t c = 0; c < state_.size(); ++c) state_[c] = w_.decay * state_[c] + w_.w0 * f_n[c] + w_.w1 * f_np1[c];
}

void MemoryAccumulator::reset() { std::fill(state_.begin(), state_.end(), 0.0); }

std::vector<Vec2> shear_closure(const std::vector<Vec2>& F, const MaterialParams& params, const TimeGrid& grid) {
  if (F.size() != static_cast<std::size_t>(grid.N() + 1))
    throw std::invalid_argument("shear_closure: need N+1 samples");
  MemoryAccumulator acc(2, 2.0 * params.mu() / params.rho(), grid.dt());
  std::vector<Vec2> e(F.size(), Vec2::Zero());
  for (std::size_t n = 0; n + 1 < F.size(); ++n) {
    acc.step(F[n].data(), F[n + 1].data());
    e[n + 1] = Vec2(acc.value(0), acc.value(1)) / params.rho();
  }
  return e;
}

std::vector<double> normal_closure(const std::vector<double>& F33, const std::vector<double>& tr,
                                   const MaterialParams& params, const TimeGrid& grid) {
  if (F33.size() != static_cast<std::size_t>(grid.N() + 1) || tr.size() != F33.size())
    throw std::invalid_argument("normal_closure: need N+1 samples of both inputs");
  const double s = params.theta() + params.rho();
  const std::vector<double> cF = convolve(F33, params.k(), grid);
  const std::vector<double> cT = convolve(tr, params.k(), grid);
  std::vector<double> e(F33.size());
  for (std::size_t n = 0; n < e.size(); ++n)
    e[n] = cF[n] / s - params.theta() / s * (tr[n] + params.Lambda() * cT[n]);
  return e;
}

std::vector<Mat2> phi_ab(const ForceSampler& F, const Vec2& y, const Mat2& a_ctr, const MaterialParams& params,
                         const TimeGrid& grid, int n_gauss, PhiConvention conv) {
  PhiStream stream(F, {{y, a_ctr}}, params, grid, n_gauss, conv);
  std::vector<Mat2> out;
  out.reserve(static_cast<std::size_t>(grid.N() + 1));
  for (int n = 0; n <= grid.N(); ++n) out.push_back(stream.at(n)[0]);
  return out;
}

PhiStream::PhiStream(ForceSampler F, std::vector<Point> points, const MaterialParams& params, const TimeGrid& grid,
                     int n_gauss, PhiConvention conv)
    : F_(std::move(F)),
      points_(std::move(points)),
      params_(params),
      grid_(grid),
      n_gauss_(n_gauss),
      sign_(conv == PhiConvention::Consistent ? -1.0 : 1.0),
      conv_(points_.size(), params.k(), grid.dt()),
      F33_prev_(points_.size(), 0.0),
      out_(points_.size(), Mat2::Zero()) {}

void PhiStream::sample(int n, std::vector<Mat2>& Fab, std::vector<double>& F33) const {
  const QuadRule1D rule = gauss_legendre(n_gauss_);
  const double t = grid_.t(n);
  Fab.assign(points_.size(), Mat2::Zero());
  F33.assign(points_.size(), 0.0);
  for (std::size_t p = 0; p < points_.size(); ++p)
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Mat3 f = F_(t, points_[p].y, rule.points[q]);
      Fab[p] += rule.weights[q] * f.topLeftCorner<2, 2>();
      F33[p] += rule.weights[q] * f(2, 2);
    }
}

const std::vector<Mat2>& PhiStream::at(int n) {
  if (n != next_) {
    std::ostringstream msg;
    msg << "PhiStream: expected time level " << next_ << ", got " << n;
    throw std::logic_error(msg.str());
  }
  std::vector<Mat2> Fab;
  std::vector<double> F33;
  sample(n, Fab, F33);
  if (n > 0) conv_.step(F33_prev_.data(), F33.data());
  const double s = params_.theta() + params_.rho();
  const double c0 = params_.theta() / s;
  const double c1 = sign_ * params_.theta() * params_.Lambda() / s;
  for (std::size_t p = 0; p < points_.size(); ++p)
    out_[p] = Fab[p] + (-c0 * F33[p] + c1 * conv_.value(p)) * points_[p].a_ctr;
  F33_prev_ = std::move(F33);
  ++next_;
  return out_;
}

}  // namespace shellmem
