#include "mappfn/train/dopri5.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mappfn::train {

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

double scaled_rms(const Matrix& v, const Matrix& y_a, const Matrix& y_b, const OdeOptions& o) {
  if (v.size() == 0) return 0.0;
  const auto sc = o.atol + o.rtol * y_a.cwiseAbs().cwiseMax(y_b.cwiseAbs()).array();
  return std::sqrt((v.array() / sc).square().mean());
}

}  // namespace

Matrix integrate_dopri5(const OdeField& f, const Matrix& y0, double t0, double t1, const OdeOptions& options,
                        OdeStats* stats) {
  if (!(options.rtol > 0.0) || !(options.atol > 0.0)) throw InvalidArgument("dopri5: tolerances must be positive");
  if (options.max_steps < 1) throw InvalidArgument("dopri5: max_steps must be positive");
  OdeStats local;
  OdeStats& st = stats ? *stats : local;
  st = OdeStats{};
  Matrix y = y0;
  if (t1 == t0 || y.size() == 0) return y;
  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);

  auto eval = [&](double t, const Matrix& state) {
    ++st.evaluations;
    Matrix k = f(t, state);
    if (k.rows() != state.rows() || k.cols() != state.cols()) throw InvalidArgument("dopri5: field changed shape");
    return k;
  };

  Matrix k1 = eval(t0, y);
  // Initial step from the local scale of the solution and its derivative.
  double h;
  {
    const double d0 = scaled_rms(y, y, y, options);
    const double d1 = scaled_rms(k1, y, y, options);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    const Matrix y1 = y + dir * h0 * k1;
    const Matrix k2 = eval(t0 + dir * h0, y1);
    const double d2 = scaled_rms(k2 - k1, y, y, options) / h0;
    const double h1 = std::max(d1, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                                  : std::pow(0.01 / std::max(d1, d2), 1.0 / 5.0);
    h = std::min({100.0 * h0, h1, span});
  }

  double t = t0;
  int steps = 0;
  while (dir * (t1 - t) > 0.0) {
    if (steps++ >= options.max_steps) {
      throw NumericalFailure("dopri5: exceeded " + std::to_string(options.max_steps) + " steps at t=" +
                             std::to_string(t));
    }
    bool last = false;
    if (h >= std::abs(t1 - t)) {
      h = std::abs(t1 - t);
      last = true;
    }
    const double hs = dir * h;
    const Matrix k2 = eval(t + c2 * hs, y + hs * (a21 * k1));
    const Matrix k3 = eval(t + c3 * hs, y + hs * (a31 * k1 + a32 * k2));
    const Matrix k4 = eval(t + c4 * hs, y + hs * (a41 * k1 + a42 * k2 + a43 * k3));
    const Matrix k5 = eval(t + c5 * hs, y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Matrix k6 = eval(t + hs, y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    Matrix y_new = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const double t_new = last ? t1 : t + hs;
    Matrix k7 = eval(t_new, y_new);
    const Matrix err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double en = scaled_rms(err, y, y_new, options);
    if (!std::isfinite(en) || !y_new.allFinite()) throw NumericalFailure("dopri5: non-finite state");
    const double factor = en == 0.0 ? 10.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 10.0);
    if (en <= 1.0) {
      ++st.accepted;
      t = t_new;
      y = std::move(y_new);
      k1 = std::move(k7);
      h *= factor;
    } else {
      ++st.rejected;
      h *= std::min(1.0, factor);
      if (h < 1e-14 * std::max(1.0, std::abs(t))) throw NumericalFailure("dopri5: step size underflow");
    }
  }
  return y;
}

}  // namespace mappfn::train
