#pragma once

#include <functional>

#include "mappfn/common.hpp"

namespace mappfn::train {

struct OdeOptions {
  double rtol = 1e-4;
  double atol = 1e-5;
  int max_steps = 10000;
};

struct OdeStats {
  int accepted = 0;
  int rejected = 0;
  int evaluations = 0;
};

using OdeField = std::function<Matrix(double t, const Matrix& y)>;

/// Adaptive Dormand-Prince 5(4) integration of dy/dt = f(t, y) from t0 to t1.
/// Throws NumericalFailure when max_steps is exceeded or the state blows up.
Matrix integrate_dopri5(const OdeField& f, const Matrix& y0, double t0, double t1, const OdeOptions& options = {},
                        OdeStats* stats = nullptr);

}  // namespace mappfn::train
