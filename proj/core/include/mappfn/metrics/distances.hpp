#pragma once

#include <vector>

#include "mappfn/common.hpp"

namespace mappfn::metrics {

struct MetricConfig {
  double sinkhorn_epsilon = 0.1;
  std::vector<double> mmd_gammas{10.0, 1.0, 0.1, 0.01, 0.001};
  double deg_tau_l = 0.2;
  double deg_tau_p = 2.0;
  int sinkhorn_max_iters = 20000;
  /// L1 violation of the row marginal at which iterations stop.
  double sinkhorn_tol = 1e-4;
};

struct SinkhornResult {
  /// <P, C> + eps KL(P | a b^T) at the returned plan.
  double cost = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

/// Entropic OT between uniform point clouds with squared-Euclidean cost,
/// solved by log-domain Sinkhorn iterations with epsilon annealing.
/// Throws NumericalFailure (with the residual) if it does not converge.
SinkhornResult entropic_ot(const Matrix& x, const Matrix& y, double epsilon, int max_iters, double tol);

/// W(x, y) - W(x, x)/2 - W(y, y)/2 on the squared-distance scale.
double sinkhorn_divergence_squared(const Matrix& x, const Matrix& y, const MetricConfig& cfg = {});
/// sqrt(max(S, 0)) of the above; the reported distance.
double sinkhorn_divergence(const Matrix& x, const Matrix& y, const MetricConfig& cfg = {});

/// Square root of the mean over gammas of the biased RBF-kernel MMD^2.
double mmd_rbf(const Matrix& x, const Matrix& y, const MetricConfig& cfg = {});
/// MMD^2 for one gamma (biased V-statistic).
double mmd2_rbf(const Matrix& x, const Matrix& y, double gamma);

/// Root mean squared difference of the per-gene means.
double rmse_means(const Matrix& x, const Matrix& y);

/// Per-condition fraction of other observed means at least as close to the
/// prediction as its own observed mean.
std::vector<double> transposed_rank_per_condition(const std::vector<Vector>& predicted,
                                                  const std::vector<Vector>& observed);
/// Mean of the per-condition values; needs at least two conditions.
double transposed_rank(const std::vector<Vector>& predicted, const std::vector<Vector>& observed);

/// d(obs, predicted) / d(obs, interventional) with the Sinkhorn distance.
/// Throws DegenerateEffect when the denominator is below 1e-9.
double magnitude_ratio(const Matrix& obs, const Matrix& interventional, const Matrix& predicted,
                       const MetricConfig& cfg = {});

/// Pearson correlation between the per-gene sample variances.
/// Throws UndefinedMetric when either variance vector is constant.
double variance_correlation(const Matrix& interventional, const Matrix& predicted);

Vector column_means(const Matrix& m);
/// Sample variances (n - 1 denominator) per column.
Vector column_variances(const Matrix& m);
double pearson(const Vector& a, const Vector& b);

}  // namespace mappfn::metrics
