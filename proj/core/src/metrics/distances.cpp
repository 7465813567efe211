#include "mappfn/metrics/distances.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mappfn::metrics {

namespace {

Matrix squared_distances(const Matrix& x, const Matrix& y) {
  const Vector xn = x.rowwise().squaredNorm();
  const Vector yn = y.rowwise().squaredNorm();
  Matrix c = -2.0 * x * y.transpose();
  c.colwise() += xn;
  c.rowwise() += yn.transpose();
  return c.cwiseMax(0.0);
}

void check_clouds(const Matrix& x, const Matrix& y, const char* what) {
  if (x.rows() < 1 || y.rows() < 1) throw InvalidArgument(std::string(what) + ": empty point cloud");
  if (x.cols() != y.cols()) throw InvalidArgument(std::string(what) + ": dimension mismatch");
}

}  // namespace

SinkhornResult entropic_ot(const Matrix& x, const Matrix& y, double epsilon, int max_iters, double tol) {
  check_clouds(x, y, "sinkhorn");
  if (!(epsilon > 0.0)) throw InvalidArgument("sinkhorn: epsilon must be positive");
  const Matrix c = squared_distances(x, y);
  const Matrix ct = c.transpose();
  const Eigen::Index n = c.rows();
  const Eigen::Index m = c.cols();
  const double log_a = -std::log(static_cast<double>(n));
  const double log_b = -std::log(static_cast<double>(m));
  Vector f = Vector::Zero(n);
  Vector g = Vector::Zero(m);
  Vector work_row(m);
  Vector work_col(n);

  // Row update: f_i = -eps * log sum_j b_j exp((g_j - C_ij) / eps).
  auto update_f = [&](double eps) {
    for (Eigen::Index i = 0; i < n; ++i) {
      work_row = (g.transpose() - c.row(i)) / eps;
      const double mx = work_row.maxCoeff();
      f(i) = -eps * (mx + std::log((work_row.array() - mx).exp().sum()) + log_b);
    }
  };
  auto update_g = [&](double eps) {
    for (Eigen::Index j = 0; j < m; ++j) {
      work_col = (f - ct.row(j).transpose()) / eps;
      const double mx = work_col.maxCoeff();
      g(j) = -eps * (mx + std::log((work_col.array() - mx).exp().sum()) + log_a);
    }
  };
  // After a g update columns match exactly; the residual is the row marginal error.
  auto residual = [&](double eps) {
    double r = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double s = ((f(i) + g.transpose().array() - c.row(i).array()) / eps).exp().sum() *
                       std::exp(log_a + log_b);
      r += std::abs(s - std::exp(log_a));
    }
    return r;
  };

  SinkhornResult result;
  const double c_max = std::max(c.maxCoeff(), epsilon);
  std::vector<double> schedule;
  for (double e = c_max; e > epsilon; e *= 0.5) schedule.push_back(e);
  schedule.push_back(epsilon);

  int iters = 0;
  for (std::size_t s = 0; s < schedule.size(); ++s) {
    const double eps = schedule[s];
    const bool final_stage = s + 1 == schedule.size();
    const int stage_cap = final_stage ? max_iters - iters : 100;
    const double stage_tol = final_stage ? tol : std::max(tol, 1e-2);
    double r = std::numeric_limits<double>::infinity();
    for (int it = 0; it < stage_cap; ++it) {
      update_f(eps);
      update_g(eps);
      ++iters;
      if ((it + 1) % 10 == 0 || it + 1 == stage_cap) {
        r = residual(eps);
        if (r < stage_tol) break;
      }
    }
    if (final_stage) {
      result.residual = r;
      if (!(r < tol)) {
        throw NumericalFailure("sinkhorn: no convergence after " + std::to_string(max_iters) +
                               " iterations, residual " + std::to_string(r));
      }
    }
  }
  result.iterations = iters;
  // At the fixed point the dual value equals <P, C> + eps KL(P | ab).
  result.cost = f.mean() + g.mean();
  return result;
}

double sinkhorn_divergence_squared(const Matrix& x, const Matrix& y, const MetricConfig& cfg) {
  const double eps = cfg.sinkhorn_epsilon;
  const double xy = entropic_ot(x, y, eps, cfg.sinkhorn_max_iters, cfg.sinkhorn_tol).cost;
  const double xx = entropic_ot(x, x, eps, cfg.sinkhorn_max_iters, cfg.sinkhorn_tol).cost;
  const double yy = entropic_ot(y, y, eps, cfg.sinkhorn_max_iters, cfg.sinkhorn_tol).cost;
  return xy - 0.5 * xx - 0.5 * yy;
}

double sinkhorn_divergence(const Matrix& x, const Matrix& y, const MetricConfig& cfg) {
  return std::sqrt(std::max(sinkhorn_divergence_squared(x, y, cfg), 0.0));
}

double mmd2_rbf(const Matrix& x, const Matrix& y, double gamma) {
  check_clouds(x, y, "mmd");
  if (!(gamma > 0.0)) throw InvalidArgument("mmd: gamma must be positive");
  auto mean_kernel = [gamma](const Matrix& a, const Matrix& b) {
    return (-gamma * squared_distances(a, b).array()).exp().mean();
  };
  // Both cross orders are summed so that swapping x and y is exact in floating point.
  return mean_kernel(x, x) + mean_kernel(y, y) - (mean_kernel(x, y) + mean_kernel(y, x));
}

double mmd_rbf(const Matrix& x, const Matrix& y, const MetricConfig& cfg) {
  if (cfg.mmd_gammas.empty()) throw InvalidArgument("mmd: no gammas");
  double total = 0.0;
  for (double gamma : cfg.mmd_gammas) total += mmd2_rbf(x, y, gamma);
  return std::sqrt(std::max(total / static_cast<double>(cfg.mmd_gammas.size()), 0.0));
}

Vector column_means(const Matrix& m) { return m.colwise().mean().transpose(); }

Vector column_variances(const Matrix& m) {
  if (m.rows() < 2) throw InvalidArgument("variance: need at least two rows");
  const Vector mu = column_means(m);
  return ((m.rowwise() - mu.transpose()).array().square().colwise().sum() / static_cast<double>(m.rows() - 1))
      .transpose();
}

double pearson(const Vector& a, const Vector& b) {
  if (a.size() != b.size() || a.size() < 2) throw InvalidArgument("pearson: need two equal-length vectors of size >= 2");
  const Vector ca = a.array() - a.mean();
  const Vector cb = b.array() - b.mean();
  const double na = ca.norm();
  const double nb = cb.norm();
  if (na == 0.0 || nb == 0.0) throw UndefinedMetric("pearson: constant vector");
  return std::clamp(ca.dot(cb) / (na * nb), -1.0, 1.0);
}

double rmse_means(const Matrix& x, const Matrix& y) {
  check_clouds(x, y, "rmse_means");
  return std::sqrt((column_means(x) - column_means(y)).array().square().mean());
}

std::vector<double> transposed_rank_per_condition(const std::vector<Vector>& predicted,
                                                  const std::vector<Vector>& observed) {
  const std::size_t p = predicted.size();
  if (p != observed.size()) throw InvalidArgument("transposed_rank: list sizes differ");
  if (p < 2) throw InvalidArgument("transposed_rank: need at least two conditions");
  std::vector<double> out(p);
  for (std::size_t i = 0; i < p; ++i) {
    const double own = (predicted[i] - observed[i]).norm();
    int count = 0;
    for (std::size_t j = 0; j < p; ++j) {
      if (j != i && (predicted[i] - observed[j]).norm() <= own) ++count;
    }
    out[i] = static_cast<double>(count) / static_cast<double>(p - 1);
  }
  return out;
}

double transposed_rank(const std::vector<Vector>& predicted, const std::vector<Vector>& observed) {
  const auto per = transposed_rank_per_condition(predicted, observed);
  double s = 0.0;
  for (double v : per) s += v;
  return s / static_cast<double>(per.size());
}

double magnitude_ratio(const Matrix& obs, const Matrix& interventional, const Matrix& predicted,
                       const MetricConfig& cfg) {
  const double denom = sinkhorn_divergence(obs, interventional, cfg);
  if (denom < 1e-9) throw DegenerateEffect("magnitude_ratio: observational and interventional batches coincide");
  return sinkhorn_divergence(obs, predicted, cfg) / denom;
}

double variance_correlation(const Matrix& interventional, const Matrix& predicted) {
  if (interventional.cols() != predicted.cols()) throw InvalidArgument("variance_correlation: dimension mismatch");
  if (interventional.cols() < 2) throw InvalidArgument("variance_correlation: need at least two genes");
  return pearson(column_variances(predicted), column_variances(interventional));
}

}  // namespace mappfn::metrics
