#include "mappfn/metrics/deg.hpp"

#include <algorithm>
#include <cmath>

#include "mappfn/metrics/statistics.hpp"

namespace mappfn::metrics {

int deg_label(double neg_log10_p, double log_fold, const MetricConfig& cfg) {
  return (neg_log10_p > cfg.deg_tau_p && std::abs(log_fold) > cfg.deg_tau_l) ? 1 : 0;
}

DegResult deg_labels(const Matrix& obs, const Matrix& interventional, const MetricConfig& cfg) {
  if (obs.rows() < 1 || interventional.rows() < 1) throw InvalidArgument("deg_labels: empty batch");
  if (obs.cols() != interventional.cols()) throw InvalidArgument("deg_labels: dimension mismatch");
  const Eigen::Index d = obs.cols();
  DegResult r;
  r.p_values.resize(static_cast<std::size_t>(d));
  r.log_fold.resize(static_cast<std::size_t>(d));
  for (Eigen::Index g = 0; g < d; ++g) {
    const std::vector<double> x(interventional.col(g).begin(), interventional.col(g).end());
    const std::vector<double> y(obs.col(g).begin(), obs.col(g).end());
    r.p_values[static_cast<std::size_t>(g)] = wilcoxon_rank_sum(x, y).p;
    const double mu_int = std::abs(interventional.col(g).mean());
    const double mu_obs = std::abs(obs.col(g).mean());
    r.log_fold[static_cast<std::size_t>(g)] =
        std::log2((mu_int + kFoldChangePseudocount) / (mu_obs + kFoldChangePseudocount));
  }
  r.p_adjusted = benjamini_hochberg(r.p_values);
  for (std::size_t g = 0; g < r.p_adjusted.size(); ++g) {
    r.neg_log10_p.push_back(-std::log10(std::max(r.p_adjusted[g], 1e-300)));
    r.labels.push_back(deg_label(r.neg_log10_p[g], r.log_fold[g], cfg));
  }
  return r;
}

std::vector<double> ranking_scores(const DegResult& predicted, const MetricConfig& cfg) {
  std::vector<double> s(predicted.log_fold.size());
  for (std::size_t g = 0; g < s.size(); ++g) {
    s[g] = predicted.neg_log10_p[g] > cfg.deg_tau_p ? std::abs(predicted.log_fold[g]) : 0.0;
  }
  return s;
}

std::vector<double> target_only_scores(int genes, int target) {
  if (target < 0 || target >= genes) throw InvalidArgument("target_only_scores: target out of range");
  std::vector<double> s(static_cast<std::size_t>(genes), 0.0);
  s[static_cast<std::size_t>(target)] = 1.0;
  return s;
}

PrCurve auprc_curve(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw InvalidArgument("auprc_curve: scores and labels differ in length");
  const auto positives = std::count(labels.begin(), labels.end(), 1);
  if (positives == 0) throw UndefinedMetric("auprc_curve: no positive labels");
  PrCurve c;
  c.baseline = static_cast<double>(positives) / static_cast<double>(labels.size());
  std::vector<double> thresholds(scores);
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  double prev_recall = 0.0;
  for (double t : thresholds) {
    int tp = 0;
    int called = 0;
    for (std::size_t g = 0; g < scores.size(); ++g) {
      if (scores[g] >= t) {
        ++called;
        tp += labels[g] == 1 ? 1 : 0;
      }
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(positives);
    const double precision = static_cast<double>(tp) / static_cast<double>(called);
    c.thresholds.push_back(t);
    c.recall.push_back(recall);
    c.precision.push_back(precision);
    c.auprc += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return c;
}

}  // namespace mappfn::metrics
