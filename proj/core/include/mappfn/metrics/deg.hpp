#pragma once

#include <vector>

#include "mappfn/metrics/distances.hpp"

namespace mappfn::metrics {

inline constexpr double kFoldChangePseudocount = 1e-6;

struct DegResult {
  std::vector<int> labels;
  std::vector<double> p_values;
  std::vector<double> p_adjusted;
  /// -log10 of the adjusted p-value.
  std::vector<double> neg_log10_p;
  /// log2((|mean_int| + c) / (|mean_obs| + c)).
  std::vector<double> log_fold;
};

/// Differentially expressed genes: per-gene rank-sum test, BH across genes,
/// label 1 iff -log10(p_adj) > tau_p and |log fold| > tau_l.
DegResult deg_labels(const Matrix& obs, const Matrix& interventional, const MetricConfig& cfg = {});

/// Label rule on precomputed statistics.
int deg_label(double neg_log10_p, double log_fold, const MetricConfig& cfg = {});

/// R_g = |log fold| if -log10(p_adj) > tau_p, else 0.
std::vector<double> ranking_scores(const DegResult& predicted, const MetricConfig& cfg = {});

/// 1 at the perturbed gene, 0 elsewhere.
std::vector<double> target_only_scores(int genes, int target);

struct PrCurve {
  std::vector<double> thresholds;
  std::vector<double> recall;
  std::vector<double> precision;
  double auprc = 0.0;
  /// Fraction of positive labels.
  double baseline = 0.0;
};

/// Precision-recall over the distinct score values (descending, a gene is
/// called at threshold s iff score >= s) with step-wise integration over
/// recall. Throws UndefinedMetric without positive labels.
PrCurve auprc_curve(const std::vector<double>& scores, const std::vector<int>& labels);

}  // namespace mappfn::metrics
