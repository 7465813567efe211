#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mappfn/harness/evaluation.hpp"

namespace mappfn::harness {

inline const std::vector<double> kGuidanceGrid{1.0, 1.5, 2.0, 2.5, 3.0};

struct SweepPoint {
  std::string axis;
  double value = 0.0;
  metrics::MetricReport report;
};

/// Re-evaluates the same test set for K = 0, 1, ..., max_context.
std::vector<SweepPoint> sweep_context_size(const std::vector<Predictor>& predictors, const data::Dataset& dataset,
                                           const std::vector<Splits>& splits, const EvalOptions& options, int max_context);

/// Re-evaluates the same test set for each guidance weight (model predictors only).
std::vector<SweepPoint> sweep_guidance(const std::vector<Predictor>& predictors, const data::Dataset& dataset,
                                       const std::vector<Splits>& splits, const EvalOptions& options,
                                       const std::vector<double>& grid = kGuidanceGrid);

/// One row per (axis value, method): axis,value,method,conditions,<metric means>.
/// `conditions` lists the evaluated context:treatment ids joined by ';'.
std::string sweep_csv(const std::vector<SweepPoint>& points);
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepPoint>& points);

}  // namespace mappfn::harness
