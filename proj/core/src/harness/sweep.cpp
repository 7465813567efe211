#include "mappfn/harness/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mappfn::harness {

std::vector<SweepPoint> sweep_context_size(const std::vector<Predictor>& predictors, const data::Dataset& dataset,
                                           const std::vector<Splits>& splits, const EvalOptions& options, int max_context) {
  if (max_context < 0) throw InvalidArgument("sweep: negative maximum context size");
  std::vector<SweepPoint> points;
  for (int k = 0; k <= max_context; ++k) {
    EvalOptions o = options;
    o.context_size = k;
    o.setting = "K=" + std::to_string(k);
    points.push_back({"context_size", static_cast<double>(k), run_eval(predictors, dataset, splits, o)});
  }
  return points;
}

std::vector<SweepPoint> sweep_guidance(const std::vector<Predictor>& predictors, const data::Dataset& dataset,
                                       const std::vector<Splits>& splits, const EvalOptions& options,
                                       const std::vector<double>& grid) {
  std::vector<SweepPoint> points;
  for (double omega : grid) {
    std::vector<Predictor> models;
    for (Predictor p : predictors) {
      if (p.kind != PredictorKind::kModel) continue;
      p.guidance.omega = omega;
      models.push_back(p);
    }
    if (models.empty()) throw InvalidArgument("sweep: guidance axis needs a model predictor");
    EvalOptions o = options;
    char label[32];
    std::snprintf(label, sizeof label, "omega=%g", omega);
    o.setting = label;
    points.push_back({"guidance", omega, run_eval(models, dataset, splits, o)});
  }
  return points;
}

std::string sweep_csv(const std::vector<SweepPoint>& points) {
  std::ostringstream out;
  out << "axis,value,method,conditions";
  for (const char* name : metrics::kMetricNames) out << ',' << name;
  out << '\n';
  for (const auto& point : points) {
    for (const auto& summary : point.report.aggregate()) {
      std::string ids;
      for (const auto& row : point.report.rows) {
        if (row.method != summary.method) continue;
        if (!ids.empty()) ids += ';';
        ids += std::to_string(row.context_id) + ":" + std::to_string(row.treatment_id);
      }
      char value[32];
      std::snprintf(value, sizeof value, "%g", point.value);
      out << point.axis << ',' << value << ',' << summary.method << ',' << ids;
      for (std::size_t m = 0; m < metrics::kMetricNames.size(); ++m) {
        char buf[40];
        if (std::isnan(summary.mean[m])) {
          std::snprintf(buf, sizeof buf, "nan");
        } else {
          std::snprintf(buf, sizeof buf, "%.10g", summary.mean[m]);
        }
        out << ',' << buf;
      }
      out << '\n';
    }
  }
  return out.str();
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepPoint>& points) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write sweep " + path.string());
  out << sweep_csv(points);
}

}  // namespace mappfn::harness
