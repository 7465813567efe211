#pragma once

#include <array>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

namespace mappfn::metrics {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

struct MetricRow {
  std::string method;
  std::string setting;
  int seed = 0;
  int context_id = 0;
  int treatment_id = 0;
  double w2 = kMissing;
  double mmd = kMissing;
  double rmse = kMissing;
  double rank_t = kMissing;
  double mag_ratio = kMissing;
  double var_corr = kMissing;
  double auprc = kMissing;
  /// Free-form notes (e.g. "with_replacement").
  std::string flags;
};

inline constexpr std::array<const char*, 7> kMetricNames{"w2", "mmd", "rmse", "rank_t", "mag_ratio", "var_corr",
                                                         "auprc"};

double metric_value(const MetricRow& row, std::size_t metric);

struct MetricSummary {
  std::string method;
  std::string setting;
  /// Per metric: mean, std (n - 1; 0 for a single value) and count of defined values.
  std::array<double, kMetricNames.size()> mean{};
  std::array<double, kMetricNames.size()> std{};
  std::array<int, kMetricNames.size()> count{};
};

struct MetricReport {
  std::vector<MetricRow> rows;

  /// Groups by (method, setting) in order of first appearance; undefined
  /// (NaN) values are skipped.
  [[nodiscard]] std::vector<MetricSummary> aggregate() const;
  /// Mean over all rows of one method and setting for one metric.
  [[nodiscard]] double mean(const std::string& method, const std::string& setting, const std::string& metric) const;

  void write_csv(const std::filesystem::path& path) const;
  [[nodiscard]] std::string csv() const;
  void write_json(const std::filesystem::path& path) const;
  [[nodiscard]] std::string json() const;
  static MetricReport read_csv(const std::filesystem::path& path);
};

}  // namespace mappfn::metrics
