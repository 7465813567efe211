#include "mappfn/metrics/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mappfn/common.hpp"

namespace mappfn::metrics {

namespace {

std::string format_value(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

double parse_value(const std::string& s) {
  if (s == "nan" || s.empty()) return kMissing;
  return std::stod(s);
}

std::size_t metric_index(const std::string& name) {
  for (std::size_t i = 0; i < kMetricNames.size(); ++i) {
    if (name == kMetricNames[i]) return i;
  }
  throw InvalidArgument("unknown metric '" + name + "'");
}

}  // namespace

double metric_value(const MetricRow& row, std::size_t metric) {
  switch (metric) {
    case 0: return row.w2;
    case 1: return row.mmd;
    case 2: return row.rmse;
    case 3: return row.rank_t;
    case 4: return row.mag_ratio;
    case 5: return row.var_corr;
    case 6: return row.auprc;
    default: throw InvalidArgument("metric index out of range");
  }
}

std::vector<MetricSummary> MetricReport::aggregate() const {
  std::vector<MetricSummary> out;
  std::vector<std::array<std::vector<double>, kMetricNames.size()>> values;
  for (const auto& row : rows) {
    std::size_t g = 0;
    while (g < out.size() && !(out[g].method == row.method && out[g].setting == row.setting)) ++g;
    if (g == out.size()) {
      out.push_back(MetricSummary{row.method, row.setting, {}, {}, {}});
      values.emplace_back();
    }
    for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
      const double v = metric_value(row, m);
      if (!std::isnan(v)) values[g][m].push_back(v);
    }
  }
  for (std::size_t g = 0; g < out.size(); ++g) {
    for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
      const auto& v = values[g][m];
      out[g].count[m] = static_cast<int>(v.size());
      if (v.empty()) {
        out[g].mean[m] = kMissing;
        out[g].std[m] = kMissing;
        continue;
      }
      double s = 0.0;
      for (double x : v) s += x;
      const double mu = s / static_cast<double>(v.size());
      double ss = 0.0;
      for (double x : v) ss += (x - mu) * (x - mu);
      out[g].mean[m] = mu;
      out[g].std[m] = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    }
  }
  return out;
}

double MetricReport::mean(const std::string& method, const std::string& setting, const std::string& metric) const {
  const std::size_t m = metric_index(metric);
  for (const auto& s : aggregate()) {
    if (s.method == method && s.setting == setting) return s.mean[m];
  }
  throw InvalidArgument("report has no rows for " + method + "/" + setting);
}

std::string MetricReport::csv() const {
  std::ostringstream out;
  out << "method,setting,seed,context,treatment";
  for (const char* name : kMetricNames) out << ',' << name;
  out << ",flags\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.setting << ',' << r.seed << ',' << r.context_id << ',' << r.treatment_id;
    for (std::size_t m = 0; m < kMetricNames.size(); ++m) out << ',' << format_value(metric_value(r, m));
    out << ',' << r.flags << '\n';
  }
  return out.str();
}

void MetricReport::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write report " + path.string());
  out << csv();
}

std::string MetricReport::json() const {
  nlohmann::ordered_json groups = nlohmann::ordered_json::array();
  for (const auto& s : aggregate()) {
    nlohmann::ordered_json g;
    g["method"] = s.method;
    g["setting"] = s.setting;
    for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
      nlohmann::ordered_json v;
      v["mean"] = std::isnan(s.mean[m]) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(s.mean[m]);
      v["std"] = std::isnan(s.std[m]) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(s.std[m]);
      v["n"] = s.count[m];
      g["metrics"][kMetricNames[m]] = v;
    }
    groups.push_back(g);
  }
  nlohmann::ordered_json root;
  root["rows"] = rows.size();
  root["groups"] = groups;
  return root.dump(2);
}

void MetricReport::write_json(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write report " + path.string());
  out << json() << '\n';
}

MetricReport MetricReport::read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open report " + path.string());
  MetricReport report;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) f.push_back(field);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 5 + kMetricNames.size() + 1) throw InvalidArgument("malformed report row: " + line);
    MetricRow r;
    r.method = f[0];
    r.setting = f[1];
    r.seed = std::stoi(f[2]);
    r.context_id = std::stoi(f[3]);
    r.treatment_id = std::stoi(f[4]);
    r.w2 = parse_value(f[5]);
    r.mmd = parse_value(f[6]);
    r.rmse = parse_value(f[7]);
    r.rank_t = parse_value(f[8]);
    r.mag_ratio = parse_value(f[9]);
    r.var_corr = parse_value(f[10]);
    r.auprc = parse_value(f[11]);
    r.flags = f[12];
    report.rows.push_back(std::move(r));
  }
  return report;
}

}  // namespace mappfn::metrics
