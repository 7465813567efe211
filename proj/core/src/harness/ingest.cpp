#include "mappfn/harness/ingest.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "mappfn/data/dataset_io.hpp"
#include "mappfn/data/preprocess.hpp"

namespace mappfn::harness {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    while (!field.empty() && field.front() == ' ') field.erase(field.begin());
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

bool parse_double(const std::string& s, double& out) {
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

bool is_matrix_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  return in && magic == data::kMatrixMagic;
}

void read_csv_matrix(const std::filesystem::path& path, Matrix& counts, std::vector<std::string>& gene_names) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("ingest: cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t j = 0; j < fields.size(); ++j) numeric = numeric && parse_double(fields[j], row[j]);
    if (!numeric) {
      if (!first) throw InvalidArgument("ingest: non-numeric value in " + path.string());
      gene_names = fields;
    } else {
      rows.push_back(std::move(row));
    }
    first = false;
  }
  const std::size_t d = gene_names.empty() ? (rows.empty() ? 0 : rows[0].size()) : gene_names.size();
  counts.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d) throw InvalidArgument("ingest: ragged row " + std::to_string(i) + " in " + path.string());
    for (std::size_t j = 0; j < d; ++j) counts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
}

std::vector<std::pair<std::string, std::string>> read_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("ingest: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("ingest: empty labels file");
  const auto header = split_csv_line(line);
  if (header != std::vector<std::string>{"cell_id", "context", "treatment"}) {
    throw InvalidArgument("ingest: labels header must be cell_id,context,treatment");
  }
  std::vector<std::pair<std::string, std::string>> labels;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3) throw InvalidArgument("ingest: labels row needs 3 fields: " + line);
    labels.emplace_back(fields[1], fields[2]);
  }
  return labels;
}

}  // namespace

IngestResult ingest_counts(const Matrix& counts, const std::vector<std::string>& gene_names,
                           const std::vector<std::pair<std::string, std::string>>& labels,
                           const IngestOptions& options) {
  if (static_cast<Eigen::Index>(labels.size()) != counts.rows()) {
    throw InvalidArgument("ingest: " + std::to_string(labels.size()) + " labels for " +
                          std::to_string(counts.rows()) + " cells");
  }
  const int d = static_cast<int>(counts.cols());
  if (d < 1) throw InvalidArgument("ingest: matrix has no genes");
  std::vector<std::string> genes = gene_names;
  if (genes.empty()) {
    for (int j = 0; j < d; ++j) genes.push_back("g" + std::to_string(j));
  }
  if (static_cast<int>(genes.size()) != d) throw InvalidArgument("ingest: gene name count does not match columns");

  const data::PreprocessResult pre = data::normalize_log1p(counts);

  std::map<std::string, int> gene_index;
  for (int j = 0; j < d; ++j) gene_index.emplace(genes[static_cast<std::size_t>(j)], j);
  std::map<std::string, int> treatment_ids;
  int next_extra = d;
  auto treatment_id = [&](const std::string& label) {
    if (const auto it = treatment_ids.find(label); it != treatment_ids.end()) return it->second;
    int id = -1;
    if (const auto g = gene_index.find(label); g != gene_index.end()) {
      id = g->second;
    } else {
      int idx = 0;
      const auto [ptr, ec] = std::from_chars(label.data(), label.data() + label.size(), idx);
      id = (ec == std::errc{} && ptr == label.data() + label.size() && idx >= 0 && idx < d) ? idx : next_extra++;
    }
    treatment_ids.emplace(label, id);
    return id;
  };

  // Rows per (context, treatment), in order of first appearance.
  std::vector<std::string> context_names;
  std::vector<std::vector<std::pair<int, std::vector<Eigen::Index>>>> groups;
  for (std::size_t r = 0; r < pre.kept_rows.size(); ++r) {
    const auto& [ctx, trt] = labels[static_cast<std::size_t>(pre.kept_rows[r])];
    auto cit = std::find(context_names.begin(), context_names.end(), ctx);
    if (cit == context_names.end()) {
      context_names.push_back(ctx);
      groups.emplace_back();
      cit = context_names.end() - 1;
    }
    auto& ctx_groups = groups[static_cast<std::size_t>(cit - context_names.begin())];
    const int tid = trt == options.control_label ? data::kObservationalTreatment : treatment_id(trt);
    auto git = std::find_if(ctx_groups.begin(), ctx_groups.end(), [tid](const auto& g) { return g.first == tid; });
    if (git == ctx_groups.end()) {
      ctx_groups.emplace_back(tid, std::vector<Eigen::Index>{});
      git = ctx_groups.end() - 1;
    }
    git->second.push_back(static_cast<Eigen::Index>(r));
  }

  IngestResult result;
  result.dropped_cells = pre.dropped_cells;
  data::Dataset& ds = result.dataset;
  ds.prior = "external";
  ds.dims = d;
  ds.gene_names = genes;
  ds.metadata = {{"control_label", options.control_label}, {"dropped_cells", std::to_string(pre.dropped_cells)}};
  for (std::size_t c = 0; c < context_names.size(); ++c) {
    data::Context context;
    context.context_id = static_cast<int>(c);
    context.name = context_names[c];
    bool has_control = false;
    for (const auto& [tid, rows] : groups[c]) {
      Matrix batch(static_cast<Eigen::Index>(rows.size()), d);
      for (std::size_t i = 0; i < rows.size(); ++i) batch.row(static_cast<Eigen::Index>(i)) = pre.values.row(rows[i]);
      if (tid == data::kObservationalTreatment) {
        context.observational = std::move(batch);
        has_control = true;
        continue;
      }
      data::Condition cond;
      cond.treatment_id = tid;
      cond.treatment_code = Vector::Zero(d);
      if (tid < d) cond.treatment_code(tid) = 1.0;
      cond.samples = std::move(batch);
      context.conditions.push_back(std::move(cond));
    }
    if (!has_control) throw InvalidArgument("ingest: context '" + context.name + "' has no " + options.control_label + " cells");
    std::sort(context.conditions.begin(), context.conditions.end(),
              [](const data::Condition& a, const data::Condition& b) { return a.treatment_id < b.treatment_id; });
    ds.contexts.push_back(std::move(context));
  }
  return result;
}

IngestResult ingest_and_preprocess(const std::filesystem::path& matrix_path,
                                   const std::filesystem::path& labels_path, const IngestOptions& options) {
  Matrix counts;
  std::vector<std::string> genes;
  if (is_matrix_file(matrix_path)) {
    counts = data::read_matrix_file(matrix_path).values;
  } else {
    read_csv_matrix(matrix_path, counts, genes);
  }
  return ingest_counts(counts, genes, read_labels(labels_path), options);
}

}  // namespace mappfn::harness
