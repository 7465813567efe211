#include "mappfn/data/dataset_io.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <vector>

#include "json.hpp"

namespace mappfn::data {
namespace {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw InvalidArgument("truncated matrix file: " + path.string());
  }
  return value;
}

std::string batch_file_name(int context, int treatment) {
  char buf[64];
  if (treatment == kObservationalTreatment) {
    std::snprintf(buf, sizeof(buf), "ctx%05d_obs.bin", context);
  } else {
    std::snprintf(buf, sizeof(buf), "ctx%05d_t%04d.bin", context, treatment);
  }
  return buf;
}

int hot_index(const Vector& code) {
  if (code.size() == 0 || code.cwiseAbs().maxCoeff() == 0.0) return kObservationalTreatment;
  Eigen::Index hot = 0;
  code.cwiseAbs().maxCoeff(&hot);
  return static_cast<int>(hot);
}

}  // namespace

void write_matrix_file(const std::filesystem::path& path, const MatrixFile& file) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot open for writing: " + path.string());
  const auto d = static_cast<std::uint32_t>(file.values.cols());
  const auto n = static_cast<std::uint32_t>(file.values.rows());
  if (file.treatment_code.size() != static_cast<Eigen::Index>(d)) {
    throw InvalidArgument("write_matrix_file: treatment code length must equal d");
  }
  out.write(kMatrixMagic.data(), kMatrixMagic.size());
  put(out, d);
  put(out, n);
  put(out, file.kind);
  put(out, file.target);
  for (Eigen::Index j = 0; j < file.treatment_code.size(); ++j) put(out, static_cast<float>(file.treatment_code(j)));
  for (Eigen::Index i = 0; i < file.values.size(); ++i) put(out, static_cast<float>(file.values.data()[i]));
  if (!out) throw InvalidArgument("write failed: " + path.string());
}

MatrixFile read_matrix_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open matrix file: " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMatrixMagic) throw InvalidArgument("bad magic in matrix file: " + path.string());
  MatrixFile file;
  const auto d = get<std::uint32_t>(in, path);
  const auto n = get<std::uint32_t>(in, path);
  file.kind = get<std::uint32_t>(in, path);
  file.target = get<std::int32_t>(in, path);
  file.treatment_code.resize(d);
  for (std::uint32_t j = 0; j < d; ++j) file.treatment_code(j) = get<float>(in, path);
  file.values.resize(n, d);
  std::vector<float> raw(static_cast<std::size_t>(n) * d);
  if (!raw.empty() && !in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 4))) {
    throw InvalidArgument("truncated matrix file: " + path.string());
  }
  for (std::size_t i = 0; i < raw.size(); ++i) file.values.data()[i] = raw[i];
  return file;
}

void write_dataset(const std::filesystem::path& dir, const Dataset& dataset) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["format"] = "mappfn-dataset";
  manifest["version"] = 1;
  manifest["prior"] = dataset.prior;
  manifest["dims"] = dataset.dims;
  manifest["paired"] = dataset.paired;
  manifest["gene_names"] = dataset.gene_names;
  manifest["metadata"] = dataset.metadata;
  const std::string index_key = dataset.prior == "grn" ? "grn_index" : "scm_index";
  auto entries = nlohmann::ordered_json::array();
  for (const auto& ctx : dataset.contexts) {
    const std::string obs_name = batch_file_name(ctx.context_id, kObservationalTreatment);
    write_matrix_file(dir / obs_name, {0, kObservationalTreatment, Vector::Zero(dataset.dims), ctx.observational});
    entries.push_back({{index_key, ctx.context_id},
                       {"context", ctx.context_id},
                       {"context_name", ctx.name},
                       {"treatment", kObservationalTreatment},
                       {"kind", "observational"},
                       {"file", obs_name},
                       {"seed", ctx.observational_seed}});
    for (const auto& c : ctx.conditions) {
      const std::string name = batch_file_name(ctx.context_id, c.treatment_id);
      write_matrix_file(dir / name, {1, static_cast<std::int32_t>(c.treatment_id), c.treatment_code, c.samples});
      entries.push_back({{index_key, ctx.context_id},
                         {"context", ctx.context_id},
                         {"context_name", ctx.name},
                         {"treatment", c.treatment_id},
                         {"kind", "interventional"},
                         {"file", name},
                         {"seed", c.seed}});
    }
  }
  manifest["entries"] = std::move(entries);
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write manifest in " + dir.string());
  out << manifest.dump(2) << '\n';
}

Dataset read_dataset(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw InvalidArgument("missing manifest.json in " + dir.string());
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed manifest: ") + e.what());
  }
  if (manifest.value("format", "") != "mappfn-dataset") throw InvalidArgument("not a mappfn dataset: " + dir.string());
  Dataset dataset;
  dataset.prior = manifest.at("prior").get<std::string>();
  dataset.dims = manifest.at("dims").get<int>();
  dataset.paired = manifest.value("paired", false);
  dataset.gene_names = manifest.value("gene_names", std::vector<std::string>{});
  dataset.metadata = manifest.value("metadata", std::map<std::string, std::string>{});
  for (const auto& entry : manifest.at("entries")) {
    const int ctx_id = entry.at("context").get<int>();
    const int treatment = entry.at("treatment").get<int>();
    MatrixFile file = read_matrix_file(dir / entry.at("file").get<std::string>());
    if (file.values.cols() != dataset.dims) throw InvalidArgument("matrix width does not match manifest dims");
    if (dataset.contexts.empty() || dataset.contexts.back().context_id != ctx_id) {
      Context ctx;
      ctx.context_id = ctx_id;
      ctx.name = entry.value("context_name", std::to_string(ctx_id));
      dataset.contexts.push_back(std::move(ctx));
    }
    Context& ctx = dataset.contexts.back();
    const auto seed = entry.value("seed", std::uint64_t{0});
    if (treatment == kObservationalTreatment) {
      ctx.observational = std::move(file.values);
      ctx.observational_seed = seed;
    } else {
      if (hot_index(file.treatment_code) != treatment && file.treatment_code.cwiseAbs().maxCoeff() != 0.0) {
        throw InvalidArgument("treatment code disagrees with manifest entry " + entry.at("file").get<std::string>());
      }
      ctx.conditions.push_back({treatment, std::move(file.treatment_code), std::move(file.values), seed});
    }
  }
  return dataset;
}

}  // namespace mappfn::data
