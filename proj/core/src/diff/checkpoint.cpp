#include "mappfn/diff/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>

namespace mappfn::diff {

namespace {

constexpr std::array<char, 8> kMagic{'M', 'P', 'F', 'N', 'C', 'K', 'P', 'T'};
constexpr std::string_view kParamsPrefix = "params/";
constexpr std::string_view kEmaPrefix = "ema/";

void put_u32(std::ostream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }

std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw InvalidArgument("checkpoint: truncated file");
  return v;
}

std::string get_bytes(std::istream& in, std::uint32_t n) {
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw InvalidArgument("checkpoint: truncated file");
  return s;
}

void put_entries(std::ostream& out, std::string_view prefix, const ParameterSet<float>& params) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string name = std::string(prefix) + params.name(i);
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    const auto& v = params.value(i);
    put_u32(out, static_cast<std::uint32_t>(v.rows()));
    put_u32(out, static_cast<std::uint32_t>(v.cols()));
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(float)));
  }
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const CheckpointData& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("checkpoint: cannot open " + path.string() + " for writing");
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(data.header_json.size()));
  out.write(data.header_json.data(), static_cast<std::streamsize>(data.header_json.size()));
  const std::size_t entries = data.params.size() + (data.ema ? data.ema->size() : 0);
  put_u32(out, static_cast<std::uint32_t>(entries));
  put_entries(out, kParamsPrefix, data.params);
  if (data.ema) put_entries(out, kEmaPrefix, *data.ema);
  if (!out) throw InvalidArgument("checkpoint: write failed for " + path.string());
}

CheckpointData read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("checkpoint: cannot open " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw InvalidArgument("checkpoint: bad magic in " + path.string());
  const std::uint32_t version = get_u32(in);
  if (version != kCheckpointVersion) {
    throw InvalidArgument("checkpoint: unsupported version " + std::to_string(version));
  }
  CheckpointData data;
  data.header_json = get_bytes(in, get_u32(in));
  const std::uint32_t entries = get_u32(in);
  ParameterSet<float> ema;
  for (std::uint32_t e = 0; e < entries; ++e) {
    const std::string name = get_bytes(in, get_u32(in));
    const std::uint32_t rows = get_u32(in);
    const std::uint32_t cols = get_u32(in);
    Mat<float> v(rows, cols);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(float)));
    if (!in) throw InvalidArgument("checkpoint: truncated tensor " + name);
    if (name.starts_with(kParamsPrefix)) {
      data.params.add(name.substr(kParamsPrefix.size()), std::move(v));
    } else if (name.starts_with(kEmaPrefix)) {
      ema.add(name.substr(kEmaPrefix.size()), std::move(v));
    } else {
      throw InvalidArgument("checkpoint: unknown entry " + name);
    }
  }
  if (ema.size() > 0) data.ema = std::move(ema);
  return data;
}

}  // namespace mappfn::diff
