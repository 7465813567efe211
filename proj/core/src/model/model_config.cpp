#include "mappfn/model/model_config.hpp"

#include "json.hpp"
#include "mappfn/common.hpp"

namespace mappfn::model {

ModelConfig ModelConfig::toy(int genes, int max_context) {
  ModelConfig c;
  c.max_genes = genes;
  c.max_context = max_context;
  return c;
}

ModelConfig ModelConfig::paper(int genes, int max_context) {
  ModelConfig c;
  c.layers = 8;
  c.embed_dim = 256;
  c.ff_dim = 512;
  c.heads = 4;
  c.head_dim = 64;
  c.register_tokens = 8;
  c.max_genes = genes;
  c.max_context = max_context;
  return c;
}

ModelConfig ModelConfig::profile(const std::string& name, int genes, int max_context) {
  if (name == "toy") return toy(genes, max_context);
  if (name == "paper") return paper(genes, max_context);
  throw InvalidArgument("unknown model profile '" + name + "' (expected toy or paper)");
}

void ModelConfig::validate() const {
  if (layers < 1 || embed_dim < 1 || ff_dim < 1 || heads < 1 || head_dim < 1 || max_genes < 1) {
    throw InvalidArgument("model config: sizes must be positive");
  }
  if (register_tokens < 0 || max_context < 0) throw InvalidArgument("model config: negative token counts");
  if (embed_dim % 2 != 0) throw InvalidArgument("model config: embed_dim must be even");
  if (!(condition_drop_prob >= 0.0 && condition_drop_prob < 1.0)) {
    throw InvalidArgument("model config: condition_drop_prob must lie in [0, 1)");
  }
}

std::string ModelConfig::to_json() const {
  nlohmann::ordered_json j;
  j["layers"] = layers;
  j["embed_dim"] = embed_dim;
  j["ff_dim"] = ff_dim;
  j["heads"] = heads;
  j["head_dim"] = head_dim;
  j["register_tokens"] = register_tokens;
  j["max_genes"] = max_genes;
  j["max_context"] = max_context;
  j["condition_drop_prob"] = condition_drop_prob;
  return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    ModelConfig c;
    c.layers = j.at("layers").get<int>();
    c.embed_dim = j.at("embed_dim").get<int>();
    c.ff_dim = j.at("ff_dim").get<int>();
    c.heads = j.at("heads").get<int>();
    c.head_dim = j.at("head_dim").get<int>();
    c.register_tokens = j.at("register_tokens").get<int>();
    c.max_genes = j.at("max_genes").get<int>();
    c.max_context = j.at("max_context").get<int>();
    c.condition_drop_prob = j.at("condition_drop_prob").get<double>();
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("model config: ") + e.what());
  }
}

}  // namespace mappfn::model
