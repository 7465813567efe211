#pragma once

#include <string>

namespace mappfn::model {

struct ModelConfig {
  int layers = 2;
  int embed_dim = 64;
  int ff_dim = 128;
  int heads = 4;
  int head_dim = 16;
  int register_tokens = 4;
  int max_genes = 6;
  int max_context = 2;
  double condition_drop_prob = 0.2;

  /// 2 layers, width 64, ff 128, 4 x 16 heads, 4 registers.
  static ModelConfig toy(int genes, int max_context);
  /// 8 layers, width 256, ff 512, 4 x 64 heads, 8 registers.
  static ModelConfig paper(int genes, int max_context);
  /// "toy" or "paper".
  static ModelConfig profile(const std::string& name, int genes, int max_context);

  [[nodiscard]] int attention_width() const { return heads * head_dim; }
  /// Throws InvalidArgument on non-positive sizes or a drop probability outside [0, 1).
  void validate() const;

  [[nodiscard]] std::string to_json() const;
  static ModelConfig from_json(const std::string& text);

  bool operator==(const ModelConfig&) const = default;
};

}  // namespace mappfn::model
