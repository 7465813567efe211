#include "mappfn/harness/splits.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace mappfn::harness {

SplitMode parse_split_mode(const std::string& text) {
  if (text == "few-shot" || text == "few_shot" || text == "fewshot") return SplitMode::kFewShot;
  if (text == "zero-shot" || text == "zero_shot" || text == "zeroshot") return SplitMode::kZeroShot;
  throw InvalidArgument("unknown split mode '" + text + "' (expected few-shot or zero-shot)");
}

std::string to_string(SplitMode mode) { return mode == SplitMode::kFewShot ? "few-shot" : "zero-shot"; }

Splits make_splits(const std::vector<data::ConditionKey>& conditions, const SplitSpec& spec) {
  if (!(spec.val_fraction > 0.0 && spec.val_fraction < 1.0)) {
    throw InvalidArgument("make_splits: val_fraction must lie in (0, 1)");
  }
  const std::set<data::ConditionKey> unique(conditions.begin(), conditions.end());
  if (unique.size() != conditions.size()) throw InvalidArgument("make_splits: duplicate condition keys");

  std::vector<data::ConditionKey> holdout;
  std::vector<data::ConditionKey> train;
  for (const auto& key : unique) {
    (key.context_id == spec.holdout_context ? holdout : train).push_back(key);
  }
  if (holdout.empty()) {
    throw InvalidArgument("make_splits: holdout context " + std::to_string(spec.holdout_context) + " has no conditions");
  }
  if (holdout.size() < 2) throw InvalidArgument("make_splits: holdout context needs at least two treatments");

  Rng test_rng(mix_seed(spec.seed, spec.holdout_context, 0, SeedRole::kConfig));
  std::shuffle(holdout.begin(), holdout.end(), test_rng);
  const std::size_t n_test = holdout.size() / 2;
  Splits s;
  s.test.assign(holdout.begin(), holdout.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.holdout_rest.assign(holdout.begin() + static_cast<std::ptrdiff_t>(n_test), holdout.end());
  if (spec.mode == SplitMode::kFewShot) train.insert(train.end(), s.holdout_rest.begin(), s.holdout_rest.end());
  std::sort(train.begin(), train.end());

  if (!train.empty()) {
    Rng val_rng(mix_seed(spec.seed, spec.holdout_context, 1, SeedRole::kConfig));
    std::shuffle(train.begin(), train.end(), val_rng);
    const auto n_val = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(spec.val_fraction * static_cast<double>(train.size()))));
    if (n_val < train.size()) {
      s.val.assign(train.begin(), train.begin() + static_cast<std::ptrdiff_t>(n_val));
      train.erase(train.begin(), train.begin() + static_cast<std::ptrdiff_t>(n_val));
    }
  }
  s.train = std::move(train);
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.test.begin(), s.test.end());
  std::sort(s.holdout_rest.begin(), s.holdout_rest.end());
  return s;
}

}  // namespace mappfn::harness
