#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mappfn/data/dataset.hpp"

namespace mappfn::harness {

enum class SplitMode { kFewShot, kZeroShot };

SplitMode parse_split_mode(const std::string& text);
std::string to_string(SplitMode mode);

struct SplitSpec {
  int holdout_context = 0;
  SplitMode mode = SplitMode::kFewShot;
  double val_fraction = 0.1;
  std::uint64_t seed = 0;
};

struct Splits {
  std::vector<data::ConditionKey> train;
  std::vector<data::ConditionKey> val;
  std::vector<data::ConditionKey> test;
  /// Holdout conditions outside the test set (train in few-shot, discarded in zero-shot).
  std::vector<data::ConditionKey> holdout_rest;
};

/// Test gets floor(T/2) of the holdout context's T treatments, chosen at random
/// from a seed-only shuffle so both modes share it. Validation takes
/// floor(val_fraction * |train|) (at least one) of the remaining train
/// conditions. All sets are sorted.
Splits make_splits(const std::vector<data::ConditionKey>& conditions, const SplitSpec& spec);

}  // namespace mappfn::harness
