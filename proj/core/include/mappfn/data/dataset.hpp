#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mappfn/common.hpp"

namespace mappfn::data {

/// Treatment id of the untreated (observational) batch of a context.
inline constexpr int kObservationalTreatment = -1;

/// A (biological context, treatment) pair; the unit of data splitting.
struct ConditionKey {
  int context_id = 0;
  int treatment_id = 0;

  auto operator<=>(const ConditionKey&) const = default;
};

struct Condition {
  int treatment_id = 0;
  Vector treatment_code;
  Matrix samples;
  std::uint64_t seed = 0;
};

struct Context {
  int context_id = 0;
  std::string name;
  Matrix observational;
  std::uint64_t observational_seed = 0;
  std::vector<Condition> conditions;

  [[nodiscard]] const Condition* find(int treatment_id) const;
};

struct Dataset {
  std::string prior;  // "scm", "grn" or "external"
  int dims = 0;
  bool paired = false;
  std::vector<std::string> gene_names;
  std::map<std::string, std::string> metadata;
  std::vector<Context> contexts;

  [[nodiscard]] const Context& context(int context_id) const;
  [[nodiscard]] const Condition& condition(const ConditionKey& key) const;
  [[nodiscard]] std::vector<ConditionKey> condition_keys() const;
};

}  // namespace mappfn::data
