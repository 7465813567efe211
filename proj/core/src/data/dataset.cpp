#include "mappfn/data/dataset.hpp"

#include <string>

namespace mappfn::data {

const Condition* Context::find(int treatment_id) const {
  for (const auto& c : conditions) {
    if (c.treatment_id == treatment_id) return &c;
  }
  return nullptr;
}

const Context& Dataset::context(int context_id) const {
  for (const auto& ctx : contexts) {
    if (ctx.context_id == context_id) return ctx;
  }
  throw InvalidArgument("dataset has no context " + std::to_string(context_id));
}

const Condition& Dataset::condition(const ConditionKey& key) const {
  const Condition* c = context(key.context_id).find(key.treatment_id);
  if (c == nullptr) {
    throw InvalidArgument("dataset has no condition (" + std::to_string(key.context_id) + ", " +
                          std::to_string(key.treatment_id) + ")");
  }
  return *c;
}

std::vector<ConditionKey> Dataset::condition_keys() const {
  std::vector<ConditionKey> keys;
  for (const auto& ctx : contexts) {
    for (const auto& c : ctx.conditions) keys.push_back({ctx.context_id, c.treatment_id});
  }
  return keys;
}

}  // namespace mappfn::data
