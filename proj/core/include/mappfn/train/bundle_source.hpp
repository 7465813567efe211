#pragma once

#include <vector>

#include "mappfn/data/dataset.hpp"
#include "mappfn/model/bundle.hpp"

namespace mappfn::train {

struct BundleOptions {
  /// Context experiments per bundle (the maximum when variable_context).
  int context_size = 2;
  /// Draw K uniformly from {0, ..., context_size} per bundle.
  bool variable_context = false;
  /// Cells kept per batch; 0 keeps all. The same row subset is taken from the
  /// observational, context and target batches so paired rows stay aligned.
  int cells = 0;
};

/// Draws training bundles from a dataset: a context, a query treatment and K
/// other treatments of the same context, all within the allowed conditions.
class BundleSource {
 public:
  /// An empty pool allows every condition of the dataset.
  BundleSource(const data::Dataset& dataset, BundleOptions options, const std::vector<data::ConditionKey>& pool = {});

  [[nodiscard]] model::ExperimentBundle draw(Rng& rng) const;
  [[nodiscard]] const BundleOptions& options() const { return options_; }

 private:
  struct Group {
    const data::Context* context;
    std::vector<const data::Condition*> conditions;
  };

  const data::Dataset& dataset_;
  BundleOptions options_;
  std::vector<Group> groups_;
};

/// Same random row subset of every batch (at most `cells` rows, drawn among
/// the row indices all batches share).
std::vector<Eigen::Index> shared_row_subset(Eigen::Index available, int cells, Rng& rng);
Matrix take_rows(const Matrix& m, const std::vector<Eigen::Index>& rows);

}  // namespace mappfn::train
