#pragma once

#include <cstdint>

#include "mappfn/diff/parameter_set.hpp"
#include "mappfn/model/bundle.hpp"
#include "mappfn/model/model_config.hpp"

namespace mappfn::model {

using Params = diff::ParameterSet<float>;

/// Allocates and initializes every parameter; deterministic in (cfg, seed).
/// Modulation and output projections start at zero.
Params build_model(const ModelConfig& cfg, std::uint64_t seed);

/// Velocity prediction for the rows of y_tau on a tape. `bound` is the binding
/// of `params` on the same tape (see diff::bind).
///
/// Rows of y_tau, y_obs and each context batch are put in lexicographic order
/// first, so permuting query rows permutes the output and permuting
/// conditioning cells leaves it bit-identical.
template <typename T>
diff::Var forward(diff::Tape<T>& tape, const ModelConfig& cfg, const diff::ParameterSet<T>& params,
                  const std::vector<diff::Var>& bound, const diff::Mat<T>& y_tau, double tau,
                  const ExperimentBundle& bundle, bool drop_condition);

/// Inference-only forward pass (M x d).
Matrix predict_velocity(const ModelConfig& cfg, const Params& params, const Matrix& y_tau, double tau,
                        const ExperimentBundle& bundle, bool drop_condition);

/// Flow-matching loss: mean squared error between the predicted velocity at
/// y_tau = (1 - tau) y0 + tau target and the target velocity target - y0.
template <typename T>
diff::Var cfm_loss(diff::Tape<T>& tape, const ModelConfig& cfg, const diff::ParameterSet<T>& params,
                   const std::vector<diff::Var>& bound, const ExperimentBundle& bundle, double tau,
                   const Matrix& y0, bool drop_condition);

/// Checks widths and context size against the config.
void validate_bundle(const ModelConfig& cfg, const ExperimentBundle& bundle, bool drop_condition);

}  // namespace mappfn::model
