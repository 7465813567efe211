#pragma once

#include <cstdint>

#include "mappfn/model/mappfn_model.hpp"
#include "mappfn/train/dopri5.hpp"

namespace mappfn::train {

struct GuidanceConfig {
  double omega = 2.0;
  double rtol = 1e-4;
  double atol = 1e-5;
  int max_steps = 10000;
};

/// Conditional (drop = false) and unconditional (drop = true) velocity.
class VelocityField {
 public:
  virtual ~VelocityField() = default;
  virtual Matrix velocity(const Matrix& y, double tau, bool drop_condition) const = 0;
};

class ModelField final : public VelocityField {
 public:
  ModelField(const model::ModelConfig& cfg, const model::Params& params, const model::ExperimentBundle& bundle)
      : cfg_(cfg), params_(params), bundle_(bundle) {}
  Matrix velocity(const Matrix& y, double tau, bool drop_condition) const override;

 private:
  const model::ModelConfig& cfg_;
  const model::Params& params_;
  const model::ExperimentBundle& bundle_;
};

/// v_u + omega (v_c - v_u); exactly v_c when omega == 1.
Matrix guided_velocity(const VelocityField& field, const Matrix& y, double tau, double omega);

/// Integrates the guided field from tau = 0 (y ~ N(0, I), M x d) to tau = 1.
Matrix generate(const VelocityField& field, const GuidanceConfig& guidance, int m, int d, std::uint64_t seed,
                OdeStats* stats = nullptr);
/// Same, starting from the given noise batch.
Matrix generate_from(const VelocityField& field, const GuidanceConfig& guidance, const Matrix& y0,
                     OdeStats* stats = nullptr);

Matrix generate(const model::ModelConfig& cfg, const model::Params& params, const model::ExperimentBundle& bundle,
                const GuidanceConfig& guidance, int m, std::uint64_t seed);

}  // namespace mappfn::train
