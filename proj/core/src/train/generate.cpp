#include "mappfn/train/generate.hpp"

namespace mappfn::train {

Matrix ModelField::velocity(const Matrix& y, double tau, bool drop_condition) const {
  return model::predict_velocity(cfg_, params_, y, tau, bundle_, drop_condition);
}

Matrix guided_velocity(const VelocityField& field, const Matrix& y, double tau, double omega) {
  Matrix vc = field.velocity(y, tau, false);
  if (omega == 1.0) return vc;
  const Matrix vu = field.velocity(y, tau, true);
  return vu + omega * (vc - vu);
}

Matrix generate_from(const VelocityField& field, const GuidanceConfig& guidance, const Matrix& y0, OdeStats* stats) {
  const OdeOptions options{guidance.rtol, guidance.atol, guidance.max_steps};
  return integrate_dopri5([&](double tau, const Matrix& y) { return guided_velocity(field, y, tau, guidance.omega); },
                          y0, 0.0, 1.0, options, stats);
}

Matrix generate(const VelocityField& field, const GuidanceConfig& guidance, int m, int d, std::uint64_t seed,
                OdeStats* stats) {
  if (m < 1 || d < 1) throw InvalidArgument("generate: M and d must be positive");
  Rng rng(seed);
  return generate_from(field, guidance, standard_normal(m, d, rng), stats);
}

Matrix generate(const model::ModelConfig& cfg, const model::Params& params, const model::ExperimentBundle& bundle,
                const GuidanceConfig& guidance, int m, std::uint64_t seed) {
  model::validate_bundle(cfg, bundle, false);
  const ModelField field(cfg, params, bundle);
  return generate(field, guidance, m, cfg.max_genes, seed);
}

}  // namespace mappfn::train
