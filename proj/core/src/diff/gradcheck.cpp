#include "mappfn/diff/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mappfn::diff {
namespace {

double evaluate(const ScalarFunction& f, const std::vector<Mat<double>>& inputs) {
  Tape<double> tape;
  std::vector<Var> vars;
  for (const auto& x : inputs) vars.push_back(tape.constant(x));
  const Var out = f(tape, vars);
  return tape.value(out)(0, 0);
}

}  // namespace

GradCheckResult check_gradients(const ScalarFunction& f, const std::vector<Mat<double>>& inputs,
                                const GradCheckOptions& options) {
  Tape<double> tape;
  std::vector<Var> vars;
  for (const auto& x : inputs) vars.push_back(tape.variable(x));
  const Var out = f(tape, vars);
  tape.backward(out);

  std::vector<std::pair<std::size_t, Eigen::Index>> entries;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (Eigen::Index k = 0; k < inputs[i].size(); ++k) entries.emplace_back(i, k);
  }
  if (options.max_entries > 0 && entries.size() > options.max_entries) {
    Rng rng(options.seed);
    std::shuffle(entries.begin(), entries.end(), rng);
    entries.resize(options.max_entries);
  }

  GradCheckResult result;
  std::vector<Mat<double>> probe = inputs;
  for (const auto& [i, k] : entries) {
    const Mat<double>& g = tape.grad(vars[i]);
    const double analytic = g.size() == 0 ? 0.0 : g.data()[k];
    double& x = probe[i].data()[k];
    const double x0 = x;
    x = x0 + options.step;
    const double up = evaluate(f, probe);
    x = x0 - options.step;
    const double down = evaluate(f, probe);
    x = x0;
    const double numeric = (up - down) / (2.0 * options.step);
    const double error =
        std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), options.floor});
    ++result.checked;
    if (error > result.max_error || result.worst.empty()) {
      result.max_error = std::max(result.max_error, error);
      const Eigen::Index cols = inputs[i].cols();
      result.worst = "input" + std::to_string(i) + "[" + std::to_string(k / cols) + "," + std::to_string(k % cols) + "]";
    }
  }
  return result;
}

}  // namespace mappfn::diff
