#include "mappfn/grn/sergio.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace mappfn::grn {

SergioConfig SergioConfig::sample(Rng& rng) {
  auto unif = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  SergioConfig cfg;
  cfg.hill_gamma = unif(1.5, 2.5);
  cfg.zeta = unif(0.5, 1.5);
  cfg.mu_outlier = unif(0.8, 5.0);
  cfg.mu_lib = unif(4.5, 6.0);
  cfg.sigma_lib = unif(0.3, 0.7);
  cfg.delta_dropout = 8.0;
  cfg.xi_dropout = unif(45.0, 82.0);
  return cfg;
}

namespace {

struct CompiledEdge {
  int regulator;
  double strength;
  double half_gamma;  // h^gamma
};

struct CompiledNetwork {
  std::vector<std::vector<CompiledEdge>> incoming;
  std::vector<double> basal;
  std::vector<double> decay;
  double gamma;
};

CompiledNetwork compile(const Grn& grn, double gamma) {
  CompiledNetwork net;
  net.incoming.resize(static_cast<std::size_t>(grn.genes));
  for (const auto& e : grn.edges) {
    net.incoming[static_cast<std::size_t>(e.target)].push_back(
        {e.regulator, e.strength, std::pow(e.half_response, gamma)});
  }
  net.basal = grn.basal_rate;
  net.decay = grn.decay;
  net.gamma = gamma;
  return net;
}

}  // namespace

Matrix simulate_expression(const Grn& grn, const SergioConfig& config, int cells, std::uint64_t seed, int workers) {
  if (cells < 1) throw InvalidArgument("simulate_expression: need at least one cell");
  const std::vector<double> start = deterministic_steady_state(grn, config.hill_gamma);
  const CompiledNetwork net = compile(grn, config.hill_gamma);
  const auto genes = static_cast<std::size_t>(grn.genes);
  const double sqrt_dt = std::sqrt(config.dt);

  Matrix out(cells, grn.genes);
  parallel_for(static_cast<std::size_t>(cells), workers, [&](std::size_t cell) {
    Rng rng(splitmix64(seed ^ splitmix64(cell + 1)));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> x = start;
    std::vector<double> x_gamma(genes);
    std::vector<double> production(genes);
    for (int step = 0; step < config.burn_in_steps; ++step) {
      for (std::size_t g = 0; g < genes; ++g) x_gamma[g] = x[g] > 0.0 ? std::pow(x[g], net.gamma) : 0.0;
      for (std::size_t g = 0; g < genes; ++g) {
        double p = net.basal[g];
        for (const auto& e : net.incoming[g]) {
          const double xg = x_gamma[static_cast<std::size_t>(e.regulator)];
          const double h = xg / (e.half_gamma + xg);
          p += e.strength > 0.0 ? e.strength * h : -e.strength * (1.0 - h);
        }
        production[g] = p;
      }
      for (std::size_t g = 0; g < genes; ++g) {
        const double degradation = net.decay[g] * x[g];
        const double noise = config.zeta * sqrt_dt *
                             (std::sqrt(production[g]) * normal(rng) - std::sqrt(degradation) * normal(rng));
        const double next = x[g] + (production[g] - degradation) * config.dt + noise;
        if (!std::isfinite(next)) {
          throw NumericalFailure("simulate_expression: non-finite state at step " + std::to_string(step) +
                                 ", gene " + std::to_string(g) + ", cell " + std::to_string(cell));
        }
        x[g] = std::max(0.0, next);
      }
    }
    for (std::size_t g = 0; g < genes; ++g) out(static_cast<Eigen::Index>(cell), static_cast<Eigen::Index>(g)) = x[g];
  });
  return out;
}

double percentile(const Matrix& values, double q) {
  if (values.size() == 0) throw InvalidArgument("percentile of an empty matrix");
  std::vector<double> v(values.data(), values.data() + values.size());
  std::sort(v.begin(), v.end());
  const double pos = std::clamp(q, 0.0, 100.0) / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

Matrix apply_technical_noise(const Matrix& clean, const SergioConfig& config, std::uint64_t seed) {
  if (clean.size() > 0 && clean.minCoeff() < 0.0) throw InvalidArgument("apply_technical_noise: negative expression");
  Rng rng(seed);
  Matrix expr = clean;

  if (config.apply_outliers) {
    std::bernoulli_distribution is_outlier(config.outlier_fraction);
    std::lognormal_distribution<double> factor(config.mu_outlier, 1.0);
    for (Eigen::Index g = 0; g < expr.cols(); ++g) {
      if (is_outlier(rng)) expr.col(g) *= factor(rng);
    }
  }

  if (config.apply_library_size) {
    std::lognormal_distribution<double> library(config.mu_lib, config.sigma_lib);
    for (Eigen::Index c = 0; c < expr.rows(); ++c) {
      const double size = library(rng);
      const double total = expr.row(c).sum();
      if (total > 0.0) expr.row(c) *= size / total;
    }
  }

  if (config.apply_dropout && expr.size() > 0) {
    const Matrix log_expr = expr.array().log1p().matrix();
    const double midpoint = percentile(log_expr, config.delta_dropout);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (Eigen::Index i = 0; i < expr.size(); ++i) {
      const double keep = 1.0 / (1.0 + std::exp(-config.xi_dropout * (log_expr.data()[i] - midpoint)));
      if (u(rng) >= keep) expr.data()[i] = 0.0;
    }
  }

  Matrix counts(expr.rows(), expr.cols());
  for (Eigen::Index i = 0; i < expr.size(); ++i) {
    const double mean = expr.data()[i];
    counts.data()[i] = mean > 0.0 ? static_cast<double>(std::poisson_distribution<long long>(mean)(rng)) : 0.0;
  }
  return counts;
}

}  // namespace mappfn::grn
