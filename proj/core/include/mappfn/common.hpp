#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace mappfn {

/// Row-major double matrix: one row per cell / sample, one column per gene / node.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Rng = std::mt19937_64;

// Error taxonomy. The CLI maps InvalidArgument to exit code 2 and
// NumericalFailure to exit code 3.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The observational and interventional distributions are (numerically) the same,
/// so a magnitude ratio has no meaning.
class DegenerateEffect : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

/// A metric is undefined for the given input (zero positives, zero variance, ...).
class UndefinedMetric : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

/// Roles that select independent random streams for one (context, treatment) pair.
enum class SeedRole : std::uint64_t {
  kGraph = 1,
  kObservational = 2,
  kInterventional = 3,
  kInterventionValue = 4,
  kSharedNoise = 5,
  kTechnicalNoise = 6,
  kConfig = 7,
};

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Derives a per-condition seed as a chained SplitMix64 hash of
/// (base, context index, treatment index, role). Treatment index -1 denotes the
/// observational (control) condition. The result does not depend on which worker
/// generates the condition.
constexpr std::uint64_t mix_seed(std::uint64_t base, std::int64_t context, std::int64_t treatment,
                                 SeedRole role) {
  std::uint64_t h = splitmix64(base);
  h = splitmix64(h ^ static_cast<std::uint64_t>(context));
  h = splitmix64(h ^ static_cast<std::uint64_t>(treatment));
  return splitmix64(h ^ static_cast<std::uint64_t>(role));
}

/// Matrix of i.i.d. standard-normal draws.
Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng);

/// Runs body(i) for i in [0, count) on up to `workers` threads. Each index is
/// processed exactly once; results must be written to per-index slots.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& body);

}  // namespace mappfn
