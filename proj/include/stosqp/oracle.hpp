#pragma once

#include <stosqp/core.hpp>

#include <cmath>
#include <cstdint>
#include <random>

namespace stosqp {

struct OracleConfig {
  /// Per-coordinate Gaussian variance of the gradient noise.
  double noise_variance = 0.0;
  std::uint64_t seed = 0;

  /// Bound on E||gbar - g||^2 for an n-dimensional problem.
  double variance_bound(int n) const { return n * noise_variance; }
};

struct GradientSample {
  Vector gbar;
  /// For metrics only; solvers driven by the oracle never read it.
  Vector true_gradient;
};

/// SplitMix64 finalizer, used to derive independent per-iteration seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(seed ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

/// Seeded Gaussian gradient oracle, gbar = N(g, noise_variance * I).
///
/// Draw k comes from its own generator seeded by (seed, k), so a sample
/// depends only on the seed and its index, never on how many draws
/// preceded it in wall-clock order.
class GradientOracle {
 public:
  explicit GradientOracle(OracleConfig config) : config_(config) {
    if (!(config_.noise_variance >= 0.0) || !std::isfinite(config_.noise_variance)) {
      throw ContractViolation("oracle noise variance must be finite and nonnegative");
    }
  }

  const OracleConfig& config() const { return config_; }
  std::uint64_t draws() const { return next_; }

  /// Next sample in the stream.
  GradientSample sample(const Vector& g) { return sample_at(g, next_++); }

  /// Sample with explicit stream index; does not advance the counter.
  GradientSample sample_at(const Vector& g, std::uint64_t index) const {
    GradientSample out{g, g};
    if (config_.noise_variance == 0.0) return out;
    std::mt19937_64 engine(derive_seed(config_.seed, index));
    std::normal_distribution<double> normal(0.0, 1.0);
    const double scale = std::sqrt(config_.noise_variance);
    for (Eigen::Index i = 0; i < out.gbar.size(); ++i) out.gbar[i] += scale * normal(engine);
    return out;
  }

 private:
  OracleConfig config_;
  std::uint64_t next_ = 0;
};

}  // namespace stosqp
