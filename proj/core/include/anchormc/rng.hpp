#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace anchormc {

// Counter-based splitmix64 step. Used for seed expansion only, never as the
// chain generator itself.
std::uint64_t splitmix64(std::uint64_t& state);

// Deterministic master-seed expansion. Stream s always yields the same seed
// regardless of how many other streams are derived, so adding shards (or
// tempering replicas) never perturbs existing chains.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                          std::uint64_t substream);

// Seedable generator with hand-rolled variate samplers so that a given seed
// reproduces the same stream across compilers and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0,1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer on [lo, hi] inclusive.
  int uniform_int(int lo, int hi);

  double normal();  // standard normal, Marsaglia polar with cached spare
  double gamma(double shape, double rate);
  double beta(double a, double b);
  double chi_squared(double dof) { return gamma(0.5 * dof, 0.5); }
  int poisson(double mean);
  int binomial(int n, double p);
  bool bernoulli(double p) { return uniform() < p; }

  // Index draw from unnormalized log weights.
  int categorical_from_logits(std::span<const double> logits);
  // Index draw from normalized probabilities (caller guarantees sum 1).
  int categorical(std::span<const double> probs);

  Eigen::VectorXd dirichlet(const Eigen::VectorXd& alpha);
  Eigen::VectorXd standard_normal_vector(int p);

  // Fisher-Yates permutation of {0,...,n-1}.
  std::vector<int> permutation(int n);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace anchormc
