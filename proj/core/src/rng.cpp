#include "anchormc/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace anchormc {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t state = master;
  std::uint64_t base = splitmix64(state);
  state = base + stream * 0x9E3779B97F4A7C15ULL;
  return splitmix64(state);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                          std::uint64_t substream) {
  return derive_seed(derive_seed(master, stream), substream);
}

int Rng::uniform_int(int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  // Rejection-free modulo bias is negligible for the small spans used here,
  // but reject anyway to keep streams exactly uniform.
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() / span * span;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return lo + static_cast<int>(x % span);
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

double Rng::gamma(double shape, double rate) {
  if (shape <= 0.0 || rate <= 0.0) {
    throw std::invalid_argument("gamma: shape and rate must be positive");
  }
  if (shape < 1.0) {
    // Boost to shape+1 and scale back (Marsaglia-Tsang note).
    const double u = uniform();
    return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
  }
  // Marsaglia-Tsang squeeze.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
      return d * v / rate;
    }
  }
}

double Rng::beta(double a, double b) {
  const double x = gamma(a, 1.0);
  const double y = gamma(b, 1.0);
  return x / (x + y);
}

int Rng::poisson(double mean) {
  if (mean < 0.0) throw std::invalid_argument("poisson: negative mean");
  if (mean == 0.0) return 0;
  if (mean < 30.0) {
    // Knuth multiplication method.
    const double limit = std::exp(-mean);
    double prod = uniform();
    int k = 0;
    while (prod > limit) {
      prod *= uniform();
      ++k;
    }
    return k;
  }
  // Split recursively; means used in this codebase are far below this branch.
  const int half = poisson(mean / 2.0);
  return half + poisson(mean / 2.0);
}

int Rng::binomial(int n, double p) {
  int k = 0;
  for (int i = 0; i < n; ++i) k += bernoulli(p) ? 1 : 0;
  return k;
}

int Rng::categorical_from_logits(std::span<const double> logits) {
  if (logits.empty()) {
    throw std::invalid_argument("categorical_from_logits: empty support");
  }
  double max_logit = logits[0];
  for (double l : logits) max_logit = std::max(max_logit, l);
  double total = 0.0;
  std::vector<double> w(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    w[i] = std::exp(logits[i] - max_logit);
    total += w[i];
  }
  double u = uniform() * total;
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    u -= w[i];
    if (u < 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(w.size()) - 1;
}

int Rng::categorical(std::span<const double> probs) {
  double u = uniform();
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    u -= probs[i];
    if (u < 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

Eigen::VectorXd Rng::dirichlet(const Eigen::VectorXd& alpha) {
  Eigen::VectorXd x(alpha.size());
  for (Eigen::Index i = 0; i < alpha.size(); ++i) x[i] = gamma(alpha[i], 1.0);
  const double s = x.sum();
  return x / s;
}

Eigen::VectorXd Rng::standard_normal_vector(int p) {
  Eigen::VectorXd v(p);
  for (int i = 0; i < p; ++i) v[i] = normal();
  return v;
}

std::vector<int> Rng::permutation(int n) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  for (int i = n - 1; i > 0; --i) {
    const int j = uniform_int(0, i);
    std::swap(idx[i], idx[j]);
  }
  return idx;
}

}  // namespace anchormc
