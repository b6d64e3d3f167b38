#include "anchormc/simgen.hpp"

#include <cmath>
#include <stdexcept>

namespace anchormc {

namespace {
IdSet make_ids(int n) {
  IdSet ids(n);
  for (int i = 0; i < n; ++i) ids[i] = i + 1;
  return ids;
}
}  // namespace

Sim1Truth gen_sim1(int n, std::uint64_t seed) {
  if (n < 4 || n % 4 != 0) {
    throw std::invalid_argument("gen_sim1: n must be a positive multiple of 4");
  }
  const int p = 4;
  Eigen::MatrixXd means(4, p);
  means << -1, 1, -1, 1,
            1, -1, 1, -1,
           -1, -1, 1, 1,
            1, 1, -1, -1;
  const double sd = std::sqrt(0.4);

  Rng rng(seed);
  Sim1Truth out;
  out.data.y.resize(n, p);
  out.data.ids = make_ids(n);
  out.truth = AllocationMatrix::zeros(SubsetKind::Partition, n, 4);
  const int per_cluster = n / 4;
  for (int i = 0; i < n; ++i) {
    const int k = i / per_cluster;
    out.truth.at(i, k) = 1;
    for (int j = 0; j < p; ++j) {
      out.data.y(i, j) = means(k, j) + sd * rng.normal();
    }
  }
  for (int k = 0; k < 4; ++k) {
    GaussianClusterParams params;
    params.mu = means.row(k).transpose();
    params.sigma = 0.4 * Eigen::MatrixXd::Identity(p, p);
    out.params.emplace_back(std::move(params));
  }
  return out;
}

Sim2Truth gen_sim2(std::uint64_t seed, int n, int p) {
  if (n < 8 || p < 1) throw std::invalid_argument("gen_sim2: bad sizes");
  Rng rng(seed);
  Sim2Truth out;
  out.p0 = 0.01;
  const int breaks[4] = {n * 100 / 800, n * 250 / 800, n * 400 / 800,
                         n * 600 / 800};
  out.truth = AllocationMatrix::zeros(SubsetKind::Feature, n, 4);
  for (int k = 0; k < 4; ++k) {
    for (int i = 0; i < breaks[k]; ++i) out.truth.at(i, k) = 1;
  }

  // (b_j, theta*_j1..j4) ~ Dir(0.2, pi) with pi a random permutation of
  // (1, 5, 6, 10), drawn once per replicate.
  const double base_weights[4] = {1.0, 5.0, 6.0, 10.0};
  const std::vector<int> perm = rng.permutation(4);
  Eigen::VectorXd alpha(5);
  alpha[0] = 0.2;
  for (int k = 0; k < 4; ++k) alpha[k + 1] = base_weights[perm[k]];

  Eigen::MatrixXd theta(p, 4);
  out.b.resize(p);
  for (int j = 0; j < p; ++j) {
    const Eigen::VectorXd simplex = rng.dirichlet(alpha);
    out.b[j] = simplex[0];
    for (int k = 0; k < 4; ++k) theta(j, k) = simplex[k + 1];
  }
  for (int k = 0; k < 4; ++k) {
    out.params.emplace_back(FaSubsetParams{theta.col(k)});
  }

  out.data.ids = make_ids(n);
  out.data.y.resize(n, p);
  out.data.N = Eigen::MatrixXi::Constant(n, p, 50);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) {
      double prob = out.b[j] * out.p0;
      for (int k = 0; k < 4; ++k) {
        if (out.truth.at(i, k)) prob += theta(j, k);
      }
      out.data.y(i, j) = rng.binomial(50, prob);
    }
  }
  return out;
}

Sim3Truth gen_sim3(int n, int p, double m_ibp, std::uint64_t seed,
                   double tau2_gen, double tau_w_gen) {
  if (n < 1 || p < 1) throw std::invalid_argument("gen_sim3: bad sizes");
  Sim3Truth out;
  out.truth = ibp_prior_sample(n, m_ibp, derive_seed(seed, 1));
  const int K = out.truth.K;

  Rng rng(derive_seed(seed, 2));
  const double tau = std::sqrt(tau2_gen);
  out.eta_minus.resize(p);
  out.eta_plus.resize(p);
  for (int j = 0; j < p; ++j) {
    out.eta_minus[j] = tau * rng.normal();
    out.eta_plus[j] = tau * rng.normal();
  }

  // C entries are sparse around 0 so most symptoms stay unrelated to a
  // feature; the realized truth ships with the data.
  const double c_probs[3] = {0.15, 0.7, 0.15};
  std::vector<DfaSubsetParams> feats(K);
  for (int k = 0; k < K; ++k) {
    feats[k].c_col.resize(p);
    feats[k].w_plus.resize(p);
    feats[k].w_minus.resize(p);
    for (int j = 0; j < p; ++j) {
      feats[k].c_col[j] =
          rng.categorical(std::span<const double>(c_probs, 3)) - 1;
      feats[k].w_plus[j] = rng.gamma(1.0, tau_w_gen);
      feats[k].w_minus[j] = rng.gamma(1.0, tau_w_gen);
    }
  }

  out.data.ids = make_ids(n);
  out.data.y.resize(n, p);
  std::vector<std::uint8_t> a_row(K);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < K; ++k) a_row[k] = out.truth.at(i, k);
    for (int j = 0; j < p; ++j) {
      double u_minus = out.eta_minus[j];
      double u_plus = out.eta_plus[j];
      for (int k = 0; k < K; ++k) {
        if (!a_row[k]) continue;
        if (feats[k].c_col[j] == -1) u_minus += feats[k].w_minus[j];
        if (feats[k].c_col[j] == 1) u_plus += feats[k].w_plus[j];
      }
      const double m = std::max({u_minus, 0.0, u_plus});
      const double w[3] = {std::exp(u_minus - m), std::exp(-m),
                           std::exp(u_plus - m)};
      const double total = w[0] + w[1] + w[2];
      const double probs[3] = {w[0] / total, w[1] / total, w[2] / total};
      out.data.y(i, j) =
          rng.categorical(std::span<const double>(probs, 3)) - 1;
    }
  }
  for (DfaSubsetParams& f : feats) out.params.emplace_back(std::move(f));
  return out;
}

AllocationMatrix ibp_prior_sample(int n, double m_ibp, std::uint64_t seed) {
  if (n < 1 || m_ibp <= 0.0) {
    throw std::invalid_argument("ibp_prior_sample: bad arguments");
  }
  Rng rng(seed);
  std::vector<std::vector<std::uint8_t>> columns;  // column-major, length n
  std::vector<int> counts;
  for (int i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < columns.size(); ++k) {
      const double prob = static_cast<double>(counts[k]) / (i + 1);
      if (rng.bernoulli(prob)) {
        columns[k][i] = 1;
        ++counts[k];
      }
    }
    const int fresh = rng.poisson(m_ibp / (i + 1));
    for (int f = 0; f < fresh; ++f) {
      columns.emplace_back(n, 0);
      columns.back()[i] = 1;
      counts.push_back(1);
    }
  }
  AllocationMatrix a = AllocationMatrix::zeros(
      SubsetKind::Feature, n, static_cast<int>(columns.size()));
  for (int k = 0; k < a.K; ++k) {
    for (int i = 0; i < n; ++i) a.at(i, k) = columns[k][i];
  }
  a.validate();
  return a;
}

}  // namespace anchormc
