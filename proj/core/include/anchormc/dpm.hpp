#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "anchormc/allocation.hpp"
#include "anchormc/rng.hpp"

namespace anchormc {

// Real-valued observation matrix with its global ids.
struct DpmData {
  Eigen::MatrixXd y;  // n x p
  IdSet ids;

  int n() const { return static_cast<int>(y.rows()); }
  int p() const { return static_cast<int>(y.cols()); }
  void validate() const;
};

// Dirichlet process mixture of multivariate Gaussians,
//   y_i | (mu_i, Sigma_i) ~ N(mu_i, Sigma_i),  (mu, Sigma) ~ G,  G ~ DP(m, G0)
// with the conjugate base measure
//   G0(mu, Sigma) = N(mu | 0, Sigma/kappa0) x IW(Sigma | b, I_p).
struct DpmConfig {
  double m = 1.0;        // DP concentration
  double kappa0 = 0.01;  // prior precision scale
  double b = 0.0;        // IW degrees of freedom; 0 means "use p"
  int n_aux = 3;         // auxiliary components for the algorithm-8 opener
  // New-cluster mechanism in step (i). The marginal opener weighs a new
  // cluster by m times the conjugate prior-predictive density (the
  // n_aux -> infinity limit of the auxiliary mechanism) and then draws its
  // parameters from the singleton posterior; under the diffuse base measure
  // used here, finite-n_aux auxiliary draws essentially never open a
  // cluster, which leaves merged clusters unable to split.
  bool marginal_opener = true;
  int iterations = 5000;
  int burnin = 2500;
  int thin = 5;
  std::uint64_t seed = 0;
  // Test hook: replace the likelihood by a constant so the chain targets the
  // Chinese-restaurant prior alone.
  bool prior_only = false;

  void validate(int p) const;
};

// Normal-Inverse-Wishart parameter set (mu ~ N(mean, Sigma/kappa),
// Sigma ~ IW(nu, psi)).
struct NiwParams {
  double kappa = 1.0;
  Eigen::VectorXd mean;
  double nu = 1.0;
  Eigen::MatrixXd psi;
};

// Conjugate posterior update given data rows (one observation per row).
NiwParams niw_posterior(const NiwParams& prior, const Eigen::MatrixXd& rows);

// Log prior-predictive (marginal) density of the rows under the NIW base.
double niw_log_marginal(const NiwParams& prior, const Eigen::MatrixXd& rows);

// Draw (mu, Sigma) from a NIW distribution. Covariance draws are
// symmetrized and redrawn if a Cholesky factorization fails.
GaussianClusterParams draw_niw(const NiwParams& niw, Rng& rng);

// Inverse-Wishart draw via the Bartlett decomposition.
Eigen::MatrixXd draw_inverse_wishart(double nu, const Eigen::MatrixXd& psi,
                                     Rng& rng);

// Multivariate normal log density. Throws std::invalid_argument on a
// non-positive-definite covariance or dimension mismatch.
double dpm_loglik(const Eigen::VectorXd& y, const GaussianClusterParams& params);

// One Gibbs chain over one shard's (augmented) data. Strictly sequential;
// concurrent use across shards is safe because every chain owns its state
// and RNG stream.
class DpmChain {
 public:
  DpmChain(Eigen::MatrixXd data, IdSet ids, DpmConfig cfg);

  void step();
  SubsetDraw current_draw() const;
  int cluster_count() const { return static_cast<int>(clusters_.size()); }

  // Regenerates every y_i from its cluster's current parameters. Used by the
  // joint-distribution (Geweke-style) validation.
  void resample_data();

  const DpmConfig& config() const { return cfg_; }

 private:
  struct Cluster {
    std::vector<int> members;  // local row indices
    GaussianClusterParams params;
    Eigen::LLT<Eigen::MatrixXd> chol;  // cached factor of params.sigma
    double log_det = 0.0;
  };

  double member_loglik(const Eigen::VectorXd& y, const Cluster& c) const;
  void set_cluster_params(Cluster& c, GaussianClusterParams params);
  GaussianClusterParams draw_prior_params();
  void resample_assignment(int row);
  void resample_cluster_params();

  Eigen::MatrixXd data_;
  IdSet ids_;
  DpmConfig cfg_;
  NiwParams prior_;
  Rng rng_;
  std::vector<int> assignment_;    // row -> cluster index
  std::vector<Cluster> clusters_;  // dense, empty clusters deleted immediately
  std::vector<double> log_marginal_;  // per-row singleton prior predictive
};

// Runs a full chain and returns the (iterations - burnin)/thin retained
// partition draws. Deterministic given cfg.seed.
SampleSet dpm_run(const Eigen::MatrixXd& data, const IdSet& ids,
                  const DpmConfig& cfg);

}  // namespace anchormc
