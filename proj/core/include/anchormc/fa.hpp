#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "anchormc/allocation.hpp"
#include "anchormc/rng.hpp"

namespace anchormc {

// Variant/total read counts for n SNVs across p samples,
//   y_ij ~ Bin(N_ij, p_ij),  p_ij = b_j p0 + sum_k theta*_jk A_ik,
// with A ~ IBP(m_ibp), (b_j, theta*_j.) ~ Dirichlet per sample, p0 ~ Beta.
struct FaData {
  Eigen::MatrixXi y;  // variant reads, n x p
  Eigen::MatrixXi N;  // total reads, n x p, all >= 1
  IdSet ids;          // global SNV ids, one per row

  int n() const { return static_cast<int>(y.rows()); }
  int p() const { return static_cast<int>(y.cols()); }
  void validate() const;
};

struct TemperingLadder {
  // Strictly decreasing from t_1 = 1. A single entry disables tempering.
  std::vector<double> temperatures{1.0};
  int swap_interval = 10;

  int size() const { return static_cast<int>(temperatures.size()); }
  static TemperingLadder geometric(int length, double ratio = 0.8,
                                   int swap_interval = 10);
  void validate() const;
};

struct FaConfig {
  double m_ibp = 1.0;
  double p0_a = 1.0, p0_b = 99.0;  // Beta prior on the background rate
  double dir_weight_b = 1.0;       // Dirichlet weight of b_j
  double dir_weight_theta = 1.0;   // Dirichlet weight of each theta*_jk
  TemperingLadder tempering;
  int iterations = 5000;
  int burnin = 2500;
  int thin = 5;
  std::uint64_t seed = 0;
  // Start the allocation from a prior draw instead of empty; an empty start
  // lets the background rate absorb the grand mean before any feature
  // exists, a deep local mode.
  bool init_from_prior = true;
  // Test hooks: cap on the number of features (0 = unbounded) and a switch
  // that drops the likelihood so the chain targets the prior.
  int max_features = 0;
  bool prior_only = false;

  void validate() const;
};

// Binomial success probability of one cell, clamped to [delta, 1-delta]
// with delta = 1e-10 for likelihood stability.
double fa_success_prob(std::span<const std::uint8_t> a_row,
                       std::span<const double> theta_cols, double b_j,
                       double p0);

// Conditional inclusion probability r_minus/n of an existing feature given
// the column's other entries. Throws unless 0 < r_minus <= n-1; a column
// whose other entries are all zero must be treated by the new-feature
// mechanism instead.
double ibp_gibbs_existing(int r_minus, int n);

// Number of new features opened by one row: Poisson(m_ibp/n).
int ibp_new_features(double m_ibp, int n, Rng& rng);

// Log pmf of a feature matrix under IBP(m_ibp) in the unordered-columns
// form (the K+! form). Throws on empty columns or a partition-kind matrix.
double ibp_prior_logpmf(const AllocationMatrix& a, double m_ibp);

// One tempered chain group over one shard. Replica 0 runs at temperature 1
// and is the chain whose draws are retained; with a ladder of length 1 the
// sampler is bit-identical to an untempered chain for the same seed.
class FaChain {
 public:
  FaChain(FaData data, FaConfig cfg);

  void step();
  SubsetDraw current_draw() const;
  int feature_count() const;
  std::vector<std::pair<std::string, double>> acceptance_rates() const;

  // Test support: run one update phase (0 = memberships, 1 = births,
  // 2 = simplex weights, 3 = background rate) on the cold replica; site
  // selects the row (phases 0-1) or sample (phase 2), -1 sweeps all.
  void step_phase(int phase, int site = -1);

  const FaConfig& config() const { return cfg_; }

 private:
  struct Column {
    std::vector<std::uint8_t> a;  // membership, length n
    int count = 0;
    Eigen::VectorXd theta;  // p-vector
  };

  struct Replica {
    double temperature = 1.0;
    Rng rng;
    std::vector<Column> columns;
    Eigen::VectorXd b;       // background fractions, p-vector
    double p0 = 0.0;
    Eigen::MatrixXd mass;    // n x p, sum_k theta_jk A_ik
    // Adaptive proposal scales.
    std::vector<double> dir_scale;  // per sample j
    double p0_scale = 200.0;
    // Acceptance tallies.
    long births_acc = 0, births_prop = 0;
    long dir_acc = 0, dir_prop = 0;
    long p0_acc = 0, p0_prop = 0;

    explicit Replica(std::uint64_t seed) : rng(seed) {}
  };

  double cell_loglik(int i, int j, double prob) const;
  double total_loglik(const Replica& r) const;
  void update_columns(Replica& r, int i);
  void update_new_features(Replica& r, int i);
  void update_dirichlet(Replica& r, int j);
  void update_p0(Replica& r);
  void attempt_swaps();
  void adapt(Replica& r);

  FaData data_;
  FaConfig cfg_;
  std::vector<Replica> replicas_;
  Rng swap_rng_;
  long swaps_acc_ = 0, swaps_prop_ = 0;
  int iteration_ = 0;
};

SampleSet fa_run(const FaData& data, const FaConfig& cfg);

}  // namespace anchormc
