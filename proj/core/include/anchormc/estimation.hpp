#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "anchormc/allocation.hpp"
#include "anchormc/consensus.hpp"

namespace anchormc {

struct PointEstimate {
  int K_hat = 0;
  AllocationMatrix A_hat;
  std::vector<SubsetParams> params_hat;
  IdSet ids;                       // row universe of A_hat
  std::string method = "medoid";   // selection rule metadata
  int medoid_index = -1;           // index into the K==K_hat subsequence
};

// Most frequent subset count across draws; ties resolve to the smaller K.
// Throws std::invalid_argument on an empty list.
int posterior_mode_K(std::span<const SubsetDraw> draws);
int posterior_mode_K(const std::vector<ConsensusDraw>& draws);

// Medoid point estimate conditional on the modal K: among draws with
// K == K_hat, the one minimizing summed pairwise allocation distance
// (co-membership Hamming for partitions, aligned-column Hamming for
// features). Parameters come from the medoid draw.
PointEstimate point_estimate(std::span<const SubsetDraw> draws,
                             SubsetKind kind, const IdSet& ids);
PointEstimate point_estimate(const std::vector<ConsensusDraw>& draws,
                             SubsetKind kind, const IdSet& ids);

// Greedy maximum-overlap assignment of estimate columns to truth columns;
// pairs are (estimate column, truth column).
std::vector<std::pair<int, int>> greedy_column_match(
    const AllocationMatrix& a_hat, const AllocationMatrix& a_true);

// Column-matched normalized Hamming misallocation rate. Extra estimate
// columns are dropped, missing ones count as all-zero; the denominator is
// the element count of the truth matrix.
double misallocation_rate(const AllocationMatrix& a_hat,
                          const AllocationMatrix& a_true);

// Normalized mutual information between two labelings, natural-log
// entropies, in [0,1]; defined as 1 when both entropies are zero.
double nmi(std::span<const int> labels_a, std::span<const int> labels_b);

// Subset-parameter error over greedily matched columns: mean squared error
// for continuous parameters (cluster means, subclone proportions), average
// Hamming distance for categorical C columns.
double param_error(const std::vector<SubsetParams>& params_hat,
                   const AllocationMatrix& a_hat,
                   const std::vector<SubsetParams>& params_true,
                   const AllocationMatrix& a_true);

// Partition labels of a draw over the given universe (label = subset index).
std::vector<int> partition_labels(const SubsetDraw& draw, const IdSet& ids);

// Pairwise distances used by the medoid search, exposed for the estimation
// tests' brute-force cross-checks.
long long comembership_hamming(const SubsetDraw& a, const SubsetDraw& b,
                               const IdSet& ids);
long long aligned_feature_hamming(const SubsetDraw& a, const SubsetDraw& b,
                                  const IdSet& ids);

struct DiagnosticSummary {
  double epsilon = 0.0;
  double mean = 0.0;
  double sd = 0.0;
  int n_reps = 0;
};

// CMC-vs-MCMC approximation diagnostic: repeatedly pick two shards, run the
// consensus on them (with the plan's anchors) and a full MCMC on their
// union, and compare the two point estimates — NMI for partitions,
// 1 - misallocation rate for features. Chains are shared across the epsilon
// sweep since only the merge depends on epsilon.
std::vector<DiagnosticSummary> approximation_diagnostic(
    const ModelData& data, const ModelConfig& cfg, const ShardPlan& plan,
    const MergeConfig& merge_cfg, std::span<const double> epsilons, int n_reps,
    std::uint64_t seed, int jobs);

}  // namespace anchormc
