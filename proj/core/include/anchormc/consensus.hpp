#pragma once

#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "anchormc/allocation.hpp"
#include "anchormc/dfa.hpp"
#include "anchormc/dpm.hpp"
#include "anchormc/fa.hpp"

namespace anchormc {

using ModelData = std::variant<DpmData, FaData, DfaData>;
using ModelConfig = std::variant<DpmConfig, FaConfig, DfaConfig>;

// Rows of the data restricted to the given sorted id set.
ModelData subset_model_data(const ModelData& data, const IdSet& keep);
const IdSet& model_data_ids(const ModelData& data);
SubsetKind model_kind(const ModelConfig& cfg);

// One MCMC chain on the given data, with the configured seed replaced.
SampleSet run_single_chain(const ModelData& data, const ModelConfig& cfg,
                           std::uint64_t seed);

struct ChainResult {
  int shard_id = 0;  // 1-based shard index within the plan
  SampleSet samples;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
};

// One merged draw: the consensus subsets over all observations, plus the
// (shard, subset) pairs that were unified into each consensus subset.
struct ConsensusDraw {
  int t = 0;  // 1-based retained-draw index
  SubsetDraw draw;
  std::vector<std::vector<std::pair<int, int>>> provenance;
};

struct ConsensusResult {
  std::vector<ChainResult> chains;
  std::vector<ConsensusDraw> draws;
  double wall_seconds = 0.0;
};

// Size-weighted merge of parameter blocks: continuous components are
// averaged, categorical components (C entries) take a size-weighted majority
// vote with ties resolved to categorical_tie_value. Throws on heterogeneous
// block shapes.
SubsetParams merge_params(
    const std::vector<std::pair<const SubsetParams*, std::size_t>>& blocks,
    SubsetKind kind, int categorical_tie_value = 0);

// Merges the per-shard draws of one iteration. Nodes are (shard, subset)
// pairs; cross-shard pairs with anchor distance < epsilon are connected and
// consensus subsets are unions over connected components. Partition draws
// are repaired afterwards: an anchor landing in several components keeps its
// majority assignment (ties to the larger, then earlier, component).
ConsensusDraw merge_draws(
    const std::vector<std::pair<int, const SubsetDraw*>>& shard_draws,
    const MergeConfig& cfg, SubsetKind kind, int t);

// Chain stage of Algorithm 1: one chain per augmented shard, run
// concurrently on up to `jobs` workers. seeds has one entry per shard.
std::vector<ChainResult> run_shard_chains(const ModelData& data,
                                          const ShardPlan& plan,
                                          const ModelConfig& cfg,
                                          const std::vector<std::uint64_t>& seeds,
                                          int jobs);

// Merge stage: per-iteration merges, parallel over the retained draws.
std::vector<ConsensusDraw> merge_chain_results(
    const std::vector<ChainResult>& chains, const MergeConfig& cfg,
    SubsetKind kind, int jobs);

// Full consensus run. Deterministic given the seed vector; merge_cfg's
// anchor set is taken from the plan when left empty.
ConsensusResult run_consensus(const ModelData& data, const ShardPlan& plan,
                              const ModelConfig& cfg,
                              const MergeConfig& merge_cfg,
                              const std::vector<std::uint64_t>& seeds,
                              int jobs);

// Convenience overload expanding a master seed into per-shard seeds.
ConsensusResult run_consensus(const ModelData& data, const ShardPlan& plan,
                              const ModelConfig& cfg,
                              const MergeConfig& merge_cfg,
                              std::uint64_t master_seed, int jobs);

// Per-shard seed expansion used by the overload above (stream s+1 of the
// master seed; stream 0 is reserved).
std::vector<std::uint64_t> expand_shard_seeds(std::uint64_t master_seed,
                                              int shard_count);

}  // namespace anchormc
