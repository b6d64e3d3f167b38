#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace anchormc {

// Observations carry a global integer id in 1..n assigned at ingestion.
// Subsets always store global ids, so set operations across shards need no
// translation table.
using ObsId = std::int32_t;
// Sorted ascending, no duplicates.
using IdSet = std::vector<ObsId>;

enum class SubsetKind { Partition, Feature };

const char* to_string(SubsetKind kind);

// --- model-specific parameter payloads -------------------------------------

struct GaussianClusterParams {
  Eigen::VectorXd mu;     // location, p-vector
  Eigen::MatrixXd sigma;  // covariance, symmetric positive-definite
};

struct FaSubsetParams {
  Eigen::VectorXd theta;  // per-sample subclone proportion, p-vector in [0,1]
};

struct DfaSubsetParams {
  Eigen::VectorXi c_col;    // matched column subset, entries in {-1,0,1}
  Eigen::VectorXd w_plus;   // non-negative weights, p-vector
  Eigen::VectorXd w_minus;  // non-negative weights, p-vector
};

using SubsetParams =
    std::variant<GaussianClusterParams, FaSubsetParams, DfaSubsetParams>;

struct FaGlobals {
  Eigen::VectorXd b;  // background fraction per sample, simplex remainder
  double p0 = 0.0;    // background SNV rate
};

struct DfaGlobals {
  Eigen::VectorXd eta_minus, eta_plus;  // symptom-specific offsets
  Eigen::Vector3d pi;                   // probabilities of C entries -1/0/1
};

using DrawGlobals = std::variant<std::monostate, FaGlobals, DfaGlobals>;

// --- the central latent objects --------------------------------------------

// One Monte Carlo draw of the random subsets: K index-sets with their
// subset-specific parameter blocks, plus model globals.
struct SubsetDraw {
  SubsetKind kind = SubsetKind::Partition;
  std::vector<IdSet> subsets;        // F_k, global ids, each sorted
  std::vector<SubsetParams> params;  // theta*_k, same length as subsets
  DrawGlobals globals;

  int K() const { return static_cast<int>(subsets.size()); }
};

// Binary n x K membership matrix view of a draw. Row r corresponds to the
// r-th id of the universe it was built over.
struct AllocationMatrix {
  SubsetKind kind = SubsetKind::Partition;
  int n = 0;
  int K = 0;
  std::vector<std::uint8_t> entries;  // row-major, n*K

  std::uint8_t at(int row, int col) const { return entries[row * K + col]; }
  std::uint8_t& at(int row, int col) { return entries[row * K + col]; }

  static AllocationMatrix zeros(SubsetKind kind, int n, int K);
  // Column sum.
  int column_count(int col) const;
  // Throws std::invalid_argument when a kind invariant is violated:
  // partition rows must sum to exactly 1, feature columns must be non-empty.
  void validate() const;
};

// Chain metadata attached to the retained draws of one chain.
struct SampleMeta {
  std::string model;  // "dpm", "fa" or "dfa"
  std::uint64_t seed = 0;
  int iterations = 0;
  int burnin = 0;
  int thin = 0;
  IdSet ids;  // the chain's observation universe, sorted
  double wall_seconds = 0.0;
  std::vector<std::pair<std::string, double>> acceptance_rates;
};

struct SampleSet {
  SampleMeta meta;
  std::vector<SubsetDraw> draws;
};

// Partition of the observation ids into S worker shards plus the anchor
// shard at index S (the S+1-th). Augmented shard s is shards[s] plus the
// anchors.
struct ShardPlan {
  int n = 0;
  int S = 0;
  std::vector<IdSet> shards;  // S+1 disjoint id sets; back() is the anchor set

  const IdSet& anchors() const { return shards.back(); }
  IdSet augmented(int s) const;
  // Disjointness, anchor non-emptiness and total coverage of n ids.
  void validate() const;
};

struct MergeConfig {
  double epsilon = 0.1;  // merge threshold in (0,1]
  IdSet anchor_ids;
  // Majority-vote ties on categorical parameters resolve to this value.
  int categorical_tie_value = 0;

  void validate() const;
};

// --- operations -------------------------------------------------------------

// Anchor-overlap distance between two subsets: with X = F_a ∩ anchors and
// Y = F_b ∩ anchors, returns |XΔY| / (|X∩Y| + |XΔY|), and 1 when both
// intersections are empty. Throws std::invalid_argument on an empty anchor
// set.
double anchor_distance(const IdSet& f_a, const IdSet& f_b,
                       const IdSet& anchors);

// Membership-matrix view of a draw over the id universe 1..n (or an explicit
// universe). Column order preserves draw order. Throws on ids outside the
// universe or partition invariant violations.
AllocationMatrix matrix_from_draw(const SubsetDraw& draw, int n,
                                  SubsetKind kind);
AllocationMatrix matrix_from_draw(const SubsetDraw& draw, const IdSet& universe,
                                  SubsetKind kind);

// Inverse of matrix_from_draw: subsets in column order (empty columns are
// not allowed by the matrix invariants).
SubsetDraw draw_from_matrix(const AllocationMatrix& a, const IdSet& universe);

// Uniformly random disjoint split of {1..n} into S worker shards of sizes as
// even as possible (remainder spread over the first shards) plus an anchor
// shard of anchor_size. Deterministic given rng_seed.
ShardPlan make_shard_plan(int n, int S, int anchor_size,
                          std::uint64_t rng_seed);

// --- small set helpers shared across modules --------------------------------

// Intersection of two sorted id sets.
IdSet id_intersection(const IdSet& a, const IdSet& b);
// Union of two sorted id sets.
IdSet id_union(const IdSet& a, const IdSet& b);
// True if the sorted set contains the id.
bool id_contains(const IdSet& set, ObsId id);
// Validates sortedness/uniqueness; throws std::invalid_argument.
void check_id_set(const IdSet& ids, const char* what);

}  // namespace anchormc
