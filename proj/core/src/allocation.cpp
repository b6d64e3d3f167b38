#include "anchormc/allocation.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#include "anchormc/rng.hpp"

namespace anchormc {

const char* to_string(SubsetKind kind) {
  return kind == SubsetKind::Partition ? "partition" : "feature";
}

void check_id_set(const IdSet& ids, const char* what) {
  for (std::size_t i = 1; i < ids.size(); ++i) {
    if (ids[i] <= ids[i - 1]) {
      throw std::invalid_argument(std::string(what) +
                                  ": ids must be sorted and unique");
    }
  }
}

bool id_contains(const IdSet& set, ObsId id) {
  return std::binary_search(set.begin(), set.end(), id);
}

IdSet id_intersection(const IdSet& a, const IdSet& b) {
  IdSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return out;
}

IdSet id_union(const IdSet& a, const IdSet& b) {
  IdSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(out));
  return out;
}

AllocationMatrix AllocationMatrix::zeros(SubsetKind kind, int n, int K) {
  AllocationMatrix a;
  a.kind = kind;
  a.n = n;
  a.K = K;
  a.entries.assign(static_cast<std::size_t>(n) * K, 0);
  return a;
}

int AllocationMatrix::column_count(int col) const {
  int c = 0;
  for (int i = 0; i < n; ++i) c += at(i, col);
  return c;
}

void AllocationMatrix::validate() const {
  if (n < 0 || K < 0) throw std::invalid_argument("allocation: negative size");
  if (entries.size() != static_cast<std::size_t>(n) * K) {
    throw std::invalid_argument("allocation: entry storage mismatch");
  }
  for (std::uint8_t e : entries) {
    if (e != 0 && e != 1) {
      throw std::invalid_argument("allocation: entries must be binary");
    }
  }
  if (kind == SubsetKind::Partition) {
    if (K > n) throw std::invalid_argument("allocation: partition needs K <= n");
    for (int i = 0; i < n; ++i) {
      int row_sum = 0;
      for (int k = 0; k < K; ++k) row_sum += at(i, k);
      if (row_sum != 1) {
        throw std::invalid_argument(
            "allocation: partition rows must sum to exactly 1");
      }
    }
  } else {
    for (int k = 0; k < K; ++k) {
      if (column_count(k) == 0) {
        throw std::invalid_argument("allocation: empty feature column");
      }
    }
  }
}

double anchor_distance(const IdSet& f_a, const IdSet& f_b,
                       const IdSet& anchors) {
  if (anchors.empty()) {
    throw std::invalid_argument("anchor_distance: empty anchor set");
  }
  const IdSet x = id_intersection(f_a, anchors);
  const IdSet y = id_intersection(f_b, anchors);
  const std::size_t common = id_intersection(x, y).size();
  const std::size_t different = x.size() + y.size() - 2 * common;
  if (common == 0 && different == 0) return 1.0;
  return static_cast<double>(different) / static_cast<double>(common + different);
}

AllocationMatrix matrix_from_draw(const SubsetDraw& draw, const IdSet& universe,
                                  SubsetKind kind) {
  check_id_set(universe, "matrix_from_draw");
  const int n = static_cast<int>(universe.size());
  AllocationMatrix a = AllocationMatrix::zeros(kind, n, draw.K());
  std::unordered_map<ObsId, int> row_of;
  row_of.reserve(universe.size());
  for (int r = 0; r < n; ++r) row_of[universe[r]] = r;
  for (int k = 0; k < draw.K(); ++k) {
    for (ObsId id : draw.subsets[k]) {
      auto it = row_of.find(id);
      if (it == row_of.end()) {
        throw std::invalid_argument("matrix_from_draw: id outside universe");
      }
      a.at(it->second, k) = 1;
    }
  }
  a.validate();
  return a;
}

AllocationMatrix matrix_from_draw(const SubsetDraw& draw, int n,
                                  SubsetKind kind) {
  IdSet universe(n);
  for (int i = 0; i < n; ++i) universe[i] = i + 1;
  return matrix_from_draw(draw, universe, kind);
}

SubsetDraw draw_from_matrix(const AllocationMatrix& a, const IdSet& universe) {
  if (static_cast<int>(universe.size()) != a.n) {
    throw std::invalid_argument("draw_from_matrix: universe size mismatch");
  }
  SubsetDraw draw;
  draw.kind = a.kind;
  draw.subsets.resize(a.K);
  for (int i = 0; i < a.n; ++i) {
    for (int k = 0; k < a.K; ++k) {
      if (a.at(i, k)) draw.subsets[k].push_back(universe[i]);
    }
  }
  return draw;
}

void ShardPlan::validate() const {
  if (static_cast<int>(shards.size()) != S + 1) {
    throw std::invalid_argument("shard plan: expected S+1 shards");
  }
  if (anchors().empty()) {
    throw std::invalid_argument("shard plan: anchor shard must be non-empty");
  }
  std::size_t total = 0;
  IdSet all;
  for (const IdSet& s : shards) {
    check_id_set(s, "shard plan");
    total += s.size();
    all = id_union(all, s);
  }
  if (all.size() != total) {
    throw std::invalid_argument("shard plan: shards must be disjoint");
  }
  if (static_cast<int>(total) != n) {
    throw std::invalid_argument("shard plan: shards must cover all ids");
  }
}

IdSet ShardPlan::augmented(int s) const {
  return id_union(shards.at(s), anchors());
}

void MergeConfig::validate() const {
  if (!(epsilon > 0.0) || epsilon > 1.0) {
    throw std::invalid_argument("merge config: epsilon must be in (0,1]");
  }
  if (anchor_ids.empty()) {
    throw std::invalid_argument("merge config: empty anchor set");
  }
}

ShardPlan make_shard_plan(int n, int S, int anchor_size,
                          std::uint64_t rng_seed) {
  if (S < 1 || anchor_size < 1 || anchor_size + S > n) {
    throw std::invalid_argument("make_shard_plan: infeasible sizes");
  }
  Rng rng(rng_seed);
  const std::vector<int> order = rng.permutation(n);

  ShardPlan plan;
  plan.n = n;
  plan.S = S;
  plan.shards.resize(S + 1);

  const int remaining = n - anchor_size;
  const int base = remaining / S;
  const int rem = remaining % S;
  int pos = 0;
  for (int s = 0; s < S; ++s) {
    const int size = base + (s < rem ? 1 : 0);
    IdSet& shard = plan.shards[s];
    shard.reserve(size);
    for (int i = 0; i < size; ++i) {
      shard.push_back(static_cast<ObsId>(order[pos++] + 1));
    }
    std::sort(shard.begin(), shard.end());
  }
  IdSet& anchor = plan.shards[S];
  anchor.reserve(anchor_size);
  for (int i = 0; i < anchor_size; ++i) {
    anchor.push_back(static_cast<ObsId>(order[pos++] + 1));
  }
  std::sort(anchor.begin(), anchor.end());

  plan.validate();
  return plan;
}

}  // namespace anchormc
