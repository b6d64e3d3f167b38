#include "anchormc/consensus.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

#include "anchormc/parallel.hpp"

namespace anchormc {

namespace {

std::vector<int> rows_of(const IdSet& universe, const IdSet& keep) {
  std::vector<int> rows;
  rows.reserve(keep.size());
  std::size_t pos = 0;
  for (ObsId id : keep) {
    while (pos < universe.size() && universe[pos] < id) ++pos;
    if (pos == universe.size() || universe[pos] != id) {
      throw std::invalid_argument("subset_model_data: id missing from data");
    }
    rows.push_back(static_cast<int>(pos));
  }
  return rows;
}

// Disjoint-set forest over merge-graph nodes.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::size_t> parent_;
};

Eigen::VectorXd weighted_mean(
    const std::vector<std::pair<const Eigen::VectorXd*, double>>& items) {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(items.front().first->size());
  double total = 0.0;
  for (const auto& [vec, w] : items) {
    if (vec->size() != acc.size()) {
      throw std::invalid_argument("merge_params: heterogeneous block shapes");
    }
    acc += w * *vec;
    total += w;
  }
  return acc / total;
}

}  // namespace

const IdSet& model_data_ids(const ModelData& data) {
  return std::visit([](const auto& d) -> const IdSet& { return d.ids; }, data);
}

SubsetKind model_kind(const ModelConfig& cfg) {
  return std::holds_alternative<DpmConfig>(cfg) ? SubsetKind::Partition
                                                : SubsetKind::Feature;
}

ModelData subset_model_data(const ModelData& data, const IdSet& keep) {
  check_id_set(keep, "subset_model_data");
  if (const auto* dpm = std::get_if<DpmData>(&data)) {
    const std::vector<int> rows = rows_of(dpm->ids, keep);
    DpmData out;
    out.ids = keep;
    out.y.resize(static_cast<Eigen::Index>(rows.size()), dpm->y.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      out.y.row(static_cast<Eigen::Index>(r)) = dpm->y.row(rows[r]);
    }
    return out;
  }
  if (const auto* fa = std::get_if<FaData>(&data)) {
    const std::vector<int> rows = rows_of(fa->ids, keep);
    FaData out;
    out.ids = keep;
    out.y.resize(static_cast<Eigen::Index>(rows.size()), fa->y.cols());
    out.N.resize(static_cast<Eigen::Index>(rows.size()), fa->N.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      out.y.row(static_cast<Eigen::Index>(r)) = fa->y.row(rows[r]);
      out.N.row(static_cast<Eigen::Index>(r)) = fa->N.row(rows[r]);
    }
    return out;
  }
  const auto& dfa = std::get<DfaData>(data);
  const std::vector<int> rows = rows_of(dfa.ids, keep);
  DfaData out;
  out.ids = keep;
  out.y.resize(static_cast<Eigen::Index>(rows.size()), dfa.y.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.y.row(static_cast<Eigen::Index>(r)) = dfa.y.row(rows[r]);
  }
  return out;
}

SampleSet run_single_chain(const ModelData& data, const ModelConfig& cfg,
                           std::uint64_t seed) {
  if (const auto* dpm_cfg = std::get_if<DpmConfig>(&cfg)) {
    DpmConfig c = *dpm_cfg;
    c.seed = seed;
    const auto& d = std::get<DpmData>(data);
    return dpm_run(d.y, d.ids, c);
  }
  if (const auto* fa_cfg = std::get_if<FaConfig>(&cfg)) {
    FaConfig c = *fa_cfg;
    c.seed = seed;
    return fa_run(std::get<FaData>(data), c);
  }
  DfaConfig c = std::get<DfaConfig>(cfg);
  c.seed = seed;
  return dfa_run(std::get<DfaData>(data), c);
}

SubsetParams merge_params(
    const std::vector<std::pair<const SubsetParams*, std::size_t>>& blocks,
    SubsetKind kind, int categorical_tie_value) {
  (void)kind;
  if (blocks.empty()) throw std::invalid_argument("merge_params: no blocks");
  if (blocks.size() == 1) return *blocks.front().first;

  const SubsetParams& head = *blocks.front().first;
  if (std::holds_alternative<GaussianClusterParams>(head)) {
    std::vector<std::pair<const Eigen::VectorXd*, double>> mus;
    double total = 0.0;
    Eigen::MatrixXd sigma;
    for (const auto& [params, size] : blocks) {
      const auto* g = std::get_if<GaussianClusterParams>(params);
      if (!g) throw std::invalid_argument("merge_params: mixed block types");
      mus.emplace_back(&g->mu, static_cast<double>(size));
      if (sigma.size() == 0) {
        sigma = static_cast<double>(size) * g->sigma;
      } else {
        if (g->sigma.rows() != sigma.rows()) {
          throw std::invalid_argument("merge_params: heterogeneous block shapes");
        }
        sigma += static_cast<double>(size) * g->sigma;
      }
      total += static_cast<double>(size);
    }
    return GaussianClusterParams{weighted_mean(mus), sigma / total};
  }
  if (std::holds_alternative<FaSubsetParams>(head)) {
    std::vector<std::pair<const Eigen::VectorXd*, double>> thetas;
    for (const auto& [params, size] : blocks) {
      const auto* f = std::get_if<FaSubsetParams>(params);
      if (!f) throw std::invalid_argument("merge_params: mixed block types");
      thetas.emplace_back(&f->theta, static_cast<double>(size));
    }
    return FaSubsetParams{weighted_mean(thetas)};
  }

  // DFA: C entries are categorical (size-weighted majority vote), the
  // weights are continuous.
  const auto& head_dfa = std::get<DfaSubsetParams>(head);
  const Eigen::Index p = head_dfa.c_col.size();
  std::vector<std::pair<const Eigen::VectorXd*, double>> wp, wm;
  for (const auto& [params, size] : blocks) {
    const auto* d = std::get_if<DfaSubsetParams>(params);
    if (!d) throw std::invalid_argument("merge_params: mixed block types");
    if (d->c_col.size() != p) {
      throw std::invalid_argument("merge_params: heterogeneous block shapes");
    }
    wp.emplace_back(&d->w_plus, static_cast<double>(size));
    wm.emplace_back(&d->w_minus, static_cast<double>(size));
  }
  DfaSubsetParams merged;
  merged.c_col.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    double votes[3] = {0.0, 0.0, 0.0};
    for (const auto& [params, size] : blocks) {
      const auto& d = std::get<DfaSubsetParams>(*params);
      votes[d.c_col[j] + 1] += static_cast<double>(size);
    }
    const double top = std::max({votes[0], votes[1], votes[2]});
    int winner = categorical_tie_value;
    int winners = 0;
    for (int c = -1; c <= 1; ++c) {
      if (votes[c + 1] == top) {
        ++winners;
        winner = c;
      }
    }
    merged.c_col[j] = winners == 1 ? winner : categorical_tie_value;
  }
  merged.w_plus = weighted_mean(wp);
  merged.w_minus = weighted_mean(wm);
  return merged;
}

namespace {

DrawGlobals merge_globals(
    const std::vector<std::pair<int, const SubsetDraw*>>& shard_draws,
    const std::vector<double>& weights) {
  const DrawGlobals& head = shard_draws.front().second->globals;
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::holds_alternative<FaGlobals>(head)) {
    FaGlobals acc;
    for (std::size_t s = 0; s < shard_draws.size(); ++s) {
      const auto& g = std::get<FaGlobals>(shard_draws[s].second->globals);
      if (acc.b.size() == 0) acc.b = Eigen::VectorXd::Zero(g.b.size());
      acc.b += weights[s] * g.b;
      acc.p0 += weights[s] * g.p0;
    }
    acc.b /= total;
    acc.p0 /= total;
    return acc;
  }
  if (std::holds_alternative<DfaGlobals>(head)) {
    DfaGlobals acc;
    for (std::size_t s = 0; s < shard_draws.size(); ++s) {
      const auto& g = std::get<DfaGlobals>(shard_draws[s].second->globals);
      if (acc.eta_minus.size() == 0) {
        acc.eta_minus = Eigen::VectorXd::Zero(g.eta_minus.size());
        acc.eta_plus = Eigen::VectorXd::Zero(g.eta_plus.size());
        acc.pi.setZero();
      }
      acc.eta_minus += weights[s] * g.eta_minus;
      acc.eta_plus += weights[s] * g.eta_plus;
      acc.pi += weights[s] * g.pi;
    }
    acc.eta_minus /= total;
    acc.eta_plus /= total;
    acc.pi /= total;
    return acc;
  }
  return std::monostate{};
}

}  // namespace

ConsensusDraw merge_draws(
    const std::vector<std::pair<int, const SubsetDraw*>>& shard_draws,
    const MergeConfig& cfg, SubsetKind kind, int t) {
  cfg.validate();

  struct Node {
    int shard;
    int subset;
    const IdSet* members;
    IdSet anchor_overlap;
  };
  std::vector<Node> nodes;
  for (const auto& [shard, draw] : shard_draws) {
    for (int k = 0; k < draw->K(); ++k) {
      nodes.push_back({shard, k, &draw->subsets[k],
                       id_intersection(draw->subsets[k], cfg.anchor_ids)});
    }
  }

  UnionFind uf(nodes.size());
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    for (std::size_t b = a + 1; b < nodes.size(); ++b) {
      if (nodes[a].shard == nodes[b].shard) continue;  // cross-shard only
      const std::size_t common =
          id_intersection(nodes[a].anchor_overlap, nodes[b].anchor_overlap)
              .size();
      const std::size_t different = nodes[a].anchor_overlap.size() +
                                    nodes[b].anchor_overlap.size() -
                                    2 * common;
      const double d =
          (common == 0 && different == 0)
              ? 1.0
              : static_cast<double>(different) /
                    static_cast<double>(common + different);
      if (d < cfg.epsilon) uf.unite(a, b);
    }
  }

  // Components keyed by their smallest (shard, subset) member so the output
  // order is stable; single-shard input reproduces the chain's draw order.
  std::map<std::pair<int, int>, std::vector<std::size_t>> components;
  {
    std::map<std::size_t, std::pair<int, int>> root_key;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const std::size_t root = uf.find(i);
      const std::pair<int, int> key{nodes[i].shard, nodes[i].subset};
      auto it = root_key.find(root);
      if (it == root_key.end() || key < it->second) root_key[root] = key;
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      components[root_key[uf.find(i)]].push_back(i);
    }
  }

  ConsensusDraw out;
  out.t = t;
  out.draw.kind = kind;
  for (auto& [key, member_nodes] : components) {
    std::sort(member_nodes.begin(), member_nodes.end(),
              [&](std::size_t a, std::size_t b) {
                return std::pair{nodes[a].shard, nodes[a].subset} <
                       std::pair{nodes[b].shard, nodes[b].subset};
              });
    IdSet merged;
    std::vector<std::pair<const SubsetParams*, std::size_t>> blocks;
    std::vector<std::pair<int, int>> provenance;
    for (std::size_t idx : member_nodes) {
      const Node& node = nodes[idx];
      merged = id_union(merged, *node.members);
      const SubsetDraw* draw = nullptr;
      for (const auto& [shard, d] : shard_draws) {
        if (shard == node.shard) draw = d;
      }
      blocks.emplace_back(&draw->params[node.subset], node.members->size());
      provenance.emplace_back(node.shard, node.subset);
    }
    out.draw.subsets.push_back(std::move(merged));
    out.draw.params.push_back(
        merge_params(blocks, kind, cfg.categorical_tie_value));
    out.provenance.push_back(std::move(provenance));
  }

  if (kind == SubsetKind::Partition) {
    // An anchor point carries one assignment per shard; if those land in
    // different components it keeps the majority one, ties broken by the
    // larger component and then the earlier one.
    std::map<ObsId, std::map<std::size_t, int>> multiplicity;
    for (std::size_t c = 0; c < out.draw.subsets.size(); ++c) {
      for (const auto& [shard, subset] : out.provenance[c]) {
        const SubsetDraw* draw = nullptr;
        for (const auto& [s, d] : shard_draws) {
          if (s == shard) draw = d;
        }
        for (ObsId id : draw->subsets[subset]) ++multiplicity[id][c];
      }
    }
    for (const auto& [id, comps] : multiplicity) {
      if (comps.size() < 2) continue;
      std::size_t keep = 0;
      int best_votes = -1;
      for (const auto& [c, votes] : comps) {
        const bool better =
            votes > best_votes ||
            (votes == best_votes &&
             out.draw.subsets[c].size() > out.draw.subsets[keep].size());
        if (better) {
          keep = c;
          best_votes = votes;
        }
      }
      for (const auto& [c, votes] : comps) {
        if (c == keep) continue;
        IdSet& subset = out.draw.subsets[c];
        subset.erase(std::find(subset.begin(), subset.end(), id));
      }
    }
    // Drop clusters emptied by the repair.
    for (std::size_t c = out.draw.subsets.size(); c-- > 0;) {
      if (out.draw.subsets[c].empty()) {
        out.draw.subsets.erase(out.draw.subsets.begin() + c);
        out.draw.params.erase(out.draw.params.begin() + c);
        out.provenance.erase(out.provenance.begin() + c);
      }
    }
  }

  std::vector<double> weights;
  weights.reserve(shard_draws.size());
  for (const auto& [shard, draw] : shard_draws) {
    std::size_t size = 0;
    for (const IdSet& f : draw->subsets) size += f.size();
    weights.push_back(static_cast<double>(std::max<std::size_t>(size, 1)));
  }
  out.draw.globals = merge_globals(shard_draws, weights);
  return out;
}

std::vector<std::uint64_t> expand_shard_seeds(std::uint64_t master_seed,
                                              int shard_count) {
  std::vector<std::uint64_t> seeds(shard_count);
  for (int s = 0; s < shard_count; ++s) {
    seeds[s] = derive_seed(master_seed, static_cast<std::uint64_t>(s) + 1);
  }
  return seeds;
}

std::vector<ChainResult> run_shard_chains(
    const ModelData& data, const ShardPlan& plan, const ModelConfig& cfg,
    const std::vector<std::uint64_t>& seeds, int jobs) {
  plan.validate();
  if (static_cast<int>(seeds.size()) != plan.S) {
    throw std::invalid_argument("run_shard_chains: need one seed per shard");
  }
  std::vector<ChainResult> results(plan.S);
  std::vector<std::string> errors(plan.S);
  parallel_for(plan.S, jobs, [&](int s) {
    try {
      const auto start = std::chrono::steady_clock::now();
      const ModelData shard_data =
          subset_model_data(data, plan.augmented(s));
      ChainResult& r = results[s];
      r.shard_id = s + 1;
      r.seed = seeds[s];
      r.samples = run_single_chain(shard_data, cfg, seeds[s]);
      r.wall_seconds = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - start)
                           .count();
    } catch (const std::exception& e) {
      errors[s] = e.what();
    }
  });
  std::string failure;
  for (int s = 0; s < plan.S; ++s) {
    if (!errors[s].empty()) {
      failure += "shard " + std::to_string(s + 1) + ": " + errors[s] + "; ";
    }
  }
  if (!failure.empty()) {
    throw std::runtime_error("chain failure, no merge attempted: " + failure);
  }
  return results;
}

std::vector<ConsensusDraw> merge_chain_results(
    const std::vector<ChainResult>& chains, const MergeConfig& cfg,
    SubsetKind kind, int jobs) {
  if (chains.empty()) return {};
  const std::size_t T = chains.front().samples.draws.size();
  for (const ChainResult& c : chains) {
    if (c.samples.draws.size() != T) {
      throw std::invalid_argument("merge: chains retained different T");
    }
  }
  std::vector<ConsensusDraw> merged(T);
  parallel_for(static_cast<int>(T), jobs, [&](int t) {
    std::vector<std::pair<int, const SubsetDraw*>> at_t;
    at_t.reserve(chains.size());
    for (const ChainResult& c : chains) {
      at_t.emplace_back(c.shard_id, &c.samples.draws[t]);
    }
    merged[t] = merge_draws(at_t, cfg, kind, t + 1);
  });
  return merged;
}

ConsensusResult run_consensus(const ModelData& data, const ShardPlan& plan,
                              const ModelConfig& cfg,
                              const MergeConfig& merge_cfg,
                              const std::vector<std::uint64_t>& seeds,
                              int jobs) {
  const auto start = std::chrono::steady_clock::now();
  MergeConfig mc = merge_cfg;
  if (mc.anchor_ids.empty()) mc.anchor_ids = plan.anchors();
  ConsensusResult result;
  result.chains = run_shard_chains(data, plan, cfg, seeds, jobs);
  result.draws =
      merge_chain_results(result.chains, mc, model_kind(cfg), jobs);
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return result;
}

ConsensusResult run_consensus(const ModelData& data, const ShardPlan& plan,
                              const ModelConfig& cfg,
                              const MergeConfig& merge_cfg,
                              std::uint64_t master_seed, int jobs) {
  return run_consensus(data, plan, cfg, merge_cfg,
                       expand_shard_seeds(master_seed, plan.S), jobs);
}

}  // namespace anchormc
