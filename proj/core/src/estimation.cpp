#include "anchormc/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "anchormc/parallel.hpp"

namespace anchormc {

namespace {

long long pairs_of(long long m) { return m * (m - 1) / 2; }

// Contingency counts between two labelings with labels in 0..K-1.
std::map<std::pair<int, int>, long long> contingency(
    std::span<const int> a, std::span<const int> b) {
  std::map<std::pair<int, int>, long long> cells;
  for (std::size_t i = 0; i < a.size(); ++i) ++cells[{a[i], b[i]}];
  return cells;
}

}  // namespace

int posterior_mode_K(std::span<const SubsetDraw> draws) {
  if (draws.empty()) {
    throw std::invalid_argument("posterior_mode_K: empty sample list");
  }
  std::map<int, int> counts;
  for (const SubsetDraw& d : draws) ++counts[d.K()];
  int best_k = counts.begin()->first;
  int best_count = counts.begin()->second;
  for (const auto& [k, count] : counts) {
    if (count > best_count) {  // ties keep the smaller K (map is ordered)
      best_k = k;
      best_count = count;
    }
  }
  return best_k;
}

int posterior_mode_K(const std::vector<ConsensusDraw>& draws) {
  std::vector<SubsetDraw> views;
  views.reserve(draws.size());
  for (const ConsensusDraw& d : draws) views.push_back(d.draw);
  return posterior_mode_K(views);
}

std::vector<int> partition_labels(const SubsetDraw& draw, const IdSet& ids) {
  std::unordered_map<ObsId, int> row_of;
  row_of.reserve(ids.size());
  for (std::size_t r = 0; r < ids.size(); ++r) row_of[ids[r]] = static_cast<int>(r);
  std::vector<int> labels(ids.size(), -1);
  for (int k = 0; k < draw.K(); ++k) {
    for (ObsId id : draw.subsets[k]) {
      auto it = row_of.find(id);
      if (it == row_of.end()) {
        throw std::invalid_argument("partition_labels: id outside universe");
      }
      labels[it->second] = k;
    }
  }
  for (int l : labels) {
    if (l < 0) throw std::invalid_argument("partition_labels: uncovered id");
  }
  return labels;
}

long long comembership_hamming(const SubsetDraw& a, const SubsetDraw& b,
                               const IdSet& ids) {
  const std::vector<int> la = partition_labels(a, ids);
  const std::vector<int> lb = partition_labels(b, ids);
  std::vector<long long> size_a(a.K(), 0), size_b(b.K(), 0);
  for (int l : la) ++size_a[l];
  for (int l : lb) ++size_b[l];
  long long pa = 0, pb = 0, pab = 0;
  for (long long s : size_a) pa += pairs_of(s);
  for (long long s : size_b) pb += pairs_of(s);
  for (const auto& [cell, count] : contingency(la, lb)) pab += pairs_of(count);
  // Pairs co-assigned in exactly one of the two draws.
  return pa + pb - 2 * pab;
}

namespace {

// Sparse overlap counts |F_k(a) ∩ F_l(b)| via per-observation membership.
std::map<std::pair<int, int>, int> feature_overlaps(const SubsetDraw& a,
                                                    const SubsetDraw& b) {
  std::unordered_map<ObsId, std::vector<int>> in_b;
  for (int l = 0; l < b.K(); ++l) {
    for (ObsId id : b.subsets[l]) in_b[id].push_back(l);
  }
  std::map<std::pair<int, int>, int> overlaps;
  for (int k = 0; k < a.K(); ++k) {
    for (ObsId id : a.subsets[k]) {
      auto it = in_b.find(id);
      if (it == in_b.end()) continue;
      for (int l : it->second) ++overlaps[{k, l}];
    }
  }
  return overlaps;
}

// Greedy maximum-overlap matching on precomputed overlap counts, ties to the
// lowest indices. Columns without any positive overlap stay unmatched:
// extra estimate columns are dropped, unmatched truth columns count as
// all-zero.
std::vector<std::pair<int, int>> greedy_match_overlaps(
    std::map<std::pair<int, int>, int> overlaps, int ka, int kb) {
  std::vector<std::pair<int, int>> pairs;
  std::vector<bool> used_a(ka, false), used_b(kb, false);
  const int rounds = std::min(ka, kb);
  for (int round = 0; round < rounds; ++round) {
    int best = 0;
    std::pair<int, int> best_cell{-1, -1};
    for (const auto& [cell, count] : overlaps) {
      if (used_a[cell.first] || used_b[cell.second]) continue;
      if (count > best) {
        best = count;
        best_cell = cell;
      }
    }
    if (best == 0) break;
    used_a[best_cell.first] = used_b[best_cell.second] = true;
    pairs.push_back(best_cell);
  }
  std::sort(pairs.begin(), pairs.end(),
            [](const auto& x, const auto& y) { return x.second < y.second; });
  return pairs;
}

}  // namespace

long long aligned_feature_hamming(const SubsetDraw& a, const SubsetDraw& b,
                                  const IdSet& ids) {
  (void)ids;
  auto overlaps = feature_overlaps(a, b);
  const auto pairs = greedy_match_overlaps(overlaps, a.K(), b.K());
  long long total = 0;
  for (int k = 0; k < a.K(); ++k) {
    total += static_cast<long long>(a.subsets[k].size());
  }
  for (int l = 0; l < b.K(); ++l) {
    total += static_cast<long long>(b.subsets[l].size());
  }
  for (const auto& [k, l] : pairs) {
    auto it = overlaps.find({k, l});
    if (it != overlaps.end()) total -= 2LL * it->second;
  }
  return total;
}

PointEstimate point_estimate(std::span<const SubsetDraw> draws,
                             SubsetKind kind, const IdSet& ids) {
  const int k_hat = posterior_mode_K(draws);
  std::vector<const SubsetDraw*> modal;
  for (const SubsetDraw& d : draws) {
    if (d.K() == k_hat) modal.push_back(&d);
  }

  // Medoid: minimizes the summed pairwise allocation distance.
  const std::size_t T = modal.size();
  std::vector<long long> cost(T, 0);
  for (std::size_t i = 0; i < T; ++i) {
    for (std::size_t j = i + 1; j < T; ++j) {
      const long long d =
          kind == SubsetKind::Partition
              ? comembership_hamming(*modal[i], *modal[j], ids)
              : aligned_feature_hamming(*modal[i], *modal[j], ids);
      cost[i] += d;
      cost[j] += d;
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < T; ++i) {
    if (cost[i] < cost[best]) best = i;
  }

  PointEstimate pe;
  pe.K_hat = k_hat;
  pe.A_hat = matrix_from_draw(*modal[best], ids, kind);
  pe.params_hat = modal[best]->params;
  pe.ids = ids;
  pe.medoid_index = static_cast<int>(best);
  return pe;
}

PointEstimate point_estimate(const std::vector<ConsensusDraw>& draws,
                             SubsetKind kind, const IdSet& ids) {
  std::vector<SubsetDraw> views;
  views.reserve(draws.size());
  for (const ConsensusDraw& d : draws) views.push_back(d.draw);
  return point_estimate(views, kind, ids);
}

std::vector<std::pair<int, int>> greedy_column_match(
    const AllocationMatrix& a_hat, const AllocationMatrix& a_true) {
  if (a_hat.n != a_true.n) {
    throw std::invalid_argument("column match: row count mismatch");
  }
  std::map<std::pair<int, int>, int> overlaps;
  for (int k = 0; k < a_hat.K; ++k) {
    for (int l = 0; l < a_true.K; ++l) {
      int ov = 0;
      for (int i = 0; i < a_hat.n; ++i) ov += a_hat.at(i, k) & a_true.at(i, l);
      if (ov > 0) overlaps[{k, l}] = ov;
    }
  }
  return greedy_match_overlaps(std::move(overlaps), a_hat.K, a_true.K);
}

double misallocation_rate(const AllocationMatrix& a_hat,
                          const AllocationMatrix& a_true) {
  if (a_hat.n != a_true.n) {
    throw std::invalid_argument("misallocation_rate: row count mismatch");
  }
  if (a_true.K == 0) return a_hat.K == 0 ? 0.0 : 1.0;
  const auto pairs = greedy_column_match(a_hat, a_true);
  std::vector<int> hat_col_of(a_true.K, -1);  // extra columns are dropped
  for (const auto& [k, l] : pairs) hat_col_of[l] = k;
  long long hamming = 0;
  for (int l = 0; l < a_true.K; ++l) {
    for (int i = 0; i < a_true.n; ++i) {
      const int hat = hat_col_of[l] >= 0 ? a_hat.at(i, hat_col_of[l]) : 0;
      hamming += hat != a_true.at(i, l) ? 1 : 0;
    }
  }
  return static_cast<double>(hamming) /
         (static_cast<double>(a_true.n) * a_true.K);
}

double nmi(std::span<const int> labels_a, std::span<const int> labels_b) {
  if (labels_a.size() != labels_b.size() || labels_a.empty()) {
    throw std::invalid_argument("nmi: label vectors must match and be non-empty");
  }
  const double n = static_cast<double>(labels_a.size());
  std::map<int, long long> count_a, count_b;
  for (int l : labels_a) ++count_a[l];
  for (int l : labels_b) ++count_b[l];
  double h_a = 0.0, h_b = 0.0;
  for (const auto& [l, c] : count_a) {
    const double p = c / n;
    h_a -= p * std::log(p);
  }
  for (const auto& [l, c] : count_b) {
    const double p = c / n;
    h_b -= p * std::log(p);
  }
  if (h_a == 0.0 && h_b == 0.0) return 1.0;
  double mi = 0.0;
  for (const auto& [cell, c] : contingency(labels_a, labels_b)) {
    const double p = c / n;
    const double pa = count_a[cell.first] / n;
    const double pb = count_b[cell.second] / n;
    mi += p * std::log(p / (pa * pb));
  }
  const double value = 2.0 * mi / (h_a + h_b);
  return std::min(1.0, std::max(0.0, value));
}

double param_error(const std::vector<SubsetParams>& params_hat,
                   const AllocationMatrix& a_hat,
                   const std::vector<SubsetParams>& params_true,
                   const AllocationMatrix& a_true) {
  const auto pairs = greedy_column_match(a_hat, a_true);
  if (pairs.empty()) return 0.0;
  double acc = 0.0;
  long long terms = 0;
  for (const auto& [k, l] : pairs) {
    const SubsetParams& hat = params_hat.at(k);
    const SubsetParams& truth = params_true.at(l);
    if (const auto* g = std::get_if<GaussianClusterParams>(&hat)) {
      const auto& gt = std::get<GaussianClusterParams>(truth);
      if (g->mu.size() != gt.mu.size()) {
        throw std::invalid_argument("param_error: shape mismatch");
      }
      acc += (g->mu - gt.mu).squaredNorm();
      terms += g->mu.size();
    } else if (const auto* f = std::get_if<FaSubsetParams>(&hat)) {
      const auto& ft = std::get<FaSubsetParams>(truth);
      if (f->theta.size() != ft.theta.size()) {
        throw std::invalid_argument("param_error: shape mismatch");
      }
      acc += (f->theta - ft.theta).squaredNorm();
      terms += f->theta.size();
    } else {
      const auto& d = std::get<DfaSubsetParams>(hat);
      const auto& dt = std::get<DfaSubsetParams>(truth);
      if (d.c_col.size() != dt.c_col.size()) {
        throw std::invalid_argument("param_error: shape mismatch");
      }
      for (Eigen::Index j = 0; j < d.c_col.size(); ++j) {
        acc += d.c_col[j] != dt.c_col[j] ? 1.0 : 0.0;
      }
      terms += d.c_col.size();
    }
  }
  return acc / static_cast<double>(terms);
}

std::vector<DiagnosticSummary> approximation_diagnostic(
    const ModelData& data, const ModelConfig& cfg, const ShardPlan& plan,
    const MergeConfig& merge_cfg, std::span<const double> epsilons, int n_reps,
    std::uint64_t seed, int jobs) {
  if (plan.S < 2) {
    throw std::invalid_argument("diagnostic: plan needs at least two shards");
  }
  if (epsilons.empty() || n_reps < 1) {
    throw std::invalid_argument("diagnostic: need epsilons and repetitions");
  }
  const SubsetKind kind = model_kind(cfg);

  // scores[rep][eps]
  std::vector<std::vector<double>> scores(
      n_reps, std::vector<double>(epsilons.size(), 0.0));
  parallel_for(n_reps, jobs, [&](int rep) {
    Rng pick(derive_seed(seed, rep, 0));
    const int a = pick.uniform_int(0, plan.S - 1);
    int b = pick.uniform_int(0, plan.S - 2);
    if (b >= a) ++b;

    ShardPlan sub;
    sub.S = 2;
    sub.shards = {plan.shards[a], plan.shards[b], plan.anchors()};
    sub.n = static_cast<int>(plan.shards[a].size() + plan.shards[b].size() +
                             plan.anchors().size());
    const IdSet union_ids =
        id_union(id_union(plan.shards[a], plan.shards[b]), plan.anchors());

    const std::vector<std::uint64_t> chain_seeds{
        derive_seed(seed, rep, 1), derive_seed(seed, rep, 2)};
    const auto chains = run_shard_chains(data, sub, cfg, chain_seeds, 1);

    const ModelData union_data = subset_model_data(data, union_ids);
    const SampleSet full =
        run_single_chain(union_data, cfg, derive_seed(seed, rep, 3));
    const PointEstimate mcmc_pe = point_estimate(full.draws, kind, union_ids);

    for (std::size_t e = 0; e < epsilons.size(); ++e) {
      MergeConfig mc = merge_cfg;
      mc.epsilon = epsilons[e];
      mc.anchor_ids = sub.anchors();
      const auto merged = merge_chain_results(chains, mc, kind, 1);
      const PointEstimate cmc_pe = point_estimate(merged, kind, union_ids);
      if (kind == SubsetKind::Partition) {
        const SubsetDraw cmc_draw = draw_from_matrix(cmc_pe.A_hat, union_ids);
        const SubsetDraw mcmc_draw = draw_from_matrix(mcmc_pe.A_hat, union_ids);
        scores[rep][e] = nmi(partition_labels(cmc_draw, union_ids),
                             partition_labels(mcmc_draw, union_ids));
      } else {
        scores[rep][e] =
            1.0 - misallocation_rate(cmc_pe.A_hat, mcmc_pe.A_hat);
      }
    }
  });

  std::vector<DiagnosticSummary> out;
  out.reserve(epsilons.size());
  for (std::size_t e = 0; e < epsilons.size(); ++e) {
    DiagnosticSummary s;
    s.epsilon = epsilons[e];
    s.n_reps = n_reps;
    for (int r = 0; r < n_reps; ++r) s.mean += scores[r][e];
    s.mean /= n_reps;
    double ss = 0.0;
    for (int r = 0; r < n_reps; ++r) {
      ss += (scores[r][e] - s.mean) * (scores[r][e] - s.mean);
    }
    s.sd = n_reps > 1 ? std::sqrt(ss / (n_reps - 1)) : 0.0;
    out.push_back(s);
  }
  return out;
}

}  // namespace anchormc
