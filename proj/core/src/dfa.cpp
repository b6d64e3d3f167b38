#include "anchormc/dfa.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace anchormc {

namespace {
double trinary_logsumexp(double u_minus, double u_plus) {
  // log(e^{u-} + 1 + e^{u+}) without overflow.
  const double m = std::max({u_minus, 0.0, u_plus});
  return m + std::log(std::exp(u_minus - m) + std::exp(-m) +
                      std::exp(u_plus - m));
}

double score_for(int y, double u_minus, double u_plus) {
  if (y < 0) return u_minus;
  if (y > 0) return u_plus;
  return 0.0;
}
}  // namespace

void DfaData::validate() const {
  if (y.rows() < 1 || y.cols() < 1) {
    throw std::invalid_argument("dfa data: empty matrix");
  }
  if (static_cast<int>(ids.size()) != n()) {
    throw std::invalid_argument("dfa data: ids must match rows");
  }
  check_id_set(ids, "dfa data");
  for (int i = 0; i < n(); ++i) {
    for (int j = 0; j < p(); ++j) {
      if (y(i, j) < -1 || y(i, j) > 1) {
        throw std::invalid_argument("dfa data: entries must be in {-1,0,1}");
      }
    }
  }
}

int FixedEntrySpec::fixed_feature_count() const {
  int k = 0;
  for (const ACell& c : a_cells) k = std::max(k, c.feature);
  for (const CCell& c : c_cells) k = std::max(k, c.feature);
  return k;
}

void FixedEntrySpec::validate(int p) const {
  for (const ACell& c : a_cells) {
    if (c.feature < 1 || (c.value != 0 && c.value != 1)) {
      throw std::invalid_argument("fixed entries: bad A constraint");
    }
  }
  for (const CCell& c : c_cells) {
    if (c.feature < 1 || c.col < 1 || c.col > p || c.value < -1 ||
        c.value > 1) {
      throw std::invalid_argument("fixed entries: bad C constraint");
    }
  }
}

void DfaConfig::validate() const {
  if (m_ibp <= 0.0) throw std::invalid_argument("dfa: m_ibp must be > 0");
  if (tau2 <= 0.0 || tau_w <= 0.0) {
    throw std::invalid_argument("dfa: tau2 and tau_w must be > 0");
  }
  for (int c = 0; c < 3; ++c) {
    if (dir_c[c] <= 0.0) {
      throw std::invalid_argument("dfa: dirichlet weights must be > 0");
    }
  }
  if (iterations <= 0 || burnin < 0 || thin <= 0 || burnin >= iterations) {
    throw std::invalid_argument("dfa: bad iteration counts");
  }
  if (max_features < 0) throw std::invalid_argument("dfa: bad feature cap");
}

double dfa_cell_logprob(int y, std::span<const std::uint8_t> a_row,
                        const std::vector<DfaSubsetParams>& params, int j,
                        double eta_minus, double eta_plus) {
  if (a_row.size() != params.size()) {
    throw std::invalid_argument("dfa_cell_logprob: size mismatch");
  }
  double u_minus = eta_minus;
  double u_plus = eta_plus;
  for (std::size_t k = 0; k < a_row.size(); ++k) {
    if (!a_row[k]) continue;
    if (params[k].c_col[j] == -1) u_minus += params[k].w_minus[j];
    if (params[k].c_col[j] == 1) u_plus += params[k].w_plus[j];
  }
  return score_for(y, u_minus, u_plus) - trinary_logsumexp(u_minus, u_plus);
}

DfaChain::DfaChain(DfaData data, DfaConfig cfg)
    : data_(std::move(data)), cfg_(cfg), rng_(cfg.seed) {
  data_.validate();
  cfg_.validate();
  cfg_.fixed.validate(data_.p());

  const int n = data_.n();
  const int p = data_.p();
  pi_ = rng_.dirichlet(cfg_.dir_c);
  eta_minus_.resize(p);
  eta_plus_.resize(p);
  const double tau = std::sqrt(cfg_.tau2);
  for (int j = 0; j < p; ++j) {
    eta_minus_[j] = tau * rng_.normal();
    eta_plus_[j] = tau * rng_.normal();
  }
  s_minus_ = Eigen::MatrixXd::Zero(n, p);
  s_plus_ = Eigen::MatrixXd::Zero(n, p);

  // Structural columns for pinned entries; rows outside this chain's id
  // universe are ignored (they live on other shards).
  const int pinned = cfg_.fixed.fixed_feature_count();
  std::unordered_map<ObsId, int> row_of;
  row_of.reserve(data_.ids.size());
  for (int i = 0; i < n; ++i) row_of[data_.ids[i]] = i;
  for (int k = 0; k < pinned; ++k) {
    Column col;
    col.pinned = true;
    col.a.assign(n, 0);
    col.a_fixed.assign(n, 0);
    col.c_fixed.assign(p, 0);
    col.c.resize(p);
    for (int j = 0; j < p; ++j) {
      const double u[3] = {pi_[0], pi_[1], pi_[2]};
      col.c[j] = rng_.categorical(std::span<const double>(u, 3)) - 1;
    }
    col.w_plus.resize(p);
    col.w_minus.resize(p);
    for (int j = 0; j < p; ++j) {
      col.w_plus[j] = rng_.gamma(1.0, cfg_.tau_w);
      col.w_minus[j] = rng_.gamma(1.0, cfg_.tau_w);
    }
    columns_.push_back(std::move(col));
  }
  for (const auto& cell : cfg_.fixed.a_cells) {
    auto it = row_of.find(cell.row);
    if (it == row_of.end()) continue;
    Column& col = columns_[cell.feature - 1];
    col.a_fixed[it->second] = 1;
    col.a[it->second] = static_cast<std::uint8_t>(cell.value);
  }
  for (const auto& cell : cfg_.fixed.c_cells) {
    Column& col = columns_[cell.feature - 1];
    col.c_fixed[cell.col - 1] = 1;
    col.c[cell.col - 1] = cell.value;
  }
  // Free features start from a prior draw of the allocation rather than
  // empty, mirroring the feature-allocation sampler.
  for (int i = 0; i < n; ++i) {
    for (std::size_t k = pinned; k < columns_.size(); ++k) {
      Column& col = columns_[k];
      if (rng_.bernoulli(static_cast<double>(col.count) / (i + 1))) {
        col.a[i] = 1;
        ++col.count;
      }
    }
    int fresh = rng_.poisson(cfg_.m_ibp / (i + 1));
    while (fresh-- > 0) {
      if (cfg_.max_features > 0 &&
          static_cast<int>(columns_.size()) >= cfg_.max_features) {
        break;
      }
      Column col;
      col.a.assign(n, 0);
      col.a[i] = 1;
      col.count = 1;
      col.c.resize(p);
      col.w_plus.resize(p);
      col.w_minus.resize(p);
      for (int j = 0; j < p; ++j) {
        const double u[3] = {pi_[0], pi_[1], pi_[2]};
        col.c[j] = rng_.categorical(std::span<const double>(u, 3)) - 1;
        col.w_plus[j] = rng_.gamma(1.0, cfg_.tau_w);
        col.w_minus[j] = rng_.gamma(1.0, cfg_.tau_w);
      }
      columns_.push_back(std::move(col));
    }
  }

  for (Column& col : columns_) {
    col.count = 0;
    for (int i = 0; i < n; ++i) col.count += col.a[i];
    for (int i = 0; i < n; ++i) {
      if (!col.a[i]) continue;
      for (int j = 0; j < p; ++j) {
        if (col.c[j] == -1) s_minus_(i, j) += col.w_minus[j];
        if (col.c[j] == 1) s_plus_(i, j) += col.w_plus[j];
      }
    }
  }
}

double DfaChain::cell_loglik(int i, int j, double s_minus,
                             double s_plus) const {
  const double u_minus = eta_minus_[j] + s_minus;
  const double u_plus = eta_plus_[j] + s_plus;
  return score_for(data_.y(i, j), u_minus, u_plus) -
         trinary_logsumexp(u_minus, u_plus);
}

double DfaChain::cell_loglik_cached(int i, int j) const {
  return cell_loglik(i, j, s_minus_(i, j), s_plus_(i, j));
}

void DfaChain::update_a_entries(int i) {
  const int n = data_.n();
  const int p = data_.p();
  for (Column& col : columns_) {
    if (col.pinned && col.a_fixed[i]) continue;
    const int r_minus = col.count - col.a[i];
    if (r_minus == 0 && !col.pinned) continue;  // handled by births
    // Pinned columns sit outside the IBP bookkeeping; an otherwise-empty
    // one is entered with the smallest-column prior weight 1/n.
    const double prior_logodds =
        r_minus > 0 ? std::log(static_cast<double>(r_minus)) -
                          std::log(static_cast<double>(n - r_minus))
                    : -std::log(static_cast<double>(n - 1));
    double delta = 0.0;  // loglik(a=1) - loglik(a=0)
    for (int j = 0; j < p; ++j) {
      if (col.c[j] == 0) continue;
      const double base_minus =
          s_minus_(i, j) - (col.a[i] && col.c[j] == -1 ? col.w_minus[j] : 0.0);
      const double base_plus =
          s_plus_(i, j) - (col.a[i] && col.c[j] == 1 ? col.w_plus[j] : 0.0);
      const double on_minus =
          base_minus + (col.c[j] == -1 ? col.w_minus[j] : 0.0);
      const double on_plus = base_plus + (col.c[j] == 1 ? col.w_plus[j] : 0.0);
      delta += cell_loglik(i, j, on_minus, on_plus) -
               cell_loglik(i, j, base_minus, base_plus);
    }
    const double logit = prior_logodds + delta;
    const std::uint8_t next =
        rng_.bernoulli(1.0 / (1.0 + std::exp(-logit))) ? 1 : 0;
    if (next != col.a[i]) {
      const double sign = next ? 1.0 : -1.0;
      for (int j = 0; j < p; ++j) {
        if (col.c[j] == -1) s_minus_(i, j) += sign * col.w_minus[j];
        if (col.c[j] == 1) s_plus_(i, j) += sign * col.w_plus[j];
      }
      col.count += next ? 1 : -1;
      col.a[i] = next;
    }
  }
}

void DfaChain::update_new_features(int i) {
  const int n = data_.n();
  const int p = data_.p();
  const int k_new = rng_.poisson(cfg_.m_ibp / n);

  std::vector<int> singletons;
  for (int k = 0; k < static_cast<int>(columns_.size()); ++k) {
    if (!columns_[k].pinned && columns_[k].count == 1 && columns_[k].a[i]) {
      singletons.push_back(k);
    }
  }
  const int k_old = static_cast<int>(singletons.size());
  if (k_old == 0 && k_new == 0) return;
  const int k_total = static_cast<int>(columns_.size()) - k_old + k_new;
  if (cfg_.max_features > 0 && k_total > cfg_.max_features) return;

  ++births_prop_;

  // Proposal draws C columns from pi and weights from the prior; prior and
  // proposal cancel, leaving row i's likelihood ratio.
  Eigen::VectorXd sm = s_minus_.row(i).transpose();
  Eigen::VectorXd sp = s_plus_.row(i).transpose();
  for (int k : singletons) {
    const Column& col = columns_[k];
    for (int j = 0; j < p; ++j) {
      if (col.c[j] == -1) sm[j] -= col.w_minus[j];
      if (col.c[j] == 1) sp[j] -= col.w_plus[j];
    }
  }
  std::vector<Column> born(k_new);
  for (Column& col : born) {
    col.a.assign(n, 0);
    col.a[i] = 1;
    col.count = 1;
    col.c.resize(p);
    col.w_plus.resize(p);
    col.w_minus.resize(p);
    for (int j = 0; j < p; ++j) {
      const double u[3] = {pi_[0], pi_[1], pi_[2]};
      col.c[j] = rng_.categorical(std::span<const double>(u, 3)) - 1;
      col.w_plus[j] = rng_.gamma(1.0, cfg_.tau_w);
      col.w_minus[j] = rng_.gamma(1.0, cfg_.tau_w);
      if (col.c[j] == -1) sm[j] += col.w_minus[j];
      if (col.c[j] == 1) sp[j] += col.w_plus[j];
    }
  }

  double delta = 0.0;
  for (int j = 0; j < p; ++j) {
    delta += cell_loglik(i, j, sm[j], sp[j]) - cell_loglik_cached(i, j);
  }

  if (std::log(rng_.uniform()) < delta) {
    ++births_acc_;
    for (auto it = singletons.rbegin(); it != singletons.rend(); ++it) {
      columns_.erase(columns_.begin() + *it);
    }
    for (Column& col : born) columns_.push_back(std::move(col));
    s_minus_.row(i) = sm.transpose();
    s_plus_.row(i) = sp.transpose();
  }
}

void DfaChain::update_c_entries() {
  const int p = data_.p();
  for (Column& col : columns_) {
    for (int j = 0; j < p; ++j) {
      if (col.pinned && col.c_fixed[j]) continue;
      double logw[3];
      for (int c = 0; c < 3; ++c) logw[c] = std::log(pi_[c]);
      for (int i = 0; i < data_.n(); ++i) {
        if (!col.a[i]) continue;
        const double base_minus =
            s_minus_(i, j) - (col.c[j] == -1 ? col.w_minus[j] : 0.0);
        const double base_plus =
            s_plus_(i, j) - (col.c[j] == 1 ? col.w_plus[j] : 0.0);
        logw[0] += cell_loglik(i, j, base_minus + col.w_minus[j], base_plus);
        logw[1] += cell_loglik(i, j, base_minus, base_plus);
        logw[2] += cell_loglik(i, j, base_minus, base_plus + col.w_plus[j]);
      }
      const int next =
          rng_.categorical_from_logits(std::span<const double>(logw, 3)) - 1;
      if (next != col.c[j]) {
        for (int i = 0; i < data_.n(); ++i) {
          if (!col.a[i]) continue;
          if (col.c[j] == -1) s_minus_(i, j) -= col.w_minus[j];
          if (col.c[j] == 1) s_plus_(i, j) -= col.w_plus[j];
          if (next == -1) s_minus_(i, j) += col.w_minus[j];
          if (next == 1) s_plus_(i, j) += col.w_plus[j];
        }
        col.c[j] = next;
      }
    }
  }
}

void DfaChain::update_pi() {
  Eigen::Vector3d alpha = cfg_.dir_c;
  for (const Column& col : columns_) {
    for (int j = 0; j < data_.p(); ++j) alpha[col.c[j] + 1] += 1.0;
  }
  pi_ = rng_.dirichlet(alpha);
}

void DfaChain::update_eta() {
  const double tau = std::sqrt(cfg_.tau2);
  for (int j = 0; j < data_.p(); ++j) {
    for (int side = 0; side < 2; ++side) {
      ++eta_prop_;
      double& eta = side == 0 ? eta_minus_[j] : eta_plus_[j];
      const double prop = eta + eta_step_ * rng_.normal();
      double delta = 0.0;
      for (int i = 0; i < data_.n(); ++i) {
        const double um = (side == 0 ? prop : eta_minus_[j]) + s_minus_(i, j);
        const double up = (side == 1 ? prop : eta_plus_[j]) + s_plus_(i, j);
        delta += score_for(data_.y(i, j), um, up) -
                 trinary_logsumexp(um, up) - cell_loglik_cached(i, j);
      }
      const double log_prior =
          (eta * eta - prop * prop) / (2.0 * tau * tau);
      if (std::log(rng_.uniform()) < delta + log_prior) {
        ++eta_acc_;
        eta = prop;
      }
    }
  }
}

void DfaChain::update_weights() {
  // Log-scale random walk keeps the Ga(1, tau_w) support; the Jacobian
  // contributes log(w'/w).
  for (Column& col : columns_) {
    for (int j = 0; j < data_.p(); ++j) {
      for (int side = 0; side < 2; ++side) {
        ++w_prop_;
        double& w = side == 0 ? col.w_minus[j] : col.w_plus[j];
        const double prop = w * std::exp(w_step_ * rng_.normal());
        const int active_sign = side == 0 ? -1 : 1;
        double delta = 0.0;
        if (col.c[j] == active_sign) {
          for (int i = 0; i < data_.n(); ++i) {
            if (!col.a[i]) continue;
            const double um =
                s_minus_(i, j) + (side == 0 ? prop - w : 0.0);
            const double up = s_plus_(i, j) + (side == 1 ? prop - w : 0.0);
            delta += cell_loglik(i, j, um, up) - cell_loglik_cached(i, j);
          }
        }
        const double log_accept = delta + cfg_.tau_w * (w - prop) +
                                  std::log(prop) - std::log(w);
        if (std::log(rng_.uniform()) < log_accept) {
          ++w_acc_;
          if (col.c[j] == active_sign) {
            for (int i = 0; i < data_.n(); ++i) {
              if (!col.a[i]) continue;
              if (side == 0) s_minus_(i, j) += prop - w;
              if (side == 1) s_plus_(i, j) += prop - w;
            }
          }
          w = prop;
        }
      }
    }
  }
}

void DfaChain::adapt() {
  if (eta_prop_ >= 200) {
    const double rate = static_cast<double>(eta_acc_) / eta_prop_;
    if (rate > 0.4) eta_step_ = std::min(10.0, eta_step_ * 1.25);
    if (rate < 0.2) eta_step_ = std::max(1e-3, eta_step_ * 0.8);
    eta_acc_ = eta_prop_ = 0;
  }
  if (w_prop_ >= 200) {
    const double rate = static_cast<double>(w_acc_) / w_prop_;
    if (rate > 0.4) w_step_ = std::min(10.0, w_step_ * 1.25);
    if (rate < 0.2) w_step_ = std::max(1e-3, w_step_ * 0.8);
    w_acc_ = w_prop_ = 0;
  }
}

void DfaChain::step() {
  ++iteration_;
  for (int i = 0; i < data_.n(); ++i) update_a_entries(i);
  for (int i = 0; i < data_.n(); ++i) update_new_features(i);
  update_c_entries();
  update_pi();
  update_eta();
  update_weights();
  if (iteration_ <= cfg_.burnin) adapt();
}

SubsetDraw DfaChain::current_draw() const {
  SubsetDraw draw;
  draw.kind = SubsetKind::Feature;
  for (const Column& col : columns_) {
    if (col.count == 0) continue;  // pinned column with no active members
    IdSet members;
    members.reserve(col.count);
    for (int i = 0; i < data_.n(); ++i) {
      if (col.a[i]) members.push_back(data_.ids[i]);
    }
    draw.subsets.push_back(std::move(members));
    draw.params.emplace_back(DfaSubsetParams{col.c, col.w_plus, col.w_minus});
  }
  draw.globals = DfaGlobals{eta_minus_, eta_plus_, pi_};
  return draw;
}

std::vector<std::pair<std::string, double>> DfaChain::acceptance_rates() const {
  auto rate = [](long acc, long prop) {
    return prop == 0 ? 0.0 : static_cast<double>(acc) / prop;
  };
  return {
      {"births", rate(births_acc_, births_prop_)},
      {"eta", rate(eta_acc_, eta_prop_)},
      {"weights", rate(w_acc_, w_prop_)},
  };
}

SampleSet dfa_run(const DfaData& data, const DfaConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  DfaChain chain(data, cfg);
  SampleSet out;
  out.meta.model = "dfa";
  out.meta.seed = cfg.seed;
  out.meta.iterations = cfg.iterations;
  out.meta.burnin = cfg.burnin;
  out.meta.thin = cfg.thin;
  out.meta.ids = data.ids;
  out.draws.reserve((cfg.iterations - cfg.burnin) / cfg.thin);
  for (int t = 1; t <= cfg.iterations; ++t) {
    chain.step();
    if (t > cfg.burnin && (t - cfg.burnin) % cfg.thin == 0) {
      out.draws.push_back(chain.current_draw());
    }
  }
  out.meta.acceptance_rates = chain.acceptance_rates();
  out.meta.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return out;
}

}  // namespace anchormc
