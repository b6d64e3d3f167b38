#include "anchormc/fa.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace anchormc {

namespace {
constexpr double kProbClamp = 1e-10;

double clamp_prob(double p) {
  return std::min(1.0 - kProbClamp, std::max(kProbClamp, p));
}

double dirichlet_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& alpha) {
  double lp = std::lgamma(alpha.sum());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    lp += (alpha[i] - 1.0) * std::log(x[i]) - std::lgamma(alpha[i]);
  }
  return lp;
}

double beta_logpdf(double x, double a, double b) {
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) -
         std::lgamma(a) - std::lgamma(b) + std::lgamma(a + b);
}
}  // namespace

void FaData::validate() const {
  if (y.rows() != N.rows() || y.cols() != N.cols()) {
    throw std::invalid_argument("fa data: y and N shapes differ");
  }
  if (y.rows() < 1 || y.cols() < 1) {
    throw std::invalid_argument("fa data: empty matrix");
  }
  if (static_cast<int>(ids.size()) != n()) {
    throw std::invalid_argument("fa data: ids must match rows");
  }
  check_id_set(ids, "fa data");
  for (int i = 0; i < n(); ++i) {
    for (int j = 0; j < p(); ++j) {
      if (N(i, j) < 1) throw std::invalid_argument("fa data: N must be >= 1");
      if (y(i, j) < 0 || y(i, j) > N(i, j)) {
        throw std::invalid_argument("fa data: need 0 <= y <= N");
      }
    }
  }
}

TemperingLadder TemperingLadder::geometric(int length, double ratio,
                                           int swap_interval) {
  if (length < 1 || ratio <= 0.0 || ratio >= 1.0) {
    throw std::invalid_argument("tempering: bad geometric ladder");
  }
  TemperingLadder ladder;
  ladder.temperatures.resize(length);
  double t = 1.0;
  for (int l = 0; l < length; ++l, t *= ratio) ladder.temperatures[l] = t;
  ladder.swap_interval = swap_interval;
  return ladder;
}

void TemperingLadder::validate() const {
  if (temperatures.empty()) throw std::invalid_argument("tempering: empty ladder");
  if (temperatures.front() != 1.0) {
    throw std::invalid_argument("tempering: ladder must start at 1");
  }
  for (std::size_t l = 1; l < temperatures.size(); ++l) {
    if (!(temperatures[l] < temperatures[l - 1]) || temperatures[l] <= 0.0) {
      throw std::invalid_argument("tempering: temperatures must decrease");
    }
  }
  if (swap_interval < 1) throw std::invalid_argument("tempering: bad interval");
}

void FaConfig::validate() const {
  if (m_ibp <= 0.0) throw std::invalid_argument("fa: m_ibp must be > 0");
  if (p0_a <= 0.0 || p0_b <= 0.0) {
    throw std::invalid_argument("fa: bad beta prior");
  }
  if (dir_weight_b <= 0.0 || dir_weight_theta <= 0.0) {
    throw std::invalid_argument("fa: bad dirichlet weights");
  }
  tempering.validate();
  if (iterations <= 0 || burnin < 0 || thin <= 0 || burnin >= iterations) {
    throw std::invalid_argument("fa: bad iteration counts");
  }
  if (max_features < 0) throw std::invalid_argument("fa: bad feature cap");
}

double fa_success_prob(std::span<const std::uint8_t> a_row,
                       std::span<const double> theta_cols, double b_j,
                       double p0) {
  if (a_row.size() != theta_cols.size()) {
    throw std::invalid_argument("fa_success_prob: size mismatch");
  }
  double p = b_j * p0;
  for (std::size_t k = 0; k < a_row.size(); ++k) {
    if (a_row[k]) p += theta_cols[k];
  }
  return clamp_prob(p);
}

double ibp_gibbs_existing(int r_minus, int n) {
  if (r_minus <= 0 || r_minus > n - 1) {
    throw std::invalid_argument(
        "ibp_gibbs_existing: need 0 < r_minus <= n-1; empty columns go "
        "through the new-feature mechanism");
  }
  return static_cast<double>(r_minus) / static_cast<double>(n);
}

int ibp_new_features(double m_ibp, int n, Rng& rng) {
  if (m_ibp <= 0.0 || n < 1) {
    throw std::invalid_argument("ibp_new_features: bad arguments");
  }
  return rng.poisson(m_ibp / static_cast<double>(n));
}

double ibp_prior_logpmf(const AllocationMatrix& a, double m_ibp) {
  if (a.kind != SubsetKind::Feature) {
    throw std::invalid_argument("ibp_prior_logpmf: feature matrices only");
  }
  const int n = a.n;
  double h_n = 0.0;
  for (int i = 1; i <= n; ++i) h_n += 1.0 / i;
  double lp = a.K * std::log(m_ibp) - m_ibp * h_n - std::lgamma(a.K + 1.0);
  for (int k = 0; k < a.K; ++k) {
    const int c = a.column_count(k);
    if (c == 0) throw std::invalid_argument("ibp_prior_logpmf: empty column");
    lp += std::lgamma(c) + std::lgamma(n - c + 1.0) - std::lgamma(n + 1.0);
  }
  return lp;
}

FaChain::FaChain(FaData data, FaConfig cfg)
    : data_(std::move(data)),
      cfg_(cfg),
      swap_rng_(derive_seed(cfg.seed, 0)) {
  data_.validate();
  cfg_.validate();
  const int n = data_.n();
  const int p = data_.p();
  const int ladder = cfg_.tempering.size();
  replicas_.reserve(ladder);
  for (int l = 0; l < ladder; ++l) {
    Replica r(derive_seed(cfg_.seed, 1 + l));
    r.temperature = cfg_.tempering.temperatures[l];
    r.p0 = r.rng.beta(cfg_.p0_a, cfg_.p0_b);
    r.dir_scale.assign(p, 200.0);

    // Initialize the allocation from its prior (sequential buffet
    // construction) and the simplexes from theirs.
    if (cfg_.init_from_prior) {
      for (int i = 0; i < n; ++i) {
        for (Column& col : r.columns) {
          if (r.rng.bernoulli(static_cast<double>(col.count) / (i + 1))) {
            col.a[i] = 1;
            ++col.count;
          }
        }
        int fresh = r.rng.poisson(cfg_.m_ibp / (i + 1));
        while (fresh-- > 0) {
          if (cfg_.max_features > 0 &&
              static_cast<int>(r.columns.size()) >= cfg_.max_features) {
            break;
          }
          Column col;
          col.a.assign(n, 0);
          col.a[i] = 1;
          col.count = 1;
          r.columns.push_back(std::move(col));
        }
      }
    }
    const int k_init = static_cast<int>(r.columns.size());
    Eigen::VectorXd alpha(k_init + 1);
    alpha[0] = cfg_.dir_weight_b;
    for (int k = 0; k < k_init; ++k) alpha[k + 1] = cfg_.dir_weight_theta;
    r.b.resize(p);
    for (Column& col : r.columns) col.theta.resize(p);
    for (int j = 0; j < p; ++j) {
      const Eigen::VectorXd simplex = r.rng.dirichlet(alpha);
      r.b[j] = simplex[0];
      for (int k = 0; k < k_init; ++k) r.columns[k].theta[j] = simplex[k + 1];
    }
    r.mass = Eigen::MatrixXd::Zero(n, p);
    for (int i = 0; i < n; ++i) {
      for (const Column& col : r.columns) {
        if (col.a[i]) r.mass.row(i) += col.theta.transpose();
      }
    }
    replicas_.push_back(std::move(r));
  }
}

double FaChain::cell_loglik(int i, int j, double prob) const {
  if (cfg_.prior_only) return 0.0;
  const double p = clamp_prob(prob);
  // Binomial coefficients are state-independent and cancel in every ratio.
  return data_.y(i, j) * std::log(p) +
         (data_.N(i, j) - data_.y(i, j)) * std::log1p(-p);
}

double FaChain::total_loglik(const Replica& r) const {
  double total = 0.0;
  for (int j = 0; j < data_.p(); ++j) {
    const double bg = r.b[j] * r.p0;
    for (int i = 0; i < data_.n(); ++i) {
      total += cell_loglik(i, j, bg + r.mass(i, j));
    }
  }
  return total;
}

void FaChain::update_columns(Replica& r, int i) {
  const int n = data_.n();
  for (int k = 0; k < static_cast<int>(r.columns.size()); ++k) {
    Column& col = r.columns[k];
    const int r_minus = col.count - col.a[i];
    if (r_minus == 0) continue;  // singleton of row i, new-feature territory
    const double prior_logodds =
        std::log(static_cast<double>(r_minus)) -
        std::log(static_cast<double>(n - r_minus));
    double delta = 0.0;
    for (int j = 0; j < data_.p(); ++j) {
      const double base =
          r.b[j] * r.p0 + r.mass(i, j) - (col.a[i] ? col.theta[j] : 0.0);
      delta += cell_loglik(i, j, base + col.theta[j]) - cell_loglik(i, j, base);
    }
    const double logit = prior_logodds + r.temperature * delta;
    const double p_one = 1.0 / (1.0 + std::exp(-logit));
    const std::uint8_t next = r.rng.bernoulli(p_one) ? 1 : 0;
    if (next != col.a[i]) {
      const double sign = next ? 1.0 : -1.0;
      r.mass.row(i) += sign * col.theta.transpose();
      col.count += next ? 1 : -1;
      col.a[i] = next;
    }
  }
}

void FaChain::update_new_features(Replica& r, int i) {
  const int n = data_.n();
  const int p = data_.p();
  const int k_new = ibp_new_features(cfg_.m_ibp, n, r.rng);

  std::vector<int> singletons;
  for (int k = 0; k < static_cast<int>(r.columns.size()); ++k) {
    if (r.columns[k].count == 1 && r.columns[k].a[i]) singletons.push_back(k);
  }
  const int k_old = static_cast<int>(singletons.size());
  if (k_old == 0 && k_new == 0) return;
  const int k_total =
      static_cast<int>(r.columns.size()) - k_old + k_new;
  if (cfg_.max_features > 0 && k_total > cfg_.max_features) return;

  ++r.births_prop;

  // Proposal: drop row i's singleton features (their mass returns to b),
  // then carve k_new fresh features out of the freed mass via Beta-fraction
  // sticks. The sticks target row i's residual success rate, so newborn
  // features start out fitting the row instead of noise; the acceptance
  // keeps the full Dirichlet prior ratio and both carve densities, so any
  // stick distribution stays exact. The IBP and Poisson count factors
  // cancel analytically.
  Eigen::VectorXd b_prop = r.b;
  Eigen::VectorXd mass_i = r.mass.row(i).transpose();
  for (int k : singletons) {
    b_prop += r.columns[k].theta;
    mass_i -= r.columns[k].theta;
  }
  const Eigen::VectorXd free_mass = b_prop;  // b plus the killed sticks
  const Eigen::VectorXd mass_int = mass_i;   // row i without its singletons

  // Shared stick-proposal shapes per sample, identical for the forward and
  // reverse carve so the move stays symmetric around the intermediate state.
  const int k_sticks = std::max(k_old, k_new);
  std::vector<double> shape_a(p), shape_b(p);
  for (int j = 0; j < p; ++j) {
    if (cfg_.prior_only || k_sticks == 0) {
      shape_a[j] = cfg_.dir_weight_theta;
      shape_b[j] = cfg_.dir_weight_b;
      continue;
    }
    const double vaf =
        static_cast<double>(data_.y(i, j)) / static_cast<double>(data_.N(i, j));
    const double explained = r.p0 * free_mass[j] + mass_int[j];
    const double target =
        (vaf - explained) / std::max(1e-8, (1.0 - r.p0) * k_sticks);
    const double frac =
        std::min(0.95, std::max(0.02, target / std::max(1e-12, free_mass[j])));
    const double concentration = 15.0;
    shape_a[j] = concentration * frac;
    shape_b[j] = concentration * (1.0 - frac);
  }

  double log_q_fwd = 0.0;
  std::vector<Eigen::VectorXd> born(k_new);
  for (int c = 0; c < k_new; ++c) {
    born[c].resize(p);
    for (int j = 0; j < p; ++j) {
      const double u = std::min(1.0 - 1e-12,
                                std::max(1e-12, r.rng.beta(shape_a[j], shape_b[j])));
      log_q_fwd += beta_logpdf(u, shape_a[j], shape_b[j]) -
                   std::log(b_prop[j]);
      born[c][j] = u * b_prop[j];
      b_prop[j] -= born[c][j];
    }
    mass_i += born[c];
  }
  double log_q_rev = 0.0;
  {
    Eigen::VectorXd remaining = free_mass;
    for (int k : singletons) {
      for (int j = 0; j < p; ++j) {
        const double u = r.columns[k].theta[j] / remaining[j];
        log_q_rev += beta_logpdf(std::min(1.0 - 1e-12, std::max(1e-12, u)),
                                 shape_a[j], shape_b[j]) -
                     std::log(remaining[j]);
        remaining[j] -= r.columns[k].theta[j];
      }
    }
  }

  // Full per-sample Dirichlet prior ratio between the proposed and current
  // simplexes.
  double log_prior = 0.0;
  {
    const int k_x = static_cast<int>(r.columns.size());
    const int k_y = k_x - k_old + k_new;
    Eigen::VectorXd alpha_x(k_x + 1), alpha_y(k_y + 1);
    alpha_x[0] = alpha_y[0] = cfg_.dir_weight_b;
    for (int k = 0; k < k_x; ++k) alpha_x[k + 1] = cfg_.dir_weight_theta;
    for (int k = 0; k < k_y; ++k) alpha_y[k + 1] = cfg_.dir_weight_theta;
    std::vector<bool> killed(r.columns.size(), false);
    for (int k : singletons) killed[k] = true;
    Eigen::VectorXd simplex_x(k_x + 1), simplex_y(k_y + 1);
    for (int j = 0; j < p; ++j) {
      simplex_x[0] = r.b[j];
      simplex_y[0] = b_prop[j];
      int xi = 1, yi = 1;
      for (int k = 0; k < k_x; ++k) {
        simplex_x[xi++] = r.columns[k].theta[j];
        if (!killed[k]) simplex_y[yi++] = r.columns[k].theta[j];
      }
      for (int c = 0; c < k_new; ++c) simplex_y[yi++] = born[c][j];
      log_prior += dirichlet_logpdf(simplex_y, alpha_y) -
                   dirichlet_logpdf(simplex_x, alpha_x);
    }
  }

  double delta = 0.0;
  for (int j = 0; j < p; ++j) {
    const double bg_old = r.b[j] * r.p0;
    const double bg_new = b_prop[j] * r.p0;
    for (int row = 0; row < n; ++row) {
      const double m_old = r.mass(row, j);
      const double m_new = row == i ? mass_i[j] : m_old;
      delta += cell_loglik(row, j, bg_new + m_new) -
               cell_loglik(row, j, bg_old + m_old);
    }
  }

  const double log_accept =
      r.temperature * delta + log_prior + log_q_rev - log_q_fwd;
  if (std::log(r.rng.uniform()) < log_accept) {
    ++r.births_acc;
    for (auto it = singletons.rbegin(); it != singletons.rend(); ++it) {
      r.columns.erase(r.columns.begin() + *it);
    }
    for (int c = 0; c < k_new; ++c) {
      Column col;
      col.a.assign(n, 0);
      col.a[i] = 1;
      col.count = 1;
      col.theta = std::move(born[c]);
      r.columns.push_back(std::move(col));
    }
    r.b = std::move(b_prop);
    r.mass.row(i) = mass_i.transpose();
  }
}

void FaChain::update_dirichlet(Replica& r, int j) {
  const int K = static_cast<int>(r.columns.size());
  if (K == 0) return;  // b_j is pinned at 1 by the simplex
  ++r.dir_prop;

  Eigen::VectorXd cur(K + 1);
  cur[0] = r.b[j];
  for (int k = 0; k < K; ++k) cur[k + 1] = r.columns[k].theta[j];

  const double scale = r.dir_scale[j];
  Eigen::VectorXd alpha_fwd = scale * cur.array() + 0.5;
  Eigen::VectorXd prop = r.rng.dirichlet(alpha_fwd);
  Eigen::VectorXd alpha_rev = scale * prop.array() + 0.5;

  Eigen::VectorXd prior_alpha(K + 1);
  prior_alpha[0] = cfg_.dir_weight_b;
  for (int k = 0; k < K; ++k) prior_alpha[k + 1] = cfg_.dir_weight_theta;

  double delta = 0.0;
  if (!cfg_.prior_only) {
    for (int i = 0; i < data_.n(); ++i) {
      double m_new = 0.0;
      for (int k = 0; k < K; ++k) {
        if (r.columns[k].a[i]) m_new += prop[k + 1];
      }
      delta += cell_loglik(i, j, prop[0] * r.p0 + m_new) -
               cell_loglik(i, j, r.b[j] * r.p0 + r.mass(i, j));
    }
  }

  const double log_accept = r.temperature * delta +
                            dirichlet_logpdf(prop, prior_alpha) -
                            dirichlet_logpdf(cur, prior_alpha) +
                            dirichlet_logpdf(cur, alpha_rev) -
                            dirichlet_logpdf(prop, alpha_fwd);
  if (std::log(r.rng.uniform()) < log_accept) {
    ++r.dir_acc;
    r.b[j] = prop[0];
    for (int k = 0; k < K; ++k) r.columns[k].theta[j] = prop[k + 1];
    for (int i = 0; i < data_.n(); ++i) {
      double m = 0.0;
      for (int k = 0; k < K; ++k) {
        if (r.columns[k].a[i]) m += prop[k + 1];
      }
      r.mass(i, j) = m;
    }
  }
}

void FaChain::update_p0(Replica& r) {
  ++r.p0_prop;
  const double scale = r.p0_scale;
  const double a_fwd = scale * r.p0;
  const double b_fwd = scale * (1.0 - r.p0);
  const double prop = std::min(1.0 - kProbClamp,
                               std::max(kProbClamp, r.rng.beta(a_fwd, b_fwd)));
  const double a_rev = scale * prop;
  const double b_rev = scale * (1.0 - prop);

  double delta = 0.0;
  if (!cfg_.prior_only) {
    for (int j = 0; j < data_.p(); ++j) {
      const double bg_old = r.b[j] * r.p0;
      const double bg_new = r.b[j] * prop;
      for (int i = 0; i < data_.n(); ++i) {
        delta += cell_loglik(i, j, bg_new + r.mass(i, j)) -
                 cell_loglik(i, j, bg_old + r.mass(i, j));
      }
    }
  }
  const double log_accept =
      r.temperature * delta + beta_logpdf(prop, cfg_.p0_a, cfg_.p0_b) -
      beta_logpdf(r.p0, cfg_.p0_a, cfg_.p0_b) +
      beta_logpdf(r.p0, a_rev, b_rev) - beta_logpdf(prop, a_fwd, b_fwd);
  if (std::log(r.rng.uniform()) < log_accept) {
    ++r.p0_acc;
    r.p0 = prop;
  }
}

void FaChain::attempt_swaps() {
  const int L = static_cast<int>(replicas_.size());
  if (L < 2) return;
  // Alternate even/odd adjacent pairs so a state can travel the ladder.
  const int parity = (iteration_ / cfg_.tempering.swap_interval) % 2;
  std::vector<double> logliks(L);
  for (int l = 0; l < L; ++l) logliks[l] = total_loglik(replicas_[l]);
  for (int l = parity; l + 1 < L; l += 2) {
    ++swaps_prop_;
    const double log_accept = (replicas_[l].temperature -
                               replicas_[l + 1].temperature) *
                              (logliks[l + 1] - logliks[l]);
    if (std::log(swap_rng_.uniform()) < log_accept) {
      ++swaps_acc_;
      std::swap(replicas_[l].columns, replicas_[l + 1].columns);
      std::swap(replicas_[l].b, replicas_[l + 1].b);
      std::swap(replicas_[l].p0, replicas_[l + 1].p0);
      std::swap(replicas_[l].mass, replicas_[l + 1].mass);
      std::swap(logliks[l], logliks[l + 1]);
    }
  }
}

void FaChain::adapt(Replica& r) {
  // Multiplicative adaptation toward 0.2-0.4 acceptance, burn-in only. The
  // scales are proposal concentrations, so high acceptance means steps are
  // too small and the concentration must come down.
  if (r.dir_prop >= 50) {
    const double rate = static_cast<double>(r.dir_acc) / r.dir_prop;
    const double factor = rate > 0.4 ? 0.8 : (rate < 0.2 ? 1.25 : 1.0);
    for (double& s : r.dir_scale) {
      s = std::min(1e7, std::max(2.0, s * factor));
    }
    r.dir_acc = r.dir_prop = 0;
  }
  if (r.p0_prop >= 50) {
    const double rate = static_cast<double>(r.p0_acc) / r.p0_prop;
    if (rate > 0.4) r.p0_scale = std::max(2.0, r.p0_scale * 0.8);
    if (rate < 0.2) r.p0_scale = std::min(1e7, r.p0_scale * 1.25);
    r.p0_acc = r.p0_prop = 0;
  }
}

void FaChain::step_phase(int phase, int site) {
  Replica& r = replicas_.front();
  switch (phase) {
    case 0:
      if (site >= 0) {
        update_columns(r, site);
      } else {
        for (int i = 0; i < data_.n(); ++i) update_columns(r, i);
      }
      break;
    case 1:
      if (site >= 0) {
        update_new_features(r, site);
      } else {
        for (int i = 0; i < data_.n(); ++i) update_new_features(r, i);
      }
      break;
    case 2:
      if (site >= 0) {
        update_dirichlet(r, site);
      } else {
        for (int j = 0; j < data_.p(); ++j) update_dirichlet(r, j);
      }
      break;
    default:
      update_p0(r);
      break;
  }
}

void FaChain::step() {
  ++iteration_;
  for (Replica& r : replicas_) {
    for (int i = 0; i < data_.n(); ++i) update_columns(r, i);
    for (int i = 0; i < data_.n(); ++i) update_new_features(r, i);
    for (int j = 0; j < data_.p(); ++j) update_dirichlet(r, j);
    update_p0(r);
    if (iteration_ <= cfg_.burnin) adapt(r);
  }
  if (replicas_.size() > 1 &&
      iteration_ % cfg_.tempering.swap_interval == 0) {
    attempt_swaps();
  }
}

int FaChain::feature_count() const {
  return static_cast<int>(replicas_.front().columns.size());
}

SubsetDraw FaChain::current_draw() const {
  const Replica& r = replicas_.front();
  SubsetDraw draw;
  draw.kind = SubsetKind::Feature;
  draw.subsets.reserve(r.columns.size());
  draw.params.reserve(r.columns.size());
  for (const Column& col : r.columns) {
    IdSet members;
    members.reserve(col.count);
    for (int i = 0; i < data_.n(); ++i) {
      if (col.a[i]) members.push_back(data_.ids[i]);
    }
    draw.subsets.push_back(std::move(members));
    draw.params.emplace_back(FaSubsetParams{col.theta});
  }
  draw.globals = FaGlobals{r.b, r.p0};
  return draw;
}

std::vector<std::pair<std::string, double>> FaChain::acceptance_rates() const {
  const Replica& r = replicas_.front();
  auto rate = [](long acc, long prop) {
    return prop == 0 ? 0.0 : static_cast<double>(acc) / prop;
  };
  std::vector<std::pair<std::string, double>> out{
      {"births", rate(r.births_acc, r.births_prop)},
      {"dirichlet", rate(r.dir_acc, r.dir_prop)},
      {"p0", rate(r.p0_acc, r.p0_prop)},
  };
  if (replicas_.size() > 1) {
    out.emplace_back("swaps", rate(swaps_acc_, swaps_prop_));
  }
  return out;
}

SampleSet fa_run(const FaData& data, const FaConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  FaChain chain(data, cfg);
  SampleSet out;
  out.meta.model = "fa";
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
