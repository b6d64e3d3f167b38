#include "anchormc/dpm.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace anchormc {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}  // namespace

void DpmData::validate() const {
  if (y.rows() < 1 || y.cols() < 1) {
    throw std::invalid_argument("dpm data: empty matrix");
  }
  if (static_cast<int>(ids.size()) != n()) {
    throw std::invalid_argument("dpm data: ids must match rows");
  }
  check_id_set(ids, "dpm data");
  if (!y.allFinite()) throw std::invalid_argument("dpm data: non-finite rows");
}

void DpmConfig::validate(int p) const {
  if (m <= 0.0) throw std::invalid_argument("dpm: m must be > 0");
  if (kappa0 <= 0.0) throw std::invalid_argument("dpm: kappa0 must be > 0");
  const double dof = b == 0.0 ? static_cast<double>(p) : b;
  if (dof < p) throw std::invalid_argument("dpm: b must be >= p");
  if (n_aux < 1) throw std::invalid_argument("dpm: n_aux must be >= 1");
  if (iterations <= 0 || burnin < 0 || thin <= 0 || burnin >= iterations) {
    throw std::invalid_argument("dpm: bad iteration counts");
  }
}

namespace {
double log_multigamma(double a, int p) {
  double lg = 0.25 * p * (p - 1) * std::log(M_PI);
  for (int j = 0; j < p; ++j) lg += std::lgamma(a - 0.5 * j);
  return lg;
}
}  // namespace

double niw_log_marginal(const NiwParams& prior, const Eigen::MatrixXd& rows) {
  const int nk = static_cast<int>(rows.rows());
  const int p = static_cast<int>(rows.cols());
  const NiwParams post = niw_posterior(prior, rows);
  return -0.5 * nk * p * std::log(M_PI) +
         0.5 * p * (std::log(prior.kappa) - std::log(post.kappa)) +
         log_multigamma(0.5 * post.nu, p) - log_multigamma(0.5 * prior.nu, p) +
         0.5 * prior.nu * std::log(prior.psi.determinant()) -
         0.5 * post.nu * std::log(post.psi.determinant());
}

NiwParams niw_posterior(const NiwParams& prior, const Eigen::MatrixXd& rows) {
  const auto nk = static_cast<double>(rows.rows());
  const Eigen::VectorXd mean = rows.colwise().mean();
  Eigen::MatrixXd scatter =
      Eigen::MatrixXd::Zero(rows.cols(), rows.cols());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const Eigen::VectorXd d = rows.row(i).transpose() - mean;
    scatter += d * d.transpose();
  }
  NiwParams post;
  post.kappa = prior.kappa + nk;
  post.mean = (prior.kappa * prior.mean + nk * mean) / post.kappa;
  post.nu = prior.nu + nk;
  const Eigen::VectorXd dm = mean - prior.mean;
  post.psi = prior.psi + scatter +
             (prior.kappa * nk / post.kappa) * (dm * dm.transpose());
  return post;
}

Eigen::MatrixXd draw_inverse_wishart(double nu, const Eigen::MatrixXd& psi,
                                     Rng& rng) {
  const int p = static_cast<int>(psi.rows());
  if (nu <= p - 1) {
    throw std::invalid_argument("inverse wishart: nu must exceed p-1");
  }
  Eigen::LLT<Eigen::MatrixXd> psi_llt(psi);
  if (psi_llt.info() != Eigen::Success) {
    throw std::invalid_argument("inverse wishart: psi not positive definite");
  }
  // W ~ Wishart(nu, psi^{-1}) via Bartlett with factor C,
  // C C' = psi^{-1}, C = L^{-T} for psi = L L'.
  Eigen::MatrixXd c = Eigen::MatrixXd::Identity(p, p);
  psi_llt.matrixL().transpose().solveInPlace(c);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
  for (int i = 0; i < p; ++i) {
    a(i, i) = std::sqrt(rng.chi_squared(nu - i));
    for (int j = 0; j < i; ++j) a(i, j) = rng.normal();
  }
  const Eigen::MatrixXd t = c * a;
  const Eigen::MatrixXd w = t * t.transpose();
  Eigen::MatrixXd sigma =
      w.llt().solve(Eigen::MatrixXd::Identity(p, p));
  sigma = 0.5 * (sigma + sigma.transpose());
  return sigma;
}

GaussianClusterParams draw_niw(const NiwParams& niw, Rng& rng) {
  const int p = static_cast<int>(niw.psi.rows());
  for (int attempt = 0; attempt < 100; ++attempt) {
    Eigen::MatrixXd sigma = draw_inverse_wishart(niw.nu, niw.psi, rng);
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) continue;  // redraw on failed factor
    const Eigen::VectorXd z = rng.standard_normal_vector(p);
    GaussianClusterParams params;
    params.mu = niw.mean + llt.matrixL() * z / std::sqrt(niw.kappa);
    params.sigma = std::move(sigma);
    return params;
  }
  throw std::runtime_error("draw_niw: repeated Cholesky failures");
}

double dpm_loglik(const Eigen::VectorXd& y,
                  const GaussianClusterParams& params) {
  if (y.size() != params.mu.size() || params.sigma.rows() != y.size() ||
      params.sigma.cols() != y.size()) {
    throw std::invalid_argument("dpm_loglik: dimension mismatch");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(params.sigma);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("dpm_loglik: covariance not positive definite");
  }
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    log_det += 2.0 * std::log(llt.matrixL()(i, i));
  }
  const Eigen::VectorXd solved = llt.matrixL().solve(y - params.mu);
  return -0.5 * (y.size() * kLog2Pi + log_det + solved.squaredNorm());
}

DpmChain::DpmChain(Eigen::MatrixXd data, IdSet ids, DpmConfig cfg)
    : data_(std::move(data)),
      ids_(std::move(ids)),
      cfg_(cfg),
      rng_(cfg.seed) {
  const int p = static_cast<int>(data_.cols());
  cfg_.validate(p);
  if (static_cast<Eigen::Index>(ids_.size()) != data_.rows() || ids_.empty()) {
    throw std::invalid_argument("dpm: ids must match data rows");
  }
  check_id_set(ids_, "dpm");
  if (!data_.allFinite()) {
    throw std::invalid_argument("dpm: data must be finite");
  }
  if (cfg_.b == 0.0) cfg_.b = static_cast<double>(p);

  prior_.kappa = cfg_.kappa0;
  prior_.mean = Eigen::VectorXd::Zero(p);
  prior_.nu = cfg_.b;
  prior_.psi = Eigen::MatrixXd::Identity(p, p);

  // Start from singletons; coalescing down is fast under either opener.
  const int n = static_cast<int>(data_.rows());
  assignment_.resize(n);
  clusters_.resize(n);
  for (int i = 0; i < n; ++i) {
    assignment_[i] = i;
    clusters_[i].members = {i};
    const NiwParams post =
        cfg_.prior_only ? prior_ : niw_posterior(prior_, data_.row(i));
    set_cluster_params(clusters_[i], draw_niw(post, rng_));
  }
  if (cfg_.marginal_opener && !cfg_.prior_only) {
    log_marginal_.resize(n);
    for (int i = 0; i < n; ++i) {
      log_marginal_[i] = niw_log_marginal(prior_, data_.row(i));
    }
  }
}

void DpmChain::set_cluster_params(Cluster& c, GaussianClusterParams params) {
  params.sigma = 0.5 * (params.sigma + params.sigma.transpose());
  c.chol.compute(params.sigma);
  if (c.chol.info() != Eigen::Success) {
    throw std::runtime_error("dpm: cluster covariance not positive definite");
  }
  c.log_det = 0.0;
  for (Eigen::Index i = 0; i < params.sigma.rows(); ++i) {
    c.log_det += 2.0 * std::log(c.chol.matrixL()(i, i));
  }
  c.params = std::move(params);
}

double DpmChain::member_loglik(const Eigen::VectorXd& y,
                               const Cluster& c) const {
  if (cfg_.prior_only) return 0.0;
  const Eigen::VectorXd solved = c.chol.matrixL().solve(y - c.params.mu);
  return -0.5 * (y.size() * kLog2Pi + c.log_det + solved.squaredNorm());
}

GaussianClusterParams DpmChain::draw_prior_params() {
  return draw_niw(prior_, rng_);
}

void DpmChain::resample_assignment(int row) {
  const Eigen::VectorXd y = data_.row(row).transpose();

  // Detach the observation; a singleton cluster is deleted immediately and
  // its parameters seed the first auxiliary component.
  const int old = assignment_[row];
  auto& members = clusters_[old].members;
  members.erase(std::find(members.begin(), members.end(), row));
  bool reuse_old_params = false;
  GaussianClusterParams old_params;
  if (members.empty()) {
    reuse_old_params = true;
    old_params = std::move(clusters_[old].params);
    clusters_.erase(clusters_.begin() + old);
    for (int& a : assignment_) {
      if (a > old) --a;
    }
    assignment_[row] = -1;
  }

  const int k_active = static_cast<int>(clusters_.size());

  if (cfg_.marginal_opener) {
    std::vector<double> logits(k_active + 1);
    for (int k = 0; k < k_active; ++k) {
      logits[k] = std::log(static_cast<double>(clusters_[k].members.size())) +
                  member_loglik(y, clusters_[k]);
    }
    logits[k_active] =
        std::log(cfg_.m) + (cfg_.prior_only ? 0.0 : log_marginal_[row]);
    const int pick = rng_.categorical_from_logits(logits);
    if (pick < k_active) {
      clusters_[pick].members.push_back(row);
      assignment_[row] = pick;
    } else {
      Cluster fresh;
      const NiwParams post =
          cfg_.prior_only ? prior_ : niw_posterior(prior_, data_.row(row));
      set_cluster_params(fresh, draw_niw(post, rng_));
      fresh.members = {row};
      clusters_.push_back(std::move(fresh));
      assignment_[row] = k_active;
    }
    return;
  }

  std::vector<Cluster> aux(cfg_.n_aux);
  for (int a = 0; a < cfg_.n_aux; ++a) {
    GaussianClusterParams params = (a == 0 && reuse_old_params)
                                       ? std::move(old_params)
                                       : draw_prior_params();
    set_cluster_params(aux[a], std::move(params));
  }

  std::vector<double> logits(k_active + cfg_.n_aux);
  const double log_aux_weight =
      std::log(cfg_.m) - std::log(static_cast<double>(cfg_.n_aux));
  for (int k = 0; k < k_active; ++k) {
    logits[k] = std::log(static_cast<double>(clusters_[k].members.size())) +
                member_loglik(y, clusters_[k]);
  }
  for (int a = 0; a < cfg_.n_aux; ++a) {
    logits[k_active + a] = log_aux_weight + member_loglik(y, aux[a]);
  }

  const int pick = rng_.categorical_from_logits(logits);
  if (pick < k_active) {
    clusters_[pick].members.push_back(row);
    assignment_[row] = pick;
  } else {
    Cluster fresh = std::move(aux[pick - k_active]);
    fresh.members = {row};
    clusters_.push_back(std::move(fresh));
    assignment_[row] = k_active;
  }
}

void DpmChain::resample_cluster_params() {
  const int p = static_cast<int>(data_.cols());
  for (Cluster& c : clusters_) {
    Eigen::MatrixXd rows(c.members.size(), p);
    for (std::size_t i = 0; i < c.members.size(); ++i) {
      rows.row(static_cast<Eigen::Index>(i)) = data_.row(c.members[i]);
    }
    const NiwParams post =
        cfg_.prior_only ? prior_ : niw_posterior(prior_, rows);
    set_cluster_params(c, draw_niw(post, rng_));
  }
}

void DpmChain::step() {
  const int n = static_cast<int>(data_.rows());
  for (int i = 0; i < n; ++i) resample_assignment(i);
  resample_cluster_params();
}

SubsetDraw DpmChain::current_draw() const {
  SubsetDraw draw;
  draw.kind = SubsetKind::Partition;
  draw.subsets.reserve(clusters_.size());
  draw.params.reserve(clusters_.size());
  for (const Cluster& c : clusters_) {
    IdSet members;
    members.reserve(c.members.size());
    for (int row : c.members) members.push_back(ids_[row]);
    std::sort(members.begin(), members.end());
    draw.subsets.push_back(std::move(members));
    draw.params.emplace_back(c.params);
  }
  return draw;
}

void DpmChain::resample_data() {
  for (int i = 0; i < static_cast<int>(data_.rows()); ++i) {
    const Cluster& c = clusters_[assignment_[i]];
    const Eigen::VectorXd z = rng_.standard_normal_vector(
        static_cast<int>(data_.cols()));
    data_.row(i) = (c.params.mu + c.chol.matrixL() * z).transpose();
    if (!log_marginal_.empty()) {
      log_marginal_[i] = niw_log_marginal(prior_, data_.row(i));
    }
  }
}

SampleSet dpm_run(const Eigen::MatrixXd& data, const IdSet& ids,
                  const DpmConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  DpmChain chain(data, ids, cfg);
  SampleSet out;
  out.meta.model = "dpm";
  out.meta.seed = cfg.seed;
  out.meta.iterations = cfg.iterations;
  out.meta.burnin = cfg.burnin;
  out.meta.thin = cfg.thin;
  out.meta.ids = ids;
  out.draws.reserve((cfg.iterations - cfg.burnin) / cfg.thin);
  for (int t = 1; t <= cfg.iterations; ++t) {
    chain.step();
    if (t > cfg.burnin && (t - cfg.burnin) % cfg.thin == 0) {
      out.draws.push_back(chain.current_draw());
    }
  }
  out.meta.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return out;
}

}  // namespace anchormc
