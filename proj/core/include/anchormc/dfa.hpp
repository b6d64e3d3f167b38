#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "anchormc/allocation.hpp"
#include "anchormc/rng.hpp"

namespace anchormc {

// Trinary symptom matrix for double feature allocation: IBP prior on the
// patient-feature matrix A, matched symptom columns C in {-1,0,1}, and the
// latent logistic likelihood
//   p(y_ij = -1) ∝ exp(eta_j^- + sum_k w_jk^- I(A_ik=1, C_jk=-1))
//   p(y_ij =  0) ∝ 1
//   p(y_ij = +1) ∝ exp(eta_j^+ + sum_k w_jk^+ I(A_ik=1, C_jk=+1)).
struct DfaData {
  Eigen::MatrixXi y;  // n x p, entries in {-1,0,1}
  IdSet ids;          // global patient ids, one per row

  int n() const { return static_cast<int>(y.rows()); }
  int p() const { return static_cast<int>(y.cols()); }
  void validate() const;
};

// Prior-knowledge constraints: pinned entries of A and C (1-based feature
// indices into the leading structural columns). Pinned entries are never
// updated; columns carrying any pin are never born or killed.
struct FixedEntrySpec {
  struct ACell {
    ObsId row = 0;  // global observation id
    int feature = 0;
    int value = 0;  // 0 or 1
  };
  struct CCell {
    int col = 0;  // symptom index, 1-based
    int feature = 0;
    int value = 0;  // -1, 0 or 1
  };
  std::vector<ACell> a_cells;
  std::vector<CCell> c_cells;

  bool empty() const { return a_cells.empty() && c_cells.empty(); }
  int fixed_feature_count() const;
  void validate(int p) const;
};

struct DfaConfig {
  double m_ibp = 1.0;
  double tau2 = 10.0;   // variance of the offsets eta
  double tau_w = 1.0;   // rate of the Ga(1, tau_w) weight prior
  Eigen::Vector3d dir_c{1.0, 1.0, 1.0};  // Dirichlet prior on pi
  FixedEntrySpec fixed;
  int iterations = 5000;
  int burnin = 2500;
  int thin = 5;
  std::uint64_t seed = 0;
  int max_features = 0;  // test hook, 0 = unbounded

  void validate() const;
};

// Log probability of one cell. a_row/params describe the active features,
// j selects the symptom, eta_* are that symptom's offsets.
double dfa_cell_logprob(int y, std::span<const std::uint8_t> a_row,
                        const std::vector<DfaSubsetParams>& params, int j,
                        double eta_minus, double eta_plus);

class DfaChain {
 public:
  DfaChain(DfaData data, DfaConfig cfg);

  void step();
  SubsetDraw current_draw() const;
  int feature_count() const { return static_cast<int>(columns_.size()); }
  std::vector<std::pair<std::string, double>> acceptance_rates() const;

  const DfaConfig& config() const { return cfg_; }

 private:
  struct Column {
    std::vector<std::uint8_t> a;          // membership, length n
    int count = 0;
    Eigen::VectorXi c;                    // matched symptom column, length p
    Eigen::VectorXd w_plus, w_minus;      // weights, length p
    bool pinned = false;
    std::vector<std::uint8_t> a_fixed;    // masks, empty unless pinned
    std::vector<std::uint8_t> c_fixed;
  };

  double cell_loglik(int i, int j, double s_minus, double s_plus) const;
  double cell_loglik_cached(int i, int j) const;
  void update_a_entries(int i);
  void update_new_features(int i);
  void update_c_entries();
  void update_pi();
  void update_eta();
  void update_weights();
  void adapt();

  DfaData data_;
  DfaConfig cfg_;
  Rng rng_;
  std::vector<Column> columns_;
  Eigen::VectorXd eta_minus_, eta_plus_;
  Eigen::Vector3d pi_;
  Eigen::MatrixXd s_minus_, s_plus_;  // n x p aggregated weight scores
  double eta_step_ = 0.3;
  double w_step_ = 0.3;
  long births_acc_ = 0, births_prop_ = 0;
  long eta_acc_ = 0, eta_prop_ = 0;
  long w_acc_ = 0, w_prop_ = 0;
  int iteration_ = 0;
};

SampleSet dfa_run(const DfaData& data, const DfaConfig& cfg);

}  // namespace anchormc
