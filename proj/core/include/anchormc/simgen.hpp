#pragma once

#include <cstdint>

#include "anchormc/dfa.hpp"
#include "anchormc/dpm.hpp"
#include "anchormc/fa.hpp"

namespace anchormc {

// Four well-separated Gaussian clusters in four dimensions, equal sizes.
struct Sim1Truth {
  DpmData data;
  AllocationMatrix truth;             // n x 4 partition matrix
  std::vector<SubsetParams> params;   // GaussianClusterParams per cluster
};
Sim1Truth gen_sim1(int n, std::uint64_t seed);

// Nested subclone structure with binomial read counts: four features
// covering the first 1/8, 5/16, 1/2 and 3/4 of the rows (100/250/400/600 at
// the reference n=800), N_ij = 50 and background rate p0 = 0.01.
struct Sim2Truth {
  FaData data;
  AllocationMatrix truth;            // n x 4 feature matrix
  std::vector<SubsetParams> params;  // FaSubsetParams per feature
  Eigen::VectorXd b;                 // per-sample background fractions
  double p0 = 0.0;
};
Sim2Truth gen_sim2(std::uint64_t seed, int n = 800, int p = 5);

// Feature allocation drawn from the buffet construction, trinary symptom
// matrix from the latent logistic model. Offsets and weights are drawn from
// N(0, tau2_gen) and Ga(1, tau_w_gen).
struct Sim3Truth {
  DfaData data;
  AllocationMatrix truth;            // n x K feature matrix, K random
  std::vector<SubsetParams> params;  // DfaSubsetParams per feature
  Eigen::VectorXd eta_minus, eta_plus;
};
Sim3Truth gen_sim3(int n, int p, double m_ibp, std::uint64_t seed,
                   double tau2_gen = 1.0, double tau_w_gen = 0.5);

// Sequential buffet-style draw from the feature-allocation prior: row i
// joins column k with probability c_k/i and opens Poisson(m/i) new columns.
AllocationMatrix ibp_prior_sample(int n, double m_ibp, std::uint64_t seed);

}  // namespace anchormc
