#pragma once

#include <cstdint>
#include <vector>

#include "mixclust/core.hpp"

namespace mixclust {

/// Local-independence mixture: univariate Gaussians per continuous column and
/// a level distribution per categorical column, inside each class.
struct LcmParams {
    std::vector<double> mixing;                           // K
    Eigen::MatrixXd means;                                // K x R
    Eigen::MatrixXd variances;                            // K x R
    std::vector<std::vector<std::vector<double>>> theta;  // [k][s][level]

    int k() const { return static_cast<int>(mixing.size()); }
};

struct LcmConfig {
    int k = 2;
    int n_init = 10;
    int max_iter = 500;
    double tol = 1e-6;       // relative improvement of the traced objective
    double smoothing = 0.0;  // additive count on weighted level tallies; 0 is plain maximum likelihood
    std::uint64_t seed = 0;
};

struct LcmResult {
    FitResult fit;
    LcmParams params;
    std::vector<double> loglik_trace;  // plain log-likelihood after every M-step
};

/// n x K matrix of log(alpha_k) + sum_j log h_j(x_ij | class k).
Eigen::MatrixXd lcm_log_joint(const MixedDataset& dataset, const LcmParams& params);

/// Observed-data log-likelihood, with per-row log-sum-exp.
double lcm_loglik(const MixedDataset& dataset, const LcmParams& params);

/// Log of the Dirichlet(1 + smoothing) prior on every level distribution, up to
/// a constant. EM with smoothed level tallies ascends loglik + this term.
double lcm_log_prior(const LcmParams& params, double smoothing);

/// EM fit. The trace holds loglik + lcm_log_prior after every M-step; the
/// plain log-likelihood of the returned parameters is in details["loglik"].
LcmResult lcm_fit_model(const MixedDataset& dataset, const LcmConfig& config);
/// EM from the given parameters instead of random starts (n_init is ignored).
LcmResult lcm_refine(const MixedDataset& dataset, const LcmParams& start, const LcmConfig& config);
FitResult lcm_fit(const MixedDataset& dataset, const LcmConfig& config);

}  // namespace mixclust
