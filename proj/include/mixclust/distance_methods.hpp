#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mixclust/core.hpp"

namespace mixclust {

// ---------------------------------------------------------------------------
// k-prototypes
// ---------------------------------------------------------------------------

struct KProtoConfig {
    int k = 2;
    std::optional<double> gamma;  // nullopt: estimate_gamma()
    int n_init = 10;
    int max_iter = 100;
    std::uint64_t seed = 0;
};

/// Mean sample variance of the continuous columns divided by the mean Gini
/// dispersion (1 - sum f^2) of the categorical columns.
double estimate_gamma(const MixedDataset& dataset);

/// Squared Euclidean distance on the raw continuous block plus gamma times the
/// Hamming mismatch count on the categorical block. Lloyd-style alternation;
/// the trace holds the objective after each assignment and each update step.
FitResult kprototypes_fit(const MixedDataset& dataset, const KProtoConfig& config);

// ---------------------------------------------------------------------------
// PDQ: probabilistic distance clustering adjusted for cluster size
// ---------------------------------------------------------------------------

/// How the cluster-size terms s_k are refreshed after each membership step.
enum class PdqSizeUpdate {
    /// s_k proportional to sqrt(sum_i p_ik^2 d_ik), the JDF minimiser under
    /// sum_k s_k = n. Keeps the JDF monotone.
    jdf_optimal,
    /// s_k = sum_i p_ik.
    membership_sum,
};

struct PdqConfig {
    int k = 2;
    int max_iter = 100;
    double tol = 1e-6;  // relative JDF change
    PdqSizeUpdate size_update = PdqSizeUpdate::jdf_optimal;
    std::uint64_t seed = 0;
};

/// Gower-type weights and per-column normalisers used by PDQ distances.
struct PdqDistance {
    double alpha_continuous = 0.0;
    double alpha_ordinal = 0.0;
    double alpha_nominal = 0.0;
    std::vector<double> scale;         // x* per continuous column
    std::vector<double> ordinal_range; // R_j per ordinal column (>= 1e-12)

    static PdqDistance from(const MixedDataset& dataset);
};

/// Memberships p_k = (s_k / d_k) / sum_m (s_m / d_m). A zero distance puts the
/// whole membership on the first zero-distance cluster.
std::vector<double> pdq_memberships(std::span<const double> distances, std::span<const double> sizes);

/// Soft memberships in `partition.soft`; the trace holds the JDF per iteration.
FitResult pdq_fit(const MixedDataset& dataset, const PdqConfig& config);

// ---------------------------------------------------------------------------
// Convex k-means (Modha-Spangler weighting)
// ---------------------------------------------------------------------------

struct ConvexKmConfig {
    int k = 2;
    int grid_size = 20;
    int n_init = 5;  // per grid point
    int max_iter = 100;
    std::uint64_t seed = 0;
};

/// Diagnostics for one grid value of alpha_cont.
struct ConvexKmGridPoint {
    double alpha_cont = 0.0;
    double w_con = 0.0, w_cat = 0.0;
    double b_con = 0.0, b_cat = 0.0;
    double q = 0.0;
    bool admissible = false;  // false when a within dispersion is zero
    double distortion = 0.0;
    FitResult fit;
};

/// Grid of alpha_cont values {i / (grid_size + 1)}, i = 1..grid_size.
std::vector<double> convex_kmeans_grid(int grid_size);

/// Runs every grid point; the caller picks the argmin of Q.
std::vector<ConvexKmGridPoint> convex_kmeans_path(const MixedDataset& dataset, const ConvexKmConfig& config);

/// Partition at the admissible alpha minimising Q; `details["alpha_cont"]` holds alpha*.
FitResult convex_kmeans_fit(const MixedDataset& dataset, const ConvexKmConfig& config);

}  // namespace mixclust
