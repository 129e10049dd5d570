#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "mixclust/core.hpp"
#include "mixclust/mbn.hpp"

namespace mixclust {

struct GeneratedData {
    MixedDataset data;
    Partition truth;
};

// ---------------------------------------------------------------------------
// M1: Gaussian model with latent-Gaussian categoricals
// ---------------------------------------------------------------------------

struct M1Config {
    int k = 2;
    double overlap = 0.3;
    std::size_t cluster_size = 700;  // rows per cluster
    int dimension = 12;
    double continuous_proportion = 0.5;
    int levels = 3;
    std::uint64_t seed = 0;

    int continuous_count() const;
    int categorical_count() const { return dimension - continuous_count(); }
};

/// Continuous means of cluster k (0-based): evenly spaced 0..10, shifted by
/// k * 5 * (1 - overlap).
std::vector<double> m1_continuous_means(const M1Config& config, int k);
/// Latent (levels - 1)-dimensional mean for cluster k (0-based).
std::vector<double> m1_latent_means(const M1Config& config, int k);
/// Preferred level code (0-based) of cluster k.
int m1_preferred_level(const M1Config& config, int k);
/// Level code for a latent draw: 0 when every element is negative, else 1 + argmax.
int latent_to_level(std::span<const double> latent);

GeneratedData gen_m1(const M1Config& config);

// ---------------------------------------------------------------------------
// Difference-of-exponentials density used by M2
// ---------------------------------------------------------------------------

using ExpDiffParams = std::array<double, 4>;

struct ExpDiffSample {
    std::vector<double> values;
    double acceptance_rate = 0.0;
};

/// Throws ConfigError on invalid parameters and DegenerateDataError when
/// l1 e^{-l2 x} - l3 e^{-l4 x} is nowhere positive on x >= 0.
void check_expdiff(const ExpDiffParams& lambda);
/// Unnormalised density max(g(x), 0) for x >= 0, and 0 for x < 0.
double expdiff_g(const ExpDiffParams& lambda, double x);
/// Integral of max(g, 0) over [0, inf), in closed form.
double expdiff_normalizer(const ExpDiffParams& lambda);
/// Support [lo, hi) where g is positive (hi may be infinite).
std::pair<double, double> expdiff_support(const ExpDiffParams& lambda);
double expdiff_density(const ExpDiffParams& lambda, double x);

/// Rejection sampling with the envelope l1 e^{-l2 x}.
ExpDiffSample sample_expdiff(const ExpDiffParams& lambda, std::size_t n, std::mt19937_64& rng);
ExpDiffSample sample_expdiff(const ExpDiffParams& lambda, std::size_t n, std::uint64_t seed);

// ---------------------------------------------------------------------------
// M2: exponential-discrete model
// ---------------------------------------------------------------------------

struct M2Cluster {
    ExpDiffParams lambda{};
    std::vector<double> nominal;  // 14 level probabilities
    double bernoulli = 0.5;       // probability of level "1"
};

struct M2Config {
    int k = 2;
    std::size_t n = 1200;
    int dimension = 12;
    double continuous_proportion = 1.0 / 3.0;
    std::vector<double> pi;  // cluster distribution
    std::vector<M2Cluster> clusters;
    std::uint64_t seed = 0;

    /// Published parameters for K = 2 or 3 with a balanced cluster distribution.
    static M2Config defaults(int k);

    int continuous_count() const;
    int binary_count() const;
    int nominal_count() const;
};

inline constexpr int kM2NominalLevels = 14;

/// Largest-remainder rounding of pi * n.
std::vector<std::size_t> largest_remainder_sizes(std::span<const double> pi, std::size_t n);

GeneratedData gen_m2(const M2Config& config);

// ---------------------------------------------------------------------------
// M3 / M4: Bayesian-network models
// ---------------------------------------------------------------------------

struct MbnSimConfig {
    int k = 2;
    std::size_t n = 1200;
    std::uint64_t seed = 0;
};

/// M3 network over (C, X1, ..., X6); C is node 0.
ClgNetwork m3_network(int k, std::mt19937_64& rng);
/// One network over (X1, ..., X6) per mixture component.
std::vector<ClgNetwork> m4_networks(int k, std::mt19937_64& rng);

GeneratedData gen_m3(const MbnSimConfig& config);
GeneratedData gen_m4(const MbnSimConfig& config);

}  // namespace mixclust
