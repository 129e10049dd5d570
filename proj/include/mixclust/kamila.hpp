#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mixclust/core.hpp"

namespace mixclust {

struct KamilaConfig {
    int k = 2;
    int n_init = 20;
    int max_iter = 100;
    double smoothing = 1.0;  // additive count on multinomial level tallies
    std::uint64_t seed = 0;
};

/// Gaussian-kernel density of the distances to the nearest centre, with the
/// spherical correction for the continuous dimension.
class RadialDensity {
public:
    static constexpr double kDistanceFloor = 1e-10;
    static constexpr double kBandwidthFloor = 1e-6;
    static constexpr int kGridSize = 512;

    RadialDensity(std::span<const double> distances, int dimension);

    double bandwidth() const { return bandwidth_; }
    int dimension() const { return dimension_; }
    std::size_t sample_size() const { return sample_.size(); }

    /// Exact kernel density of the distances at r.
    double radial_density(double r) const;
    /// Same density, linearly interpolated from a fixed grid (what the fit uses).
    double radial_density_interpolated(double r) const;
    /// log f_R(d) - (R - 1) log max(d, 1e-10), up to a constant shared by all clusters.
    double log_spherical_density(double d) const;

    /// Silverman's rule 0.9 min(sd, IQR / 1.34) n^(-1/5); falls back to sd when
    /// the IQR vanishes and to 1e-6 when both do.
    static double silverman_bandwidth(std::span<const double> sample);

private:
    std::vector<double> sample_;
    double bandwidth_ = 1.0;
    int dimension_ = 1;
    double grid_lo_ = 0.0;
    double grid_step_ = 1.0;
    std::vector<double> grid_values_;
};

RadialDensity radial_kde(std::span<const double> distances, int dimension);

/// KAMILA clustering. The trace holds sum_i H_i(label_i) after each partition
/// step; `objective` is that sum for the returned partition.
FitResult kamila_fit(const MixedDataset& dataset, const KamilaConfig& config);

}  // namespace mixclust
