#include "mixclust/kamila.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace mixclust {

namespace {

constexpr double kKernelReach = 8.0;  // bandwidths beyond which the Gaussian kernel is ignored
constexpr double kLogFloor = -745.0;  // log of the smallest positive double

double safe_log(double v) { return v > 0.0 ? std::log(v) : kLogFloor; }

double sample_sd(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

double RadialDensity::silverman_bandwidth(std::span<const double> sample) {
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const double sd = sample_sd(sorted);
    const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    double spread = std::min(sd, iqr / 1.34);
    if (!(spread > 0.0)) spread = sd;
    const double h = 0.9 * spread * std::pow(static_cast<double>(sorted.size()), -0.2);
    return h > kBandwidthFloor ? h : kBandwidthFloor;
}

RadialDensity::RadialDensity(std::span<const double> distances, int dimension)
    : sample_(distances.begin(), distances.end()), dimension_(dimension) {
    if (sample_.size() < 2) throw DegenerateDataError("radial KDE needs at least 2 distances");
    if (dimension < 1) throw ConfigError("radial KDE: dimension must be >= 1");
    for (double r : sample_)
        if (!(r >= 0.0) || !std::isfinite(r)) throw ValidationError("radial KDE: distances must be finite and non-negative");
    std::sort(sample_.begin(), sample_.end());
    bandwidth_ = silverman_bandwidth(sample_);

    grid_lo_ = sample_.front() - 3.0 * bandwidth_;
    const double hi = sample_.back() + 3.0 * bandwidth_;
    grid_step_ = (hi - grid_lo_) / (kGridSize - 1);
    grid_values_.resize(kGridSize);
    for (int g = 0; g < kGridSize; ++g) grid_values_[static_cast<std::size_t>(g)] = radial_density(grid_lo_ + g * grid_step_);
}

double RadialDensity::radial_density(double r) const {
    const double h = bandwidth_;
    auto lo = std::lower_bound(sample_.begin(), sample_.end(), r - kKernelReach * h);
    auto hi = std::upper_bound(sample_.begin(), sample_.end(), r + kKernelReach * h);
    double s = 0.0;
    for (auto it = lo; it != hi; ++it) {
        const double z = (r - *it) / h;
        s += std::exp(-0.5 * z * z);
    }
    return s / (static_cast<double>(sample_.size()) * h * std::sqrt(2.0 * std::numbers::pi));
}

double RadialDensity::radial_density_interpolated(double r) const {
    const double pos = (r - grid_lo_) / grid_step_;
    if (pos < 0.0 || pos > kGridSize - 1) return 0.0;
    auto g = static_cast<std::size_t>(pos);
    if (g >= grid_values_.size() - 1) return grid_values_.back();
    const double t = pos - static_cast<double>(g);
    return (1.0 - t) * grid_values_[g] + t * grid_values_[g + 1];
}

double RadialDensity::log_spherical_density(double d) const {
    return safe_log(radial_density_interpolated(d)) - (dimension_ - 1) * std::log(std::max(d, kDistanceFloor));
}

RadialDensity radial_kde(std::span<const double> distances, int dimension) { return RadialDensity(distances, dimension); }

namespace {

struct KamilaData {
    Eigen::MatrixXd v;  // n x R
    Eigen::MatrixXi w;  // n x S
    std::vector<int> levels;
};

struct KamilaRun {
    std::vector<int> labels;
    Eigen::MatrixXd centers;                       // K x R
    std::vector<std::vector<std::vector<double>>> theta;  // [k][s][level]
    double objective = -std::numeric_limits<double>::infinity();
    std::vector<double> trace;
    int iterations = 0;
    bool converged = false;
};

void estimate_categoricals(const KamilaData& d, KamilaRun& run, int k, double smoothing) {
    const std::size_t S = d.levels.size();
    for (int c = 0; c < k; ++c)
        for (std::size_t s = 0; s < S; ++s) std::fill(run.theta[static_cast<std::size_t>(c)][s].begin(), run.theta[static_cast<std::size_t>(c)][s].end(), 0.0);
    std::vector<double> sizes(static_cast<std::size_t>(k), 0.0);
    for (Eigen::Index i = 0; i < d.v.rows(); ++i) {
        auto c = static_cast<std::size_t>(run.labels[static_cast<std::size_t>(i)]);
        sizes[c] += 1.0;
        for (std::size_t s = 0; s < S; ++s) run.theta[c][s][static_cast<std::size_t>(d.w(i, static_cast<Eigen::Index>(s)))] += 1.0;
    }
    for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
        for (std::size_t s = 0; s < S; ++s) {
            auto& t = run.theta[c][s];
            const double denom = sizes[c] + smoothing * static_cast<double>(t.size());
            for (double& v : t) v = denom > 0.0 ? (v + smoothing) / denom : 1.0 / static_cast<double>(t.size());
        }
    }
}

KamilaRun run_once(const KamilaData& d, const KamilaConfig& cfg, std::mt19937_64& rng) {
    const auto n = static_cast<std::size_t>(d.v.rows());
    const int k = cfg.k;
    const auto R = static_cast<int>(d.v.cols());
    KamilaRun run;
    run.centers.resize(k, d.v.cols());
    auto seeds = sample_distinct(n, static_cast<std::size_t>(k), rng);
    for (int c = 0; c < k; ++c) run.centers.row(c) = d.v.row(static_cast<Eigen::Index>(seeds[static_cast<std::size_t>(c)]));
    run.theta.assign(static_cast<std::size_t>(k), {});
    std::gamma_distribution<double> flat(1.0, 1.0);
    for (auto& per_cluster : run.theta) {
        for (int m : d.levels) {
            std::vector<double> t(static_cast<std::size_t>(m));
            double total = 0.0;
            for (double& v : t) total += (v = flat(rng));
            for (double& v : t) v /= total;
            per_cluster.push_back(std::move(t));
        }
    }
    run.labels.assign(n, -1);

    const auto ni = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd dist(ni, k), score(ni, k);
    std::vector<double> nearest(n), row(static_cast<std::size_t>(k)), own(n);
    for (int iter = 1; iter <= cfg.max_iter; ++iter) {
        run.iterations = iter;
        for (Eigen::Index i = 0; i < ni; ++i) {
            for (Eigen::Index c = 0; c < k; ++c) dist(i, c) = (d.v.row(i) - run.centers.row(c)).norm();
            nearest[static_cast<std::size_t>(i)] = dist.row(i).minCoeff();
        }
        RadialDensity density(nearest, R);

        bool changed = false;
        double total = 0.0;
        for (Eigen::Index i = 0; i < ni; ++i) {
            for (Eigen::Index c = 0; c < k; ++c) {
                double h = density.log_spherical_density(dist(i, c));
                const auto& th = run.theta[static_cast<std::size_t>(c)];
                for (std::size_t s = 0; s < d.levels.size(); ++s)
                    h += safe_log(th[s][static_cast<std::size_t>(d.w(i, static_cast<Eigen::Index>(s)))]);
                score(i, c) = h;
                row[static_cast<std::size_t>(c)] = h;
            }
            auto iu = static_cast<std::size_t>(i);
            auto best = static_cast<int>(argmax(row));
            changed |= best != run.labels[iu];
            run.labels[iu] = best;
            own[iu] = row[static_cast<std::size_t>(best)];
            total += own[iu];
        }
        run.trace.push_back(total);
        run.objective = total;
        if (!changed) {
            run.converged = true;
            break;
        }

        // An empty cluster is reseeded at the worst-explained row.
        std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
        for (int l : run.labels) ++sizes[static_cast<std::size_t>(l)];
        for (int c = 0; c < k; ++c) {
            if (sizes[static_cast<std::size_t>(c)] > 0) continue;
            std::size_t worst = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (sizes[static_cast<std::size_t>(run.labels[i])] < 2) continue;
                if (worst == n || own[i] < own[worst]) worst = i;
            }
            if (worst == n) break;
            --sizes[static_cast<std::size_t>(run.labels[worst])];
            run.labels[worst] = c;
            ++sizes[static_cast<std::size_t>(c)];
            own[worst] = std::numeric_limits<double>::infinity();
        }

        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, d.v.cols());
        for (Eigen::Index i = 0; i < ni; ++i) sums.row(run.labels[static_cast<std::size_t>(i)]) += d.v.row(i);
        for (int c = 0; c < k; ++c)
            if (sizes[static_cast<std::size_t>(c)] > 0) run.centers.row(c) = sums.row(c) / static_cast<double>(sizes[static_cast<std::size_t>(c)]);
        estimate_categoricals(d, run, k, cfg.smoothing);
    }
    return run;
}

}  // namespace

FitResult kamila_fit(const MixedDataset& dataset, const KamilaConfig& config) {
    require_valid(dataset);
    if (dataset.continuous_columns().empty())
        throw ConfigError("KAMILA needs at least one continuous column; use lcm or mbn for purely categorical data");
    if (config.k < 1) throw ConfigError("KAMILA: K must be >= 1");
    if (static_cast<std::size_t>(config.k) > dataset.rows()) throw ConfigError("KAMILA: K exceeds the number of rows");
    if (config.smoothing < 0.0) throw ConfigError("KAMILA: smoothing must be >= 0");
    if (config.n_init < 1 || config.max_iter < 1) throw ConfigError("KAMILA: n_init and max_iter must be >= 1");
    if (dataset.rows() < 2) throw DegenerateDataError("KAMILA needs at least 2 rows");

    KamilaData d;
    d.v = continuous_matrix(dataset);
    d.w = categorical_matrix(dataset);
    for (auto j : dataset.categorical_columns()) d.levels.push_back(dataset.column(j).level_count());

    KamilaRun best;
    for (int r = 0; r < config.n_init; ++r) {
        std::mt19937_64 rng(derive_seed(config.seed, static_cast<std::uint64_t>(r)));
        auto run = run_once(d, config, rng);
        if (run.objective > best.objective) best = std::move(run);
    }

    FitResult out;
    out.partition.k = config.k;
    out.partition.labels = best.labels;
    out.objective = best.objective;
    out.iterations = best.iterations;
    out.converged = best.converged;
    out.seed = config.seed;
    out.trace = best.trace;
    for (int c = 0; c < config.k; ++c) {
        ClusterPrototype p;
        for (Eigen::Index j = 0; j < best.centers.cols(); ++j) p.continuous_center.push_back(best.centers(c, j));
        for (const auto& t : best.theta[static_cast<std::size_t>(c)]) {
            p.categorical_center.push_back(static_cast<int>(argmax(t)));
            p.level_freqs.push_back(t);
        }
        out.prototypes.push_back(std::move(p));
    }
    return out;
}

}  // namespace mixclust
