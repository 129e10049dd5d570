#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "mixclust/distance_methods.hpp"

namespace mixclust {

namespace {

// Relative size below which a within-cluster dispersion counts as zero.
constexpr double kZeroDispersion = 1e-12;

struct ConvexData {
    Eigen::MatrixXd v;  // n x R, z-scored
    Eigen::MatrixXd w;  // n x L, one-hot
    Eigen::VectorXd w_norm;
};

struct Blocks {
    Eigen::MatrixXd con;  // K x R
    Eigen::MatrixXd cat;  // K x L
};

double cosine_distance(const Eigen::Ref<const Eigen::RowVectorXd>& w, double w_norm,
                       const Eigen::Ref<const Eigen::RowVectorXd>& mu) {
    double mu_norm = mu.norm();
    if (mu_norm == 0.0 || w_norm == 0.0) return 1.0;
    return 1.0 - w.dot(mu) / (w_norm * mu_norm);
}

struct KmRun {
    std::vector<int> labels;
    Blocks centers;
    double distortion = 0.0;
    std::vector<double> trace;
    int iterations = 0;
    bool converged = false;
};

void update_centers(const ConvexData& d, KmRun& run, int k) {
    run.centers.con = Eigen::MatrixXd::Zero(k, d.v.cols());
    run.centers.cat = Eigen::MatrixXd::Zero(k, d.w.cols());
    std::vector<double> counts(static_cast<std::size_t>(k), 0.0);
    for (Eigen::Index i = 0; i < d.v.rows(); ++i) {
        auto c = run.labels[static_cast<std::size_t>(i)];
        run.centers.con.row(c) += d.v.row(i);
        run.centers.cat.row(c) += d.w.row(i);
        counts[static_cast<std::size_t>(c)] += 1.0;
    }
    for (int c = 0; c < k; ++c) {
        double m = counts[static_cast<std::size_t>(c)];
        if (m == 0.0) continue;
        run.centers.con.row(c) /= m;
        run.centers.cat.row(c) /= m;
    }
}

double total_distortion(const ConvexData& d, const KmRun& run, double alpha) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < d.v.rows(); ++i) {
        auto c = run.labels[static_cast<std::size_t>(i)];
        total += alpha * (d.v.row(i) - run.centers.con.row(c)).squaredNorm() +
                 (1.0 - alpha) * cosine_distance(d.w.row(i), d.w_norm(i), run.centers.cat.row(c));
    }
    return total;
}

KmRun run_once(const ConvexData& d, int k, double alpha, int max_iter, std::mt19937_64& rng) {
    const auto n = static_cast<std::size_t>(d.v.rows());
    KmRun run;
    run.centers.con.resize(k, d.v.cols());
    run.centers.cat.resize(k, d.w.cols());
    auto seeds = sample_distinct(n, static_cast<std::size_t>(k), rng);
    for (int c = 0; c < k; ++c) {
        auto row = static_cast<Eigen::Index>(seeds[static_cast<std::size_t>(c)]);
        run.centers.con.row(c) = d.v.row(row);
        run.centers.cat.row(c) = d.w.row(row);
    }
    run.labels.assign(n, -1);
    std::vector<double> cost(static_cast<std::size_t>(k)), own(n);
    for (int iter = 1; iter <= max_iter; ++iter) {
        run.iterations = iter;
        bool changed = false;
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            auto ii = static_cast<Eigen::Index>(i);
            for (int c = 0; c < k; ++c)
                cost[static_cast<std::size_t>(c)] =
                    alpha * (d.v.row(ii) - run.centers.con.row(c)).squaredNorm() +
                    (1.0 - alpha) * cosine_distance(d.w.row(ii), d.w_norm(ii), run.centers.cat.row(c));
            auto best = static_cast<int>(argmin(cost));
            changed |= best != run.labels[i];
            run.labels[i] = best;
            own[i] = cost[static_cast<std::size_t>(best)];
            total += own[i];
        }
        run.trace.push_back(total);
        if (!changed) {
            run.converged = true;
            break;
        }
        std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
        for (int l : run.labels) ++sizes[static_cast<std::size_t>(l)];
        for (int c = 0; c < k; ++c) {
            if (sizes[static_cast<std::size_t>(c)] > 0) continue;
            std::size_t far = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (sizes[static_cast<std::size_t>(run.labels[i])] < 2) continue;
                if (far == n || own[i] > own[far]) far = i;
            }
            if (far == n) break;
            --sizes[static_cast<std::size_t>(run.labels[far])];
            run.labels[far] = c;
            ++sizes[static_cast<std::size_t>(c)];
            own[far] = 0.0;
        }
        update_centers(d, run, k);
        run.trace.push_back(total_distortion(d, run, alpha));
    }
    update_centers(d, run, k);
    run.distortion = total_distortion(d, run, alpha);
    return run;
}

ConvexData prepare(const MixedDataset& dataset) {
    ConvexData d;
    d.v = continuous_matrix(dataset);
    for (Eigen::Index j = 0; j < d.v.cols(); ++j) {
        const double mean = d.v.col(j).mean();
        d.v.col(j).array() -= mean;
        double sd = d.v.rows() > 1 ? std::sqrt(d.v.col(j).squaredNorm() / static_cast<double>(d.v.rows() - 1)) : 0.0;
        if (sd > 0.0) d.v.col(j) /= sd;
    }
    auto oh = one_hot(dataset);
    std::vector<Eigen::Index> cat_cols;
    for (std::size_t c = 0; c < oh.columns.size(); ++c)
        if (oh.columns[c].level >= 0) cat_cols.push_back(static_cast<Eigen::Index>(c));
    d.w.resize(oh.matrix.rows(), static_cast<Eigen::Index>(cat_cols.size()));
    for (std::size_t c = 0; c < cat_cols.size(); ++c) d.w.col(static_cast<Eigen::Index>(c)) = oh.matrix.col(cat_cols[c]);
    d.w_norm = d.w.rowwise().norm();
    return d;
}

}  // namespace

std::vector<double> convex_kmeans_grid(int grid_size) {
    if (grid_size < 2) throw ConfigError("convex k-means: grid_size must be >= 2");
    std::vector<double> grid;
    for (int i = 1; i <= grid_size; ++i) grid.push_back(static_cast<double>(i) / (grid_size + 1));
    return grid;
}

std::vector<ConvexKmGridPoint> convex_kmeans_path(const MixedDataset& dataset, const ConvexKmConfig& config) {
    require_valid(dataset);
    const std::size_t n = dataset.rows();
    if (dataset.continuous_columns().empty() || dataset.categorical_columns().empty())
        throw ConfigError("convex k-means needs at least one continuous and one categorical column");
    if (config.k < 1) throw ConfigError("convex k-means: K must be >= 1");
    if (static_cast<std::size_t>(config.k) > n) throw ConfigError("convex k-means: K exceeds the number of rows");
    if (config.n_init < 1 || config.max_iter < 1) throw ConfigError("convex k-means: n_init and max_iter must be >= 1");

    const ConvexData d = prepare(dataset);
    const Eigen::RowVectorXd con_mean = d.v.colwise().mean();
    const Eigen::RowVectorXd cat_mean = d.w.colwise().mean();
    double total_con = 0.0, total_cat = 0.0;
    for (Eigen::Index i = 0; i < d.v.rows(); ++i) {
        total_con += (d.v.row(i) - con_mean).squaredNorm();
        total_cat += cosine_distance(d.w.row(i), d.w_norm(i), cat_mean);
    }

    const auto grid = convex_kmeans_grid(config.grid_size);
    std::vector<ConvexKmGridPoint> path;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const double alpha = grid[g];
        KmRun best;
        best.distortion = std::numeric_limits<double>::infinity();
        for (int r = 0; r < config.n_init; ++r) {
            std::mt19937_64 rng(derive_seed(derive_seed(config.seed, g), static_cast<std::uint64_t>(r)));
            auto run = run_once(d, config.k, alpha, config.max_iter, rng);
            if (run.distortion < best.distortion) best = std::move(run);
        }
        ConvexKmGridPoint pt;
        pt.alpha_cont = alpha;
        pt.distortion = best.distortion;
        for (Eigen::Index i = 0; i < d.v.rows(); ++i) {
            auto c = best.labels[static_cast<std::size_t>(i)];
            pt.w_con += (d.v.row(i) - best.centers.con.row(c)).squaredNorm();
            pt.w_cat += cosine_distance(d.w.row(i), d.w_norm(i), best.centers.cat.row(c));
        }
        pt.b_con = total_con - pt.w_con;
        pt.b_cat = total_cat - pt.w_cat;
        pt.admissible = pt.w_con > kZeroDispersion * std::max(total_con, 1.0) &&
                        pt.w_cat > kZeroDispersion * std::max(total_cat, 1.0) && pt.b_con > 0.0 && pt.b_cat > 0.0;
        pt.q = pt.admissible ? (pt.w_con / pt.b_con) * (pt.w_cat / pt.b_cat) : std::numeric_limits<double>::infinity();

        pt.fit.partition.k = config.k;
        pt.fit.partition.labels = best.labels;
        pt.fit.objective = best.distortion;
        pt.fit.iterations = best.iterations;
        pt.fit.converged = best.converged;
        pt.fit.seed = config.seed;
        pt.fit.trace = best.trace;
        pt.fit.prototypes = cluster_prototypes(dataset, pt.fit.partition);
        path.push_back(std::move(pt));
    }
    return path;
}

FitResult convex_kmeans_fit(const MixedDataset& dataset, const ConvexKmConfig& config) {
    auto path = convex_kmeans_path(dataset, config);
    std::size_t best = path.size();
    for (std::size_t g = 0; g < path.size(); ++g) {
        if (!path[g].admissible) continue;
        if (best == path.size() || path[g].q < path[best].q) best = g;
    }
    if (best == path.size())
        throw DegenerateDataError("degenerate categorical structure: every grid weight gives a zero within-cluster dispersion");
    FitResult out = std::move(path[best].fit);
    out.details["alpha_cont"] = path[best].alpha_cont;
    out.details["q"] = path[best].q;
    return out;
}

}  // namespace mixclust
