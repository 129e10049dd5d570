#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "mixclust/distance_methods.hpp"

namespace mixclust {

double estimate_gamma(const MixedDataset& dataset) {
    auto stats = column_stats(dataset);
    double var_sum = 0.0, gini_sum = 0.0;
    int n_cont = 0, n_cat = 0;
    for (const auto& s : stats) {
        if (s.kind == ColumnKind::continuous) {
            var_sum += s.variance;
            ++n_cont;
        } else {
            double sq = 0.0;
            for (double f : s.frequencies) sq += f * f;
            gini_sum += 1.0 - sq;
            ++n_cat;
        }
    }
    if (n_cont == 0 || n_cat == 0)
        throw ConfigError("estimate_gamma needs at least one continuous and one categorical column");
    double gini = gini_sum / n_cat;
    if (gini <= 0.0) throw DegenerateDataError("degenerate categorical data: zero dispersion in every categorical column");
    return (var_sum / n_cont) / gini;
}

namespace {

struct KProtoData {
    Eigen::MatrixXd x;  // n x R
    Eigen::MatrixXi w;  // n x S
    std::vector<int> levels;
    double gamma = 0.0;
};

struct KProtoRun {
    std::vector<int> labels;
    Eigen::MatrixXd centers;  // K x R
    Eigen::MatrixXi modes;    // K x S
    std::vector<double> trace;
    int iterations = 0;
    bool converged = false;
};

double row_cost(const KProtoData& d, Eigen::Index i, const Eigen::MatrixXd& centers, const Eigen::MatrixXi& modes,
                Eigen::Index k) {
    double c = (d.x.row(i) - centers.row(k)).squaredNorm();
    int mismatch = 0;
    for (Eigen::Index s = 0; s < d.w.cols(); ++s) mismatch += d.w(i, s) != modes(k, s);
    return c + d.gamma * mismatch;
}

double objective(const KProtoData& d, const KProtoRun& run) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < d.x.rows(); ++i) total += row_cost(d, i, run.centers, run.modes, run.labels[static_cast<std::size_t>(i)]);
    return total;
}

void update_prototypes(const KProtoData& d, KProtoRun& run, int k) {
    const Eigen::Index n = d.x.rows();
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, d.x.cols());
    std::vector<double> counts(static_cast<std::size_t>(k), 0.0);
    std::vector<std::vector<std::vector<int>>> tallies(static_cast<std::size_t>(k));
    for (auto& t : tallies) {
        t.resize(d.levels.size());
        for (std::size_t s = 0; s < d.levels.size(); ++s) t[s].assign(static_cast<std::size_t>(d.levels[s]), 0);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        auto c = static_cast<std::size_t>(run.labels[static_cast<std::size_t>(i)]);
        sums.row(static_cast<Eigen::Index>(c)) += d.x.row(i);
        counts[c] += 1.0;
        for (std::size_t s = 0; s < d.levels.size(); ++s) ++tallies[c][s][static_cast<std::size_t>(d.w(i, static_cast<Eigen::Index>(s)))];
    }
    for (int c = 0; c < k; ++c) {
        auto cu = static_cast<std::size_t>(c);
        if (counts[cu] == 0.0) continue;
        run.centers.row(c) = sums.row(c) / counts[cu];
        for (std::size_t s = 0; s < d.levels.size(); ++s) {
            const auto& t = tallies[cu][s];
            run.modes(c, static_cast<Eigen::Index>(s)) = static_cast<int>(std::max_element(t.begin(), t.end()) - t.begin());
        }
    }
}

KProtoRun run_once(const KProtoData& d, int k, int max_iter, std::mt19937_64& rng) {
    const auto n = static_cast<std::size_t>(d.x.rows());
    KProtoRun run;
    run.centers.resize(k, d.x.cols());
    run.modes.resize(k, d.w.cols());
    auto seeds = sample_distinct(n, static_cast<std::size_t>(k), rng);
    for (int c = 0; c < k; ++c) {
        auto row = static_cast<Eigen::Index>(seeds[static_cast<std::size_t>(c)]);
        run.centers.row(c) = d.x.row(row);
        run.modes.row(c) = d.w.row(row);
    }
    run.labels.assign(n, -1);

    std::vector<double> cost(static_cast<std::size_t>(k));
    std::vector<double> own_cost(n);
    for (int iter = 1; iter <= max_iter; ++iter) {
        run.iterations = iter;
        bool changed = false;
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (int c = 0; c < k; ++c)
                cost[static_cast<std::size_t>(c)] = row_cost(d, static_cast<Eigen::Index>(i), run.centers, run.modes, c);
            auto best = static_cast<int>(argmin(cost));
            changed |= best != run.labels[i];
            run.labels[i] = best;
            own_cost[i] = cost[static_cast<std::size_t>(best)];
            total += own_cost[i];
        }
        run.trace.push_back(total);
        if (!changed) {
            run.converged = true;
            break;
        }

        // Empty clusters take the row farthest from its own prototype.
        auto sizes = std::vector<std::size_t>(static_cast<std::size_t>(k), 0);
        for (int l : run.labels) ++sizes[static_cast<std::size_t>(l)];
        for (int c = 0; c < k; ++c) {
            if (sizes[static_cast<std::size_t>(c)] > 0) continue;
            std::size_t far = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (sizes[static_cast<std::size_t>(run.labels[i])] < 2) continue;
                if (far == n || own_cost[i] > own_cost[far]) far = i;
            }
            if (far == n) break;
            --sizes[static_cast<std::size_t>(run.labels[far])];
            run.labels[far] = c;
            ++sizes[static_cast<std::size_t>(c)];
            own_cost[far] = 0.0;
        }

        update_prototypes(d, run, k);
        run.trace.push_back(objective(d, run));
    }
    return run;
}

}  // namespace

FitResult kprototypes_fit(const MixedDataset& dataset, const KProtoConfig& config) {
    require_valid(dataset);
    const std::size_t n = dataset.rows();
    if (config.k < 1) throw ConfigError("k-prototypes: K must be >= 1");
    if (static_cast<std::size_t>(config.k) > n) throw ConfigError("k-prototypes: K exceeds the number of rows");
    if (config.n_init < 1 || config.max_iter < 1) throw ConfigError("k-prototypes: n_init and max_iter must be >= 1");

    KProtoData d;
    d.x = continuous_matrix(dataset);
    d.w = categorical_matrix(dataset);
    for (auto j : dataset.categorical_columns()) d.levels.push_back(dataset.column(j).level_count());
    if (config.gamma) {
        if (*config.gamma < 0.0) throw ConfigError("k-prototypes: gamma must be non-negative");
        d.gamma = *config.gamma;
    } else if (d.w.cols() == 0 || d.x.cols() == 0) {
        d.gamma = 1.0;  // a single block: the weight is irrelevant
    } else {
        d.gamma = estimate_gamma(dataset);
    }

    KProtoRun best;
    double best_obj = std::numeric_limits<double>::infinity();
    for (int r = 0; r < config.n_init; ++r) {
        std::mt19937_64 rng(derive_seed(config.seed, static_cast<std::uint64_t>(r)));
        auto run = run_once(d, config.k, config.max_iter, rng);
        double obj = run.trace.back();
        if (obj < best_obj) {
            best_obj = obj;
            best = std::move(run);
        }
    }

    FitResult out;
    out.partition.k = config.k;
    out.partition.labels = best.labels;
    out.objective = best_obj;
    out.iterations = best.iterations;
    out.converged = best.converged;
    out.seed = config.seed;
    out.trace = best.trace;
    out.details["gamma"] = d.gamma;
    for (int c = 0; c < config.k; ++c) {
        ClusterPrototype p;
        for (Eigen::Index j = 0; j < best.centers.cols(); ++j) p.continuous_center.push_back(best.centers(c, j));
        for (Eigen::Index s = 0; s < best.modes.cols(); ++s) p.categorical_center.push_back(best.modes(c, s));
        out.prototypes.push_back(std::move(p));
    }
    return out;
}

}  // namespace mixclust
