#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mixclust/mbn.hpp"

namespace mixclust {

std::size_t mbn_min_cluster_size(std::size_t columns) { return std::max<std::size_t>(10, 2 * columns); }

namespace {

constexpr int kInitAttempts = 100;

std::vector<int> initial_partition(std::size_t n, int k, std::size_t min_size, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick(0, k - 1);
    std::vector<int> labels(n);
    for (int attempt = 0; attempt < kInitAttempts; ++attempt) {
        std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
        for (auto& l : labels) ++sizes[static_cast<std::size_t>(l = pick(rng))];
        if (*std::min_element(sizes.begin(), sizes.end()) >= min_size) return labels;
    }
    // Fall back to a shuffled layout that guarantees the minimum.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t r = 0; r < n; ++r)
        labels[order[r]] = r < min_size * static_cast<std::size_t>(k) ? static_cast<int>(r / min_size) : pick(rng);
    return labels;
}

std::vector<std::vector<std::size_t>> members(const std::vector<int>& labels, int k) {
    std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < labels.size(); ++i) out[static_cast<std::size_t>(labels[i])].push_back(i);
    return out;
}

struct CemRun {
    std::vector<int> labels;
    MbnModel model;
    double objective = -std::numeric_limits<double>::infinity();
    std::vector<double> trace;
    std::vector<std::size_t> repairs;
    int iterations = 0;
    bool converged = false;
};

// Moves the least confidently assigned rows into clusters below the minimum size.
bool repair_sizes(std::vector<int>& labels, const Eigen::MatrixXd& log_joint, int k, std::size_t min_size) {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
    bool repaired = false;
    const auto n = labels.size();
    std::vector<double> confidence(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = log_joint.row(static_cast<Eigen::Index>(i));
        const double m = row.maxCoeff();
        confidence[i] = 1.0 / (row.array() - m).exp().sum();
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return confidence[a] < confidence[b]; });
    for (int c = 0; c < k; ++c) {
        auto cu = static_cast<std::size_t>(c);
        for (std::size_t r = 0; r < n && sizes[cu] < min_size; ++r) {
            const auto i = order[r];
            auto from = static_cast<std::size_t>(labels[i]);
            if (from == cu || sizes[from] <= min_size) continue;
            --sizes[from];
            ++sizes[cu];
            labels[i] = c;
            repaired = true;
        }
    }
    return repaired;
}

CemRun run_once(const MbnTable& table, const MbnConfig& cfg, std::vector<int> start) {
    const std::size_t n = table.rows();
    const int k = cfg.k;
    const std::size_t min_size = k == 1 ? 0 : mbn_min_cluster_size(table.nodes());
    CemRun run;
    run.labels = std::move(start);
    bool have_previous = false;
    Eigen::MatrixXd log_joint(static_cast<Eigen::Index>(n), k);

    for (int iter = 1; iter <= cfg.max_cem_iter; ++iter) {
        run.iterations = iter;
        // M-step
        const auto groups = members(run.labels, k);
        std::vector<ClgNetwork> next(static_cast<std::size_t>(k));
        for (int c = 0; c < k; ++c) {
            const auto cu = static_cast<std::size_t>(c);
            const MbnTable sub = table.subset(groups[cu]);
            ClgNetwork candidate = (cfg.relearn_structure || !have_previous)
                                       ? learn_structure(sub, cfg.structure).network
                                       : fit_network(run.model.components[cu].dag(), sub);
            if (cfg.monotone_guard && have_previous) {
                const auto& old = run.model.components[cu];
                const double old_ll = network_loglik_rows(old, sub).sum();
                if (network_loglik_rows(candidate, sub).sum() < old_ll) {
                    ClgNetwork refit = fit_network(old.dag(), sub);
                    candidate = network_loglik_rows(refit, sub).sum() >= old_ll ? std::move(refit) : old;
                }
            }
            next[cu] = std::move(candidate);
        }
        run.model.components = std::move(next);
        run.model.mixing.assign(static_cast<std::size_t>(k), 0.0);
        for (int c = 0; c < k; ++c)
            run.model.mixing[static_cast<std::size_t>(c)] = static_cast<double>(groups[static_cast<std::size_t>(c)].size()) / static_cast<double>(n);
        have_previous = true;

        // E-step and C-step
        for (int c = 0; c < k; ++c)
            log_joint.col(c) = network_loglik_rows(run.model.components[static_cast<std::size_t>(c)], table).array() +
                               std::log(run.model.mixing[static_cast<std::size_t>(c)]);
        std::vector<int> labels(n);
        std::vector<double> row(static_cast<std::size_t>(k));
        for (std::size_t i = 0; i < n; ++i) {
            for (int c = 0; c < k; ++c) row[static_cast<std::size_t>(c)] = log_joint(static_cast<Eigen::Index>(i), c);
            labels[i] = static_cast<int>(argmax(row));
        }
        if (repair_sizes(labels, log_joint, k, min_size)) run.repairs.push_back(run.trace.size());

        double cml = 0.0;
        for (std::size_t i = 0; i < n; ++i) cml += log_joint(static_cast<Eigen::Index>(i), labels[i]);
        run.trace.push_back(cml);
        run.objective = cml;
        const bool unchanged = labels == run.labels;
        run.labels = std::move(labels);
        if (unchanged) {
            run.converged = true;
            break;
        }
    }
    return run;
}

void check_setup(const MixedDataset& dataset, const MbnConfig& config) {
    require_valid(dataset);
    if (config.k < 1) throw ConfigError("MBN: K must be >= 1");
    if (config.n_init < 1 || config.max_cem_iter < 1) throw ConfigError("MBN: n_init and max_cem_iter must be >= 1");
    const std::size_t n = dataset.rows();
    if (static_cast<std::size_t>(config.k) > n) throw ConfigError("MBN: K exceeds the number of rows");
    if (n < 2) throw DegenerateDataError("MBN needs at least 2 rows");
    const std::size_t min_size = config.k == 1 ? 0 : mbn_min_cluster_size(dataset.cols());
    if (min_size * static_cast<std::size_t>(config.k) > n)
        throw ConfigError("MBN: " + std::to_string(n) + " rows cannot hold " + std::to_string(config.k) + " clusters of at least " +
                          std::to_string(min_size) + " rows");
}

MbnResult finish(const MixedDataset& dataset, const MbnConfig& config, CemRun best) {
    MbnResult out;
    out.fit.partition.k = config.k;
    out.fit.partition.labels = best.labels;
    out.fit.objective = best.objective;
    out.fit.iterations = best.iterations;
    out.fit.converged = best.converged;
    out.fit.seed = config.seed;
    out.fit.trace = best.trace;
    out.fit.repairs = best.repairs;
    out.fit.prototypes = cluster_prototypes(dataset, out.fit.partition);
    std::size_t edges = 0;
    for (const auto& net : best.model.components) edges += net.dag().edge_count();
    out.fit.details["edges"] = static_cast<double>(edges);
    out.model = std::move(best.model);
    return out;
}

}  // namespace

MbnResult mbn_cem_fit_model(const MixedDataset& dataset, const MbnConfig& config) {
    check_setup(dataset, config);
    const MbnTable table = MbnTable::from(dataset);
    const std::size_t min_size = config.k == 1 ? 0 : mbn_min_cluster_size(dataset.cols());
    CemRun best;
    for (int r = 0; r < config.n_init; ++r) {
        std::mt19937_64 rng(derive_seed(config.seed, static_cast<std::uint64_t>(r)));
        auto run = run_once(table, config, initial_partition(table.rows(), config.k, min_size, rng));
        if (run.objective > best.objective) best = std::move(run);
        if (config.k == 1) break;  // every start is the same partition
    }
    return finish(dataset, config, std::move(best));
}

MbnResult mbn_cem_refine(const MixedDataset& dataset, const Partition& start, const MbnConfig& config) {
    check_setup(dataset, config);
    if (start.size() != dataset.rows() || start.k != config.k) throw ValidationError("MBN: start partition does not match the data and K");
    const std::size_t min_size = config.k == 1 ? 0 : mbn_min_cluster_size(dataset.cols());
    for (auto size : start.cluster_sizes())
        if (size < min_size) throw ValidationError("MBN: start partition has a cluster below the minimum size");
    return finish(dataset, config, run_once(MbnTable::from(dataset), config, start.labels));
}

FitResult mbn_cem_fit(const MixedDataset& dataset, const MbnConfig& config) { return mbn_cem_fit_model(dataset, config).fit; }

}  // namespace mixclust
