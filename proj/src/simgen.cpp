#include "mixclust/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mixclust {

namespace {

std::vector<std::string> numbered_levels(int m, int first) {
    std::vector<std::string> out;
    for (int l = 0; l < m; ++l) out.push_back(std::to_string(first + l));
    return out;
}

// Shuffles rows so that cluster blocks are interleaved.
GeneratedData shuffled(const MixedDataset& data, const std::vector<int>& labels, int k, std::mt19937_64& rng) {
    std::vector<std::size_t> order(data.rows());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    GeneratedData out;
    out.data = data.subset(order);
    out.truth.k = k;
    for (auto i : order) out.truth.labels.push_back(labels[i]);
    return out;
}

int count_from_proportion(int dimension, double proportion) {
    return static_cast<int>(std::lround(dimension * proportion));
}

}  // namespace

// ---------------------------------------------------------------------------
// M1
// ---------------------------------------------------------------------------

int M1Config::continuous_count() const { return count_from_proportion(dimension, continuous_proportion); }

std::vector<double> m1_continuous_means(const M1Config& config, int k) {
    const int r = config.continuous_count();
    std::vector<double> means(static_cast<std::size_t>(r));
    const double shift = k * 5.0 * (1.0 - config.overlap);
    for (int j = 0; j < r; ++j) means[static_cast<std::size_t>(j)] = (r > 1 ? 10.0 * j / (r - 1) : 0.0) + shift;
    return means;
}

int m1_preferred_level(const M1Config& config, int k) { return k % config.levels; }

std::vector<double> m1_latent_means(const M1Config& config, int k) {
    const double delta = 5.0 * (1.0 - config.overlap);
    const int pref = m1_preferred_level(config, k);
    std::vector<double> mean(static_cast<std::size_t>(config.levels - 1), 0.0);
    if (pref == 0) {
        std::fill(mean.begin(), mean.end(), -delta);
    } else {
        mean[static_cast<std::size_t>(pref - 1)] = delta;
    }
    return mean;
}

int latent_to_level(std::span<const double> latent) {
    const auto best = argmax(latent);
    return latent[best] < 0.0 ? 0 : static_cast<int>(best) + 1;
}

GeneratedData gen_m1(const M1Config& config) {
    if (config.k < 1) throw ConfigError("M1: K must be >= 1");
    if (!(config.overlap >= 0.0 && config.overlap <= 1.0)) throw ConfigError("M1: overlap must lie in [0, 1]");
    if (config.levels < 2) throw ConfigError("M1: categorical columns need at least 2 levels");
    if (config.cluster_size < 1) throw ConfigError("M1: cluster_size must be >= 1");
    if (config.dimension < 1 || config.continuous_proportion < 0.0 || config.continuous_proportion > 1.0)
        throw ConfigError("M1: invalid dimension or continuous proportion");
    const int r = config.continuous_count();
    const int s = config.categorical_count();
    if (r < 2) throw ConfigError("M1 needs at least 2 continuous columns");

    std::vector<ColumnSchema> schema;
    for (int j = 0; j < r; ++j) schema.push_back(ColumnSchema::continuous("v" + std::to_string(j + 1)));
    for (int j = 0; j < s; ++j) schema.push_back(ColumnSchema::nominal("w" + std::to_string(j + 1), numbered_levels(config.levels, 1)));

    const std::size_t n = config.cluster_size * static_cast<std::size_t>(config.k);
    MixedDataset data(schema, n);
    std::vector<int> labels(n);
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> latent(static_cast<std::size_t>(config.levels - 1));
    std::size_t i = 0;
    for (int k = 0; k < config.k; ++k) {
        const auto means = m1_continuous_means(config, k);
        const auto lmeans = m1_latent_means(config, k);
        for (std::size_t t = 0; t < config.cluster_size; ++t, ++i) {
            labels[i] = k;
            for (int j = 0; j < r; ++j) data.set_value(i, static_cast<std::size_t>(j), means[static_cast<std::size_t>(j)] + z(rng));
            for (int j = 0; j < s; ++j) {
                for (std::size_t d = 0; d < latent.size(); ++d) latent[d] = lmeans[d] + z(rng);
                data.set_code(i, static_cast<std::size_t>(r + j), latent_to_level(latent));
            }
        }
    }
    return shuffled(data, labels, config.k, rng);
}

// ---------------------------------------------------------------------------
// Difference of exponentials
// ---------------------------------------------------------------------------

void check_expdiff(const ExpDiffParams& l) {
    if (!(l[0] > 0.0 && l[1] > 0.0 && l[2] >= 0.0 && l[3] > 0.0) || !std::all_of(l.begin(), l.end(), [](double v) { return std::isfinite(v); }))
        throw ConfigError("exponential-difference density: need l1 > 0, l2 > 0, l3 >= 0, l4 > 0");
    if (!(l[3] > l[1] || l[0] > l[2])) throw DegenerateDataError("degenerate density: g(x) <= 0 for every x >= 0");
}

double expdiff_g(const ExpDiffParams& l, double x) {
    if (x < 0.0) return 0.0;
    return std::max(l[0] * std::exp(-l[1] * x) - l[2] * std::exp(-l[3] * x), 0.0);
}

std::pair<double, double> expdiff_support(const ExpDiffParams& l) {
    check_expdiff(l);
    const double inf = std::numeric_limits<double>::infinity();
    if (l[2] == 0.0 || l[3] == l[1]) return {0.0, inf};
    // Crossing point of l1 e^{-l2 x} and l3 e^{-l4 x}.
    const double cross = std::log(l[2] / l[0]) / (l[3] - l[1]);
    if (l[3] > l[1]) return {std::max(cross, 0.0), inf};
    return {0.0, cross};
}

double expdiff_normalizer(const ExpDiffParams& l) {
    auto [lo, hi] = expdiff_support(l);
    // Antiderivative of g, evaluated at the support ends.
    auto prim = [&](double x) {
        if (std::isinf(x)) return 0.0;
        return -(l[0] / l[1]) * std::exp(-l[1] * x) + (l[2] / l[3]) * std::exp(-l[3] * x);
    };
    return prim(hi) - prim(lo);
}

double expdiff_density(const ExpDiffParams& lambda, double x) { return expdiff_g(lambda, x) / expdiff_normalizer(lambda); }

ExpDiffSample sample_expdiff(const ExpDiffParams& l, std::size_t n, std::mt19937_64& rng) {
    check_expdiff(l);
    ExpDiffSample out;
    out.values.reserve(n);
    std::exponential_distribution<double> proposal(l[1]);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t max_attempts = 1000 * n + 1000000;
    std::size_t attempts = 0;
    while (out.values.size() < n) {
        if (++attempts > max_attempts) throw DegenerateDataError("exponential-difference sampler: acceptance rate too low");
        const double x = proposal(rng);
        const double accept = 1.0 - (l[2] / l[0]) * std::exp(-(l[3] - l[1]) * x);
        if (unit(rng) < accept) out.values.push_back(x);
    }
    out.acceptance_rate = n == 0 ? 0.0 : static_cast<double>(n) / static_cast<double>(attempts);
    return out;
}

ExpDiffSample sample_expdiff(const ExpDiffParams& lambda, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return sample_expdiff(lambda, n, rng);
}

// ---------------------------------------------------------------------------
// M2
// ---------------------------------------------------------------------------

M2Config M2Config::defaults(int k) {
    M2Config c;
    c.k = k;
    if (k == 2) {
        c.pi = {0.5, 0.5};
        c.clusters = {
            {{1.3, 0.05, 20.0, 1.0}, {0.5, 0.02, 0.013, 0.03, 0.02, 0.02, 0.017, 0.01, 0.01, 0.06, 0.1, 0.08, 0.05, 0.07}, 0.64},
            {{1.1, 0.05, 20.0, 1.0}, {0.08, 0.02, 0.08, 0.13, 0.05, 0.03, 0.12, 0.05, 0.01, 0.15, 0.01, 0.2, 0.03, 0.04}, 0.3},
        };
    } else if (k == 3) {
        c.pi = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
        c.clusters = {
            {{3.5, 0.05, 20.0, 1.0}, {0.25, 0.2, 0.15, 0.1, 0.1, 0.05, 0.03, 0.02, 0.02, 0.02, 0.02, 0.02, 0.01, 0.01}, 0.8},
            // The published vector lists 15 values summing to 1.02; one of the repeated 0.02 entries is dropped.
            {{1.3, 0.05, 20.0, 1.0}, {0.01, 0.01, 0.02, 0.02, 0.02, 0.02, 0.02, 0.03, 0.05, 0.1, 0.1, 0.15, 0.2, 0.25}, 0.5},
            {{1.1, 0.05, 20.0, 1.0}, {0.01, 0.02, 0.02, 0.05, 0.1, 0.15, 0.25, 0.15, 0.1, 0.1, 0.02, 0.01, 0.01, 0.01}, 0.2},
        };
    } else {
        throw ConfigError("M2 defaults exist for K = 2 and K = 3 only");
    }
    return c;
}

int M2Config::continuous_count() const { return count_from_proportion(dimension, continuous_proportion); }
int M2Config::binary_count() const { return (dimension - continuous_count()) / 2; }
int M2Config::nominal_count() const { return dimension - continuous_count() - binary_count(); }

std::vector<std::size_t> largest_remainder_sizes(std::span<const double> pi, std::size_t n) {
    std::vector<std::size_t> sizes(pi.size());
    std::vector<std::pair<double, std::size_t>> rem;
    std::size_t used = 0;
    for (std::size_t k = 0; k < pi.size(); ++k) {
        const double exact = pi[k] * static_cast<double>(n);
        // Snap values within rounding noise of an integer before flooring.
        const double nearest = std::round(exact);
        const double base = std::abs(exact - nearest) < 1e-9 ? nearest : std::floor(exact);
        sizes[k] = static_cast<std::size_t>(base);
        used += sizes[k];
        rem.emplace_back(exact - base, k);
    }
    std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t t = 0; used < n && t < rem.size(); ++t, ++used) ++sizes[rem[t].second];
    return sizes;
}

GeneratedData gen_m2(const M2Config& config) {
    if (config.k < 1 || config.pi.size() != static_cast<std::size_t>(config.k) || config.clusters.size() != static_cast<std::size_t>(config.k))
        throw ConfigError("M2: pi and cluster parameters must have K entries");
    if (config.n < static_cast<std::size_t>(config.k)) throw ConfigError("M2: N must be >= K");
    if (config.dimension < 1 || config.continuous_proportion < 0.0 || config.continuous_proportion > 1.0)
        throw ConfigError("M2: invalid dimension or continuous proportion");
    double pi_sum = 0.0;
    for (double p : config.pi) {
        if (!(p >= 0.0)) throw ConfigError("M2: pi entries must be non-negative");
        pi_sum += p;
    }
    if (std::abs(pi_sum - 1.0) > 1e-6) throw ConfigError("M2: pi must sum to 1");
    for (std::size_t k = 0; k < config.clusters.size(); ++k) {
        const auto& c = config.clusters[k];
        check_expdiff(c.lambda);
        if (c.nominal.size() != static_cast<std::size_t>(kM2NominalLevels))
            throw ConfigError("M2: cluster " + std::to_string(k + 1) + " nominal probabilities need " + std::to_string(kM2NominalLevels) +
                              " entries, got " + std::to_string(c.nominal.size()));
        double s = 0.0;
        for (double p : c.nominal) {
            if (!(p >= 0.0)) throw ConfigError("M2: nominal probabilities must be non-negative");
            s += p;
        }
        if (std::abs(s - 1.0) > 1e-6) throw ConfigError("M2: cluster " + std::to_string(k + 1) + " nominal probabilities must sum to 1");
        if (!(c.bernoulli >= 0.0 && c.bernoulli <= 1.0)) throw ConfigError("M2: Bernoulli probability must lie in [0, 1]");
    }

    const int r = config.continuous_count(), b = config.binary_count(), m = config.nominal_count();
    std::vector<ColumnSchema> schema;
    for (int j = 0; j < r; ++j) schema.push_back(ColumnSchema::continuous("v" + std::to_string(j + 1)));
    for (int j = 0; j < b; ++j) schema.push_back(ColumnSchema::nominal("b" + std::to_string(j + 1), {"0", "1"}));
    for (int j = 0; j < m; ++j) schema.push_back(ColumnSchema::nominal("n" + std::to_string(j + 1), numbered_levels(kM2NominalLevels, 1)));

    const auto sizes = largest_remainder_sizes(config.pi, config.n);
    MixedDataset data(schema, config.n);
    std::vector<int> labels(config.n);
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t start = 0;
    for (int k = 0; k < config.k; ++k) {
        const auto& c = config.clusters[static_cast<std::size_t>(k)];
        const std::size_t nk = sizes[static_cast<std::size_t>(k)];
        for (std::size_t t = 0; t < nk; ++t) labels[start + t] = k;
        for (int j = 0; j < r; ++j) {
            auto draws = sample_expdiff(c.lambda, nk, rng);
            for (std::size_t t = 0; t < nk; ++t) data.set_value(start + t, static_cast<std::size_t>(j), draws.values[t]);
        }
        std::discrete_distribution<int> nominal(c.nominal.begin(), c.nominal.end());
        for (std::size_t t = 0; t < nk; ++t) {
            for (int j = 0; j < b; ++j) data.set_code(start + t, static_cast<std::size_t>(r + j), unit(rng) < c.bernoulli ? 1 : 0);
            for (int j = 0; j < m; ++j) data.set_code(start + t, static_cast<std::size_t>(r + b + j), nominal(rng));
        }
        start += nk;
    }
    return shuffled(data, labels, config.k, rng);
}

// ---------------------------------------------------------------------------
// M3 / M4
// ---------------------------------------------------------------------------

namespace {

const std::vector<double> kThreeLevelProbs = {0.64, 0.33, 0.04};
const std::vector<double> kBinaryProbs = {0.1, 0.9};

// All orderings of `values`, normalised to sum to one, in a seeded order.
std::vector<std::vector<double>> shuffled_permutations(std::vector<double> values, std::mt19937_64& rng) {
    double total = 0.0;
    for (double v : values) total += v;
    for (double& v : values) v /= total;
    std::sort(values.begin(), values.end());
    std::vector<std::vector<double>> perms;
    do perms.push_back(values);
    while (std::next_permutation(values.begin(), values.end()));
    std::shuffle(perms.begin(), perms.end(), rng);
    return perms;
}

double draw_sd(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick(5, 15);
    return pick(rng) / 10.0;
}

ClgNode discrete_node(std::string name, int levels, std::vector<std::size_t> parents, std::vector<std::vector<double>> cpt) {
    ClgNode node;
    node.name = std::move(name);
    node.levels = levels;
    node.parents = std::move(parents);
    node.cpt = std::move(cpt);
    return node;
}

ClgNode gaussian_node(std::string name, std::vector<std::size_t> parents, const std::vector<double>& means, double sd) {
    ClgNode node;
    node.name = std::move(name);
    node.parents = std::move(parents);
    for (double m : means) node.regressions.push_back(ClgRegression{m, {}, sd * sd});
    return node;
}

std::vector<double> sequence(double from, double step, std::size_t count) {
    std::vector<double> out(count);
    for (std::size_t t = 0; t < count; ++t) out[t] = from + step * static_cast<double>(t);
    return out;
}

std::vector<ColumnSchema> bn_schema() {
    return {ColumnSchema::nominal("X1", numbered_levels(3, 1)), ColumnSchema::nominal("X2", numbered_levels(3, 1)),
            ColumnSchema::continuous("X3"),                     ColumnSchema::continuous("X4"),
            ColumnSchema::nominal("X5", numbered_levels(2, 0)), ColumnSchema::continuous("X6")};
}

void check_bn_config(const MbnSimConfig& config) {
    if (config.k < 2) throw ConfigError("M3/M4: K must be >= 2");
    if (config.n < 1) throw ConfigError("M3/M4: N must be >= 1");
}

void copy_row(MixedDataset& data, std::size_t i, const Eigen::MatrixXd& sample, Eigen::Index row, Eigen::Index offset) {
    for (std::size_t j = 0; j < data.cols(); ++j) {
        const double v = sample(row, static_cast<Eigen::Index>(j) + offset);
        if (data.column(j).is_categorical()) {
            data.set_code(i, j, static_cast<int>(v));
        } else {
            data.set_value(i, j, v);
        }
    }
}

}  // namespace

ClgNetwork m3_network(int k, std::mt19937_64& rng) {
    const auto K = static_cast<std::size_t>(k);
    // Node order: C, X1, X2, X3, X4, X5, X6.
    ClgNetwork net;
    net.nodes.push_back(discrete_node("C", k, {}, {std::vector<double>(K, 1.0 / k)}));
    for (const char* name : {"X1", "X2"}) {
        auto perms = shuffled_permutations(kThreeLevelProbs, rng);
        std::vector<std::vector<double>> cpt;
        for (std::size_t c = 0; c < K; ++c) cpt.push_back(perms[c % perms.size()]);
        net.nodes.push_back(discrete_node(name, 3, {0}, std::move(cpt)));
    }
    net.nodes.push_back(gaussian_node("X3", {0, 1}, sequence(0.5, 0.5, 3 * K), draw_sd(rng)));
    net.nodes.push_back(gaussian_node("X4", {0, 2}, sequence(2.0 * k, 1.0, 3 * K), draw_sd(rng)));
    {
        auto perms = shuffled_permutations(kBinaryProbs, rng);
        std::vector<std::vector<double>> cpt;
        for (std::size_t c = 0; c < K; ++c) cpt.push_back(perms[c % perms.size()]);
        net.nodes.push_back(discrete_node("X5", 2, {0}, std::move(cpt)));
    }
    net.nodes.push_back(gaussian_node("X6", {0}, sequence(5.0 * k - 1.0, 1.0, K), draw_sd(rng)));
    net.check();
    return net;
}

std::vector<ClgNetwork> m4_networks(int k, std::mt19937_64& rng) {
    const auto K = static_cast<std::size_t>(k);
    auto perms_x1 = shuffled_permutations(kThreeLevelProbs, rng);
    auto perms_x2 = shuffled_permutations(kThreeLevelProbs, rng);
    auto perms_x5 = shuffled_permutations(kBinaryProbs, rng);
    std::vector<ClgNetwork> nets;
    for (std::size_t c = 0; c < K; ++c) {
        const double kk = static_cast<double>(c + 1);
        // Node order: X1, X2, X3, X4, X5, X6.
        ClgNetwork net;
        net.nodes.push_back(discrete_node("X1", 3, {}, {perms_x1[c % perms_x1.size()]}));
        net.nodes.push_back(discrete_node("X2", 3, {}, {perms_x2[c % perms_x2.size()]}));
        net.nodes.push_back(gaussian_node("X3", {0}, sequence(2.0 * kk, 1.0, 3), draw_sd(rng)));
        net.nodes.push_back(gaussian_node("X4", {1}, sequence(5.0 + 2.0 * kk, 1.0, 3), draw_sd(rng)));
        net.nodes.push_back(discrete_node("X5", 2, {}, {perms_x5[c % perms_x5.size()]}));
        net.nodes.push_back(gaussian_node("X6", {}, {2.0 * kk + 9.0}, draw_sd(rng)));
        net.check();
        nets.push_back(std::move(net));
    }
    return nets;
}

GeneratedData gen_m3(const MbnSimConfig& config) {
    check_bn_config(config);
    std::mt19937_64 rng(config.seed);
    const auto net = m3_network(config.k, rng);
    const Eigen::MatrixXd sample = sample_network(net, config.n, rng);
    GeneratedData out;
    out.data = MixedDataset(bn_schema(), config.n);
    out.truth.k = config.k;
    for (std::size_t i = 0; i < config.n; ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        out.truth.labels.push_back(static_cast<int>(sample(row, 0)));
        copy_row(out.data, i, sample, row, 1);
    }
    return out;
}

GeneratedData gen_m4(const MbnSimConfig& config) {
    check_bn_config(config);
    std::mt19937_64 rng(config.seed);
    const auto nets = m4_networks(config.k, rng);
    std::uniform_int_distribution<int> component(0, config.k - 1);
    GeneratedData out;
    out.data = MixedDataset(bn_schema(), config.n);
    out.truth.k = config.k;
    for (std::size_t i = 0; i < config.n; ++i) {
        const int c = component(rng);
        const Eigen::MatrixXd row = sample_network(nets[static_cast<std::size_t>(c)], 1, rng);
        out.truth.labels.push_back(c);
        copy_row(out.data, i, row, 0, 0);
    }
    return out;
}

}  // namespace mixclust
