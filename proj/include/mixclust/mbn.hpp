#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mixclust/core.hpp"

namespace mixclust {

/// Dataset viewed as network nodes: an n x p matrix holding continuous values
/// and, for categorical columns, level codes. levels[j] == 0 marks a
/// continuous node; nominal and ordinal columns are both discrete nodes.
struct MbnTable {
    Eigen::MatrixXd x;
    std::vector<int> levels;
    std::vector<std::string> names;

    static MbnTable from(const MixedDataset& dataset);
    MbnTable subset(std::span<const std::size_t> rows) const;
    std::size_t rows() const { return static_cast<std::size_t>(x.rows()); }
    std::size_t nodes() const { return levels.size(); }
    bool discrete(std::size_t j) const { return levels[j] > 0; }
};

inline constexpr std::size_t kMaxNodes = 64;

/// Directed graph stored as one parent bitmask per node.
struct Dag {
    std::vector<std::uint64_t> parents;

    Dag() = default;
    explicit Dag(std::size_t nodes) : parents(nodes, 0) {}

    std::size_t size() const { return parents.size(); }
    bool has_edge(std::size_t from, std::size_t to) const { return (parents[to] >> from) & 1U; }
    void add_edge(std::size_t from, std::size_t to) { parents[to] |= std::uint64_t{1} << from; }
    void remove_edge(std::size_t from, std::size_t to) { parents[to] &= ~(std::uint64_t{1} << from); }
    std::size_t edge_count() const;
    std::vector<std::pair<std::size_t, std::size_t>> edges() const;  // sorted by (from, to)
    /// True when `to` can be reached from `from` along directed edges.
    bool reaches(std::size_t from, std::size_t to) const;
    bool acyclic() const;

    bool operator==(const Dag&) const = default;
};

/// Discrete nodes may only have discrete parents.
bool clg_allowed(const std::vector<int>& levels, std::size_t from, std::size_t to);
bool clg_respected(const Dag& dag, const std::vector<int>& levels);

struct ClgRegression {
    double intercept = 0.0;
    std::vector<double> coefficients;  // one per continuous parent, in node order
    double variance = 1.0;
};

/// One node of a conditional-linear-Gaussian network. Parent configurations
/// are indexed mixed-radix over the discrete parents in node order, the first
/// parent being the most significant digit.
struct ClgNode {
    std::string name;
    int levels = 0;  // 0 for continuous
    std::vector<std::size_t> parents;
    std::vector<std::vector<double>> cpt;    // discrete: [configuration][level]
    std::vector<ClgRegression> regressions;  // continuous: [configuration]

    bool discrete() const { return levels > 0; }
};

struct ClgNetwork {
    std::vector<ClgNode> nodes;

    Dag dag() const;
    std::vector<std::size_t> discrete_parents(std::size_t j) const;
    std::vector<std::size_t> continuous_parents(std::size_t j) const;
    std::size_t configuration_count(std::size_t j) const;
    std::size_t configuration(std::size_t j, std::span<const double> row) const;
    std::vector<std::size_t> topological_order() const;
    /// Throws ValidationError on cycles, CLG violations, bad CPT rows or variances.
    void check() const;
};

/// Network with the given structure and maximum-likelihood parameters: CPTs
/// with add-one smoothing; per configuration least squares with the residual
/// variance for continuous nodes, falling back to the node's marginal Gaussian
/// when a configuration has fewer than (#continuous parents + 2) rows.
ClgNetwork fit_network(const Dag& dag, const MbnTable& table);

/// Sum over nodes of the local log-density of one row (codes for discrete nodes).
double network_loglik(const ClgNetwork& network, std::span<const double> row);
double network_loglik(const ClgNetwork& network, const MbnTable& table, std::size_t row);
Eigen::VectorXd network_loglik_rows(const ClgNetwork& network, const MbnTable& table);

struct FamilyScore {
    double loglik = 0.0;
    double parameters = 0.0;
    double bic = 0.0;
};

FamilyScore family_score(const MbnTable& table, std::size_t node, std::uint64_t parents);
/// Sum of family BIC scores: loglik - (#free parameters / 2) log n.
double bic_score(const Dag& dag, const MbnTable& table);

/// Draws n rows from the network in topological order.
Eigen::MatrixXd sample_network(const ClgNetwork& network, std::size_t n, std::mt19937_64& rng);

struct StructureConfig {
    int tabu_size = 10;
    int max_moves = 500;
};

struct StructureSearch {
    ClgNetwork network;
    Dag dag;
    double score = 0.0;
    std::vector<Dag> visited;  // every structure moved to, starting with the empty graph
};

/// Tabu search over single-edge additions, deletions and reversals from the
/// empty graph, scored by BIC. Returns the best structure visited.
StructureSearch learn_structure(const MbnTable& table, const StructureConfig& config = {});
ClgNetwork learn_structure(const MixedDataset& dataset, const StructureConfig& config = {});

struct MbnConfig {
    int k = 2;
    int n_init = 10;
    int max_cem_iter = 200;
    StructureConfig structure;
    bool relearn_structure = true;  // false freezes each structure after the first M-step
    /// Keep a newly learned network only when it does not lower the cluster's
    /// log-likelihood compared with the previous parameters.
    bool monotone_guard = true;
    std::uint64_t seed = 0;
};

struct MbnModel {
    std::vector<ClgNetwork> components;
    std::vector<double> mixing;
};

struct MbnResult {
    FitResult fit;
    MbnModel model;
};

/// Smallest cluster size kept during CEM: max(10, 2 * #columns).
std::size_t mbn_min_cluster_size(std::size_t columns);

/// Classification EM over a mixture of CLG networks. The trace holds the
/// classification log-likelihood after every C-step.
MbnResult mbn_cem_fit_model(const MixedDataset& dataset, const MbnConfig& config);
/// CEM from the given partition instead of random starts (n_init is ignored).
MbnResult mbn_cem_refine(const MixedDataset& dataset, const Partition& start, const MbnConfig& config);
FitResult mbn_cem_fit(const MixedDataset& dataset, const MbnConfig& config);

nlohmann::ordered_json network_to_json(const ClgNetwork& network);
nlohmann::ordered_json model_to_json(const MbnModel& model);

}  // namespace mixclust
