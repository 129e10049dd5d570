#include <algorithm>
#include <cmath>
#include <numbers>

#include "mixclust/mbn.hpp"

namespace mixclust {

namespace {

constexpr double kVarianceFloorRatio = 1e-6;
constexpr double kAbsoluteVarianceFloor = 1e-12;
constexpr double kLogFloor = -745.0;

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

double gaussian_logpdf(double x, double mean, double variance) {
    const double z = x - mean;
    return -0.5 * (kLog2Pi + std::log(variance) + z * z / variance);
}

std::vector<std::size_t> mask_members(std::uint64_t mask) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; mask != 0; ++j, mask >>= 1)
        if (mask & 1U) out.push_back(j);
    return out;
}

struct Marginal {
    double mean = 0.0;
    double variance = 1.0;
};

Marginal marginal_gaussian(const MbnTable& table, std::size_t j, double floor) {
    Marginal m;
    const auto n = table.x.rows();
    if (n == 0) return m;
    m.mean = table.x.col(static_cast<Eigen::Index>(j)).mean();
    if (n < 2) return m;
    m.variance = std::max((table.x.col(static_cast<Eigen::Index>(j)).array() - m.mean).square().mean(), floor);
    return m;
}

double variance_floor(const MbnTable& table, std::size_t j) {
    const auto n = table.x.rows();
    if (n < 2) return kAbsoluteVarianceFloor;
    const auto col = table.x.col(static_cast<Eigen::Index>(j));
    const double var = (col.array() - col.mean()).square().sum() / static_cast<double>(n - 1);
    return std::max(kVarianceFloorRatio * var, kAbsoluteVarianceFloor);
}

ClgNode fit_node(const MbnTable& table, std::size_t j, std::uint64_t parent_mask) {
    ClgNode node;
    node.name = table.names[j];
    node.levels = table.levels[j];
    node.parents = mask_members(parent_mask);
    std::vector<std::size_t> disc, cont;
    for (auto p : node.parents) (table.discrete(p) ? disc : cont).push_back(p);
    if (node.discrete() && !cont.empty()) throw ValidationError("CLG restriction: discrete node '" + node.name + "' has a continuous parent");

    std::size_t q = 1;
    for (auto p : disc) q *= static_cast<std::size_t>(table.levels[p]);
    const auto n = static_cast<Eigen::Index>(table.rows());
    std::vector<std::size_t> config(static_cast<std::size_t>(n), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        std::size_t c = 0;
        for (auto p : disc) c = c * static_cast<std::size_t>(table.levels[p]) + static_cast<std::size_t>(table.x(i, static_cast<Eigen::Index>(p)));
        config[static_cast<std::size_t>(i)] = c;
    }

    const auto jj = static_cast<Eigen::Index>(j);
    if (node.discrete()) {
        const auto m = static_cast<std::size_t>(node.levels);
        std::vector<std::vector<double>> counts(q, std::vector<double>(m, 0.0));
        for (Eigen::Index i = 0; i < n; ++i) counts[config[static_cast<std::size_t>(i)]][static_cast<std::size_t>(table.x(i, jj))] += 1.0;
        for (auto& row : counts) {
            double total = 0.0;
            for (double v : row) total += v;
            for (double& v : row) v = (v + 1.0) / (total + static_cast<double>(m));
        }
        node.cpt = std::move(counts);
        return node;
    }

    const double floor = variance_floor(table, j);
    const Marginal fallback = marginal_gaussian(table, j, floor);
    std::vector<std::vector<Eigen::Index>> groups(q);
    for (Eigen::Index i = 0; i < n; ++i) groups[config[static_cast<std::size_t>(i)]].push_back(i);
    const auto c = static_cast<Eigen::Index>(cont.size());
    node.regressions.resize(q);
    for (std::size_t g = 0; g < q; ++g) {
        auto& reg = node.regressions[g];
        reg.coefficients.assign(cont.size(), 0.0);
        const auto& rows = groups[g];
        const auto nq = static_cast<Eigen::Index>(rows.size());
        if (nq < c + 2) {
            reg.intercept = fallback.mean;
            reg.variance = fallback.variance;
            continue;
        }
        Eigen::MatrixXd design(nq, c + 1);
        Eigen::VectorXd y(nq);
        for (Eigen::Index r = 0; r < nq; ++r) {
            design(r, 0) = 1.0;
            for (Eigen::Index t = 0; t < c; ++t) design(r, t + 1) = table.x(rows[static_cast<std::size_t>(r)], static_cast<Eigen::Index>(cont[static_cast<std::size_t>(t)]));
            y(r) = table.x(rows[static_cast<std::size_t>(r)], jj);
        }
        Eigen::VectorXd beta = c == 0 ? Eigen::VectorXd::Constant(1, y.mean()) : Eigen::VectorXd(design.colPivHouseholderQr().solve(y));
        reg.intercept = beta(0);
        for (Eigen::Index t = 0; t < c; ++t) reg.coefficients[static_cast<std::size_t>(t)] = beta(t + 1);
        reg.variance = std::max((y - design * beta).squaredNorm() / static_cast<double>(nq), floor);
    }
    return node;
}

double node_loglik(const ClgNetwork& net, std::size_t j, std::span<const double> row) {
    const auto& node = net.nodes[j];
    const std::size_t cfg = net.configuration(j, row);
    if (node.discrete()) {
        const double p = node.cpt[cfg][static_cast<std::size_t>(row[j])];
        return p > 0.0 ? std::log(p) : kLogFloor;
    }
    const auto& reg = node.regressions[cfg];
    double mean = reg.intercept;
    std::size_t t = 0;
    for (auto p : node.parents)
        if (!net.nodes[p].discrete()) mean += reg.coefficients[t++] * row[p];
    return gaussian_logpdf(row[j], mean, reg.variance);
}

std::vector<double> row_of(const MbnTable& table, std::size_t i) {
    std::vector<double> row(table.nodes());
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = table.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    return row;
}

}  // namespace

MbnTable MbnTable::from(const MixedDataset& dataset) {
    if (dataset.cols() > kMaxNodes) throw ConfigError("MBN supports at most 64 columns");
    MbnTable t;
    const auto n = static_cast<Eigen::Index>(dataset.rows());
    t.x.resize(n, static_cast<Eigen::Index>(dataset.cols()));
    for (std::size_t j = 0; j < dataset.cols(); ++j) {
        const auto& col = dataset.column(j);
        t.names.push_back(col.name);
        t.levels.push_back(col.is_categorical() ? col.level_count() : 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto iu = static_cast<std::size_t>(i);
            t.x(i, static_cast<Eigen::Index>(j)) = col.is_categorical() ? dataset.code(iu, j) : dataset.value(iu, j);
        }
    }
    return t;
}

MbnTable MbnTable::subset(std::span<const std::size_t> rows) const {
    MbnTable t;
    t.levels = levels;
    t.names = names;
    t.x.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) t.x.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(rows[r]));
    return t;
}

bool clg_allowed(const std::vector<int>& levels, std::size_t from, std::size_t to) {
    return !(levels[from] == 0 && levels[to] > 0);
}

bool clg_respected(const Dag& dag, const std::vector<int>& levels) {
    for (auto [from, to] : dag.edges())
        if (!clg_allowed(levels, from, to)) return false;
    return true;
}

Dag ClgNetwork::dag() const {
    Dag d(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j)
        for (auto p : nodes[j].parents) d.add_edge(p, j);
    return d;
}

std::vector<std::size_t> ClgNetwork::discrete_parents(std::size_t j) const {
    std::vector<std::size_t> out;
    for (auto p : nodes[j].parents)
        if (nodes[p].discrete()) out.push_back(p);
    return out;
}

std::vector<std::size_t> ClgNetwork::continuous_parents(std::size_t j) const {
    std::vector<std::size_t> out;
    for (auto p : nodes[j].parents)
        if (!nodes[p].discrete()) out.push_back(p);
    return out;
}

std::size_t ClgNetwork::configuration_count(std::size_t j) const {
    std::size_t q = 1;
    for (auto p : nodes[j].parents)
        if (nodes[p].discrete()) q *= static_cast<std::size_t>(nodes[p].levels);
    return q;
}

std::size_t ClgNetwork::configuration(std::size_t j, std::span<const double> row) const {
    std::size_t c = 0;
    for (auto p : nodes[j].parents)
        if (nodes[p].discrete()) c = c * static_cast<std::size_t>(nodes[p].levels) + static_cast<std::size_t>(row[p]);
    return c;
}

std::vector<std::size_t> ClgNetwork::topological_order() const {
    const std::size_t p = nodes.size();
    std::vector<int> pending(p, 0);
    for (std::size_t j = 0; j < p; ++j) pending[j] = static_cast<int>(nodes[j].parents.size());
    std::vector<std::size_t> order;
    std::vector<bool> done(p, false);
    while (order.size() < p) {
        std::size_t next = p;
        for (std::size_t j = 0; j < p && next == p; ++j)
            if (!done[j] && pending[j] == 0) next = j;
        if (next == p) throw ValidationError("network has a directed cycle");
        done[next] = true;
        order.push_back(next);
        for (std::size_t j = 0; j < p; ++j)
            for (auto q : nodes[j].parents)
                if (q == next) --pending[j];
    }
    return order;
}

void ClgNetwork::check() const {
    topological_order();
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        const auto& node = nodes[j];
        for (auto p : node.parents) {
            if (p >= nodes.size() || p == j) throw ValidationError("node '" + node.name + "' has an invalid parent");
            if (node.discrete() && !nodes[p].discrete())
                throw ValidationError("CLG restriction: discrete node '" + node.name + "' has a continuous parent");
        }
        const std::size_t q = configuration_count(j);
        if (node.discrete()) {
            if (node.cpt.size() != q) throw ValidationError("node '" + node.name + "': CPT has the wrong number of rows");
            for (const auto& row : node.cpt) {
                if (row.size() != static_cast<std::size_t>(node.levels)) throw ValidationError("node '" + node.name + "': CPT row has the wrong length");
                double total = 0.0;
                for (double v : row) {
                    if (!(v >= 0.0)) throw ValidationError("node '" + node.name + "': negative probability");
                    total += v;
                }
                if (std::abs(total - 1.0) > 1e-9) throw ValidationError("node '" + node.name + "': CPT row does not sum to 1");
            }
        } else {
            if (node.regressions.size() != q) throw ValidationError("node '" + node.name + "': wrong number of regressions");
            const auto c = continuous_parents(j).size();
            for (const auto& reg : node.regressions) {
                if (reg.coefficients.size() != c) throw ValidationError("node '" + node.name + "': wrong number of coefficients");
                if (!(reg.variance > 0.0)) throw ValidationError("node '" + node.name + "': variance must be positive");
            }
        }
    }
}

ClgNetwork fit_network(const Dag& dag, const MbnTable& table) {
    if (dag.size() != table.nodes()) throw ValidationError("structure and table disagree on the number of nodes");
    if (!dag.acyclic()) throw ValidationError("structure has a directed cycle");
    ClgNetwork net;
    for (std::size_t j = 0; j < table.nodes(); ++j) net.nodes.push_back(fit_node(table, j, dag.parents[j]));
    return net;
}

double network_loglik(const ClgNetwork& network, std::span<const double> row) {
    if (row.size() != network.nodes.size()) throw ValidationError("row does not match the network's nodes");
    double total = 0.0;
    for (std::size_t j = 0; j < network.nodes.size(); ++j) {
        const auto& node = network.nodes[j];
        if (node.discrete()) {
            const double v = row[j];
            if (v < 0.0 || v >= node.levels || v != std::floor(v))
                throw ValidationError("node '" + node.name + "': unseen level code");
        }
        total += node_loglik(network, j, row);
    }
    return total;
}

double network_loglik(const ClgNetwork& network, const MbnTable& table, std::size_t row) {
    auto values = row_of(table, row);
    return network_loglik(network, values);
}

Eigen::VectorXd network_loglik_rows(const ClgNetwork& network, const MbnTable& table) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(table.rows()));
    std::vector<double> row(table.nodes());
    for (std::size_t i = 0; i < table.rows(); ++i) {
        for (std::size_t j = 0; j < row.size(); ++j) row[j] = table.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        double s = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j) s += node_loglik(network, j, row);
        out(static_cast<Eigen::Index>(i)) = s;
    }
    return out;
}

FamilyScore family_score(const MbnTable& table, std::size_t node, std::uint64_t parents) {
    ClgNetwork net;
    net.nodes.resize(table.nodes());
    for (std::size_t j = 0; j < table.nodes(); ++j) {
        net.nodes[j].name = table.names[j];
        net.nodes[j].levels = table.levels[j];
    }
    net.nodes[node] = fit_node(table, node, parents);

    FamilyScore s;
    std::vector<double> row(table.nodes());
    for (std::size_t i = 0; i < table.rows(); ++i) {
        for (std::size_t j = 0; j < row.size(); ++j) row[j] = table.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        s.loglik += node_loglik(net, node, row);
    }
    const double q = static_cast<double>(net.configuration_count(node));
    if (table.discrete(node)) {
        s.parameters = q * (table.levels[node] - 1);
    } else {
        s.parameters = q * (static_cast<double>(net.continuous_parents(node).size()) + 2.0);
    }
    s.bic = s.loglik - 0.5 * s.parameters * std::log(static_cast<double>(std::max<std::size_t>(table.rows(), 1)));
    return s;
}

double bic_score(const Dag& dag, const MbnTable& table) {
    if (table.rows() < 2) throw DegenerateDataError("BIC needs at least 2 rows");
    if (dag.size() != table.nodes()) throw ValidationError("structure and table disagree on the number of nodes");
    double total = 0.0;
    for (std::size_t j = 0; j < dag.size(); ++j) total += family_score(table, j, dag.parents[j]).bic;
    return total;
}

Eigen::MatrixXd sample_network(const ClgNetwork& network, std::size_t n, std::mt19937_64& rng) {
    network.check();
    const auto order = network.topological_order();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(network.nodes.size()));
    std::vector<double> row(network.nodes.size(), 0.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto j : order) {
            const auto& node = network.nodes[j];
            const std::size_t cfg = network.configuration(j, row);
            if (node.discrete()) {
                const auto& probs = node.cpt[cfg];
                const double u = unit(rng);
                double acc = 0.0;
                std::size_t level = probs.size() - 1;
                for (std::size_t l = 0; l < probs.size(); ++l) {
                    acc += probs[l];
                    if (u < acc) {
                        level = l;
                        break;
                    }
                }
                row[j] = static_cast<double>(level);
            } else {
                const auto& reg = node.regressions[cfg];
                double mean = reg.intercept;
                std::size_t t = 0;
                for (auto p : node.parents)
                    if (!network.nodes[p].discrete()) mean += reg.coefficients[t++] * row[p];
                row[j] = mean + std::sqrt(reg.variance) * normal(rng);
            }
        }
        for (std::size_t j = 0; j < row.size(); ++j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
    }
    return out;
}

nlohmann::ordered_json network_to_json(const ClgNetwork& network) {
    nlohmann::ordered_json doc;
    doc["nodes"] = nlohmann::ordered_json::array();
    for (std::size_t j = 0; j < network.nodes.size(); ++j) {
        const auto& node = network.nodes[j];
        nlohmann::ordered_json n;
        n["name"] = node.name;
        n["type"] = node.discrete() ? "discrete" : "continuous";
        if (node.discrete()) n["levels"] = node.levels;
        n["parents"] = nlohmann::ordered_json::array();
        for (auto p : node.parents) n["parents"].push_back(network.nodes[p].name);
        if (node.discrete()) {
            n["cpt"] = node.cpt;
        } else {
            n["regressions"] = nlohmann::ordered_json::array();
            for (const auto& reg : node.regressions)
                n["regressions"].push_back({{"intercept", reg.intercept}, {"coefficients", reg.coefficients}, {"variance", reg.variance}});
        }
        doc["nodes"].push_back(std::move(n));
    }
    doc["edges"] = nlohmann::ordered_json::array();
    for (auto [from, to] : network.dag().edges()) doc["edges"].push_back({network.nodes[from].name, network.nodes[to].name});
    return doc;
}

nlohmann::ordered_json model_to_json(const MbnModel& model) {
    nlohmann::ordered_json doc;
    doc["mixing"] = model.mixing;
    doc["components"] = nlohmann::ordered_json::array();
    for (const auto& net : model.components) doc["components"].push_back(network_to_json(net));
    return doc;
}

}  // namespace mixclust
