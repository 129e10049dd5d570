#include <bit>
#include <deque>
#include <limits>
#include <unordered_map>

#include "mixclust/mbn.hpp"

namespace mixclust {

std::size_t Dag::edge_count() const {
    std::size_t total = 0;
    for (auto mask : parents) total += static_cast<std::size_t>(std::popcount(mask));
    return total;
}

std::vector<std::pair<std::size_t, std::size_t>> Dag::edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t from = 0; from < size(); ++from)
        for (std::size_t to = 0; to < size(); ++to)
            if (has_edge(from, to)) out.emplace_back(from, to);
    return out;
}

bool Dag::reaches(std::size_t from, std::size_t to) const {
    // Walk ancestors of `to`; `from` reaches `to` iff it is one of them.
    std::uint64_t seen = 0;
    std::vector<std::size_t> stack{to};
    while (!stack.empty()) {
        auto v = stack.back();
        stack.pop_back();
        std::uint64_t fresh = parents[v] & ~seen;
        seen |= fresh;
        for (std::size_t p = 0; fresh != 0; ++p, fresh >>= 1) {
            if (!(fresh & 1U)) continue;
            if (p == from) return true;
            stack.push_back(p);
        }
    }
    return false;
}

bool Dag::acyclic() const {
    for (std::size_t v = 0; v < size(); ++v)
        if (reaches(v, v)) return false;
    return true;
}

namespace {

enum class MoveKind { add, remove, reverse };

struct Move {
    MoveKind kind = MoveKind::add;
    std::size_t from = 0;
    std::size_t to = 0;
    double delta = -std::numeric_limits<double>::infinity();
};

class FamilyCache {
public:
    explicit FamilyCache(const MbnTable& table) : table_(table) {}

    double operator()(std::size_t node, std::uint64_t parents) {
        const auto key = std::make_pair(node, parents);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        const double s = family_score(table_, node, parents).bic;
        cache_.emplace(key, s);
        return s;
    }

private:
    struct KeyHash {
        std::size_t operator()(const std::pair<std::size_t, std::uint64_t>& k) const {
            return std::hash<std::uint64_t>{}(k.second * 0x9E3779B97F4A7C15ULL + k.first);
        }
    };
    const MbnTable& table_;
    std::unordered_map<std::pair<std::size_t, std::uint64_t>, double, KeyHash> cache_;
};

Dag apply(const Dag& dag, const Move& m) {
    Dag next = dag;
    switch (m.kind) {
        case MoveKind::add: next.add_edge(m.from, m.to); break;
        case MoveKind::remove: next.remove_edge(m.from, m.to); break;
        case MoveKind::reverse:
            next.remove_edge(m.from, m.to);
            next.add_edge(m.to, m.from);
            break;
    }
    return next;
}

}  // namespace

StructureSearch learn_structure(const MbnTable& table, const StructureConfig& config) {
    if (config.tabu_size < 1 || config.max_moves < 0) throw ConfigError("structure search: tabu_size must be >= 1 and max_moves >= 0");
    if (table.rows() < 2) throw DegenerateDataError("structure search needs at least 2 rows");
    const std::size_t p = table.nodes();
    if (p > kMaxNodes) throw ConfigError("structure search supports at most 64 nodes");

    FamilyCache family(table);
    Dag current(p);
    std::vector<double> fam(p);
    double score = 0.0;
    for (std::size_t j = 0; j < p; ++j) score += (fam[j] = family(j, 0));

    StructureSearch out;
    out.dag = current;
    out.score = score;
    out.visited.push_back(current);
    std::deque<Dag> tabu{current};
    int stale = 0;

    for (int step = 0; step < config.max_moves; ++step) {
        Move best;
        bool found = false;
        auto consider = [&](const Move& m) {
            if (found && !(m.delta > best.delta)) return;
            const Dag next = apply(current, m);
            for (const auto& t : tabu)
                if (t == next) return;
            best = m;
            found = true;
        };
        // Candidates are scanned in (from, to) order, so equal deltas keep the
        // lexicographically smallest pair.
        for (std::size_t from = 0; from < p; ++from) {
            for (std::size_t to = 0; to < p; ++to) {
                if (from == to) continue;
                const std::uint64_t bit = std::uint64_t{1} << from;
                if (current.has_edge(from, to)) {
                    Move del{MoveKind::remove, from, to, family(to, current.parents[to] & ~bit) - fam[to]};
                    consider(del);
                    if (clg_allowed(table.levels, to, from)) {
                        Dag without = current;
                        without.remove_edge(from, to);
                        if (!without.reaches(from, to)) {
                            const std::uint64_t back = std::uint64_t{1} << to;
                            Move rev{MoveKind::reverse, from, to,
                                     del.delta + family(from, current.parents[from] | back) - fam[from]};
                            consider(rev);
                        }
                    }
                } else if (!current.has_edge(to, from) && clg_allowed(table.levels, from, to) && !current.reaches(to, from)) {
                    consider(Move{MoveKind::add, from, to, family(to, current.parents[to] | bit) - fam[to]});
                }
            }
        }
        if (!found) break;

        current = apply(current, best);
        fam[best.to] = family(best.to, current.parents[best.to]);
        fam[best.from] = family(best.from, current.parents[best.from]);
        score = 0.0;
        for (double f : fam) score += f;
        out.visited.push_back(current);
        tabu.push_back(current);
        while (tabu.size() > static_cast<std::size_t>(config.tabu_size)) tabu.pop_front();

        if (score > out.score) {
            out.score = score;
            out.dag = current;
            stale = 0;
        } else if (++stale >= config.tabu_size) {
            break;
        }
    }
    out.network = fit_network(out.dag, table);
    return out;
}

ClgNetwork learn_structure(const MixedDataset& dataset, const StructureConfig& config) {
    require_valid(dataset);
    return learn_structure(MbnTable::from(dataset), config).network;
}

}  // namespace mixclust
