#pragma once

#include <random>
#include <string>
#include <vector>

#include "mixclust/core.hpp"

namespace mixclust::testing {

/// Dataset from column-major inputs: continuous columns first, then nominal
/// columns given as level codes over `levels` labels "a", "b", ...
inline MixedDataset make_dataset(const std::vector<std::vector<double>>& continuous,
                                 const std::vector<std::vector<int>>& nominal, int levels = 2) {
    std::vector<ColumnSchema> schema;
    for (std::size_t j = 0; j < continuous.size(); ++j) schema.push_back(ColumnSchema::continuous("v" + std::to_string(j + 1)));
    std::vector<std::string> names;
    for (int l = 0; l < levels; ++l) names.push_back(std::string(1, static_cast<char>('a' + l)));
    for (std::size_t j = 0; j < nominal.size(); ++j) schema.push_back(ColumnSchema::nominal("w" + std::to_string(j + 1), names));
    const std::size_t n = continuous.empty() ? nominal.at(0).size() : continuous[0].size();
    MixedDataset d(schema, n);
    for (std::size_t j = 0; j < continuous.size(); ++j)
        for (std::size_t i = 0; i < n; ++i) d.set_value(i, j, continuous[j][i]);
    for (std::size_t j = 0; j < nominal.size(); ++j)
        for (std::size_t i = 0; i < n; ++i) d.set_code(i, continuous.size() + j, nominal[j][i]);
    return d;
}

/// Two well separated groups: continuous N(0,1) vs N(sep,1) in `dims`
/// dimensions, one binary column agreeing with the group w.p. `agree`.
struct TwoGroups {
    MixedDataset data;
    std::vector<int> truth;
};

inline TwoGroups two_groups(std::size_t n_per, int dims, double sep, double agree, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::bernoulli_distribution keep(agree);
    std::vector<std::vector<double>> cont(static_cast<std::size_t>(dims));
    std::vector<std::vector<int>> cat(1);
    std::vector<int> truth;
    for (int g = 0; g < 2; ++g)
        for (std::size_t i = 0; i < n_per; ++i) {
            for (auto& c : cont) c.push_back(z(rng) + g * sep);
            cat[0].push_back(keep(rng) ? g : 1 - g);
            truth.push_back(g);
        }
    return {make_dataset(cont, cat), truth};
}

}  // namespace mixclust::testing
