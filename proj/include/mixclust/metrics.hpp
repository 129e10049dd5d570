#pragma once

#include <cstdint>
#include <vector>

#include "mixclust/core.hpp"

namespace mixclust {

struct ContingencyTable {
    std::vector<std::vector<std::int64_t>> counts;  // rows: labels of a, columns: labels of b
    std::vector<std::int64_t> row_sums;
    std::vector<std::int64_t> col_sums;
    std::int64_t total = 0;
};

/// Label values are compacted: only labels that occur get a row/column.
ContingencyTable contingency(const Partition& a, const Partition& b);
ContingencyTable contingency(const std::vector<int>& a, const std::vector<int>& b);

/// Hubert-Arabie adjusted Rand index.
double ari(const Partition& a, const Partition& b);
double ari(const std::vector<int>& a, const std::vector<int>& b);

enum class AmiNormalizer { arithmetic, geometric, max, min };

double entropy(const std::vector<std::int64_t>& sums, std::int64_t total);
double mutual_information(const ContingencyTable& table);
/// Exact expectation of the mutual information under the hypergeometric
/// (permutation) model with the table's margins fixed.
double expected_mutual_information(const ContingencyTable& table);

/// Adjusted mutual information (Vinh, Epps and Bailey), natural log.
double ami(const Partition& a, const Partition& b, AmiNormalizer norm = AmiNormalizer::arithmetic);
double ami(const std::vector<int>& a, const std::vector<int>& b,
           AmiNormalizer norm = AmiNormalizer::arithmetic);

}  // namespace mixclust
