#include "mixclust/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace mixclust {

namespace {

std::vector<int> compact(const std::vector<int>& labels) {
    std::map<int, int> ids;
    for (int l : labels) ids.emplace(l, 0);
    int next = 0;
    for (auto& [label, id] : ids) id = next++;
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) out[i] = ids[labels[i]];
    return out;
}

void check_pair(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size())
        throw ValidationError("partitions have different lengths (" + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()) + ")");
    if (a.size() < 2) throw DegenerateDataError("partition comparison needs at least 2 rows");
}

double choose2(std::int64_t x) { return 0.5 * static_cast<double>(x) * static_cast<double>(x - 1); }

// Same clustering up to relabelling: one non-zero cell per row and per column.
bool is_relabeling(const ContingencyTable& t) {
    for (const auto& row : t.counts)
        if (std::count_if(row.begin(), row.end(), [](std::int64_t c) { return c > 0; }) != 1) return false;
    for (std::size_t j = 0; j < t.col_sums.size(); ++j) {
        int nz = 0;
        for (const auto& row : t.counts) nz += row[j] > 0;
        if (nz != 1) return false;
    }
    return true;
}

}  // namespace

ContingencyTable contingency(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size())
        throw ValidationError("partitions have different lengths (" + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()) + ")");
    auto ca = compact(a);
    auto cb = compact(b);
    std::size_t ka = ca.empty() ? 0 : static_cast<std::size_t>(*std::max_element(ca.begin(), ca.end()) + 1);
    std::size_t kb = cb.empty() ? 0 : static_cast<std::size_t>(*std::max_element(cb.begin(), cb.end()) + 1);
    ContingencyTable t;
    t.counts.assign(ka, std::vector<std::int64_t>(kb, 0));
    t.row_sums.assign(ka, 0);
    t.col_sums.assign(kb, 0);
    for (std::size_t i = 0; i < ca.size(); ++i) {
        auto r = static_cast<std::size_t>(ca[i]);
        auto c = static_cast<std::size_t>(cb[i]);
        ++t.counts[r][c];
        ++t.row_sums[r];
        ++t.col_sums[c];
    }
    t.total = static_cast<std::int64_t>(ca.size());
    return t;
}

ContingencyTable contingency(const Partition& a, const Partition& b) { return contingency(a.labels, b.labels); }

double ari(const std::vector<int>& a, const std::vector<int>& b) {
    check_pair(a, b);
    auto t = contingency(a, b);
    double index = 0.0;
    for (const auto& row : t.counts)
        for (auto c : row) index += choose2(c);
    double sum_a = 0.0, sum_b = 0.0;
    for (auto s : t.row_sums) sum_a += choose2(s);
    for (auto s : t.col_sums) sum_b += choose2(s);
    double expected = sum_a * sum_b / choose2(t.total);
    double max_index = 0.5 * (sum_a + sum_b);
    if (max_index == expected) return is_relabeling(t) ? 1.0 : 0.0;
    return (index - expected) / (max_index - expected);
}

double ari(const Partition& a, const Partition& b) { return ari(a.labels, b.labels); }

double entropy(const std::vector<std::int64_t>& sums, std::int64_t total) {
    double h = 0.0;
    for (auto s : sums) {
        if (s == 0) continue;
        double p = static_cast<double>(s) / static_cast<double>(total);
        h -= p * std::log(p);
    }
    return h;
}

double mutual_information(const ContingencyTable& t) {
    const double n = static_cast<double>(t.total);
    double mi = 0.0;
    for (std::size_t i = 0; i < t.counts.size(); ++i) {
        for (std::size_t j = 0; j < t.col_sums.size(); ++j) {
            auto c = t.counts[i][j];
            if (c == 0) continue;
            double nij = static_cast<double>(c);
            mi += nij / n * std::log(n * nij / (static_cast<double>(t.row_sums[i]) * static_cast<double>(t.col_sums[j])));
        }
    }
    return std::max(mi, 0.0);
}

double expected_mutual_information(const ContingencyTable& t) {
    const std::int64_t n = t.total;
    const double nd = static_cast<double>(n);
    const double lg_n = std::lgamma(nd + 1.0);
    double emi = 0.0;
    for (auto ai : t.row_sums) {
        for (auto bj : t.col_sums) {
            const double a = static_cast<double>(ai), b = static_cast<double>(bj);
            // log of the n_ij-independent part of the hypergeometric probability
            const double lg_fixed = std::lgamma(a + 1.0) + std::lgamma(b + 1.0) + std::lgamma(nd - a + 1.0) +
                                    std::lgamma(nd - b + 1.0) - lg_n;
            const std::int64_t lo = std::max<std::int64_t>(1, ai + bj - n);
            const std::int64_t hi = std::min(ai, bj);
            for (std::int64_t nij = lo; nij <= hi; ++nij) {
                const double x = static_cast<double>(nij);
                const double log_p = lg_fixed - std::lgamma(x + 1.0) - std::lgamma(a - x + 1.0) -
                                     std::lgamma(b - x + 1.0) - std::lgamma(nd - a - b + x + 1.0);
                emi += x / nd * std::log(nd * x / (a * b)) * std::exp(log_p);
            }
        }
    }
    return emi;
}

double ami(const std::vector<int>& a, const std::vector<int>& b, AmiNormalizer norm) {
    check_pair(a, b);
    auto t = contingency(a, b);
    const double mi = mutual_information(t);
    const double emi = expected_mutual_information(t);
    const double ha = entropy(t.row_sums, t.total);
    const double hb = entropy(t.col_sums, t.total);
    double normalizer = 0.0;
    switch (norm) {
        case AmiNormalizer::arithmetic: normalizer = 0.5 * (ha + hb); break;
        case AmiNormalizer::geometric: normalizer = std::sqrt(ha * hb); break;
        case AmiNormalizer::max: normalizer = std::max(ha, hb); break;
        case AmiNormalizer::min: normalizer = std::min(ha, hb); break;
    }
    const double denom = normalizer - emi;
    // E[MI] is a long floating-point sum; treat a round-off sized gap as zero.
    if (denom <= 1e-12 * std::max(1.0, normalizer) || (ha == 0.0 && hb == 0.0)) return is_relabeling(t) ? 1.0 : 0.0;
    return (mi - emi) / denom;
}

double ami(const Partition& a, const Partition& b, AmiNormalizer norm) { return ami(a.labels, b.labels, norm); }

}  // namespace mixclust
