#include "mixclust/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace mixclust {

std::string_view to_string(ColumnKind kind) {
    switch (kind) {
        case ColumnKind::continuous: return "continuous";
        case ColumnKind::nominal: return "nominal";
        case ColumnKind::ordinal: return "ordinal";
    }
    return "continuous";
}

ColumnKind parse_column_kind(std::string_view text) {
    if (text == "continuous") return ColumnKind::continuous;
    if (text == "nominal") return ColumnKind::nominal;
    if (text == "ordinal") return ColumnKind::ordinal;
    throw ValidationError("unknown column kind '" + std::string(text) + "'");
}

ColumnSchema ColumnSchema::continuous(std::string name) {
    return {std::move(name), ColumnKind::continuous, {}};
}

ColumnSchema ColumnSchema::nominal(std::string name, std::vector<std::string> levels) {
    return {std::move(name), ColumnKind::nominal, std::move(levels)};
}

ColumnSchema ColumnSchema::ordinal(std::string name, std::vector<std::string> levels) {
    return {std::move(name), ColumnKind::ordinal, std::move(levels)};
}

MixedDataset::MixedDataset(std::vector<ColumnSchema> schema, std::size_t rows)
    : schema_(std::move(schema)), rows_(rows), values_(schema_.size()), codes_(schema_.size()) {
    for (std::size_t j = 0; j < schema_.size(); ++j) {
        if (schema_[j].is_categorical())
            codes_[j].assign(rows, 0);
        else
            values_[j].assign(rows, 0.0);
    }
}

void MixedDataset::set_label(std::size_t i, std::size_t j, std::string_view label) {
    const auto& levels = schema_.at(j).levels;
    auto it = std::find(levels.begin(), levels.end(), label);
    codes_[j][i] = it == levels.end() ? kUnknownLevel : static_cast<int>(it - levels.begin());
}

std::string MixedDataset::cell_text(std::size_t i, std::size_t j) const {
    const auto& col = schema_.at(j);
    if (!col.is_categorical()) {
        std::ostringstream os;
        os.precision(17);
        os << values_[j][i];
        return os.str();
    }
    int c = codes_[j][i];
    if (c < 0 || c >= col.level_count()) return "?";
    return col.levels[static_cast<std::size_t>(c)];
}

namespace {

std::vector<std::size_t> columns_where(const std::vector<ColumnSchema>& schema, auto pred) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < schema.size(); ++j)
        if (pred(schema[j])) out.push_back(j);
    return out;
}

}  // namespace

std::vector<std::size_t> MixedDataset::continuous_columns() const {
    return columns_where(schema_, [](const ColumnSchema& c) { return !c.is_categorical(); });
}

std::vector<std::size_t> MixedDataset::categorical_columns() const {
    return columns_where(schema_, [](const ColumnSchema& c) { return c.is_categorical(); });
}

std::vector<std::size_t> MixedDataset::nominal_columns() const {
    return columns_where(schema_, [](const ColumnSchema& c) { return c.kind == ColumnKind::nominal; });
}

std::vector<std::size_t> MixedDataset::ordinal_columns() const {
    return columns_where(schema_, [](const ColumnSchema& c) { return c.kind == ColumnKind::ordinal; });
}

MixedDataset MixedDataset::subset(std::span<const std::size_t> row_ids) const {
    MixedDataset out(schema_, row_ids.size());
    for (std::size_t j = 0; j < schema_.size(); ++j) {
        for (std::size_t r = 0; r < row_ids.size(); ++r) {
            if (schema_[j].is_categorical())
                out.codes_[j][r] = codes_[j][row_ids[r]];
            else
                out.values_[j][r] = values_[j][row_ids[r]];
        }
    }
    return out;
}

std::vector<Violation> validate(const MixedDataset& dataset) {
    std::vector<Violation> out;
    if (dataset.rows() == 0) out.push_back({Violation::kNoRow, "", "dataset has no rows"});

    std::set<std::string> names;
    for (const auto& col : dataset.schema()) {
        if (!names.insert(col.name).second)
            out.push_back({Violation::kNoRow, col.name, "duplicate column name"});
        if (col.is_categorical()) {
            if (col.levels.size() < 2)
                out.push_back({Violation::kNoRow, col.name, "categorical column declares fewer than 2 levels"});
            std::set<std::string> seen(col.levels.begin(), col.levels.end());
            if (seen.size() != col.levels.size())
                out.push_back({Violation::kNoRow, col.name, "duplicate level label"});
        } else if (!col.levels.empty()) {
            out.push_back({Violation::kNoRow, col.name, "continuous column declares levels"});
        }
    }

    for (std::size_t j = 0; j < dataset.cols(); ++j) {
        const auto& col = dataset.column(j);
        for (std::size_t i = 0; i < dataset.rows(); ++i) {
            if (col.is_categorical()) {
                int c = dataset.code(i, j);
                if (c < 0 || c >= col.level_count())
                    out.push_back({i, col.name, "level not declared for column"});
            } else if (!std::isfinite(dataset.value(i, j))) {
                out.push_back({i, col.name, "non-finite"});
            }
        }
    }
    return out;
}

void require_valid(const MixedDataset& dataset) {
    auto violations = validate(dataset);
    if (violations.empty()) return;
    std::ostringstream os;
    os << violations.size() << " validation error(s)";
    for (std::size_t v = 0; v < std::min<std::size_t>(violations.size(), 5); ++v) {
        const auto& x = violations[v];
        os << "; ";
        if (x.row != Violation::kNoRow) os << "row " << x.row << " ";
        if (!x.column.empty()) os << "column '" << x.column << "' ";
        os << x.reason;
    }
    throw ValidationError(os.str());
}

Partition Partition::from_soft(Eigen::MatrixXd memberships) {
    Partition p;
    p.k = static_cast<int>(memberships.cols());
    p.labels.resize(static_cast<std::size_t>(memberships.rows()));
    for (Eigen::Index i = 0; i < memberships.rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index k = 1; k < memberships.cols(); ++k)
            if (memberships(i, k) > memberships(i, best)) best = k;
        p.labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    p.soft = std::move(memberships);
    return p;
}

std::vector<std::size_t> Partition::cluster_sizes() const {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
    return sizes;
}

OneHotMatrix one_hot(const MixedDataset& dataset) {
    require_valid(dataset);
    OneHotMatrix out;
    for (std::size_t j = 0; j < dataset.cols(); ++j) {
        const auto& col = dataset.column(j);
        if (col.is_categorical()) {
            for (int l = 0; l < col.level_count(); ++l) out.columns.push_back({j, l});
        } else {
            out.columns.push_back({j, -1});
        }
    }
    const auto n = static_cast<Eigen::Index>(dataset.rows());
    out.matrix = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(out.columns.size()));
    for (std::size_t c = 0; c < out.columns.size(); ++c) {
        const auto& oc = out.columns[c];
        for (Eigen::Index i = 0; i < n; ++i) {
            auto row = static_cast<std::size_t>(i);
            out.matrix(i, static_cast<Eigen::Index>(c)) =
                oc.level < 0 ? dataset.value(row, oc.source)
                             : (dataset.code(row, oc.source) == oc.level ? 1.0 : 0.0);
        }
    }
    return out;
}

std::vector<ClusterPrototype> cluster_prototypes(const MixedDataset& dataset, const Partition& partition) {
    const auto k = static_cast<std::size_t>(partition.k);
    const auto cont = dataset.continuous_columns();
    const auto cat = dataset.categorical_columns();
    std::vector<ClusterPrototype> out(k);
    auto sizes = partition.cluster_sizes();
    for (std::size_t c = 0; c < k; ++c) {
        out[c].continuous_center.assign(cont.size(), 0.0);
        out[c].categorical_center.assign(cat.size(), 0);
        out[c].level_freqs.resize(cat.size());
        for (std::size_t s = 0; s < cat.size(); ++s)
            out[c].level_freqs[s].assign(static_cast<std::size_t>(dataset.column(cat[s]).level_count()), 0.0);
    }
    for (std::size_t i = 0; i < dataset.rows(); ++i) {
        auto& p = out[static_cast<std::size_t>(partition.labels[i])];
        for (std::size_t r = 0; r < cont.size(); ++r) p.continuous_center[r] += dataset.value(i, cont[r]);
        for (std::size_t s = 0; s < cat.size(); ++s) p.level_freqs[s][static_cast<std::size_t>(dataset.code(i, cat[s]))] += 1.0;
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (sizes[c] == 0) continue;
        const double m = static_cast<double>(sizes[c]);
        for (double& v : out[c].continuous_center) v /= m;
        for (std::size_t s = 0; s < cat.size(); ++s) {
            auto& f = out[c].level_freqs[s];
            out[c].categorical_center[s] = static_cast<int>(argmax(f));
            for (double& v : f) v /= m;
        }
    }
    return out;
}

double pdq_scale(double mean) { return (mean > -0.1 && mean < 0.1) ? 1.0 : mean; }

std::vector<ColumnStats> column_stats(const MixedDataset& dataset) {
    require_valid(dataset);
    const std::size_t n = dataset.rows();
    if (n < 2) throw DegenerateDataError("column_stats needs at least 2 rows for the sample variance");

    std::vector<ColumnStats> out(dataset.cols());
    for (std::size_t j = 0; j < dataset.cols(); ++j) {
        const auto& col = dataset.column(j);
        auto& s = out[j];
        s.kind = col.kind;
        if (!col.is_categorical()) {
            auto v = dataset.continuous_column(j);
            double sum = std::accumulate(v.begin(), v.end(), 0.0);
            s.mean = sum / static_cast<double>(n);
            double ss = 0.0;
            for (double x : v) ss += (x - s.mean) * (x - s.mean);
            s.variance = ss / static_cast<double>(n - 1);
            auto [lo, hi] = std::minmax_element(v.begin(), v.end());
            s.range = *hi - *lo;
            s.scale = pdq_scale(s.mean);
            continue;
        }
        auto codes = dataset.categorical_column(j);
        s.frequencies.assign(static_cast<std::size_t>(col.level_count()), 0.0);
        for (int c : codes) s.frequencies[static_cast<std::size_t>(c)] += 1.0;
        for (double& f : s.frequencies) f /= static_cast<double>(n);
        if (col.kind == ColumnKind::ordinal) {
            auto [lo, hi] = std::minmax_element(codes.begin(), codes.end());
            s.rank_range = static_cast<double>(*hi - *lo);
        }
    }
    return out;
}

double log_sum_exp(std::span<const double> values) {
    if (values.empty()) return -std::numeric_limits<double>::infinity();
    double m = *std::max_element(values.begin(), values.end());
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double v : values) s += std::exp(v - m);
    return m + std::log(s);
}

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw DegenerateDataError("quantile of empty sample");
    double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    auto lo = static_cast<std::size_t>(std::floor(h));
    auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::size_t argmax(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < values.size(); ++k)
        if (values[k] > values[best]) best = k;
    return best;
}

std::size_t argmin(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < values.size(); ++k)
        if (values[k] < values[best]) best = k;
    return best;
}

Eigen::MatrixXd continuous_matrix(const MixedDataset& dataset) {
    auto cols = dataset.continuous_columns();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(dataset.rows()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
        auto v = dataset.continuous_column(cols[c]);
        for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = v[i];
    }
    return out;
}

Eigen::MatrixXi categorical_matrix(const MixedDataset& dataset) {
    auto cols = dataset.categorical_columns();
    Eigen::MatrixXi out(static_cast<Eigen::Index>(dataset.rows()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
        auto v = dataset.categorical_column(cols[c]);
        for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = v[i];
    }
    return out;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace mixclust
