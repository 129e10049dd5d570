#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace mixclust {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dataset or schema fails validation.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Bad method or generator configuration (K > n, missing column types, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Data is too small or too degenerate for the requested computation.
class DegenerateDataError : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Schema and dataset
// ---------------------------------------------------------------------------

enum class ColumnKind { continuous, nominal, ordinal };

std::string_view to_string(ColumnKind kind);
ColumnKind parse_column_kind(std::string_view text);

struct ColumnSchema {
    std::string name;
    ColumnKind kind = ColumnKind::continuous;
    std::vector<std::string> levels;  // categorical kinds only, in rank order

    bool is_categorical() const { return kind != ColumnKind::continuous; }
    int level_count() const { return static_cast<int>(levels.size()); }

    static ColumnSchema continuous(std::string name);
    static ColumnSchema nominal(std::string name, std::vector<std::string> levels);
    static ColumnSchema ordinal(std::string name, std::vector<std::string> levels);
};

inline constexpr int kUnknownLevel = -1;

/// Column-typed table. Continuous cells hold reals; categorical cells hold a
/// 0-based level code (the ordinal rank minus one). Codes outside the declared
/// levels are representable so that validate() can report them.
class MixedDataset {
public:
    MixedDataset() = default;
    MixedDataset(std::vector<ColumnSchema> schema, std::size_t rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return schema_.size(); }
    const std::vector<ColumnSchema>& schema() const { return schema_; }
    const ColumnSchema& column(std::size_t j) const { return schema_.at(j); }

    double value(std::size_t i, std::size_t j) const { return values_[j][i]; }
    int code(std::size_t i, std::size_t j) const { return codes_[j][i]; }

    std::span<const double> continuous_column(std::size_t j) const { return values_.at(j); }
    std::span<const int> categorical_column(std::size_t j) const { return codes_.at(j); }

    void set_value(std::size_t i, std::size_t j, double v) { values_[j][i] = v; }
    void set_code(std::size_t i, std::size_t j, int c) { codes_[j][i] = c; }
    /// Stores the code of `label`, or kUnknownLevel when the column does not declare it.
    void set_label(std::size_t i, std::size_t j, std::string_view label);
    std::string cell_text(std::size_t i, std::size_t j) const;

    std::vector<std::size_t> continuous_columns() const;
    std::vector<std::size_t> categorical_columns() const;  // nominal and ordinal
    std::vector<std::size_t> nominal_columns() const;
    std::vector<std::size_t> ordinal_columns() const;

    /// Rows restricted to `row_ids`, in that order.
    MixedDataset subset(std::span<const std::size_t> row_ids) const;

private:
    std::vector<ColumnSchema> schema_;
    std::size_t rows_ = 0;
    std::vector<std::vector<double>> values_;  // empty for categorical columns
    std::vector<std::vector<int>> codes_;      // empty for continuous columns
};

struct Violation {
    static constexpr std::size_t kNoRow = std::numeric_limits<std::size_t>::max();
    std::size_t row = kNoRow;  // kNoRow for schema-level problems
    std::string column;
    std::string reason;
};

std::vector<Violation> validate(const MixedDataset& dataset);

/// Throws ValidationError carrying the first few violations.
void require_valid(const MixedDataset& dataset);

// ---------------------------------------------------------------------------
// Partitions and fit results
// ---------------------------------------------------------------------------

/// Hard labels are 0-based internally (0..K-1); files use 1..K.
struct Partition {
    std::vector<int> labels;
    int k = 1;
    std::optional<Eigen::MatrixXd> soft;  // n x K, row-stochastic

    std::size_t size() const { return labels.size(); }

    /// Hard labels from a row-stochastic matrix; ties go to the lowest index.
    static Partition from_soft(Eigen::MatrixXd memberships);
    std::vector<std::size_t> cluster_sizes() const;
};

struct ClusterPrototype {
    std::vector<double> continuous_center;          // one per continuous column
    std::vector<int> categorical_center;            // level code per categorical column
    std::vector<std::vector<double>> level_freqs;   // optional, per categorical column
};

struct FitResult {
    Partition partition;
    std::vector<ClusterPrototype> prototypes;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    std::uint64_t seed = 0;
    /// Objective after every monitored step of the winning run. The direction
    /// (descent or ascent) is method specific.
    std::vector<double> trace;
    /// Trace positions where a repair (empty or undersized cluster) was applied
    /// just before the value was recorded.
    std::vector<std::size_t> repairs;
    std::map<std::string, double> details;  // gamma, alpha_cont, ...
};

// ---------------------------------------------------------------------------
// Encodings and summaries
// ---------------------------------------------------------------------------

struct OneHotColumn {
    std::size_t source = 0;
    int level = -1;  // -1 for a passed-through continuous column
};

struct OneHotMatrix {
    Eigen::MatrixXd matrix;
    std::vector<OneHotColumn> columns;
};

OneHotMatrix one_hot(const MixedDataset& dataset);

/// Per-cluster means, modes (ties: lowest level) and level frequencies of a
/// hard partition, in the dataset's original units.
std::vector<ClusterPrototype> cluster_prototypes(const MixedDataset& dataset, const Partition& partition);

struct ColumnStats {
    ColumnKind kind = ColumnKind::continuous;
    // continuous
    double mean = 0.0;
    double variance = 0.0;  // sample (n - 1) variance
    double range = 0.0;
    double scale = 1.0;     // PDQ x*: 1 when |mean| < 0.1, otherwise the mean
    // ordinal
    double rank_range = 0.0;
    // nominal and ordinal
    std::vector<double> frequencies;
};

std::vector<ColumnStats> column_stats(const MixedDataset& dataset);

/// PDQ normalisation rule applied to a column mean.
double pdq_scale(double mean);

// ---------------------------------------------------------------------------
// Small numeric helpers shared by the methods
// ---------------------------------------------------------------------------

double log_sum_exp(std::span<const double> values);

/// Sample quantile, R type 7 (linear interpolation). `sorted` must be ascending.
double quantile_sorted(std::span<const double> sorted, double p);

/// Index of the largest element; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);
std::size_t argmin(std::span<const double> values);

/// Continuous columns as an n x R matrix (column order of continuous_columns()).
Eigen::MatrixXd continuous_matrix(const MixedDataset& dataset);
/// Categorical level codes as an n x S matrix (column order of categorical_columns()).
Eigen::MatrixXi categorical_matrix(const MixedDataset& dataset);

/// SplitMix64 mix of a base seed and a stream id; used for per-restart RNG streams.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// `count` distinct indices from [0, n), in draw order.
template <class Rng>
std::vector<std::size_t> sample_distinct(std::size_t n, std::size_t count, Rng& rng);

template <class Rng>
std::vector<std::size_t> sample_distinct(std::size_t n, std::size_t count, Rng& rng) {
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(count);
    return pool;
}

}  // namespace mixclust
