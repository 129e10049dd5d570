#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixclust/core.hpp"

namespace mixclust::io {

/// Name of the optional ground-truth column in dataset CSVs.
inline constexpr const char* kLabelColumn = "__cluster";

/// Parses one CSV line; supports double-quoted fields with "" escapes.
std::vector<std::string> split_csv_line(const std::string& line);
std::string csv_escape(const std::string& field);

/// Schema sidecar: {"<column>": {"kind": "...", "levels": [...]}, ...}.
nlohmann::ordered_json schema_to_json(const std::vector<ColumnSchema>& schema);
std::vector<ColumnSchema> schema_from_json(const nlohmann::json& doc,
                                           const std::vector<std::string>& column_order);

struct LoadedDataset {
    MixedDataset data;
    std::optional<Partition> truth;  // from a `__cluster` column when present
};

/// Reads a dataset CSV. Column order comes from the header; kinds and levels
/// from the schema file.
LoadedDataset read_dataset(const std::filesystem::path& csv, const std::filesystem::path& schema);

void write_dataset(const std::filesystem::path& csv, const std::filesystem::path& schema,
                   const MixedDataset& data, const Partition* truth = nullptr);

/// Labels CSV: single `__cluster` column holding 1-based cluster ids.
void write_labels(const std::filesystem::path& csv, const Partition& partition);
Partition read_labels(const std::filesystem::path& csv);

/// Reads a whole text file; throws Error when it cannot be opened.
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace mixclust::io
