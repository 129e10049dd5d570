#include "mixclust/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace mixclust::io {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    out.push_back(std::move(field));
    return out;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

nlohmann::ordered_json schema_to_json(const std::vector<ColumnSchema>& schema) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::object();
    for (const auto& col : schema) {
        nlohmann::ordered_json entry;
        entry["kind"] = std::string(to_string(col.kind));
        if (col.is_categorical()) entry["levels"] = col.levels;
        doc[col.name] = entry;
    }
    return doc;
}

std::vector<ColumnSchema> schema_from_json(const nlohmann::json& doc,
                                           const std::vector<std::string>& column_order) {
    if (!doc.is_object()) throw ValidationError("schema must be a JSON object keyed by column name");
    std::vector<ColumnSchema> out;
    for (const auto& name : column_order) {
        if (!doc.contains(name)) throw ValidationError("schema has no entry for column '" + name + "'");
        const auto& entry = doc.at(name);
        ColumnSchema col;
        col.name = name;
        col.kind = parse_column_kind(entry.at("kind").get<std::string>());
        if (entry.contains("levels")) col.levels = entry.at("levels").get<std::vector<std::string>>();
        out.push_back(std::move(col));
    }
    return out;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("failed writing " + path.string());
}

namespace {

double parse_double(const std::string& s, std::size_t row, const std::string& column) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw ValidationError("row " + std::to_string(row) + " column '" + column + "': not a number: '" + s + "'");
}

std::vector<std::vector<std::string>> read_csv_rows(const std::filesystem::path& csv) {
    std::istringstream in(read_text(csv));
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        rows.push_back(split_csv_line(line));
    }
    if (rows.empty()) throw ValidationError(csv.string() + ": missing header row");
    return rows;
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

LoadedDataset read_dataset(const std::filesystem::path& csv, const std::filesystem::path& schema) {
    auto rows = read_csv_rows(csv);
    const auto& header = rows.front();
    auto label_it = std::find(header.begin(), header.end(), kLabelColumn);
    std::optional<std::size_t> label_pos;
    if (label_it != header.end()) label_pos = static_cast<std::size_t>(label_it - header.begin());

    std::vector<std::string> names;
    std::vector<std::size_t> positions;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (label_pos && c == *label_pos) continue;
        names.push_back(header[c]);
        positions.push_back(c);
    }
    auto cols = schema_from_json(nlohmann::json::parse(read_text(schema)), names);

    const std::size_t n = rows.size() - 1;
    LoadedDataset out{MixedDataset(std::move(cols), n), std::nullopt};
    std::vector<int> labels;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = rows[i + 1];
        if (r.size() != header.size())
            throw ValidationError("row " + std::to_string(i) + ": expected " + std::to_string(header.size()) +
                                  " fields, got " + std::to_string(r.size()));
        for (std::size_t j = 0; j < positions.size(); ++j) {
            const auto& cell = r[positions[j]];
            if (out.data.column(j).is_categorical())
                out.data.set_label(i, j, cell);
            else
                out.data.set_value(i, j, parse_double(cell, i, names[j]));
        }
        if (label_pos) labels.push_back(static_cast<int>(parse_double(r[*label_pos], i, kLabelColumn)));
    }
    if (label_pos) {
        Partition p;
        for (int& l : labels) {
            if (l < 1) throw ValidationError("cluster labels must be >= 1");
            --l;
        }
        p.k = labels.empty() ? 1 : *std::max_element(labels.begin(), labels.end()) + 1;
        p.labels = std::move(labels);
        out.truth = std::move(p);
    }
    require_valid(out.data);
    return out;
}

void write_dataset(const std::filesystem::path& csv, const std::filesystem::path& schema,
                   const MixedDataset& data, const Partition* truth) {
    std::ostringstream os;
    for (std::size_t j = 0; j < data.cols(); ++j) os << (j ? "," : "") << csv_escape(data.column(j).name);
    if (truth) os << "," << kLabelColumn;
    os << "\n";
    for (std::size_t i = 0; i < data.rows(); ++i) {
        for (std::size_t j = 0; j < data.cols(); ++j) {
            if (j) os << ",";
            os << (data.column(j).is_categorical() ? csv_escape(data.cell_text(i, j)) : format_double(data.value(i, j)));
        }
        if (truth) os << "," << truth->labels[i] + 1;
        os << "\n";
    }
    write_text(csv, os.str());
    write_text(schema, schema_to_json(data.schema()).dump(2) + "\n");
}

void write_labels(const std::filesystem::path& csv, const Partition& partition) {
    std::ostringstream os;
    os << kLabelColumn << "\n";
    for (int l : partition.labels) os << l + 1 << "\n";
    write_text(csv, os.str());
}

Partition read_labels(const std::filesystem::path& csv) {
    auto rows = read_csv_rows(csv);
    const auto& header = rows.front();
    std::size_t pos = 0;
    if (header.size() > 1) {
        auto it = std::find(header.begin(), header.end(), kLabelColumn);
        if (it == header.end()) throw ValidationError(csv.string() + ": no __cluster column");
        pos = static_cast<std::size_t>(it - header.begin());
    }
    Partition p;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (pos >= rows[i].size()) throw ValidationError(csv.string() + ": short row " + std::to_string(i));
        int l = static_cast<int>(parse_double(rows[i][pos], i - 1, kLabelColumn));
        if (l < 1) throw ValidationError("cluster labels must be >= 1");
        p.labels.push_back(l - 1);
    }
    p.k = p.labels.empty() ? 1 : *std::max_element(p.labels.begin(), p.labels.end()) + 1;
    return p;
}

}  // namespace mixclust::io
