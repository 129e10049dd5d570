#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "mixclust/bench.hpp"
#include "mixclust/io.hpp"

namespace mixclust::bench {

namespace {

const char* const kFactorHeader = "model,K,N,cluster_size,overlap,dimension,continuous_proportion,pi";

std::string factor_fields(const Scenario& s) {
    std::string out = s.model + "," + std::to_string(s.k) + "," + std::to_string(s.rows()) + ",";
    if (s.model == "m1") {
        out += std::to_string(s.cluster_size) + "," + format_number(s.overlap) + "," + std::to_string(s.dimension) + "," +
               format_number(s.continuous_proportion) + ",";
    } else if (s.model == "m2") {
        out += ",," + std::to_string(s.dimension) + "," + format_number(s.continuous_proportion) + ",";
        for (std::size_t t = 0; t < s.pi.size(); ++t) out += (t ? "/" : "") + format_number(s.pi[t]);
    } else {
        out += ",,,,";
    }
    return out;
}

using Header = std::map<std::string, std::size_t>;

Header parse_header(const std::string& line) {
    Header h;
    auto fields = io::split_csv_line(line);
    for (std::size_t t = 0; t < fields.size(); ++t) h[fields[t]] = t;
    return h;
}

const std::string& field(const std::vector<std::string>& row, const Header& h, const std::string& name) {
    auto it = h.find(name);
    if (it == h.end() || it->second >= row.size()) throw ValidationError("results CSV: missing column '" + name + "'");
    return row[it->second];
}

double to_double(const std::string& s) {
    if (s == "NA" || s.empty()) return std::nan("");
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw ValidationError("results CSV: bad number '" + s + "'");
        return v;
    } catch (const std::logic_error&) {
        throw ValidationError("results CSV: bad number '" + s + "'");
    }
}

long long to_integer(const std::string& s) {
    try {
        std::size_t used = 0;
        long long v = std::stoll(s, &used);
        if (used != s.size()) throw ValidationError("results CSV: bad integer '" + s + "'");
        return v;
    } catch (const std::logic_error&) {
        throw ValidationError("results CSV: bad integer '" + s + "'");
    }
}

Scenario scenario_from(const std::vector<std::string>& row, const Header& h) {
    Scenario s;
    s.model = field(row, h, "model");
    s.k = static_cast<int>(to_integer(field(row, h, "K")));
    const auto rows = static_cast<std::size_t>(to_integer(field(row, h, "N")));
    if (s.model == "m1") {
        s.cluster_size = static_cast<std::size_t>(to_integer(field(row, h, "cluster_size")));
        s.overlap = to_double(field(row, h, "overlap"));
        s.dimension = static_cast<int>(to_integer(field(row, h, "dimension")));
        s.continuous_proportion = to_double(field(row, h, "continuous_proportion"));
    } else if (s.model == "m2") {
        s.n = rows;
        s.dimension = static_cast<int>(to_integer(field(row, h, "dimension")));
        s.continuous_proportion = to_double(field(row, h, "continuous_proportion"));
        std::stringstream pi(field(row, h, "pi"));
        std::string part;
        while (std::getline(pi, part, '/')) s.pi.push_back(to_double(part));
    } else {
        s.n = rows;
    }
    return s;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::stringstream in(io::read_text(path));
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    if (lines.empty()) throw ValidationError("results CSV " + path.string() + " is empty");
    return lines;
}

std::string percent(double v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.0f%%", 100.0 * v);
    return buf;
}

std::string pi_label(const std::vector<double>& pi) {
    std::string s;
    for (std::size_t t = 0; t < pi.size(); ++t) {
        // Show simple fractions the way the published tables do.
        const double inv = 1.0 / pi[t];
        char buf[16];
        if (std::abs(inv - std::round(inv)) < 1e-6) {
            std::snprintf(buf, sizeof buf, "1/%.0f", std::round(inv));
        } else if (std::abs(pi[t] * 5.0 - std::round(pi[t] * 5.0)) < 1e-6) {
            std::snprintf(buf, sizeof buf, "%.0f/5", std::round(pi[t] * 5.0));
        } else {
            std::snprintf(buf, sizeof buf, "%.3g", pi[t]);
        }
        s += (t ? "-" : "") + std::string(buf);
    }
    return s;
}

std::vector<std::string> table_factor_names(const std::string& model) {
    if (model == "m1") return {"K", "N", "O", "cont"};
    if (model == "m2") return {"K", "pi", "N", "p", "cont"};
    return {"K", "N"};
}

std::vector<std::string> table_factor_values(const Scenario& s) {
    if (s.model == "m1")
        return {std::to_string(s.k), std::to_string(s.rows()), percent(s.overlap), percent(s.continuous_proportion)};
    if (s.model == "m2")
        return {std::to_string(s.k), pi_label(s.pi), std::to_string(s.n), std::to_string(s.dimension), percent(s.continuous_proportion)};
    return {std::to_string(s.k), std::to_string(s.n)};
}

std::string scenario_label(const Scenario& s) {
    auto names = table_factor_names(s.model);
    auto values = table_factor_values(s);
    std::string out;
    for (std::size_t t = 0; t < names.size(); ++t) out += (t ? " " : "") + names[t] + "=" + values[t];
    return out;
}

std::string two_decimals(double v) {
    if (std::isnan(v)) return "NA";
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Layout {
    std::vector<std::string> scenarios;  // ids, first-seen order
    std::vector<std::string> methods;
    std::map<std::string, Scenario> scenario_of;
    std::map<std::pair<std::string, std::string>, const SummaryRow*> cell;
};

Layout layout_for(const std::vector<SummaryRow>& rows, const std::string& model) {
    Layout l;
    for (const auto& r : rows) {
        if (r.scenario.model != model) continue;
        const auto id = r.scenario.id();
        if (!l.scenario_of.count(id)) {
            l.scenario_of[id] = r.scenario;
            l.scenarios.push_back(id);
        }
        if (std::find(l.methods.begin(), l.methods.end(), r.method) == l.methods.end()) l.methods.push_back(r.method);
        l.cell[{id, r.method}] = &r;
    }
    return l;
}

}  // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "NA";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    std::string s = buf;
    if (s == "-0") s = "0";
    return s;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

void write_replicates_csv(const std::filesystem::path& path, const std::vector<ScenarioResult>& results) {
    std::string out = std::string(kFactorHeader) + ",method,replicate,seed,ari,ami,seconds,iterations,converged,error\n";
    for (const auto& r : results) {
        out += factor_fields(r.scenario) + "," + io::csv_escape(r.method) + "," + std::to_string(r.replicate) + "," +
               std::to_string(r.seed) + "," + (r.ok() ? format_number(r.ari) : "NA") + "," + (r.ok() ? format_number(r.ami) : "NA") + "," +
               format_number(r.seconds) + "," + std::to_string(r.iterations) + "," + (r.converged ? "1" : "0") + "," +
               io::csv_escape(r.error) + "\n";
    }
    io::write_text(path, out);
}

std::vector<ScenarioResult> read_replicates_csv(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    const auto h = parse_header(lines[0]);
    std::vector<ScenarioResult> out;
    for (std::size_t t = 1; t < lines.size(); ++t) {
        const auto row = io::split_csv_line(lines[t]);
        ScenarioResult r;
        r.scenario = scenario_from(row, h);
        r.method = field(row, h, "method");
        r.replicate = static_cast<int>(to_integer(field(row, h, "replicate")));
        r.seed = std::stoull(field(row, h, "seed"));
        r.error = field(row, h, "error");
        if (r.ok()) {
            r.ari = to_double(field(row, h, "ari"));
            r.ami = to_double(field(row, h, "ami"));
        }
        r.seconds = to_double(field(row, h, "seconds"));
        r.iterations = static_cast<int>(to_integer(field(row, h, "iterations")));
        r.converged = field(row, h, "converged") == "1";
        out.push_back(std::move(r));
    }
    return out;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
    std::string out = std::string(kFactorHeader) + ",method,mean_ari,sd_ari,mean_ami,sd_ami,n_ok,n_fail\n";
    for (const auto& r : rows) {
        out += factor_fields(r.scenario) + "," + io::csv_escape(r.method) + "," + format_number(r.mean_ari) + "," + format_number(r.sd_ari) +
               "," + format_number(r.mean_ami) + "," + format_number(r.sd_ami) + "," + std::to_string(r.n_ok) + "," +
               std::to_string(r.n_fail) + "\n";
    }
    return out;
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows) { io::write_text(path, summary_csv(rows)); }

std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    const auto h = parse_header(lines[0]);
    std::vector<SummaryRow> out;
    for (std::size_t t = 1; t < lines.size(); ++t) {
        const auto row = io::split_csv_line(lines[t]);
        SummaryRow r;
        r.scenario = scenario_from(row, h);
        r.method = field(row, h, "method");
        r.mean_ari = to_double(field(row, h, "mean_ari"));
        r.sd_ari = to_double(field(row, h, "sd_ari"));
        r.mean_ami = to_double(field(row, h, "mean_ami"));
        r.sd_ami = to_double(field(row, h, "sd_ami"));
        r.n_ok = static_cast<int>(to_integer(field(row, h, "n_ok")));
        r.n_fail = static_cast<int>(to_integer(field(row, h, "n_fail")));
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<SummaryRow> read_results(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    const auto h = parse_header(lines[0]);
    if (h.count("mean_ari")) return read_summary_csv(path);
    if (h.count("replicate")) return summarize(read_replicates_csv(path));
    throw ValidationError("results CSV " + path.string() + ": neither a summary nor a replicate file");
}

// ---------------------------------------------------------------------------
// Text table and SVG chart
// ---------------------------------------------------------------------------

std::string text_table(const std::vector<SummaryRow>& rows, const std::string& model) {
    const auto l = layout_for(rows, model);
    std::vector<std::vector<std::string>> grid;
    std::vector<std::string> header = table_factor_names(model);
    for (const auto& m : l.methods) header.push_back(m);
    grid.push_back(header);
    for (const auto& id : l.scenarios) {
        auto line = table_factor_values(l.scenario_of.at(id));
        for (const auto& m : l.methods) {
            auto it = l.cell.find({id, m});
            line.push_back(it == l.cell.end() ? "-" : two_decimals(it->second->mean_ari) + "/" + two_decimals(it->second->mean_ami));
        }
        grid.push_back(line);
    }
    std::vector<std::size_t> width(header.size(), 0);
    for (const auto& line : grid)
        for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
    std::string out = "Mean ARI/AMI, model " + model + "\n";
    for (std::size_t r = 0; r < grid.size(); ++r) {
        std::string text;
        for (std::size_t c = 0; c < grid[r].size(); ++c) {
            if (c) text += "  ";
            text += grid[r][c] + std::string(width[c] - grid[r][c].size(), ' ');
        }
        while (!text.empty() && text.back() == ' ') text.pop_back();
        out += text + "\n";
        if (r == 0) {
            std::size_t total = 0;
            for (auto w : width) total += w;
            out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
        }
    }
    return out;
}

std::string svg_chart(const std::vector<SummaryRow>& rows, const std::string& model) {
    static const char* const palette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#9c755f"};
    const auto l = layout_for(rows, model);
    const double bar = 12.0, gap = 18.0, left = 60.0, top = 40.0, plot_h = 260.0, bottom = 150.0;
    const double group_w = bar * static_cast<double>(std::max<std::size_t>(l.methods.size(), 1)) + gap;
    const double width = left + group_w * static_cast<double>(l.scenarios.size()) + 160.0;
    const double height = top + plot_h + bottom;
    double lo = 0.0;
    for (const auto& [key, r] : l.cell)
        if (!std::isnan(r->mean_ari)) lo = std::min(lo, std::floor(r->mean_ari * 10.0) / 10.0);
    const double hi = 1.0;
    auto y_of = [&](double v) { return top + plot_h * (hi - v) / (hi - lo); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_number(width) << "\" height=\"" << format_number(height)
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    svg << "<text x=\"" << format_number(left) << "\" y=\"20\" font-size=\"14\">Mean ARI by scenario, model " << xml_escape(model) << "</text>\n";
    for (int t = 0; t <= 10; ++t) {
        const double v = lo + (hi - lo) * t / 10.0;
        const double y = y_of(v);
        svg << "<line x1=\"" << format_number(left) << "\" x2=\"" << format_number(width - 150.0) << "\" y1=\"" << format_number(y) << "\" y2=\""
            << format_number(y) << "\" stroke=\"#dddddd\"/>\n";
        svg << "<text x=\"" << format_number(left - 6.0) << "\" y=\"" << format_number(y + 4.0) << "\" text-anchor=\"end\">" << two_decimals(v)
            << "</text>\n";
    }
    svg << "<text x=\"14\" y=\"" << format_number(top + plot_h / 2) << "\" transform=\"rotate(-90 14 " << format_number(top + plot_h / 2)
        << ")\" text-anchor=\"middle\">ARI</text>\n";
    for (std::size_t g = 0; g < l.scenarios.size(); ++g) {
        const auto& id = l.scenarios[g];
        const double x0 = left + gap / 2 + group_w * static_cast<double>(g);
        for (std::size_t m = 0; m < l.methods.size(); ++m) {
            auto it = l.cell.find({id, l.methods[m]});
            if (it == l.cell.end() || std::isnan(it->second->mean_ari)) continue;
            const double v = it->second->mean_ari;
            const double y1 = y_of(std::max(v, 0.0)), y0 = y_of(std::min(v, 0.0));
            svg << "<rect x=\"" << format_number(x0 + bar * static_cast<double>(m)) << "\" y=\"" << format_number(y1) << "\" width=\""
                << format_number(bar - 1.0) << "\" height=\"" << format_number(std::max(y0 - y1, 0.5)) << "\" fill=\"" << palette[m % 8]
                << "\"><title>" << xml_escape(l.methods[m]) << ": " << two_decimals(v) << "</title></rect>\n";
        }
        const double lx = x0 + (group_w - gap) / 2;
        const double ly = top + plot_h + 12.0;
        svg << "<text x=\"" << format_number(lx) << "\" y=\"" << format_number(ly) << "\" transform=\"rotate(60 " << format_number(lx) << " "
            << format_number(ly) << ")\">" << xml_escape(scenario_label(l.scenario_of.at(id))) << "</text>\n";
    }
    svg << "<line x1=\"" << format_number(left) << "\" x2=\"" << format_number(width - 150.0) << "\" y1=\"" << format_number(y_of(0.0))
        << "\" y2=\"" << format_number(y_of(0.0)) << "\" stroke=\"#333333\"/>\n";
    for (std::size_t m = 0; m < l.methods.size(); ++m) {
        const double y = top + 16.0 * static_cast<double>(m);
        svg << "<rect x=\"" << format_number(width - 130.0) << "\" y=\"" << format_number(y) << "\" width=\"10\" height=\"10\" fill=\""
            << palette[m % 8] << "\"/>\n";
        svg << "<text x=\"" << format_number(width - 114.0) << "\" y=\"" << format_number(y + 9.0) << "\">" << xml_escape(l.methods[m])
            << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

std::vector<std::filesystem::path> emit_report(const std::vector<SummaryRow>& rows, const std::filesystem::path& out_dir) {
    if (rows.empty()) throw ConfigError("emit_report: empty summary");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error("cannot create output directory " + out_dir.string() + ": " + ec.message());
    std::vector<std::filesystem::path> written;
    written.push_back(out_dir / "results.csv");
    write_summary_csv(written.back(), rows);
    std::vector<std::string> models;
    for (const auto& r : rows)
        if (std::find(models.begin(), models.end(), r.scenario.model) == models.end()) models.push_back(r.scenario.model);
    for (const auto& m : models) {
        written.push_back(out_dir / ("table_" + m + ".txt"));
        io::write_text(written.back(), text_table(rows, m));
        written.push_back(out_dir / ("chart_" + m + ".svg"));
        io::write_text(written.back(), svg_chart(rows, m));
    }
    return written;
}

}  // namespace mixclust::bench
