#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixclust/core.hpp"
#include "mixclust/mbn.hpp"
#include "mixclust/simgen.hpp"

namespace mixclust::bench {

// ---------------------------------------------------------------------------
// Methods
// ---------------------------------------------------------------------------

/// A clustering method as the harness sees it: (data, K, seed, options) -> fit.
using MethodFn = std::function<FitResult(const MixedDataset&, int, std::uint64_t, const nlohmann::json&)>;

/// Names of the built-in methods: kproto, pdq, convexkm, kamila, lcm, mbn.
std::vector<std::string> builtin_methods();
/// Adds or replaces a method in the process-wide registry.
void register_method(const std::string& name, MethodFn fn);
bool has_method(const std::string& name);
/// Runs a registered method. Option keys are method specific (n_init, max_iter, ...).
FitResult fit_method(const std::string& name, const MixedDataset& data, int k, std::uint64_t seed,
                     const nlohmann::json& options = nlohmann::json::object());

/// MBN settings from an options object (n_init, max_cem_iter, tabu_size, ...).
MbnConfig mbn_options(const nlohmann::json& options, int k, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

/// One factor combination of a simulation model. Fields a model does not use
/// keep their defaults and are left out of the id.
struct Scenario {
    std::string model;  // m1 .. m4
    int k = 2;
    std::size_t n = 0;             // m2-m4: total rows
    std::size_t cluster_size = 0;  // m1: rows per cluster
    double overlap = 0.0;          // m1
    int dimension = 0;             // m1, m2
    double continuous_proportion = 0.0;  // m1, m2
    std::vector<double> pi;        // m2

    /// Canonical text id, e.g. "m2|K=2|N=1200|dimension=12|prop=0.333333|pi=0.5/0.5".
    std::string id() const;
    /// Total number of generated rows.
    std::size_t rows() const;
    GeneratedData generate(std::uint64_t seed) const;
};

struct BenchConfig {
    std::string model;
    std::vector<Scenario> scenarios;  // expanded factor grid, in canonical order
    std::vector<std::string> methods;
    int replicates = 10;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "bench_out";
    int threads = 0;  // 0: hardware concurrency
    nlohmann::json method_options = nlohmann::json::object();  // method name -> options
};

/// Parses and validates a config document; errors name the offending path.
BenchConfig parse_config(const nlohmann::json& doc);
BenchConfig load_config(const std::filesystem::path& path);

/// 64-bit FNV-1a.
std::uint64_t stable_hash(std::string_view text);
std::uint64_t data_seed(std::uint64_t base, const std::string& scenario_id, int replicate);
std::uint64_t method_seed(std::uint64_t data_seed, const std::string& method);

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

struct ScenarioResult {
    Scenario scenario;
    std::string method;
    int replicate = 0;
    std::uint64_t seed = 0;
    double ari = 0.0;
    double ami = 0.0;
    double seconds = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string error;  // empty when the fit succeeded

    bool ok() const { return error.empty(); }
};

/// Runs every (scenario, replicate, method) cell. Cell failures are recorded,
/// never thrown. Output order is scenario, replicate, method (config order).
std::vector<ScenarioResult> run_grid(const BenchConfig& config);

struct SummaryRow {
    Scenario scenario;
    std::string method;
    double mean_ari = 0.0;
    double sd_ari = 0.0;
    double mean_ami = 0.0;
    double sd_ami = 0.0;
    int n_ok = 0;
    int n_fail = 0;
};

/// Per scenario and method means and sample sds over successful replicates.
std::vector<SummaryRow> summarize(const std::vector<ScenarioResult>& results);

// ---------------------------------------------------------------------------
// Persistence and reports
// ---------------------------------------------------------------------------

std::string format_number(double v);

void write_replicates_csv(const std::filesystem::path& path, const std::vector<ScenarioResult>& results);
std::vector<ScenarioResult> read_replicates_csv(const std::filesystem::path& path);
std::string summary_csv(const std::vector<SummaryRow>& rows);
void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path);
/// Accepts either a replicate-level or a summary CSV.
std::vector<SummaryRow> read_results(const std::filesystem::path& path);

/// Plain-text table: one row per scenario, one "ARI/AMI" column per method.
std::string text_table(const std::vector<SummaryRow>& rows, const std::string& model);
/// Grouped bar chart of mean ARI, one group per scenario, one bar per method.
std::string svg_chart(const std::vector<SummaryRow>& rows, const std::string& model);

/// Writes results.csv plus table_<model>.txt and chart_<model>.svg per model;
/// returns the written paths.
std::vector<std::filesystem::path> emit_report(const std::vector<SummaryRow>& rows, const std::filesystem::path& out_dir);

/// run_grid, then replicates.csv and emit_report into config.output_dir.
std::vector<SummaryRow> run_and_report(const BenchConfig& config);

}  // namespace mixclust::bench
