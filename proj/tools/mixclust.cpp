// mixclust: generate synthetic data, fit clustering methods, score partitions
// and run benchmark grids.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mixclust/bench.hpp"
#include "mixclust/io.hpp"
#include "mixclust/mbn.hpp"
#include "mixclust/metrics.hpp"
#include "mixclust/simgen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mixclust;

namespace {

json load_json(const std::string& path) {
    if (path.empty()) return json::object();
    try {
        return json::parse(io::read_text(path));
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

template <class T>
T get_or(const json& doc, const char* key, T fallback) {
    if (!doc.contains(key)) return fallback;
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config key '") + key + "' has the wrong type");
    }
}

void check_keys(const json& doc, std::initializer_list<const char*> allowed) {
    if (!doc.is_object()) throw ConfigError("generator config must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
        bool known = false;
        for (const char* a : allowed) known |= key == a;
        if (!known) throw ConfigError("unknown generator config key '" + key + "'");
    }
}

GeneratedData generate(const std::string& model, const json& cfg, std::uint64_t seed) {
    if (model == "m1") {
        check_keys(cfg, {"K", "overlap", "cluster_size", "dimension", "continuous_proportion", "levels"});
        M1Config c;
        c.k = get_or(cfg, "K", c.k);
        c.overlap = get_or(cfg, "overlap", c.overlap);
        c.cluster_size = get_or(cfg, "cluster_size", c.cluster_size);
        c.dimension = get_or(cfg, "dimension", c.dimension);
        c.continuous_proportion = get_or(cfg, "continuous_proportion", c.continuous_proportion);
        c.levels = get_or(cfg, "levels", c.levels);
        c.seed = seed;
        return gen_m1(c);
    }
    if (model == "m2") {
        check_keys(cfg, {"K", "N", "dimension", "continuous_proportion", "pi", "clusters"});
        M2Config c = M2Config::defaults(get_or(cfg, "K", 2));
        c.n = get_or(cfg, "N", c.n);
        c.dimension = get_or(cfg, "dimension", c.dimension);
        c.continuous_proportion = get_or(cfg, "continuous_proportion", c.continuous_proportion);
        c.pi = get_or(cfg, "pi", c.pi);
        if (cfg.contains("clusters")) {
            c.clusters.clear();
            for (const auto& cl : cfg["clusters"]) {
                M2Cluster m;
                m.lambda = cl.at("lambda").get<ExpDiffParams>();
                m.nominal = cl.at("nominal").get<std::vector<double>>();
                m.bernoulli = cl.at("bernoulli").get<double>();
                c.clusters.push_back(std::move(m));
            }
        }
        c.seed = seed;
        return gen_m2(c);
    }
    if (model == "m3" || model == "m4") {
        check_keys(cfg, {"K", "N"});
        MbnSimConfig c;
        c.k = get_or(cfg, "K", c.k);
        c.n = get_or(cfg, "N", c.n);
        c.seed = seed;
        return model == "m3" ? gen_m3(c) : gen_m4(c);
    }
    throw ConfigError("unknown model '" + model + "' (expected m1, m2, m3 or m4)");
}

std::string number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mixed-type data clustering: generators, methods, scores and benchmarks"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Write a synthetic dataset (data.csv, schema.json, labels.csv)");
    std::string gen_model, gen_config, gen_out;
    std::uint64_t gen_seed = 0;
    gen->add_option("--model", gen_model, "m1, m2, m3 or m4")->required();
    gen->add_option("--config", gen_config, "JSON file with generator factors");
    gen->add_option("--out", gen_out, "Output directory")->required();
    gen->add_option("--seed", gen_seed, "RNG seed");

    // fit
    auto* fit = app.add_subcommand("fit", "Cluster a dataset");
    std::string fit_method, fit_data, fit_schema, fit_config, fit_out;
    int fit_k = 2;
    std::uint64_t fit_seed = 0;
    fit->add_option("--method", fit_method, "kproto, pdq, convexkm, kamila, lcm or mbn")->required();
    fit->add_option("--k", fit_k, "Number of clusters")->required()->check(CLI::PositiveNumber);
    fit->add_option("--data", fit_data, "Dataset CSV")->required()->check(CLI::ExistingFile);
    fit->add_option("--schema", fit_schema, "Schema JSON")->required()->check(CLI::ExistingFile);
    fit->add_option("--config", fit_config, "JSON file with method options");
    fit->add_option("--seed", fit_seed, "RNG seed");
    fit->add_option("--out", fit_out, "Output directory")->required();

    // score
    auto* score = app.add_subcommand("score", "Compare two labelings");
    std::string score_true, score_pred, score_metric = "ari";
    score->add_option("--true", score_true, "Reference labels CSV")->required()->check(CLI::ExistingFile);
    score->add_option("--pred", score_pred, "Predicted labels CSV")->required()->check(CLI::ExistingFile);
    score->add_option("--metric", score_metric, "ari or ami")->check(CLI::IsMember({"ari", "ami"}));

    // bench
    auto* bench = app.add_subcommand("bench", "Benchmark grids");
    bench->require_subcommand(1);
    auto* bench_run = bench->add_subcommand("run", "Run a grid and write its report");
    std::string bench_config;
    bench_run->add_option("--config", bench_config, "Grid config JSON")->required()->check(CLI::ExistingFile);
    auto* bench_report = bench->add_subcommand("report", "Rebuild tables and charts from a results CSV");
    std::string report_results, report_out;
    bench_report->add_option("--results", report_results, "replicates.csv or results.csv")->required()->check(CLI::ExistingFile);
    bench_report->add_option("--out", report_out, "Output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            auto data = generate(gen_model, load_json(gen_config), gen_seed);
            fs::create_directories(gen_out);
            io::write_dataset(fs::path(gen_out) / "data.csv", fs::path(gen_out) / "schema.json", data.data);
            io::write_labels(fs::path(gen_out) / "labels.csv", data.truth);
            std::cout << "wrote " << data.data.rows() << " rows to " << gen_out << "\n";
        } else if (*fit) {
            auto loaded = io::read_dataset(fit_data, fit_schema);
            const json options = load_json(fit_config);
            fs::create_directories(fit_out);
            FitResult result;
            if (fit_method == "mbn") {
                // Run directly so the learned networks can be exported.
                auto model = mbn_cem_fit_model(loaded.data, bench::mbn_options(options, fit_k, fit_seed));
                io::write_text(fs::path(fit_out) / "networks.json", model_to_json(model.model).dump(2) + "\n");
                result = std::move(model.fit);
            } else {
                result = bench::fit_method(fit_method, loaded.data, fit_k, fit_seed, options);
            }
            io::write_labels(fs::path(fit_out) / "labels.csv", result.partition);
            nlohmann::ordered_json summary;
            summary["method"] = fit_method;
            summary["k"] = fit_k;
            summary["seed"] = fit_seed;
            summary["objective"] = result.objective;
            summary["iterations"] = result.iterations;
            summary["converged"] = result.converged;
            summary["cluster_sizes"] = result.partition.cluster_sizes();
            summary["details"] = result.details;
            if (loaded.truth) {
                summary["ari"] = ari(*loaded.truth, result.partition);
                summary["ami"] = ami(*loaded.truth, result.partition);
            }
            io::write_text(fs::path(fit_out) / "summary.json", summary.dump(2) + "\n");
            std::cout << "objective " << number(result.objective) << " after " << result.iterations << " iterations\n";
        } else if (*score) {
            auto a = io::read_labels(score_true);
            auto b = io::read_labels(score_pred);
            std::cout << number(score_metric == "ari" ? ari(a, b) : ami(a, b)) << "\n";
        } else if (*bench_run) {
            auto cfg = bench::load_config(bench_config);
            auto summary = bench::run_and_report(cfg);
            std::size_t failed = 0;
            for (const auto& r : summary) failed += static_cast<std::size_t>(r.n_fail);
            std::cout << "wrote " << summary.size() << " summary rows to " << cfg.output_dir.string();
            if (failed) std::cout << " (" << failed << " failed cells)";
            std::cout << "\n";
        } else if (*bench_report) {
            auto rows = bench::read_results(report_results);
            for (const auto& p : bench::emit_report(rows, report_out)) std::cout << "wrote " << p.string() << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
