#include "mixclust/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "mixclust/distance_methods.hpp"
#include "mixclust/io.hpp"
#include "mixclust/kamila.hpp"
#include "mixclust/lcm.hpp"
#include "mixclust/mbn.hpp"
#include "mixclust/metrics.hpp"

namespace mixclust::bench {

using nlohmann::json;

namespace {

void check_option_keys(const std::string& method, const json& options, std::initializer_list<const char*> allowed) {
    if (!options.is_object()) throw ConfigError("options for method '" + method + "' must be a JSON object");
    for (const auto& [key, value] : options.items()) {
        bool known = false;
        for (const char* a : allowed) known |= key == a;
        if (!known) throw ConfigError("unknown option '" + key + "' for method '" + method + "'");
    }
}

template <class T>
T option(const json& options, const char* key, T fallback) {
    if (!options.contains(key)) return fallback;
    try {
        return options.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("option '") + key + "' has the wrong type");
    }
}

FitResult run_kproto(const MixedDataset& data, int k, std::uint64_t seed, const json& o) {
    check_option_keys("kproto", o, {"n_init", "max_iter", "gamma"});
    KProtoConfig c;
    c.k = k;
    c.seed = seed;
    c.n_init = option(o, "n_init", c.n_init);
    c.max_iter = option(o, "max_iter", c.max_iter);
    if (o.contains("gamma") && !(o["gamma"].is_string() && o["gamma"] == "auto")) c.gamma = option(o, "gamma", 0.0);
    return kprototypes_fit(data, c);
}

FitResult run_pdq(const MixedDataset& data, int k, std::uint64_t seed, const json& o) {
    check_option_keys("pdq", o, {"max_iter", "tol", "size_update"});
    PdqConfig c;
    c.k = k;
    c.seed = seed;
    c.max_iter = option(o, "max_iter", c.max_iter);
    c.tol = option(o, "tol", c.tol);
    const auto update = option<std::string>(o, "size_update", "jdf_optimal");
    if (update == "jdf_optimal") {
        c.size_update = PdqSizeUpdate::jdf_optimal;
    } else if (update == "membership_sum") {
        c.size_update = PdqSizeUpdate::membership_sum;
    } else {
        throw ConfigError("pdq size_update must be 'jdf_optimal' or 'membership_sum'");
    }
    return pdq_fit(data, c);
}

FitResult run_convexkm(const MixedDataset& data, int k, std::uint64_t seed, const json& o) {
    check_option_keys("convexkm", o, {"grid_size", "n_init", "max_iter"});
    ConvexKmConfig c;
    c.k = k;
    c.seed = seed;
    c.grid_size = option(o, "grid_size", c.grid_size);
    c.n_init = option(o, "n_init", c.n_init);
    c.max_iter = option(o, "max_iter", c.max_iter);
    return convex_kmeans_fit(data, c);
}

FitResult run_kamila(const MixedDataset& data, int k, std::uint64_t seed, const json& o) {
    check_option_keys("kamila", o, {"n_init", "max_iter", "smoothing"});
    KamilaConfig c;
    c.k = k;
    c.seed = seed;
    c.n_init = option(o, "n_init", c.n_init);
    c.max_iter = option(o, "max_iter", c.max_iter);
    c.smoothing = option(o, "smoothing", c.smoothing);
    return kamila_fit(data, c);
}

FitResult run_lcm(const MixedDataset& data, int k, std::uint64_t seed, const json& o) {
    check_option_keys("lcm", o, {"n_init", "max_iter", "tol", "smoothing"});
    LcmConfig c;
    c.k = k;
    c.seed = seed;
    c.n_init = option(o, "n_init", c.n_init);
    c.max_iter = option(o, "max_iter", c.max_iter);
    c.tol = option(o, "tol", c.tol);
    c.smoothing = option(o, "smoothing", c.smoothing);
    return lcm_fit(data, c);
}

FitResult run_mbn(const MixedDataset& data, int k, std::uint64_t seed, const json& o) { return mbn_cem_fit(data, mbn_options(o, k, seed)); }

struct Registry {
    std::mutex mutex;
    std::map<std::string, MethodFn> methods{
        {"kproto", run_kproto}, {"pdq", run_pdq}, {"convexkm", run_convexkm},
        {"kamila", run_kamila}, {"lcm", run_lcm}, {"mbn", run_mbn},
    };
};

Registry& registry() {
    static Registry r;
    return r;
}

MethodFn lookup(const std::string& name) {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    auto it = r.methods.find(name);
    if (it == r.methods.end()) throw ConfigError("unknown method '" + name + "'");
    return it->second;
}

std::string short_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

MbnConfig mbn_options(const json& o, int k, std::uint64_t seed) {
    check_option_keys("mbn", o, {"n_init", "max_cem_iter", "tabu_size", "max_moves", "relearn_structure", "monotone_guard"});
    MbnConfig c;
    c.k = k;
    c.seed = seed;
    c.n_init = option(o, "n_init", c.n_init);
    c.max_cem_iter = option(o, "max_cem_iter", c.max_cem_iter);
    c.structure.tabu_size = option(o, "tabu_size", c.structure.tabu_size);
    c.structure.max_moves = option(o, "max_moves", c.structure.max_moves);
    c.relearn_structure = option(o, "relearn_structure", c.relearn_structure);
    c.monotone_guard = option(o, "monotone_guard", c.monotone_guard);
    return c;
}

std::vector<std::string> builtin_methods() { return {"kproto", "pdq", "convexkm", "kamila", "lcm", "mbn"}; }

void register_method(const std::string& name, MethodFn fn) {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    r.methods[name] = std::move(fn);
}

bool has_method(const std::string& name) {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    return r.methods.count(name) > 0;
}

FitResult fit_method(const std::string& name, const MixedDataset& data, int k, std::uint64_t seed, const json& options) {
    return lookup(name)(data, k, seed, options.is_null() ? json::object() : options);
}

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

std::string Scenario::id() const {
    std::string s = model + "|K=" + std::to_string(k);
    if (model == "m1") {
        s += "|cluster_size=" + std::to_string(cluster_size) + "|overlap=" + short_number(overlap) +
             "|dimension=" + std::to_string(dimension) + "|prop=" + short_number(continuous_proportion);
    } else if (model == "m2") {
        s += "|N=" + std::to_string(n) + "|dimension=" + std::to_string(dimension) + "|prop=" + short_number(continuous_proportion) + "|pi=";
        for (std::size_t t = 0; t < pi.size(); ++t) s += (t ? "/" : "") + short_number(pi[t]);
    } else {
        s += "|N=" + std::to_string(n);
    }
    return s;
}

std::size_t Scenario::rows() const { return model == "m1" ? cluster_size * static_cast<std::size_t>(k) : n; }

GeneratedData Scenario::generate(std::uint64_t seed) const {
    if (model == "m1") {
        M1Config c;
        c.k = k;
        c.overlap = overlap;
        c.cluster_size = cluster_size;
        c.dimension = dimension;
        c.continuous_proportion = continuous_proportion;
        c.seed = seed;
        return gen_m1(c);
    }
    if (model == "m2") {
        M2Config c = M2Config::defaults(k);
        c.n = n;
        c.dimension = dimension;
        c.continuous_proportion = continuous_proportion;
        c.pi = pi;
        c.seed = seed;
        return gen_m2(c);
    }
    MbnSimConfig c{k, n, seed};
    if (model == "m3") return gen_m3(c);
    if (model == "m4") return gen_m4(c);
    throw ConfigError("unknown model '" + model + "'");
}

std::uint64_t stable_hash(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t data_seed(std::uint64_t base, const std::string& scenario_id, int replicate) {
    return base ^ stable_hash(scenario_id + "#" + std::to_string(replicate));
}

std::uint64_t method_seed(std::uint64_t seed, const std::string& method) { return derive_seed(seed, stable_hash(method)); }

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void config_error(const std::string& path, const std::string& reason) {
    throw ConfigError("config " + path + ": " + reason);
}

template <class T>
std::vector<T> factor_list(const json& factors, const std::string& key, std::vector<T> fallback) {
    if (!factors.contains(key)) return fallback;
    const auto& node = factors.at(key);
    const std::string path = "/factors/" + key;
    std::vector<T> out;
    try {
        if (node.is_array()) {
            for (const auto& v : node) out.push_back(v.get<T>());
        } else {
            out.push_back(node.get<T>());
        }
    } catch (const json::exception&) {
        config_error(path, "wrong value type");
    }
    if (out.empty()) config_error(path, "must not be empty");
    return out;
}

std::vector<std::vector<double>> pi_list(const json& factors) {
    if (!factors.contains("pi")) return {};
    const auto& node = factors.at("pi");
    std::vector<std::vector<double>> out;
    try {
        if (node.is_array() && !node.empty() && node.front().is_number()) {
            out.push_back(node.get<std::vector<double>>());
        } else {
            out = node.get<std::vector<std::vector<double>>>();
        }
    } catch (const json::exception&) {
        config_error("/factors/pi", "expected a list of probability vectors");
    }
    if (out.empty()) config_error("/factors/pi", "must not be empty");
    return out;
}

void check_factor_keys(const json& factors, std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : factors.items()) {
        bool known = false;
        for (const char* a : allowed) known |= key == a;
        if (!known) config_error("/factors/" + key, "not a factor of this model");
    }
}

}  // namespace

BenchConfig parse_config(const json& doc) {
    if (!doc.is_object()) config_error("/", "expected a JSON object");
    for (const auto& [key, value] : doc.items()) {
        static const std::set<std::string> known{"model", "factors", "methods", "replicates", "seed", "output_dir", "threads", "method_options"};
        if (!known.count(key)) config_error("/" + key, "unknown key");
    }
    BenchConfig cfg;
    if (!doc.contains("model") || !doc["model"].is_string()) config_error("/model", "required string (m1, m2, m3 or m4)");
    cfg.model = doc["model"].get<std::string>();
    if (cfg.model != "m1" && cfg.model != "m2" && cfg.model != "m3" && cfg.model != "m4")
        config_error("/model", "must be one of m1, m2, m3, m4");

    const json factors = doc.value("factors", json::object());
    if (!factors.is_object()) config_error("/factors", "expected an object");

    if (doc.contains("methods")) {
        if (!doc["methods"].is_array()) config_error("/methods", "expected a list of method names");
        for (std::size_t t = 0; t < doc["methods"].size(); ++t) {
            const auto& m = doc["methods"][t];
            const std::string path = "/methods/" + std::to_string(t);
            if (!m.is_string()) config_error(path, "expected a method name");
            if (!has_method(m.get<std::string>())) config_error(path, "unknown method '" + m.get<std::string>() + "'");
            cfg.methods.push_back(m.get<std::string>());
        }
    }
    auto integer = [&](const char* key, long long fallback, long long min) {
        if (!doc.contains(key)) return fallback;
        if (!doc[key].is_number_integer()) config_error(std::string("/") + key, "expected an integer");
        const auto v = doc[key].get<long long>();
        if (v < min) config_error(std::string("/") + key, "must be >= " + std::to_string(min));
        return v;
    };
    cfg.replicates = static_cast<int>(integer("replicates", 10, 1));
    cfg.threads = static_cast<int>(integer("threads", 0, 0));
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned() && !doc["seed"].is_number_integer()) config_error("/seed", "expected a non-negative integer");
        if (doc["seed"].is_number_integer() && doc["seed"].get<long long>() < 0) config_error("/seed", "expected a non-negative integer");
        cfg.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("output_dir")) {
        if (!doc["output_dir"].is_string()) config_error("/output_dir", "expected a path string");
        cfg.output_dir = doc["output_dir"].get<std::string>();
    }
    if (doc.contains("method_options")) {
        if (!doc["method_options"].is_object()) config_error("/method_options", "expected an object keyed by method");
        cfg.method_options = doc["method_options"];
        for (const auto& [key, value] : cfg.method_options.items())
            if (!value.is_object()) config_error("/method_options/" + key, "expected an object");
    }

    const auto ks = factor_list<int>(factors, "K", {2});
    for (int k : ks)
        if (k < 1) config_error("/factors/K", "values must be >= 1");

    if (cfg.model == "m1") {
        check_factor_keys(factors, {"K", "cluster_size", "overlap", "dimension", "continuous_proportion"});
        const auto sizes = factor_list<std::size_t>(factors, "cluster_size", {700});
        const auto overlaps = factor_list<double>(factors, "overlap", {0.3});
        const auto dims = factor_list<int>(factors, "dimension", {12});
        const auto props = factor_list<double>(factors, "continuous_proportion", {0.5});
        for (double o : overlaps)
            if (!(o >= 0.0 && o <= 1.0)) config_error("/factors/overlap", "values must lie in [0, 1]");
        for (int k : ks)
            for (auto s : sizes)
                for (double o : overlaps)
                    for (int d : dims)
                        for (double p : props) {
                            Scenario sc;
                            sc.model = "m1";
                            sc.k = k;
                            sc.cluster_size = s;
                            sc.overlap = o;
                            sc.dimension = d;
                            sc.continuous_proportion = p;
                            cfg.scenarios.push_back(sc);
                        }
    } else if (cfg.model == "m2") {
        check_factor_keys(factors, {"K", "N", "dimension", "continuous_proportion", "pi"});
        const auto ns = factor_list<std::size_t>(factors, "N", {1200});
        const auto dims = factor_list<int>(factors, "dimension", {12});
        const auto props = factor_list<double>(factors, "continuous_proportion", {1.0 / 3.0});
        const auto pis = pi_list(factors);
        for (int k : ks) {
            if (k != 2 && k != 3) config_error("/factors/K", "M2 parameters exist for K = 2 and 3 only");
            std::vector<std::vector<double>> matching;
            for (const auto& p : pis)
                if (p.size() == static_cast<std::size_t>(k)) matching.push_back(p);
            if (pis.empty()) matching.push_back(std::vector<double>(static_cast<std::size_t>(k), 1.0 / k));
            if (matching.empty()) config_error("/factors/pi", "no cluster distribution with " + std::to_string(k) + " entries");
            for (auto n : ns)
                for (int d : dims)
                    for (double p : props)
                        for (const auto& pi : matching) {
                            Scenario sc;
                            sc.model = "m2";
                            sc.k = k;
                            sc.n = n;
                            sc.dimension = d;
                            sc.continuous_proportion = p;
                            sc.pi = pi;
                            cfg.scenarios.push_back(sc);
                        }
        }
    } else {
        check_factor_keys(factors, {"K", "N"});
        const auto ns = factor_list<std::size_t>(factors, "N", {1200});
        for (int k : ks) {
            if (k < 2) config_error("/factors/K", "M3 and M4 need K >= 2");
            for (auto n : ns) {
                Scenario sc;
                sc.model = cfg.model;
                sc.k = k;
                sc.n = n;
                cfg.scenarios.push_back(sc);
            }
        }
    }
    return cfg;
}

BenchConfig load_config(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(io::read_text(path));
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    return parse_config(doc);
}

// ---------------------------------------------------------------------------
// Grid execution
// ---------------------------------------------------------------------------

std::vector<ScenarioResult> run_grid(const BenchConfig& config) {
    const std::size_t n_methods = config.methods.size();
    const std::size_t n_items = config.scenarios.size() * static_cast<std::size_t>(config.replicates);
    std::vector<ScenarioResult> results(n_items * n_methods);
    if (results.empty()) return results;

    std::vector<MethodFn> fns;
    for (const auto& m : config.methods) fns.push_back(lookup(m));

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t item = next++; item < n_items; item = next++) {
            const auto& scenario = config.scenarios[item / static_cast<std::size_t>(config.replicates)];
            const int rep = static_cast<int>(item % static_cast<std::size_t>(config.replicates));
            const std::string id = scenario.id();
            const std::uint64_t seed = data_seed(config.seed, id, rep);
            std::optional<GeneratedData> data;
            std::string gen_error;
            try {
                data = scenario.generate(seed);
            } catch (const std::exception& e) {
                gen_error = std::string("generate: ") + e.what();
            }
            for (std::size_t m = 0; m < n_methods; ++m) {
                auto& r = results[item * n_methods + m];
                r.scenario = scenario;
                r.method = config.methods[m];
                r.replicate = rep;
                r.seed = method_seed(seed, r.method);
                if (!data) {
                    r.error = gen_error;
                    continue;
                }
                const json options = config.method_options.value(r.method, json::object());
                const auto start = std::chrono::steady_clock::now();
                try {
                    FitResult fit = fns[m](data->data, scenario.k, r.seed, options);
                    r.ari = ari(data->truth, fit.partition);
                    r.ami = ami(data->truth, fit.partition);
                    r.iterations = fit.iterations;
                    r.converged = fit.converged;
                } catch (const std::exception& e) {
                    r.error = e.what();
                    if (r.error.empty()) r.error = "unknown error";
                } catch (...) {
                    r.error = "unknown error";
                }
                r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            }
        }
    };

    unsigned threads = config.threads > 0 ? static_cast<unsigned>(config.threads) : std::max(1U, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_items));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return results;
}

std::vector<SummaryRow> summarize(const std::vector<ScenarioResult>& results) {
    if (results.empty()) throw ConfigError("summarize: no results");
    std::vector<SummaryRow> rows;
    std::map<std::pair<std::string, std::string>, std::size_t> index;
    std::vector<std::vector<const ScenarioResult*>> groups;
    for (const auto& r : results) {
        auto key = std::make_pair(r.scenario.id(), r.method);
        auto [it, inserted] = index.emplace(key, rows.size());
        if (inserted) {
            SummaryRow row;
            row.scenario = r.scenario;
            row.method = r.method;
            rows.push_back(row);
            groups.emplace_back();
        }
        groups[it->second].push_back(&r);
    }
    auto mean_sd = [](const std::vector<double>& v) {
        if (v.empty()) return std::make_pair(std::nan(""), std::nan(""));
        double m = 0.0;
        for (double x : v) m += x;
        m /= static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - m) * (x - m);
        return std::make_pair(m, v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0);
    };
    for (std::size_t g = 0; g < rows.size(); ++g) {
        std::vector<double> a, b;
        for (const auto* r : groups[g]) {
            if (r->ok()) {
                a.push_back(r->ari);
                b.push_back(r->ami);
                ++rows[g].n_ok;
            } else {
                ++rows[g].n_fail;
            }
        }
        std::tie(rows[g].mean_ari, rows[g].sd_ari) = mean_sd(a);
        std::tie(rows[g].mean_ami, rows[g].sd_ami) = mean_sd(b);
    }
    return rows;
}

std::vector<SummaryRow> run_and_report(const BenchConfig& config) {
    auto results = run_grid(config);
    std::filesystem::create_directories(config.output_dir);
    write_replicates_csv(config.output_dir / "replicates.csv", results);
    if (results.empty()) {
        write_summary_csv(config.output_dir / "results.csv", {});
        return {};
    }
    auto summary = summarize(results);
    emit_report(summary, config.output_dir);
    return summary;
}

}  // namespace mixclust::bench
