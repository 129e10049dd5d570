#include "mixclust/lcm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace mixclust {

namespace {

constexpr double kVarianceFloorRatio = 1e-6;
constexpr double kAbsoluteVarianceFloor = 1e-12;
constexpr double kLogFloor = -745.0;

struct LcmData {
    Eigen::MatrixXd v;  // n x R
    Eigen::MatrixXi w;  // n x S
    std::vector<int> levels;
    Eigen::RowVectorXd col_mean;
    Eigen::RowVectorXd col_var;
    Eigen::RowVectorXd var_floor;
};

LcmData prepare(const MixedDataset& dataset) {
    LcmData d;
    d.v = continuous_matrix(dataset);
    d.w = categorical_matrix(dataset);
    for (auto j : dataset.categorical_columns()) d.levels.push_back(dataset.column(j).level_count());
    const auto n = static_cast<double>(d.v.rows());
    d.col_mean = d.v.colwise().mean();
    d.col_var.resize(d.v.cols());
    d.var_floor.resize(d.v.cols());
    for (Eigen::Index j = 0; j < d.v.cols(); ++j) {
        const double ss = (d.v.col(j).array() - d.col_mean(j)).square().sum();
        d.col_var(j) = n > 1 ? ss / (n - 1) : 0.0;
        d.var_floor(j) = std::max(kVarianceFloorRatio * d.col_var(j), kAbsoluteVarianceFloor);
    }
    return d;
}

void check_params(const LcmData& d, const LcmParams& p) {
    const auto k = static_cast<Eigen::Index>(p.mixing.size());
    if (k < 1 || p.means.rows() != k || p.variances.rows() != k || p.means.cols() != d.v.cols() ||
        p.variances.cols() != d.v.cols() || p.theta.size() != p.mixing.size())
        throw ValidationError("LCM parameters do not match the dataset schema");
    for (const auto& per_class : p.theta) {
        if (per_class.size() != d.levels.size()) throw ValidationError("LCM parameters do not match the dataset schema");
        for (std::size_t s = 0; s < d.levels.size(); ++s)
            if (per_class[s].size() != static_cast<std::size_t>(d.levels[s]))
                throw ValidationError("LCM parameters do not match the dataset schema");
    }
}

double safe_log(double v) { return v > 0.0 ? std::log(v) : kLogFloor; }

Eigen::MatrixXd log_joint(const LcmData& d, const LcmParams& p) {
    const Eigen::Index n = d.v.rows();
    const int k = p.k();
    Eigen::MatrixXd out(n, k);
    const double log_2pi = std::log(2.0 * std::numbers::pi);
    for (int c = 0; c < k; ++c) {
        double base = safe_log(p.mixing[static_cast<std::size_t>(c)]);
        for (Eigen::Index j = 0; j < d.v.cols(); ++j) base -= 0.5 * (log_2pi + std::log(p.variances(c, j)));
        const auto& th = p.theta[static_cast<std::size_t>(c)];
        for (Eigen::Index i = 0; i < n; ++i) {
            double s = base;
            for (Eigen::Index j = 0; j < d.v.cols(); ++j) {
                const double z = d.v(i, j) - p.means(c, j);
                s -= 0.5 * z * z / p.variances(c, j);
            }
            for (std::size_t t = 0; t < d.levels.size(); ++t)
                s += safe_log(th[t][static_cast<std::size_t>(d.w(i, static_cast<Eigen::Index>(t)))]);
            out(i, c) = s;
        }
    }
    return out;
}

// Rows of `joint` become responsibilities; returns the log-likelihood.
double normalize_rows(Eigen::MatrixXd& joint) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < joint.rows(); ++i) {
        const double m = joint.row(i).maxCoeff();
        double s = 0.0;
        for (Eigen::Index c = 0; c < joint.cols(); ++c) s += std::exp(joint(i, c) - m);
        const double lse = m + std::log(s);
        total += lse;
        for (Eigen::Index c = 0; c < joint.cols(); ++c) joint(i, c) = std::exp(joint(i, c) - lse);
    }
    return total;
}

double log_prior(const LcmParams& p, double smoothing) {
    if (smoothing == 0.0) return 0.0;
    double s = 0.0;
    for (const auto& per_class : p.theta)
        for (const auto& t : per_class)
            for (double v : t) s += safe_log(v);
    return smoothing * s;
}

std::vector<double> flat_dirichlet(int m, std::mt19937_64& rng) {
    std::gamma_distribution<double> g(1.0, 1.0);
    std::vector<double> t(static_cast<std::size_t>(m));
    double total = 0.0;
    for (double& v : t) total += (v = g(rng));
    for (double& v : t) v /= total;
    return t;
}

// Random start that depends on the data only through column summaries, so it
// is unaffected by row order.
LcmParams random_start(const LcmData& d, int k, std::mt19937_64& rng) {
    LcmParams p;
    p.mixing.assign(static_cast<std::size_t>(k), 1.0 / k);
    p.means.resize(k, d.v.cols());
    p.variances.resize(k, d.v.cols());
    std::normal_distribution<double> z(0.0, 1.0);
    for (int c = 0; c < k; ++c) {
        for (Eigen::Index j = 0; j < d.v.cols(); ++j) {
            p.means(c, j) = d.col_mean(j) + std::sqrt(d.col_var(j)) * z(rng);
            p.variances(c, j) = std::max(d.col_var(j), d.var_floor(j));
        }
        std::vector<std::vector<double>> per_class;
        for (int m : d.levels) per_class.push_back(flat_dirichlet(m, rng));
        p.theta.push_back(std::move(per_class));
    }
    return p;
}

// Returns true when some class had to be restarted at a random row.
bool m_step(const LcmData& d, const Eigen::MatrixXd& resp, LcmParams& p, double smoothing, std::mt19937_64& rng) {
    const Eigen::Index n = d.v.rows();
    const int k = p.k();
    bool repaired = false;
    for (int c = 0; c < k; ++c) {
        const double nk = resp.col(c).sum();
        auto& th = p.theta[static_cast<std::size_t>(c)];
        if (!(nk > std::numeric_limits<double>::min() * static_cast<double>(n))) {
            std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
            const Eigen::Index row = pick(rng);
            p.mixing[static_cast<std::size_t>(c)] = 1.0 / static_cast<double>(n);
            for (Eigen::Index j = 0; j < d.v.cols(); ++j) {
                p.means(c, j) = d.v(row, j);
                p.variances(c, j) = std::max(d.col_var(j), d.var_floor(j));
            }
            for (std::size_t s = 0; s < d.levels.size(); ++s) {
                auto& t = th[s];
                const auto m = static_cast<double>(t.size());
                std::fill(t.begin(), t.end(), smoothing / (1.0 + m * smoothing));
                t[static_cast<std::size_t>(d.w(row, static_cast<Eigen::Index>(s)))] += 1.0 / (1.0 + m * smoothing);
            }
            repaired = true;
            continue;
        }
        p.mixing[static_cast<std::size_t>(c)] = nk / static_cast<double>(n);
        for (Eigen::Index j = 0; j < d.v.cols(); ++j) {
            const double mean = resp.col(c).dot(d.v.col(j)) / nk;
            const double var = (resp.col(c).array() * (d.v.col(j).array() - mean).square()).sum() / nk;
            p.means(c, j) = mean;
            p.variances(c, j) = std::max(var, d.var_floor(j));
        }
        for (std::size_t s = 0; s < d.levels.size(); ++s) {
            auto& t = th[s];
            std::fill(t.begin(), t.end(), 0.0);
            for (Eigen::Index i = 0; i < n; ++i) t[static_cast<std::size_t>(d.w(i, static_cast<Eigen::Index>(s)))] += resp(i, c);
            const double denom = nk + smoothing * static_cast<double>(t.size());
            for (double& v : t) v = (v + smoothing) / denom;
        }
    }
    double total = 0.0;
    for (double a : p.mixing) total += a;
    for (double& a : p.mixing) a /= total;
    return repaired;
}

struct LcmRun {
    LcmParams params;
    Eigen::MatrixXd resp;
    double objective = -std::numeric_limits<double>::infinity();
    double loglik = -std::numeric_limits<double>::infinity();
    std::vector<double> trace;
    std::vector<double> loglik_trace;
    std::vector<std::size_t> repairs;
    int iterations = 0;
    bool converged = false;
};

LcmRun run_once(const LcmData& d, const LcmConfig& cfg, LcmParams start, std::mt19937_64& rng) {
    LcmRun run;
    run.params = std::move(start);
    run.resp = log_joint(d, run.params);
    normalize_rows(run.resp);
    double previous = -std::numeric_limits<double>::infinity();
    for (int iter = 1; iter <= cfg.max_iter; ++iter) {
        run.iterations = iter;
        const bool repaired = m_step(d, run.resp, run.params, cfg.smoothing, rng);
        run.resp = log_joint(d, run.params);
        run.loglik = normalize_rows(run.resp);
        const double current = run.loglik + log_prior(run.params, cfg.smoothing);
        if (repaired) run.repairs.push_back(run.trace.size());
        run.trace.push_back(current);
        run.loglik_trace.push_back(run.loglik);
        run.objective = current;
        if (!repaired && std::isfinite(previous) && (current - previous) < cfg.tol * std::abs(previous)) {
            run.converged = true;
            break;
        }
        previous = current;
    }
    return run;
}

}  // namespace

Eigen::MatrixXd lcm_log_joint(const MixedDataset& dataset, const LcmParams& params) {
    auto d = prepare(dataset);
    check_params(d, params);
    return log_joint(d, params);
}

double lcm_loglik(const MixedDataset& dataset, const LcmParams& params) {
    auto joint = lcm_log_joint(dataset, params);
    double total = 0.0;
    std::vector<double> row(static_cast<std::size_t>(joint.cols()));
    for (Eigen::Index i = 0; i < joint.rows(); ++i) {
        for (Eigen::Index c = 0; c < joint.cols(); ++c) row[static_cast<std::size_t>(c)] = joint(i, c);
        total += log_sum_exp(row);
    }
    return total;
}

double lcm_log_prior(const LcmParams& params, double smoothing) { return log_prior(params, smoothing); }

namespace {

LcmResult fit_impl(const MixedDataset& dataset, const LcmConfig& config, const LcmParams* start) {
    require_valid(dataset);
    if (config.k < 1) throw ConfigError("LCM: K must be >= 1");
    if (dataset.rows() < 2) throw DegenerateDataError("LCM needs at least 2 rows");
    if (static_cast<std::size_t>(config.k) > dataset.rows()) throw ConfigError("LCM: K exceeds the number of rows");
    if (config.n_init < 1 || config.max_iter < 1) throw ConfigError("LCM: n_init and max_iter must be >= 1");
    if (config.smoothing < 0.0 || config.tol < 0.0) throw ConfigError("LCM: smoothing and tol must be >= 0");

    const auto d = prepare(dataset);
    LcmRun best;
    if (start) {
        check_params(d, *start);
        if (start->k() != config.k) throw ValidationError("LCM: start parameters have the wrong number of classes");
        std::mt19937_64 rng(config.seed);
        best = run_once(d, config, *start, rng);
    }
    for (int r = 0; !start && r < config.n_init; ++r) {
        std::mt19937_64 rng(derive_seed(config.seed, static_cast<std::uint64_t>(r)));
        auto start = random_start(d, config.k, rng);
        auto run = run_once(d, config, std::move(start), rng);
        if (run.objective > best.objective) best = std::move(run);
    }

    LcmResult out;
    out.fit.partition = Partition::from_soft(best.resp);
    out.fit.objective = best.objective;
    out.fit.iterations = best.iterations;
    out.fit.converged = best.converged;
    out.fit.seed = config.seed;
    out.fit.trace = best.trace;
    out.fit.repairs = best.repairs;
    out.fit.details["loglik"] = best.loglik;
    for (int c = 0; c < config.k; ++c) {
        ClusterPrototype p;
        for (Eigen::Index j = 0; j < best.params.means.cols(); ++j) p.continuous_center.push_back(best.params.means(c, j));
        for (const auto& t : best.params.theta[static_cast<std::size_t>(c)]) {
            p.categorical_center.push_back(static_cast<int>(argmax(t)));
            p.level_freqs.push_back(t);
        }
        out.fit.prototypes.push_back(std::move(p));
    }
    out.params = std::move(best.params);
    out.loglik_trace = std::move(best.loglik_trace);
    return out;
}

}  // namespace

LcmResult lcm_fit_model(const MixedDataset& dataset, const LcmConfig& config) { return fit_impl(dataset, config, nullptr); }

LcmResult lcm_refine(const MixedDataset& dataset, const LcmParams& start, const LcmConfig& config) {
    return fit_impl(dataset, config, &start);
}

FitResult lcm_fit(const MixedDataset& dataset, const LcmConfig& config) { return lcm_fit_model(dataset, config).fit; }

}  // namespace mixclust
