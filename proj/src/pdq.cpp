#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mixclust/distance_methods.hpp"

namespace mixclust {

PdqDistance PdqDistance::from(const MixedDataset& dataset) {
    auto stats = column_stats(dataset);
    PdqDistance d;
    const auto cont = dataset.continuous_columns();
    const auto ord = dataset.ordinal_columns();
    const auto nom = dataset.nominal_columns();
    const double p = static_cast<double>(dataset.cols());
    d.alpha_continuous = static_cast<double>(cont.size()) / p;
    d.alpha_ordinal = static_cast<double>(ord.size()) / p;
    d.alpha_nominal = static_cast<double>(nom.size()) / p;
    for (auto j : cont) d.scale.push_back(stats[j].scale);
    for (auto j : ord) d.ordinal_range.push_back(std::max(stats[j].rank_range, 1e-12));
    return d;
}

std::vector<double> pdq_memberships(std::span<const double> distances, std::span<const double> sizes) {
    const std::size_t k = distances.size();
    std::vector<double> p(k, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
        if (distances[c] <= 0.0) {
            p[c] = 1.0;
            return p;
        }
    }
    // Stationary point of sum_k p_k^2 d_k / s_k under sum_k p_k = 1:
    // 2 p_k d_k / s_k = lambda, hence p_k proportional to s_k / d_k.
    double total = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        p[c] = sizes[c] / distances[c];
        total += p[c];
    }
    for (double& v : p) v /= total;
    return p;
}

namespace {

constexpr double kMinSize = 1e-12;
constexpr double kWeiszfeldFloor = 1e-12;

struct PdqData {
    Eigen::MatrixXd x;     // n x R, raw values
    Eigen::MatrixXi ord;   // n x S_O, ranks as 0-based codes
    Eigen::MatrixXi nom;   // n x S_N
    std::vector<int> nom_levels;
    PdqDistance dist;
};

struct Centers {
    Eigen::MatrixXd x;    // K x R
    Eigen::MatrixXi ord;  // K x S_O
    Eigen::MatrixXi nom;  // K x S_N
};

Eigen::MatrixXi select_codes(const MixedDataset& ds, const std::vector<std::size_t>& cols) {
    Eigen::MatrixXi out(static_cast<Eigen::Index>(ds.rows()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
        auto v = ds.categorical_column(cols[c]);
        for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = v[i];
    }
    return out;
}

double continuous_part(const PdqData& d, const Eigen::Ref<const Eigen::RowVectorXd>& row,
                       const Eigen::Ref<const Eigen::RowVectorXd>& center) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < row.size(); ++j) {
        double z = (row(j) - center(j)) / d.dist.scale[static_cast<std::size_t>(j)];
        s += z * z;
    }
    return std::sqrt(s);
}

struct DistanceParts {
    double cont = 0.0;
    double total = 0.0;
};

DistanceParts row_distance(const PdqData& d, Eigen::Index i, const Centers& c, Eigen::Index k) {
    DistanceParts out;
    if (d.x.cols() > 0) out.cont = continuous_part(d, d.x.row(i), c.x.row(k));
    double dord = 0.0;
    for (Eigen::Index j = 0; j < d.ord.cols(); ++j)
        dord += std::abs(d.ord(i, j) - c.ord(k, j)) / d.dist.ordinal_range[static_cast<std::size_t>(j)];
    double dnom = 0.0;
    for (Eigen::Index j = 0; j < d.nom.cols(); ++j) dnom += d.nom(i, j) != c.nom(k, j);
    out.total = d.dist.alpha_continuous * out.cont + d.dist.alpha_ordinal * dord + d.dist.alpha_nominal * dnom;
    return out;
}

// Distance between two rows under the same combination, for medoid seeding.
double row_to_row(const PdqData& d, Eigen::Index a, Eigen::Index b) {
    double dc = d.x.cols() > 0 ? continuous_part(d, d.x.row(a), d.x.row(b)) : 0.0;
    double dord = 0.0;
    for (Eigen::Index j = 0; j < d.ord.cols(); ++j)
        dord += std::abs(d.ord(a, j) - d.ord(b, j)) / d.dist.ordinal_range[static_cast<std::size_t>(j)];
    double dnom = 0.0;
    for (Eigen::Index j = 0; j < d.nom.cols(); ++j) dnom += d.nom(a, j) != d.nom(b, j);
    return d.dist.alpha_continuous * dc + d.dist.alpha_ordinal * dord + d.dist.alpha_nominal * dnom;
}

// Lowest value m minimising sum_i w_i |v_i - m|.
int weighted_median(std::vector<std::pair<int, double>>& items) {
    std::sort(items.begin(), items.end());
    double total = 0.0;
    for (auto& [v, w] : items) total += w;
    double acc = 0.0;
    for (auto& [v, w] : items) {
        acc += w;
        if (acc >= 0.5 * total) return v;
    }
    return items.back().first;
}

Centers medoid_seeds(const PdqData& d, int k) {
    const Eigen::Index n = d.x.rows();
    // Componentwise median / mode profile of the whole sample.
    Centers profile;
    profile.x.resize(1, d.x.cols());
    profile.ord.resize(1, d.ord.cols());
    profile.nom.resize(1, d.nom.cols());
    for (Eigen::Index j = 0; j < d.x.cols(); ++j) {
        std::vector<double> v(d.x.col(j).data(), d.x.col(j).data() + n);
        std::sort(v.begin(), v.end());
        profile.x(0, j) = quantile_sorted(v, 0.5);
    }
    for (Eigen::Index j = 0; j < d.ord.cols(); ++j) {
        std::vector<std::pair<int, double>> items;
        for (Eigen::Index i = 0; i < n; ++i) items.emplace_back(d.ord(i, j), 1.0);
        profile.ord(0, j) = weighted_median(items);
    }
    for (Eigen::Index j = 0; j < d.nom.cols(); ++j) {
        std::vector<int> counts(static_cast<std::size_t>(d.nom_levels[static_cast<std::size_t>(j)]), 0);
        for (Eigen::Index i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(d.nom(i, j))];
        profile.nom(0, j) = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    }

    std::vector<Eigen::Index> chosen;
    Eigen::Index first = 0;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
        double v = row_distance(d, i, profile, 0).total;
        if (v < best) {
            best = v;
            first = i;
        }
    }
    chosen.push_back(first);
    std::vector<double> nearest(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    while (static_cast<int>(chosen.size()) < k) {
        Eigen::Index far = -1;
        double far_d = -1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            auto iu = static_cast<std::size_t>(i);
            nearest[iu] = std::min(nearest[iu], row_to_row(d, i, chosen.back()));
            if (std::find(chosen.begin(), chosen.end(), i) != chosen.end()) continue;
            if (nearest[iu] > far_d) {
                far_d = nearest[iu];
                far = i;
            }
        }
        chosen.push_back(far);
    }

    Centers c;
    c.x.resize(k, d.x.cols());
    c.ord.resize(k, d.ord.cols());
    c.nom.resize(k, d.nom.cols());
    for (int m = 0; m < k; ++m) {
        auto row = chosen[static_cast<std::size_t>(m)];
        if (d.x.cols() > 0) c.x.row(m) = d.x.row(row);
        if (d.ord.cols() > 0) c.ord.row(m) = d.ord.row(row);
        if (d.nom.cols() > 0) c.nom.row(m) = d.nom.row(row);
    }
    return c;
}

double jdf(const Eigen::MatrixXd& p, const Eigen::MatrixXd& dist, const std::vector<double>& sizes) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i)
        for (Eigen::Index k = 0; k < p.cols(); ++k)
            total += p(i, k) * p(i, k) * dist(i, k) / sizes[static_cast<std::size_t>(k)];
    return total;
}

}  // namespace

FitResult pdq_fit(const MixedDataset& dataset, const PdqConfig& config) {
    require_valid(dataset);
    const std::size_t n = dataset.rows();
    if (config.k < 1) throw ConfigError("PDQ: K must be >= 1");
    if (static_cast<std::size_t>(config.k) > n) throw ConfigError("PDQ: K exceeds the number of rows");
    if (n < 2) throw DegenerateDataError("PDQ needs at least 2 rows");

    PdqData d;
    d.x = continuous_matrix(dataset);
    d.ord = select_codes(dataset, dataset.ordinal_columns());
    const auto nom_cols = dataset.nominal_columns();
    d.nom = select_codes(dataset, nom_cols);
    for (auto j : nom_cols) d.nom_levels.push_back(dataset.column(j).level_count());
    d.dist = PdqDistance::from(dataset);

    const int k = config.k;
    const auto ni = static_cast<Eigen::Index>(n);
    Centers centers = medoid_seeds(d, k);
    std::vector<double> sizes(static_cast<std::size_t>(k), static_cast<double>(n) / k);
    Eigen::MatrixXd dist(ni, k), cont(ni, k), p(ni, k);

    FitResult out;
    out.seed = config.seed;
    double previous = std::numeric_limits<double>::quiet_NaN();
    for (int iter = 1; iter <= config.max_iter; ++iter) {
        out.iterations = iter;
        for (Eigen::Index i = 0; i < ni; ++i) {
            for (Eigen::Index c = 0; c < k; ++c) {
                auto parts = row_distance(d, i, centers, c);
                dist(i, c) = parts.total;
                cont(i, c) = parts.cont;
            }
            std::vector<double> dr(static_cast<std::size_t>(k));
            for (Eigen::Index c = 0; c < k; ++c) dr[static_cast<std::size_t>(c)] = dist(i, c);
            auto pr = pdq_memberships(dr, sizes);
            for (Eigen::Index c = 0; c < k; ++c) p(i, c) = pr[static_cast<std::size_t>(c)];
        }
        double value = jdf(p, dist, sizes);
        out.trace.push_back(value);
        if (!std::isnan(previous)) {
            double rel = std::abs(previous - value) / std::max(std::abs(previous), 1e-300);
            if (rel < config.tol) {
                out.converged = true;
                break;
            }
        }
        previous = value;
        if (value == 0.0) {
            out.converged = true;
            break;
        }

        // Cluster sizes.
        if (config.size_update == PdqSizeUpdate::membership_sum) {
            for (Eigen::Index c = 0; c < k; ++c) sizes[static_cast<std::size_t>(c)] = std::max(p.col(c).sum(), kMinSize);
        } else {
            std::vector<double> root(static_cast<std::size_t>(k));
            double total = 0.0;
            for (Eigen::Index c = 0; c < k; ++c) {
                double a = 0.0;
                for (Eigen::Index i = 0; i < ni; ++i) a += p(i, c) * p(i, c) * dist(i, c);
                root[static_cast<std::size_t>(c)] = std::sqrt(a);
                total += root[static_cast<std::size_t>(c)];
            }
            for (Eigen::Index c = 0; c < k; ++c) {
                auto cu = static_cast<std::size_t>(c);
                sizes[cu] = total > 0.0 ? std::max(static_cast<double>(n) * root[cu] / total, kMinSize)
                                        : static_cast<double>(n) / k;
            }
        }

        // Centres from dJDF/dmu = 0: Weiszfeld step for the continuous block,
        // weighted median for ordinals, weighted mode for nominals.
        for (Eigen::Index c = 0; c < k; ++c) {
            if (d.x.cols() > 0) {
                Eigen::RowVectorXd num = Eigen::RowVectorXd::Zero(d.x.cols());
                double den = 0.0;
                for (Eigen::Index i = 0; i < ni; ++i) {
                    double w = p(i, c) * p(i, c) / std::max(cont(i, c), kWeiszfeldFloor);
                    num += w * d.x.row(i);
                    den += w;
                }
                if (den > 0.0) centers.x.row(c) = num / den;
            }
            for (Eigen::Index j = 0; j < d.ord.cols(); ++j) {
                std::vector<std::pair<int, double>> items;
                items.reserve(n);
                for (Eigen::Index i = 0; i < ni; ++i) items.emplace_back(d.ord(i, j), p(i, c) * p(i, c));
                centers.ord(c, j) = weighted_median(items);
            }
            for (Eigen::Index j = 0; j < d.nom.cols(); ++j) {
                std::vector<double> weight(static_cast<std::size_t>(d.nom_levels[static_cast<std::size_t>(j)]), 0.0);
                for (Eigen::Index i = 0; i < ni; ++i) weight[static_cast<std::size_t>(d.nom(i, j))] += p(i, c) * p(i, c);
                centers.nom(c, j) = static_cast<int>(argmax(weight));
            }
        }
    }

    out.objective = out.trace.back();
    out.partition = Partition::from_soft(p);
    out.details["alpha_continuous"] = d.dist.alpha_continuous;
    out.details["alpha_ordinal"] = d.dist.alpha_ordinal;
    out.details["alpha_nominal"] = d.dist.alpha_nominal;

    const auto ord_cols = dataset.ordinal_columns();
    for (int c = 0; c < k; ++c) {
        ClusterPrototype proto;
        for (Eigen::Index j = 0; j < centers.x.cols(); ++j) proto.continuous_center.push_back(centers.x(c, j));
        std::size_t oi = 0, ni_ = 0;
        for (auto j : dataset.categorical_columns()) {
            if (std::find(ord_cols.begin(), ord_cols.end(), j) != ord_cols.end())
                proto.categorical_center.push_back(centers.ord(c, static_cast<Eigen::Index>(oi++)));
            else
                proto.categorical_center.push_back(centers.nom(c, static_cast<Eigen::Index>(ni_++)));
        }
        out.prototypes.push_back(std::move(proto));
    }
    return out;
}

}  // namespace mixclust
