#include "vocscreen/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <set>

#include "vocscreen/common.hpp"
#include "vocscreen/rng.hpp"

namespace vocscreen {

namespace {

Matrix global_covariance(const Matrix& x) {
    const std::size_t n = x.rows(), d = x.cols();
    std::vector<double> mu(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) mu[j] += x(i, j);
    for (double& m : mu) m /= static_cast<double>(n);
    Matrix cov(d, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < d; ++a) {
            const double da = x(i, a) - mu[a];
            for (std::size_t b = a; b < d; ++b) cov(a, b) += da * (x(i, b) - mu[b]);
        }
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b) {
            cov(a, b) /= static_cast<double>(n);
            cov(b, a) = cov(a, b);
        }
    for (std::size_t a = 0; a < d; ++a) cov(a, a) += kCovarianceFloor;
    return cov;
}

struct ComponentDensity {
    Matrix chol;     // lower factor of the covariance
    double log_norm; // -d/2 log(2pi) - 1/2 logdet
};

ComponentDensity prepare_density(const Matrix& cov) {
    ComponentDensity cd;
    cd.chol = cov;
    if (!cholesky_factor(cd.chol))
        throw EstimationError("gmm: covariance not positive definite despite floor");
    const double d = static_cast<double>(cov.rows());
    cd.log_norm = -0.5 * d * std::log(2.0 * std::numbers::pi) - 0.5 * cholesky_logdet(cd.chol);
    return cd;
}

double log_gaussian(const ComponentDensity& cd, std::span<const double> x,
                    std::span<const double> mu, std::vector<double>& scratch) {
    const std::size_t d = x.size();
    scratch.resize(d);
    for (std::size_t j = 0; j < d; ++j) scratch[j] = x[j] - mu[j];
    const std::vector<double> z = forward_substitute(cd.chol, scratch);
    return cd.log_norm - 0.5 * dot(z, z);
}

// k-means++ seeding: spread initial means over the data
std::vector<std::size_t> kmeanspp_centers(const Matrix& x, std::size_t k, Rng& rng) {
    const std::size_t n = x.rows();
    std::vector<std::size_t> centers;
    centers.push_back(static_cast<std::size_t>(rng.below(n)));
    std::vector<double> dist2(n, std::numeric_limits<double>::infinity());
    while (centers.size() < k) {
        const std::size_t last = centers.back();
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double d2 = 0.0;
            for (std::size_t j = 0; j < x.cols(); ++j) {
                const double diff = x(i, j) - x(last, j);
                d2 += diff * diff;
            }
            dist2[i] = std::min(dist2[i], d2);
            total += dist2[i];
        }
        if (total <= 0.0) {
            centers.push_back(static_cast<std::size_t>(rng.below(n)));
            continue;
        }
        double target = rng.uniform() * total;
        std::size_t pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            target -= dist2[i];
            if (target <= 0.0) {
                pick = i;
                break;
            }
        }
        centers.push_back(pick);
    }
    return centers;
}

GmmFit em_run(const Matrix& x, std::size_t k, std::uint64_t seed, std::uint64_t restart,
              double tol, int max_iter, exec::Mode mode) {
    const std::size_t n = x.rows(), d = x.cols();
    Rng rng = Rng::stream(seed, restart);

    GmmFit fit;
    fit.k = k;
    fit.seed = seed;
    fit.weights.assign(k, 1.0 / static_cast<double>(k));
    fit.means = Matrix(k, d);
    const Matrix base_cov = global_covariance(x);
    fit.covariances.assign(k, base_cov);

    const std::vector<std::size_t> centers = kmeanspp_centers(x, k, rng);
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t j = 0; j < d; ++j) fit.means(c, j) = x(centers[c], j);

    fit.responsibilities = Matrix(n, k);
    bool reseeded_once = false;
    double prev_ll = -std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < max_iter; ++iter) {
        // E-step: rows are independent; per-row log-likelihoods are summed
        // serially afterwards so the total is scheduling-independent.
        std::vector<ComponentDensity> dens;
        dens.reserve(k);
        for (std::size_t c = 0; c < k; ++c) dens.push_back(prepare_density(fit.covariances[c]));
        std::vector<double> log_w(k);
        for (std::size_t c = 0; c < k; ++c) log_w[c] = std::log(fit.weights[c]);

        std::vector<double> row_ll(n, 0.0);
        exec::for_each_index(n, mode, [&](std::size_t i) {
            std::vector<double> lp(k), scratch;
            for (std::size_t c = 0; c < k; ++c)
                lp[c] = log_w[c] + log_gaussian(dens[c], x.row(i), fit.means.row(c), scratch);
            const double m = *std::max_element(lp.begin(), lp.end());
            double s = 0.0;
            for (std::size_t c = 0; c < k; ++c) s += std::exp(lp[c] - m);
            const double lse = m + std::log(s);
            row_ll[i] = lse;
            for (std::size_t c = 0; c < k; ++c) fit.responsibilities(i, c) = std::exp(lp[c] - lse);
        });

        double ll = 0.0;
        for (double v : row_ll) ll += v;

        if (iter > 0 && ll < prev_ll - 1e-7 * (1.0 + std::abs(prev_ll)))
            throw EstimationError("gmm: EM log-likelihood decreased");
        fit.loglik_path.push_back(ll);
        fit.log_likelihood = ll;
        fit.iterations = iter + 1;

        const bool small_gain = iter > 0 && (ll - prev_ll) < tol;
        prev_ll = ll;

        // M-step
        bool collapsed = false;
        for (std::size_t c = 0; c < k; ++c) {
            double nk = 0.0;
            for (std::size_t i = 0; i < n; ++i) nk += fit.responsibilities(i, c);
            if (nk < 1e-10 * static_cast<double>(n)) {
                if (reseeded_once)
                    throw EstimationError("gmm: component collapsed twice");
                reseeded_once = true;
                collapsed = true;
                const std::size_t pick = static_cast<std::size_t>(rng.below(n));
                for (std::size_t j = 0; j < d; ++j) fit.means(c, j) = x(pick, j);
                fit.covariances[c] = base_cov;
                fit.weights[c] = 1.0 / static_cast<double>(n);
                double wsum = 0.0;
                for (double w : fit.weights) wsum += w;
                for (double& w : fit.weights) w /= wsum;
                continue;
            }
            fit.weights[c] = nk / static_cast<double>(n);
            std::vector<double> mu(d, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                const double r = fit.responsibilities(i, c);
                for (std::size_t j = 0; j < d; ++j) mu[j] += r * x(i, j);
            }
            for (double& m : mu) m /= nk;
            for (std::size_t j = 0; j < d; ++j) fit.means(c, j) = mu[j];

            Matrix cov(d, d);
            for (std::size_t i = 0; i < n; ++i) {
                const double r = fit.responsibilities(i, c);
                if (r == 0.0) continue;
                for (std::size_t a = 0; a < d; ++a) {
                    const double da = x(i, a) - mu[a];
                    for (std::size_t b = a; b < d; ++b) cov(a, b) += r * da * (x(i, b) - mu[b]);
                }
            }
            for (std::size_t a = 0; a < d; ++a)
                for (std::size_t b = a; b < d; ++b) {
                    cov(a, b) /= nk;
                    cov(b, a) = cov(a, b);
                }
            for (std::size_t a = 0; a < d; ++a) cov(a, a) += kCovarianceFloor;
            fit.covariances[c] = std::move(cov);
        }

        if (small_gain && !collapsed) {
            fit.converged = true;
            break;
        }
    }
    return fit;
}

}  // namespace

double GmmFit::log_density(std::span<const double> x) const {
    std::vector<double> lp(k), scratch;
    for (std::size_t c = 0; c < k; ++c) {
        const ComponentDensity cd = prepare_density(covariances[c]);
        lp[c] = std::log(weights[c]) + log_gaussian(cd, x, means.row(c), scratch);
    }
    const double m = *std::max_element(lp.begin(), lp.end());
    double s = 0.0;
    for (double v : lp) s += std::exp(v - m);
    return m + std::log(s);
}

std::vector<int> GmmFit::assignments() const {
    std::vector<int> out(responsibilities.rows(), 0);
    for (std::size_t i = 0; i < responsibilities.rows(); ++i) {
        double best = -1.0;
        for (std::size_t c = 0; c < k; ++c)
            if (responsibilities(i, c) > best) {
                best = responsibilities(i, c);
                out[i] = static_cast<int>(c);
            }
    }
    return out;
}

GmmFit fit_gmm(const Matrix& x, std::size_t k, std::uint64_t seed, int restarts, double tol,
               int max_iter, exec::Mode mode) {
    if (k < 1) throw ConfigError("gmm: k must be >= 1");
    if (x.rows() <= k) throw ConfigError("gmm: need more points than components");
    if (x.cols() < 1) throw ConfigError("gmm: need at least one dimension");
    if (tol <= 0.0) throw ConfigError("gmm: tol must be > 0");
    if (restarts < 1) throw ConfigError("gmm: restarts must be >= 1");

    GmmFit best;
    bool have = false;
    std::string last_error;
    for (int r = 0; r < restarts; ++r) {
        try {
            GmmFit fit = em_run(x, k, seed, static_cast<std::uint64_t>(r), tol, max_iter, mode);
            if (!have || fit.log_likelihood > best.log_likelihood) {
                best = std::move(fit);
                have = true;
            }
        } catch (const EstimationError& e) {
            last_error = e.what();
        }
    }
    if (!have) throw EstimationError("gmm: every restart failed (" + last_error + ")");
    return best;
}

std::size_t gmm_parameter_count(std::size_t k, std::size_t d) {
    return (k - 1) + k * d + k * d * (d + 1) / 2;
}

SelectionTable select_k(const Matrix& x, const std::vector<std::size_t>& k_range,
                        const std::string& criterion, std::uint64_t seed, int restarts,
                        exec::Mode mode) {
    if (k_range.empty()) throw ConfigError("select_k: empty k range");
    if (criterion != "bic" && criterion != "aic")
        throw ConfigError("select_k: criterion must be 'bic' or 'aic'");

    const double n = static_cast<double>(x.rows());
    SelectionTable table;
    table.criterion = criterion;
    for (std::size_t k : k_range) {
        // per-k seed stream shared across the sweep
        const GmmFit fit = fit_gmm(x, k, Rng::stream(seed, k).next_u64(), restarts, 1e-6, 500, mode);
        SelectionTable::Row row;
        row.k = k;
        row.log_likelihood = fit.log_likelihood;
        row.parameter_count = gmm_parameter_count(k, x.cols());
        row.bic = -2.0 * fit.log_likelihood + static_cast<double>(row.parameter_count) * std::log(n);
        row.aic = -2.0 * fit.log_likelihood + 2.0 * static_cast<double>(row.parameter_count);
        table.rows.push_back(row);
    }
    double best = std::numeric_limits<double>::infinity();
    for (const auto& row : table.rows) {
        const double score = criterion == "bic" ? row.bic : row.aic;
        // strict comparison breaks ties toward the smaller k listed first
        if (score < best) {
            best = score;
            table.chosen_k = row.k;
        }
    }
    return table;
}

std::string selection_to_csv(const SelectionTable& table) {
    std::string out = "k,bic,aic,log_likelihood,parameter_count,chosen\n";
    for (const auto& r : table.rows) {
        out += std::to_string(r.k) + "," + render_double(r.bic) + "," + render_double(r.aic) + "," +
               render_double(r.log_likelihood) + "," + std::to_string(r.parameter_count) + "," +
               (r.k == table.chosen_k ? "1" : "0") + "\n";
    }
    return out;
}

PcaResult pca_project(const Matrix& x, std::size_t dims) {
    const std::size_t n = x.rows(), d = x.cols();
    if (dims < 1 || dims > std::min(n - 1, d))
        throw ConfigError("pca: dims must be in [1, min(n-1, d)]");

    PcaResult res;
    res.column_means.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) res.column_means[j] += x(i, j);
    for (double& m : res.column_means) m /= static_cast<double>(n);

    Matrix centered(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) centered(i, j) = x(i, j) - res.column_means[j];

    SvdResult svd = jacobi_svd(centered);

    // sign convention: largest-magnitude loading per component is positive
    for (std::size_t c = 0; c < svd.v.cols(); ++c) {
        std::size_t arg = 0;
        double best = 0.0;
        for (std::size_t j = 0; j < d; ++j)
            if (std::abs(svd.v(j, c)) > best) {
                best = std::abs(svd.v(j, c));
                arg = j;
            }
        if (svd.v(arg, c) < 0.0) {
            for (std::size_t j = 0; j < d; ++j) svd.v(j, c) = -svd.v(j, c);
            for (std::size_t i = 0; i < n; ++i) svd.u(i, c) = -svd.u(i, c);
        }
    }

    double total = 0.0;
    for (double s : svd.sigma) total += s * s;

    res.projection = Matrix(n, dims);
    res.loadings = Matrix(d, dims);
    res.explained_ratio.resize(dims);
    for (std::size_t c = 0; c < dims; ++c) {
        res.explained_ratio[c] = total > 0.0 ? svd.sigma[c] * svd.sigma[c] / total : 0.0;
        for (std::size_t i = 0; i < n; ++i) res.projection(i, c) = svd.u(i, c) * svd.sigma[c];
        for (std::size_t j = 0; j < d; ++j) res.loadings(j, c) = svd.v(j, c);
    }
    return res;
}

double silhouette(const Matrix& x, std::span<const int> labels, exec::Mode mode) {
    const std::size_t n = x.rows();
    if (labels.size() != n) throw ConfigError("silhouette: label/row mismatch");

    std::map<int, std::size_t> sizes;
    for (int l : labels) ++sizes[l];
    if (sizes.size() < 2) throw ConfigError("silhouette: need at least two clusters");

    std::vector<int> cluster_ids;
    for (const auto& [l, _] : sizes) cluster_ids.push_back(l);

    std::vector<double> s(n, 0.0);
    exec::for_each_index(n, mode, [&](std::size_t i) {
        std::map<int, double> dist_sum;
        for (int l : cluster_ids) dist_sum[l] = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            double d2 = 0.0;
            for (std::size_t c = 0; c < x.cols(); ++c) {
                const double diff = x(i, c) - x(j, c);
                d2 += diff * diff;
            }
            dist_sum[labels[j]] += std::sqrt(d2);
        }
        const std::size_t own = sizes[labels[i]];
        if (own <= 1) {
            s[i] = 0.0;  // singleton convention
            return;
        }
        const double a = dist_sum[labels[i]] / static_cast<double>(own - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int l : cluster_ids) {
            if (l == labels[i]) continue;
            b = std::min(b, dist_sum[l] / static_cast<double>(sizes[l]));
        }
        const double denom = std::max(a, b);
        s[i] = denom > 0.0 ? (b - a) / denom : 0.0;  // 0/0 defined as 0
    });

    double total = 0.0;
    for (double v : s) total += v;
    return total / static_cast<double>(n);
}

namespace {
// contingency table plus marginals for a pair of labelings
struct Contingency {
    std::vector<std::vector<double>> cells;
    std::vector<double> row_sums, col_sums;
    double n = 0.0;
};

Contingency contingency(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) throw ConfigError("label vectors differ in length");
    if (a.size() < 2) throw ConfigError("need at least two observations");
    std::map<int, std::size_t> amap, bmap;
    for (int v : a) amap.emplace(v, amap.size());
    for (int v : b) bmap.emplace(v, bmap.size());
    Contingency c;
    c.cells.assign(amap.size(), std::vector<double>(bmap.size(), 0.0));
    c.row_sums.assign(amap.size(), 0.0);
    c.col_sums.assign(bmap.size(), 0.0);
    c.n = static_cast<double>(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const std::size_t ra = amap[a[i]], cb = bmap[b[i]];
        c.cells[ra][cb] += 1.0;
        c.row_sums[ra] += 1.0;
        c.col_sums[cb] += 1.0;
    }
    return c;
}

double comb2(double x) { return x * (x - 1.0) / 2.0; }
}  // namespace

double adjusted_rand_index(std::span<const int> labels_a, std::span<const int> labels_b) {
    const Contingency c = contingency(labels_a, labels_b);
    double sum_cells = 0.0, sum_rows = 0.0, sum_cols = 0.0;
    for (std::size_t i = 0; i < c.cells.size(); ++i)
        for (double v : c.cells[i]) sum_cells += comb2(v);
    for (double v : c.row_sums) sum_rows += comb2(v);
    for (double v : c.col_sums) sum_cols += comb2(v);
    const double expected = sum_rows * sum_cols / comb2(c.n);
    const double max_index = 0.5 * (sum_rows + sum_cols);
    if (max_index == expected) return 1.0;  // both partitions trivial
    return (sum_cells - expected) / (max_index - expected);
}

double normalized_mutual_information(std::span<const int> labels_a, std::span<const int> labels_b) {
    const Contingency c = contingency(labels_a, labels_b);
    auto entropy = [&](const std::vector<double>& marg) {
        double h = 0.0;
        for (double v : marg) {
            if (v <= 0.0) continue;
            const double p = v / c.n;
            h -= p * std::log(p);
        }
        return h;
    };
    const double ha = entropy(c.row_sums);
    const double hb = entropy(c.col_sums);
    if (ha == 0.0 && hb == 0.0) return 1.0;  // single cluster vs single cluster

    double mi = 0.0;
    for (std::size_t i = 0; i < c.cells.size(); ++i) {
        for (std::size_t j = 0; j < c.cells[i].size(); ++j) {
            const double v = c.cells[i][j];
            if (v <= 0.0) continue;
            const double p = v / c.n;
            mi += p * std::log(v * c.n / (c.row_sums[i] * c.col_sums[j]));
        }
    }
    return mi / (0.5 * (ha + hb));
}

AlignedScore align_and_score(std::span<const int> clusters, std::span<const int> truth) {
    if (clusters.size() != truth.size()) throw ConfigError("align_and_score: length mismatch");
    if (clusters.empty()) throw ConfigError("align_and_score: empty input");
    for (int t : truth)
        if (t != 0 && t != 1) throw ConfigError("align_and_score: truth must be binary");

    std::map<int, std::size_t> cmap;
    for (int c : clusters) cmap.emplace(c, cmap.size());
    const std::size_t k = cmap.size();

    auto f1_of = [&](const std::vector<int>& mapping) {
        double tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < clusters.size(); ++i) {
            const int pred = mapping[cmap[clusters[i]]];
            if (pred == 1 && truth[i] == 1) ++tp;
            else if (pred == 1) ++fp;
            else if (truth[i] == 1) ++fn;
        }
        return (2.0 * tp + fp + fn) > 0.0 ? 2.0 * tp / (2.0 * tp + fp + fn) : 0.0;
    };

    AlignedScore out;
    if (k == 2) {
        for (const std::vector<int>& mapping : {std::vector<int>{0, 1}, std::vector<int>{1, 0}}) {
            const double f1 = f1_of(mapping);
            if (f1 >= out.f1) {
                out.f1 = f1;
                out.cluster_to_class = mapping;
            }
        }
        return out;
    }

    // majority rule per cluster
    std::vector<double> pos(k, 0.0), tot(k, 0.0);
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        const std::size_t c = cmap[clusters[i]];
        pos[c] += truth[i];
        tot[c] += 1.0;
    }
    std::vector<int> mapping(k, 0);
    for (std::size_t c = 0; c < k; ++c) mapping[c] = pos[c] * 2.0 >= tot[c] ? 1 : 0;
    out.cluster_to_class = mapping;
    out.f1 = f1_of(mapping);
    return out;
}

}  // namespace vocscreen
