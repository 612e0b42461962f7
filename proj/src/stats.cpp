#include "vocscreen/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vocscreen/common.hpp"
#include "vocscreen/rng.hpp"

namespace vocscreen {

namespace {

Matrix with_intercept(const Matrix& x) {
    Matrix d(x.rows(), x.cols() + 1);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        d(i, 0) = 1.0;
        for (std::size_t j = 0; j < x.cols(); ++j) d(i, j + 1) = x(i, j);
    }
    return d;
}

// clamp keeps IRLS weights and reported probabilities strictly inside (0,1)
double clamp_proba(double p) { return std::min(1.0 - 1e-12, std::max(1e-12, p)); }

double log1pexp(double z) {
    // log(1 + exp(z)) without overflow
    if (z > 35.0) return z;
    if (z < -35.0) return std::exp(z);
    return std::log1p(std::exp(z));
}

}  // namespace

double OlsFit::predict(std::span<const double> features) const {
    std::size_t k = 0;
    double s = 0.0;
    if (intercept) s = coefficients[k++];
    for (double f : features) s += coefficients[k++] * f;
    return s;
}

OlsFit ols_fit(const Matrix& x, std::span<const double> y, bool intercept) {
    if (x.rows() != y.size()) throw ConfigError("ols_fit: X/y row mismatch");
    const Matrix design = intercept ? with_intercept(x) : x;
    const std::size_t n = design.rows();
    const std::size_t p = design.cols();
    if (n <= p) throw EstimationError("ols_fit: need more rows than columns (" +
                                      std::to_string(n) + " rows, " + std::to_string(p) + " columns)");

    HouseholderQr qr(design);
    if (!qr.full_rank()) {
        int col = qr.deficient_column();
        std::string which = intercept ? (col == 0 ? std::string("intercept")
                                                  : "column " + std::to_string(col - 1))
                                      : "column " + std::to_string(col);
        throw EstimationError("ols_fit: rank-deficient design (" + which + ")");
    }

    OlsFit fit;
    fit.intercept = intercept;
    fit.coefficients = qr.solve(y);

    fit.residuals.resize(n);
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double pred = dot(design.row(i), fit.coefficients);
        fit.residuals[i] = y[i] - pred;
        rss += fit.residuals[i] * fit.residuals[i];
    }
    fit.residual_variance = rss / static_cast<double>(n - p);

    const std::vector<double> gram_diag = qr.rinv_gram_diagonal();
    fit.standard_errors.resize(p);
    for (std::size_t j = 0; j < p; ++j)
        fit.standard_errors[j] = std::sqrt(fit.residual_variance * gram_diag[j]);
    return fit;
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double LogisticFit::score(std::span<const double> features) const {
    double s = coefficients[0];
    for (std::size_t j = 0; j < features.size(); ++j) s += coefficients[j + 1] * features[j];
    return s;
}

double LogisticFit::predict_proba(std::span<const double> features) const {
    return clamp_proba(sigmoid(score(features)));
}

LogisticFit logistic_fit(const Matrix& x, std::span<const int> y, double lambda, int max_iter,
                         double tol) {
    if (x.rows() != y.size()) throw ConfigError("logistic_fit: X/y row mismatch");
    if (lambda < 0.0) throw ConfigError("logistic_fit: negative lambda");
    bool has0 = false, has1 = false;
    for (int v : y) {
        if (v == 0) has0 = true;
        else if (v == 1) has1 = true;
        else throw ConfigError("logistic_fit: labels must be 0/1");
    }
    if (!has0 || !has1) throw ConfigError("logistic_fit: single class");

    const Matrix design = with_intercept(x);
    const std::size_t n = design.rows();
    const std::size_t p = design.cols();

    std::vector<double> beta(p, 0.0);

    auto penalized_loglik = [&](const std::vector<double>& b) {
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double eta = dot(design.row(i), b);
            ll += (y[i] ? eta : 0.0) - log1pexp(eta);
        }
        double pen = 0.0;
        for (std::size_t j = 1; j < p; ++j) pen += b[j] * b[j];
        return ll - 0.5 * lambda * pen;
    };

    LogisticFit fit;
    fit.lambda = lambda;
    double ll = penalized_loglik(beta);
    fit.loglik_path.push_back(ll);

    for (int iter = 0; iter < max_iter; ++iter) {
        // gradient and Hessian of the penalized log-likelihood
        std::vector<double> grad(p, 0.0);
        Matrix hess(p, p);
        for (std::size_t i = 0; i < n; ++i) {
            auto row = design.row(i);
            const double pi = clamp_proba(sigmoid(dot(row, beta)));
            const double w = pi * (1.0 - pi);
            const double r = static_cast<double>(y[i]) - pi;
            for (std::size_t a = 0; a < p; ++a) {
                grad[a] += row[a] * r;
                for (std::size_t b = a; b < p; ++b) hess(a, b) += w * row[a] * row[b];
            }
        }
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = 0; b < a; ++b) hess(a, b) = hess(b, a);
        for (std::size_t j = 1; j < p; ++j) {
            grad[j] -= lambda * beta[j];
            hess(j, j) += lambda;
        }

        std::vector<double> delta;
        double jitter = 0.0;
        while (!cholesky_solve(hess, grad, delta)) {
            jitter = jitter == 0.0 ? 1e-10 : jitter * 100.0;
            if (jitter > 1e-2) break;
            for (std::size_t j = 0; j < p; ++j) hess(j, j) += jitter;
        }
        if (delta.empty()) {
            fit.converged = false;
            break;
        }

        // step halving keeps the penalized likelihood non-decreasing
        double step = 1.0;
        std::vector<double> candidate(p);
        double ll_new = ll;
        bool improved = false;
        for (int h = 0; h < 40; ++h) {
            for (std::size_t j = 0; j < p; ++j) candidate[j] = beta[j] + step * delta[j];
            ll_new = penalized_loglik(candidate);
            if (ll_new >= ll - 1e-12 * (1.0 + std::abs(ll))) {
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) {
            fit.converged = false;
            break;
        }

        double max_update = 0.0;
        for (std::size_t j = 0; j < p; ++j)
            max_update = std::max(max_update, std::abs(candidate[j] - beta[j]));
        beta = candidate;
        ll = std::max(ll, ll_new);
        fit.loglik_path.push_back(ll);
        fit.iterations = iter + 1;
        if (max_update < tol) {
            fit.converged = true;
            break;
        }
    }

    fit.coefficients = std::move(beta);
    return fit;
}

std::vector<double> midranks(std::span<const double> pooled) {
    const std::size_t n = pooled.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return pooled[i] < pooled[j]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
        // average of ranks i+1 .. j+1; a half-integer, exact in double
        const double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

namespace {

// Null distribution of U for sample sizes (n, m) without ties:
// counts[u] = number of arrangements with U = u, u in 0..n*m.
std::vector<double> u_count_distribution(std::size_t n, std::size_t m) {
    std::vector<std::vector<double>> c(n + 1, std::vector<double>(n * m + 1, 0.0));
    // c[a][u] holds counts for first-sample size a against full second sample size m
    // recurrence over the pooled ordering: U(a, b, u) = U(a-1, b, u-b) + U(a, b-1, u)
    // computed as a 2-D sweep over b
    std::vector<std::vector<double>> prev(n + 1, std::vector<double>(n * m + 1, 0.0));
    prev[0][0] = 1.0;  // b = 0: only U = 0 for any a? handled in sweep below
    for (std::size_t a = 0; a <= n; ++a) prev[a][0] = 1.0;
    for (std::size_t b = 1; b <= m; ++b) {
        std::vector<std::vector<double>> cur(n + 1, std::vector<double>(n * m + 1, 0.0));
        cur[0][0] = 1.0;
        for (std::size_t a = 1; a <= n; ++a) {
            for (std::size_t u = 0; u <= a * b; ++u) {
                double s = cur[a - 1][u >= b ? u - b : 0];
                if (u < b) s = 0.0;                    // term exists only when u >= b
                s += prev[a][u];                       //   (largest element from sample A)
                cur[a][u] = s;
            }
        }
        prev = std::move(cur);
    }
    return prev[n];
}

}  // namespace

UTestResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                           Alternative alternative) {
    if (a.empty() || b.empty()) throw ConfigError("mann_whitney_u: empty sample");
    const std::size_t na = a.size(), nb = b.size();
    const std::size_t n = na + nb;

    std::vector<double> pooled;
    pooled.reserve(n);
    pooled.insert(pooled.end(), a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    const std::vector<double> ranks = midranks(pooled);

    double rank_sum_a = 0.0;
    for (std::size_t i = 0; i < na; ++i) rank_sum_a += ranks[i];
    const double u_a = rank_sum_a - static_cast<double>(na * (na + 1)) / 2.0;
    const double u_b = static_cast<double>(na * nb) - u_a;

    // tie structure of the pooled sample
    std::vector<double> sorted(pooled);
    std::sort(sorted.begin(), sorted.end());
    bool ties = false;
    double tie_term = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        if (t > 1.0) {
            ties = true;
            tie_term += t * t * t - t;
        }
        i = j + 1;
    }

    UTestResult res;
    res.u_statistic = u_a;
    res.u_other = u_b;
    res.alternative = alternative;

    if (na <= kExactUTestCap && nb <= kExactUTestCap && !ties) {
        res.method = "exact";
        const std::vector<double> counts = u_count_distribution(na, nb);
        double total = 0.0;
        for (double c : counts) total += c;
        const long long u_obs = std::llround(u_a);
        const long long nm = static_cast<long long>(na * nb);
        double tail = 0.0;
        if (alternative == Alternative::Greater) {
            for (long long u = u_obs; u <= nm; ++u) tail += counts[static_cast<std::size_t>(u)];
        } else if (alternative == Alternative::Less) {
            for (long long u = 0; u <= u_obs; ++u) tail += counts[static_cast<std::size_t>(u)];
        } else {
            // count |2U - nm| >= |2u_obs - nm| in integer arithmetic
            const long long dev = std::llabs(2 * u_obs - nm);
            for (long long u = 0; u <= nm; ++u)
                if (std::llabs(2 * u - nm) >= dev) tail += counts[static_cast<std::size_t>(u)];
        }
        res.p_value = tail / total;
        return res;
    }

    res.method = "normal-approximation";
    const double mu = static_cast<double>(na * nb) / 2.0;
    const double nn = static_cast<double>(n);
    double sigma2 = static_cast<double>(na * nb) / 12.0 *
                    ((nn + 1.0) - tie_term / (nn * (nn - 1.0)));
    if (sigma2 <= 0.0) {
        res.p_value = 1.0;  // all observations tied
        return res;
    }
    const double sigma = std::sqrt(sigma2);
    auto upper = [&](double u) { return 1.0 - normal_cdf((u - mu - 0.5) / sigma); };
    auto lower = [&](double u) { return normal_cdf((u - mu + 0.5) / sigma); };
    double p = 1.0;
    switch (alternative) {
        case Alternative::Greater: p = upper(u_a); break;
        case Alternative::Less: p = lower(u_a); break;
        case Alternative::TwoSided:
            if (u_a > mu) p = 2.0 * upper(u_a);
            else if (u_a < mu) p = 2.0 * lower(u_a);
            else p = 1.0;
            break;
    }
    res.p_value = std::min(1.0, std::max(0.0, p));
    return res;
}

PermutationResult permutation_test(const PermutationStatistic& statistic, std::size_t n_rows,
                                   int k, std::uint64_t seed, exec::Mode mode) {
    if (k < 1) throw ConfigError("permutation_test: K must be >= 1");

    std::vector<std::size_t> identity(n_rows);
    std::iota(identity.begin(), identity.end(), 0);
    const std::optional<double> obs = statistic(identity);
    if (!obs) throw EstimationError("permutation_test: statistic failed on observed data");

    std::vector<std::optional<double>> draws(static_cast<std::size_t>(k));
    exec::for_each_index(static_cast<std::size_t>(k), mode, [&](std::size_t idx) {
        Rng rng = Rng::stream(seed, idx);
        const std::vector<std::size_t> perm = rng.permutation(n_rows);
        draws[idx] = statistic(perm);
    });

    PermutationResult res;
    res.observed = *obs;
    res.seed = seed;
    res.permuted.reserve(draws.size());
    for (const auto& d : draws) {
        if (d)
            res.permuted.push_back(*d);
        else
            ++res.failed;
    }
    std::size_t exceed = 0;
    for (double v : res.permuted)
        if (std::abs(v) >= std::abs(res.observed)) ++exceed;
    res.p_value = static_cast<double>(exceed + 1) / static_cast<double>(res.permuted.size() + 1);
    return res;
}

}  // namespace vocscreen
