#include "vocscreen/causal.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "vocscreen/common.hpp"
#include "vocscreen/stats.hpp"

namespace vocscreen {

using nlohmann::json;

namespace {

constexpr double kPropensityClipLo = 0.01;
constexpr double kPropensityClipHi = 0.99;

std::size_t view_column(const AnalysisView& view, const std::string& name) {
    for (std::size_t j = 0; j < view.feature_names.size(); ++j)
        if (view.feature_names[j] == name) return j;
    throw ConfigError("causal query references unknown column '" + name + "'");
}

struct ResolvedQuery {
    std::vector<std::size_t> treatment_cols;
    std::vector<std::size_t> confounder_cols;
};

ResolvedQuery resolve(const AnalysisView& view, const CausalQuery& q) {
    if (q.treatments.empty()) throw ConfigError("causal query needs at least one treatment");
    if (q.outcome != view.outcome_name)
        throw ConfigError("causal query outcome '" + q.outcome + "' does not match view outcome '" +
                          view.outcome_name + "'");
    ResolvedQuery r;
    for (const auto& t : q.treatments) r.treatment_cols.push_back(view_column(view, t));
    for (const auto& c : q.confounders) r.confounder_cols.push_back(view_column(view, c));
    std::vector<std::size_t> all = r.treatment_cols;
    all.insert(all.end(), r.confounder_cols.begin(), r.confounder_cols.end());
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end())
        throw ConfigError("causal query roles overlap");
    return r;
}

// design matrix [selected columns of view.x], optionally with rows of the
// first `n_permuted` columns taken in permuted order
Matrix gather(const AnalysisView& view, const std::vector<std::size_t>& cols,
              std::span<const std::size_t> perm, std::size_t n_permuted) {
    const std::size_t n = view.n();
    Matrix m(n, cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
        const bool permuted = j < n_permuted && !perm.empty();
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t src = permuted ? perm[i] : i;
            m(i, j) = view.x(src, cols[j]);
        }
    }
    return m;
}

CausalEstimate backdoor_estimate(const AnalysisView& view, const CausalQuery& q,
                                 const ResolvedQuery& r, std::span<const std::size_t> perm) {
    std::vector<std::size_t> cols = r.treatment_cols;
    cols.insert(cols.end(), r.confounder_cols.begin(), r.confounder_cols.end());
    const Matrix design = gather(view, cols, perm, r.treatment_cols.size());
    const OlsFit fit = ols_fit(design, view.y, /*intercept=*/true);

    CausalEstimate est;
    est.estimator = CausalEstimator::BackdoorRegression;
    est.treatment_names = q.treatments;
    est.adjusted_confounders = q.confounders;
    est.components.resize(r.treatment_cols.size());
    for (std::size_t j = 0; j < r.treatment_cols.size(); ++j)
        est.components[j] = fit.coefficients[j + 1];  // after the intercept
    est.ate = 0.0;
    for (double c : est.components) est.ate += c;
    return est;
}

CausalEstimate ipw_estimate(const AnalysisView& view, const CausalQuery& q, const ResolvedQuery& r,
                            std::span<const std::size_t> perm) {
    if (r.treatment_cols.size() != 1)
        throw ConfigError("ipw estimator handles a single treatment");
    const std::size_t n = view.n();
    const std::size_t tcol = r.treatment_cols[0];

    std::vector<double> traw(n);
    for (std::size_t i = 0; i < n; ++i)
        traw[i] = view.x(perm.empty() ? i : perm[i], tcol);

    CausalEstimate est;
    est.estimator = CausalEstimator::Ipw;
    est.treatment_names = q.treatments;
    est.adjusted_confounders = q.confounders;

    std::vector<int> t(n);
    bool binary = true;
    for (double v : traw)
        if (v != 0.0 && v != 1.0) binary = false;
    if (binary) {
        for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<int>(traw[i]);
    } else {
        const double cut = quantile(traw, 0.5);
        for (std::size_t i = 0; i < n; ++i) t[i] = traw[i] > cut ? 1 : 0;
        est.dichotomized = true;
        est.dichotomize_threshold = cut;
    }

    const Matrix conf = gather(view, r.confounder_cols, {}, 0);
    std::vector<double> propensity(n);
    if (r.confounder_cols.empty()) {
        double tm = 0.0;
        for (int v : t) tm += v;
        tm /= static_cast<double>(n);
        std::fill(propensity.begin(), propensity.end(), tm);
    } else {
        const LogisticFit prop = logistic_fit(conf, t, /*lambda=*/1e-6);
        for (std::size_t i = 0; i < n; ++i) propensity[i] = prop.predict_proba(conf.row(i));
    }

    std::size_t clipped = 0;
    double sw1 = 0.0, sy1 = 0.0, sw0 = 0.0, sy0 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double e = propensity[i];
        if (e < kPropensityClipLo || e > kPropensityClipHi) {
            e = std::clamp(e, kPropensityClipLo, kPropensityClipHi);
            ++clipped;
        }
        if (t[i] == 1) {
            const double w = 1.0 / e;
            sw1 += w;
            sy1 += w * view.y[i];
        } else {
            const double w = 1.0 / (1.0 - e);
            sw0 += w;
            sy0 += w * view.y[i];
        }
    }
    if (clipped == n) throw EstimationError("ipw: propensity saturated, every weight clipped");
    if (sw1 == 0.0 || sw0 == 0.0) throw EstimationError("ipw: one treatment arm is empty");

    est.ate = sy1 / sw1 - sy0 / sw0;
    est.components = {est.ate};
    return est;
}

CausalEstimate reverse_estimate(const AnalysisView& view, const CausalQuery& q,
                                const ResolvedQuery& r, std::span<const std::size_t> perm) {
    const std::size_t n = view.n();

    CausalEstimate est;
    est.estimator = CausalEstimator::BackdoorRegression;
    est.treatment_names = q.treatments;
    est.adjusted_confounders = q.confounders;

    // design: [outcome | confounders]; a placebo permutation shuffles the
    // outcome column, which plays the treatment role in this direction
    Matrix design(n, 1 + r.confounder_cols.size());
    for (std::size_t i = 0; i < n; ++i) {
        design(i, 0) = view.y[perm.empty() ? i : perm[i]];
        for (std::size_t j = 0; j < r.confounder_cols.size(); ++j)
            design(i, j + 1) = view.x(i, r.confounder_cols[j]);
    }

    est.components.resize(r.treatment_cols.size());
    for (std::size_t v = 0; v < r.treatment_cols.size(); ++v) {
        const std::vector<double> target = view.x.col(r.treatment_cols[v]);
        const OlsFit fit = ols_fit(design, target, /*intercept=*/true);
        est.components[v] = fit.coefficients[1];  // outcome coefficient
    }
    est.ate = 0.0;
    for (double c : est.components) est.ate += c;
    return est;
}

CausalEstimate estimate_with_perm(const AnalysisView& view, const CausalQuery& q,
                                  const ResolvedQuery& r, std::span<const std::size_t> perm) {
    if (q.direction == CausalDirection::Reverse) return reverse_estimate(view, q, r, perm);
    if (q.estimator == CausalEstimator::Ipw) return ipw_estimate(view, q, r, perm);
    return backdoor_estimate(view, q, r, perm);
}

}  // namespace

CausalEstimate estimate_ate(const AnalysisView& view, const CausalQuery& q) {
    const ResolvedQuery r = resolve(view, q);
    return estimate_with_perm(view, q, r, {});
}

CausalEstimate estimate_joint(const AnalysisView& view, const CausalQuery& q) {
    if (q.treatments.size() < 2) throw ConfigError("joint query needs >= 2 treatments");
    CausalQuery backdoor = q;
    backdoor.estimator = CausalEstimator::BackdoorRegression;  // one regression, all treatments
    const ResolvedQuery r = resolve(view, backdoor);
    return estimate_with_perm(view, backdoor, r, {});
}

RefutationResult refute_placebo(const AnalysisView& view, const CausalQuery& q, int k,
                                std::uint64_t seed, exec::Mode mode) {
    if (k < 1) throw ConfigError("refute_placebo: K must be >= 1");
    const ResolvedQuery r = resolve(view, q);

    const PermutationStatistic statistic =
        [&](std::span<const std::size_t> perm) -> std::optional<double> {
        try {
            return estimate_with_perm(view, q, r, perm).ate;
        } catch (const Error&) {
            return std::nullopt;
        }
    };

    const PermutationResult pr = permutation_test(statistic, view.n(), k, seed, mode);
    if (pr.failed * 10 > static_cast<std::size_t>(k))
        throw EstimationError("refute_placebo: " + std::to_string(pr.failed) + " of " +
                              std::to_string(k) + " permutations failed");

    RefutationResult res;
    res.original_ate = pr.observed;
    res.p_value = pr.p_value;
    res.k = static_cast<int>(pr.permuted.size());
    res.seed = seed;
    res.failed = pr.failed;
    res.mean_placebo = pr.permuted.empty() ? 0.0 : mean(pr.permuted);
    return res;
}

CausalEstimate estimate_reverse(const AnalysisView& view, const CausalQuery& q) {
    const ResolvedQuery r = resolve(view, q);
    return reverse_estimate(view, q, r, {});
}

SensitivityReport sensitivity(const AnalysisView& view, const CausalQuery& q,
                              const std::vector<std::vector<std::string>>& subsets) {
    if (subsets.empty()) throw ConfigError("sensitivity: empty subset list");

    SensitivityReport rep;
    rep.baseline_ate = estimate_ate(view, q).ate;
    rep.percent_defined = rep.baseline_ate != 0.0;

    for (const auto& subset : subsets) {
        CausalQuery sub = q;
        sub.confounders = subset;
        SensitivityReport::Entry e;
        e.confounders = subset;
        e.ate = estimate_ate(view, sub).ate;
        e.percent_change = rep.percent_defined
                               ? 100.0 * std::abs(e.ate - rep.baseline_ate) / std::abs(rep.baseline_ate)
                               : std::abs(e.ate - rep.baseline_ate);
        rep.max_percent_change = std::max(rep.max_percent_change, e.percent_change);
        rep.entries.push_back(std::move(e));
    }
    return rep;
}

const char* to_string(CausalEstimator e) {
    return e == CausalEstimator::Ipw ? "ipw" : "backdoor-regression";
}
const char* to_string(CausalDirection d) {
    return d == CausalDirection::Reverse ? "reverse" : "forward";
}

std::string causal_report_to_json(const CausalReport& report) {
    json j;
    j["records"] = json::array();
    for (const auto& r : report.records) {
        json rec;
        rec["treatments"] = r.treatments;
        rec["outcome"] = r.outcome;
        rec["direction"] = r.direction;
        rec["estimator"] = r.estimator;
        rec["ok"] = r.ok;
        if (!r.ok) rec["error"] = r.error;
        rec["ate"] = r.ate;
        rec["components"] = r.components;
        if (r.refute_mean) rec["refute_mean"] = *r.refute_mean;
        if (r.p_value) rec["p_value"] = *r.p_value;
        if (r.k) rec["k"] = *r.k;
        rec["seed"] = r.seed;
        rec["confounders"] = r.confounders;
        j["records"].push_back(std::move(rec));
    }
    if (!report.notes.empty()) j["notes"] = report.notes;
    return j.dump(2) + "\n";
}

CausalReport parse_causal_report(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("causal report JSON: ") + e.what());
    }
    CausalReport rep;
    try {
        for (const auto& rec : j.at("records")) {
            CausalRecord r;
            r.treatments = rec.at("treatments").get<std::vector<std::string>>();
            r.outcome = rec.at("outcome").get<std::string>();
            r.direction = rec.at("direction").get<std::string>();
            r.estimator = rec.at("estimator").get<std::string>();
            r.ok = rec.value("ok", true);
            r.error = rec.value("error", std::string());
            r.ate = rec.at("ate").get<double>();
            r.components = rec.at("components").get<std::vector<double>>();
            if (rec.contains("refute_mean")) r.refute_mean = rec["refute_mean"].get<double>();
            if (rec.contains("p_value")) r.p_value = rec["p_value"].get<double>();
            if (rec.contains("k")) r.k = rec["k"].get<int>();
            r.seed = rec.value("seed", 0ull);
            r.confounders = rec.at("confounders").get<std::vector<std::string>>();
            rep.records.push_back(std::move(r));
        }
        rep.notes = j.value("notes", std::string());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("causal report JSON: ") + e.what());
    }
    return rep;
}

}  // namespace vocscreen
