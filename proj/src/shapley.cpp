#include "vocscreen/shapley.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vocscreen/common.hpp"
#include "vocscreen/rng.hpp"

namespace vocscreen {

Attribution shapley_linear(double intercept, std::span<const double> coefficients,
                           std::span<const double> x, std::span<const double> background_means) {
    if (coefficients.size() != x.size() || x.size() != background_means.size())
        throw ConfigError("shapley_linear: dimension mismatch");
    Attribution a;
    a.phi.resize(x.size());
    a.std_error.assign(x.size(), 0.0);
    a.base_value = intercept;
    for (std::size_t j = 0; j < x.size(); ++j) {
        a.phi[j] = coefficients[j] * (x[j] - background_means[j]);
        a.base_value += coefficients[j] * background_means[j];
    }
    a.prediction = intercept + dot(coefficients, x);
    return a;
}

Attribution shapley_linear(const OlsFit& fit, std::span<const double> x,
                           std::span<const double> background_means) {
    if (!fit.intercept) {
        return shapley_linear(0.0, fit.coefficients, x, background_means);
    }
    return shapley_linear(fit.coefficients[0],
                          std::span<const double>(fit.coefficients).subspan(1), x,
                          background_means);
}

Attribution shapley_linear(const LogisticFit& fit, std::span<const double> x,
                           std::span<const double> background_means) {
    return shapley_linear(fit.coefficients[0],
                          std::span<const double>(fit.coefficients).subspan(1), x,
                          background_means);
}

Attribution shapley_sample(const Predictor& model, std::span<const double> x,
                           const Matrix& background, int n_permutations, std::uint64_t seed,
                           exec::Mode mode) {
    if (n_permutations < 1) throw ConfigError("shapley_sample: need at least one permutation");
    if (background.rows() == 0) throw ConfigError("shapley_sample: empty background");
    if (background.cols() != x.size()) throw ConfigError("shapley_sample: dimension mismatch");

    const std::size_t d = x.size();
    const std::size_t s = static_cast<std::size_t>(n_permutations);

    // per-sample marginal contributions, written into disjoint slots
    Matrix contrib(s, d);
    exec::for_each_index(s, mode, [&](std::size_t sample) {
        Rng rng = Rng::stream(seed, sample);
        const std::size_t bg = static_cast<std::size_t>(rng.below(background.rows()));
        const std::vector<std::size_t> order = rng.permutation(d);

        std::vector<double> z(background.row(bg).begin(), background.row(bg).end());
        double prev = model(z);
        for (std::size_t j : order) {
            z[j] = x[j];
            const double cur = model(z);
            contrib(sample, j) = cur - prev;
            prev = cur;
        }
    });

    Attribution a;
    a.phi.assign(d, 0.0);
    a.std_error.assign(d, 0.0);
    for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = 0; j < d; ++j) a.phi[j] += contrib(i, j);
    for (double& p : a.phi) p /= static_cast<double>(s);
    if (s > 1) {
        for (std::size_t j = 0; j < d; ++j) {
            double ss = 0.0;
            for (std::size_t i = 0; i < s; ++i) {
                const double dlt = contrib(i, j) - a.phi[j];
                ss += dlt * dlt;
            }
            a.std_error[j] = std::sqrt(ss / static_cast<double>(s - 1) / static_cast<double>(s));
        }
    }

    double base = 0.0;
    for (std::size_t i = 0; i < background.rows(); ++i) base += model(background.row(i));
    a.base_value = base / static_cast<double>(background.rows());
    a.prediction = model(x);
    return a;
}

AttributionSummary summarize(std::span<const Attribution> attributions,
                             const std::vector<std::string>& feature_names) {
    if (attributions.empty()) throw ConfigError("summarize: no attributions");
    const std::size_t d = feature_names.size();
    for (const auto& a : attributions)
        if (a.phi.size() != d) throw ConfigError("summarize: inconsistent feature sets");

    std::vector<double> mean_abs(d, 0.0);
    for (const auto& a : attributions)
        for (std::size_t j = 0; j < d; ++j) mean_abs[j] += std::abs(a.phi[j]);
    for (double& v : mean_abs) v /= static_cast<double>(attributions.size());

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return mean_abs[i] > mean_abs[j]; });

    AttributionSummary out;
    for (std::size_t j : order) {
        out.features.push_back(feature_names[j]);
        out.mean_abs_phi.push_back(mean_abs[j]);
    }
    return out;
}

std::string summary_to_csv(const AttributionSummary& summary) {
    std::string out = "feature,mean_abs_phi\n";
    for (std::size_t i = 0; i < summary.features.size(); ++i)
        out += summary.features[i] + "," + render_double(summary.mean_abs_phi[i]) + "\n";
    return out;
}

std::string attributions_to_csv(std::span<const Attribution> attributions,
                                const std::vector<std::string>& feature_names, const Matrix& x) {
    if (x.rows() != attributions.size() || x.cols() != feature_names.size())
        throw ConfigError("attributions_to_csv: shape mismatch");
    std::string out = "subject,feature,value,phi\n";
    for (std::size_t i = 0; i < attributions.size(); ++i) {
        for (std::size_t j = 0; j < feature_names.size(); ++j) {
            out += attributions[i].subject_id + "," + feature_names[j] + "," +
                   render_double(x(i, j)) + "," + render_double(attributions[i].phi[j]) + "\n";
        }
    }
    return out;
}

}  // namespace vocscreen
