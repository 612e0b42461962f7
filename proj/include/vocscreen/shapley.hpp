#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vocscreen/exec.hpp"
#include "vocscreen/linalg.hpp"
#include "vocscreen/stats.hpp"

namespace vocscreen {

struct Attribution {
    std::string subject_id;
    std::vector<double> phi;        // per feature, prediction units
    std::vector<double> std_error;  // Monte-Carlo SE per feature (sampled method)
    double base_value = 0.0;        // mean prediction over the background
    double prediction = 0.0;        // model output at x
};

// Closed-form Shapley values of a linear score b0 + b . x against background
// means: phi_j = b_j * (x_j - mean_j). For logistic fits the attribution is
// on the linear score scale.
Attribution shapley_linear(double intercept, std::span<const double> coefficients,
                           std::span<const double> x, std::span<const double> background_means);
Attribution shapley_linear(const OlsFit& fit, std::span<const double> x,
                           std::span<const double> background_means);
Attribution shapley_linear(const LogisticFit& fit, std::span<const double> x,
                           std::span<const double> background_means);

using Predictor = std::function<double(std::span<const double>)>;

// Permutation-sampling Shapley estimate for an arbitrary predictor. Each
// sample draws a background row and a feature ordering from its own
// counter-derived stream; results are identical under serial and parallel
// evaluation.
Attribution shapley_sample(const Predictor& model, std::span<const double> x,
                           const Matrix& background, int n_permutations, std::uint64_t seed,
                           exec::Mode mode = exec::default_mode());

struct AttributionSummary {
    std::vector<std::string> features;     // descending mean |phi|
    std::vector<double> mean_abs_phi;
};

AttributionSummary summarize(std::span<const Attribution> attributions,
                             const std::vector<std::string>& feature_names);

std::string summary_to_csv(const AttributionSummary& summary);
// Long-form rows (subject, feature, value, phi) for external beeswarm-style plots.
std::string attributions_to_csv(std::span<const Attribution> attributions,
                                const std::vector<std::string>& feature_names, const Matrix& x);

}  // namespace vocscreen
