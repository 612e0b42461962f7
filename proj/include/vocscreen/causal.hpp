#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vocscreen/dataset.hpp"
#include "vocscreen/exec.hpp"

namespace vocscreen {

enum class CausalEstimator { BackdoorRegression, Ipw };
enum class CausalDirection { Forward, Reverse };

struct CausalQuery {
    std::vector<std::string> treatments;
    std::string outcome;
    std::vector<std::string> confounders;
    CausalEstimator estimator = CausalEstimator::BackdoorRegression;
    CausalDirection direction = CausalDirection::Forward;
};

struct CausalEstimate {
    double ate = 0.0;                       // joint queries: sum of components
    std::vector<double> components;         // one per treatment
    std::vector<std::string> treatment_names;
    CausalEstimator estimator = CausalEstimator::BackdoorRegression;
    std::vector<std::string> adjusted_confounders;
    bool dichotomized = false;              // ipw on a continuous treatment
    double dichotomize_threshold = 0.0;
};

struct RefutationResult {
    double original_ate = 0.0;
    double mean_placebo = 0.0;
    double p_value = 1.0;
    int k = 0;               // permutations that produced an estimate
    std::uint64_t seed = 0;
    std::size_t failed = 0;
};

struct SensitivityReport {
    struct Entry {
        std::vector<std::string> confounders;
        double ate = 0.0;
        double percent_change = 0.0;   // vs baseline; absolute deviation when baseline == 0
    };
    double baseline_ate = 0.0;
    std::vector<Entry> entries;
    double max_percent_change = 0.0;
    bool percent_defined = true;       // false when baseline ATE is exactly 0
};

// Backdoor adjustment: OLS of outcome on [1 | treatments | confounders],
// ATE components are the treatment coefficients. IPW: logistic propensity on
// the confounders, weights clipped to propensity in [0.01, 0.99].
CausalEstimate estimate_ate(const AnalysisView& view, const CausalQuery& q);

// Joint multi-treatment effect; the combined ATE is the sum of the
// per-treatment coefficients of one regression (simultaneous unit increase).
CausalEstimate estimate_joint(const AnalysisView& view, const CausalQuery& q);

// Placebo refutation: treatment column(s) jointly row-permuted K times with
// confounders fixed, effect re-estimated each time. Aborts when more than 10%
// of the permutations fail to produce an estimate.
RefutationResult refute_placebo(const AnalysisView& view, const CausalQuery& q, int k,
                                std::uint64_t seed, exec::Mode mode = exec::default_mode());

// Reverse-direction models: per original treatment V, OLS of V on
// [1 | outcome | confounders]; the reported component is the outcome
// coefficient. The joint value is the sum over treatments.
CausalEstimate estimate_reverse(const AnalysisView& view, const CausalQuery& q);

// Re-estimates the ATE for each confounder subset; baseline is the query's
// full confounder set.
SensitivityReport sensitivity(const AnalysisView& view, const CausalQuery& q,
                              const std::vector<std::vector<std::string>>& subsets);

// One row of the machine-readable effects report.
struct CausalRecord {
    std::vector<std::string> treatments;
    std::string outcome;
    std::string direction;   // "forward" | "reverse"
    std::string estimator;   // "backdoor-regression" | "ipw"
    bool ok = true;
    std::string error;
    double ate = 0.0;
    std::vector<double> components;
    std::optional<double> refute_mean;
    std::optional<double> p_value;
    std::optional<int> k;
    std::uint64_t seed = 0;
    std::vector<std::string> confounders;
};

struct CausalReport {
    std::vector<CausalRecord> records;
    std::string notes;
};

std::string causal_report_to_json(const CausalReport& report);
CausalReport parse_causal_report(const std::string& text);

const char* to_string(CausalEstimator e);
const char* to_string(CausalDirection d);

}  // namespace vocscreen
