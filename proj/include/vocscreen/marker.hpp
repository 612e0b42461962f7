#pragma once

#include <string>
#include <vector>

#include "vocscreen/causal.hpp"
#include "vocscreen/dataset.hpp"
#include "vocscreen/stats.hpp"

namespace vocscreen {

// Causally-weighted composite marker: score = intercept + sum_j w_j * VOC_j,
// evaluated on raw (unstandardized) VOC values.
struct MarkerSpec {
    std::vector<std::pair<std::string, double>> coefficients;  // VOC name -> weight
    double intercept = 0.0;
    std::string source;
    bool all_zero = false;  // set when every weight is 0 (valid but suspicious)
};

// Builds the marker from the forward single-treatment records of a causal
// report; coefficient for each VOC is its forward ATE.
MarkerSpec marker_from_report(const CausalReport& report, const std::vector<std::string>& vocs);

std::vector<double> evaluate_marker(const MarkerSpec& spec, const Dataset& ds);

std::string marker_to_json(const MarkerSpec& spec);
MarkerSpec parse_marker_json(const std::string& text);

struct GroupComparison {
    std::vector<std::string> group_a_ids;
    std::vector<std::string> group_b_ids;
    std::vector<double> group_a_values;
    std::vector<double> group_b_values;
    double median_a = 0.0;
    double median_b = 0.0;
    UTestResult test;
};

// Mann-Whitney comparison of marker (or any per-subject) scores between two
// disjoint id groups; `alternative` refers to group A versus group B.
GroupComparison compare_groups(const Dataset& ds, const std::vector<double>& scores,
                               const std::vector<std::string>& group_a_ids,
                               const std::vector<std::string>& group_b_ids,
                               Alternative alternative = Alternative::Greater);

std::string comparison_to_json(const GroupComparison& marker_cmp, const std::string& label_a,
                               const std::string& label_b,
                               const GroupComparison* glucose_cmp = nullptr);

}  // namespace vocscreen
