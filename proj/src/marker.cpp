#include "vocscreen/marker.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include "json.hpp"
#include "vocscreen/common.hpp"

namespace vocscreen {

using nlohmann::json;

MarkerSpec marker_from_report(const CausalReport& report, const std::vector<std::string>& vocs) {
    MarkerSpec spec;
    spec.source = "causal report";
    for (const auto& voc : vocs) {
        const CausalRecord* found = nullptr;
        for (const auto& rec : report.records) {
            if (rec.ok && rec.direction == "forward" && rec.treatments.size() == 1 &&
                rec.treatments[0] == voc) {
                found = &rec;
                break;
            }
        }
        if (!found) throw ConfigError("causal report has no forward estimate for '" + voc + "'");
        spec.coefficients.emplace_back(voc, found->ate);
    }
    spec.all_zero = std::all_of(spec.coefficients.begin(), spec.coefficients.end(),
                                [](const auto& c) { return c.second == 0.0; });
    return spec;
}

std::vector<double> evaluate_marker(const MarkerSpec& spec, const Dataset& ds) {
    std::vector<double> scores(ds.n_rows(), spec.intercept);
    for (const auto& [name, w] : spec.coefficients) {
        const auto& col = ds.numeric(name);
        for (std::size_t i = 0; i < scores.size(); ++i) scores[i] += w * col[i];
    }
    return scores;
}

std::string marker_to_json(const MarkerSpec& spec) {
    json j;
    json coeffs = json::object();
    for (const auto& [name, w] : spec.coefficients) coeffs[name] = w;
    j["coefficients"] = coeffs;
    j["intercept"] = spec.intercept;
    j["source"] = spec.source;
    if (spec.all_zero) j["warning"] = "all marker coefficients are zero";
    return j.dump(2) + "\n";
}

MarkerSpec parse_marker_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("marker JSON: ") + e.what());
    }
    MarkerSpec spec;
    try {
        for (const auto& [name, w] : j.at("coefficients").items())
            spec.coefficients.emplace_back(name, w.get<double>());
        spec.intercept = j.value("intercept", 0.0);
        spec.source = j.value("source", std::string());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("marker JSON: ") + e.what());
    }
    spec.all_zero = std::all_of(spec.coefficients.begin(), spec.coefficients.end(),
                                [](const auto& c) { return c.second == 0.0; });
    return spec;
}

namespace {
double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}
}  // namespace

GroupComparison compare_groups(const Dataset& ds, const std::vector<double>& scores,
                               const std::vector<std::string>& group_a_ids,
                               const std::vector<std::string>& group_b_ids,
                               Alternative alternative) {
    if (group_a_ids.empty() || group_b_ids.empty())
        throw ConfigError("compare_groups: both groups must be non-empty");
    if (scores.size() != ds.n_rows()) throw ConfigError("compare_groups: score/row mismatch");

    std::set<std::string> a_set(group_a_ids.begin(), group_a_ids.end());
    for (const auto& id : group_b_ids)
        if (a_set.count(id)) throw ConfigError("compare_groups: id '" + id + "' is in both groups");

    std::unordered_map<std::string, std::size_t> row_of;
    for (std::size_t i = 0; i < ds.n_rows(); ++i) row_of[ds.row_ids()[i]] = i;
    auto collect = [&](const std::vector<std::string>& ids) {
        std::vector<double> out;
        out.reserve(ids.size());
        for (const auto& id : ids) {
            auto it = row_of.find(id);
            if (it == row_of.end()) throw ConfigError("compare_groups: unknown id '" + id + "'");
            out.push_back(scores[it->second]);
        }
        return out;
    };

    GroupComparison cmp;
    cmp.group_a_ids = group_a_ids;
    cmp.group_b_ids = group_b_ids;
    cmp.group_a_values = collect(group_a_ids);
    cmp.group_b_values = collect(group_b_ids);
    cmp.median_a = median_of(cmp.group_a_values);
    cmp.median_b = median_of(cmp.group_b_values);
    cmp.test = mann_whitney_u(cmp.group_a_values, cmp.group_b_values, alternative);
    return cmp;
}

namespace {
json comparison_json(const GroupComparison& cmp, const std::string& label_a,
                     const std::string& label_b) {
    json j;
    j["u_statistic"] = cmp.test.u_statistic;
    j["p_value"] = cmp.test.p_value;
    j["alternative"] = cmp.test.alternative == Alternative::Greater  ? "greater"
                       : cmp.test.alternative == Alternative::Less   ? "less"
                                                                     : "two-sided";
    j["method"] = cmp.test.method;
    j["group_a"] = {{"label", label_a}, {"n", cmp.group_a_ids.size()}, {"median", cmp.median_a}};
    j["group_b"] = {{"label", label_b}, {"n", cmp.group_b_ids.size()}, {"median", cmp.median_b}};
    return j;
}
}  // namespace

std::string comparison_to_json(const GroupComparison& marker_cmp, const std::string& label_a,
                               const std::string& label_b, const GroupComparison* glucose_cmp) {
    json j;
    j["synthetic_marker"] = comparison_json(marker_cmp, label_a, label_b);
    if (glucose_cmp) j["actual_glucose"] = comparison_json(*glucose_cmp, label_a, label_b);
    return j.dump(2) + "\n";
}

}  // namespace vocscreen
