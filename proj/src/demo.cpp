#include "vocscreen/demo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vocscreen/common.hpp"
#include "vocscreen/rng.hpp"

namespace vocscreen {

ScmConfig demo_scm_config(std::size_t n, std::uint64_t seed) {
    ScmConfig cfg;
    cfg.confounders = {
        {"age", 48.0, 12.0},         {"gender", 0.5, 0.5},    {"height", 168.0, 9.0},
        {"weight", 72.0, 14.0},      {"comorbidities", 1.2, 1.0}, {"alcohol", 2.0, 1.5},
        {"tobacco", 1.5, 1.2},       {"fruit_intake", 2.5, 1.0},  {"sleep_duration", 6.8, 1.1},
        {"stress", 5.0, 2.0},
    };
    //                 age   gender height weight comorb alcohol tobacco fruit  sleep  stress
    cfg.treatments = {
        {"acetone", {0.02, 0.30, 0.0, 0.0, 0.35, 0.0, 0.0, 0.0, 0.0, 0.25}, 1.0},
        {"isopropanol", {0.0, 0.20, 0.0, 0.0, 0.0, 0.30, 0.22, 0.0, 0.0, 0.15}, 1.0},
        {"isoprene", {0.02, 0.0, 0.0, 0.025, 0.0, 0.0, 0.0, 0.28, -0.33, 0.25}, 0.7},
        {"ethanol", {0.0, 0.0, 0.01, 0.0, 0.28, 0.45, 0.15, 0.0, 0.0, 0.45}, 0.6},
    };
    cfg.outcome.name = "glucose";
    cfg.outcome.beta = {5.400, -2.8, 23.086, 67.109};
    cfg.outcome.gamma = {0.25, 3.0, 0.1, 0.25, 4.0, 1.5, 1.2, -1.0, -2.0, 8.0};
    cfg.outcome.noise_sd = 6.0;
    cfg.n = n;
    cfg.seed = seed;
    cfg.validate();
    return cfg;
}

std::vector<double> demo_diabetic_confounder_shift() {
    //      age  gender height weight comorb alcohol tobacco fruit sleep stress
    return {8.0, 0.0, 0.0, 8.0, 1.0, 0.8, 0.6, -0.8, -0.8, 1.5};
}

std::vector<double> demo_diabetic_voc_intervention() {
    //      acetone isopropanol isoprene ethanol
    return {1.6, 0.9, 2.2, 3.2};
}

DemoCohort build_demo_cohort(std::uint64_t seed, const DemoCohortSpec& spec) {
    if (spec.n_healthy < 4 || spec.n_diabetic < 4)
        throw ConfigError("demo cohort: groups must have at least 4 subjects");
    if (spec.gray_planted >= spec.n_healthy)
        throw ConfigError("demo cohort: more plants than healthy subjects");

    ScmConfig healthy_cfg = demo_scm_config(spec.n_healthy, Rng::stream(seed, 11).next_u64());
    ScmConfig diabetic_cfg = demo_scm_config(spec.n_diabetic, Rng::stream(seed, 12).next_u64());
    const std::vector<double> shift = demo_diabetic_confounder_shift();
    for (std::size_t c = 0; c < diabetic_cfg.confounders.size(); ++c)
        diabetic_cfg.confounders[c].mean += shift[c];

    const Dataset healthy = simulate(healthy_cfg);
    Dataset diabetic = simulate(diabetic_cfg);

    // direct VOC elevation in the diabetic group, propagated into glucose
    // through the structural equation (the breath change is causally upstream)
    const std::vector<double> vint = demo_diabetic_voc_intervention();
    {
        std::vector<double> glucose = diabetic.numeric("glucose");
        for (std::size_t t = 0; t < diabetic_cfg.treatments.size(); ++t) {
            std::vector<double> col = diabetic.numeric(diabetic_cfg.treatments[t].name);
            for (std::size_t i = 0; i < col.size(); ++i) {
                col[i] += vint[t];
                glucose[i] += healthy_cfg.outcome.beta[t] * vint[t];
            }
            diabetic = diabetic.with_numeric(diabetic_cfg.treatments[t].name, std::move(col));
        }
        diabetic = diabetic.with_numeric("glucose", std::move(glucose));
    }

    // total VOC mean gap: confounder-driven part plus the direct elevation
    std::vector<double> gap(vint);
    for (std::size_t t = 0; t < healthy_cfg.treatments.size(); ++t)
        for (std::size_t c = 0; c < shift.size(); ++c)
            gap[t] += healthy_cfg.treatments[t].alpha[c] * shift[c];

    // merge the groups with fresh ids and a label column
    const std::size_t n_total = spec.n_healthy + spec.n_diabetic;
    std::vector<std::string> ids;
    ids.reserve(n_total);
    for (std::size_t i = 0; i < spec.n_healthy; ++i) {
        std::string num = std::to_string(i + 1);
        ids.push_back("N" + std::string(4 - std::min<std::size_t>(4, num.size()), '0') + num);
    }
    for (std::size_t i = 0; i < spec.n_diabetic; ++i) {
        std::string num = std::to_string(i + 1);
        ids.push_back("D" + std::string(4 - std::min<std::size_t>(4, num.size()), '0') + num);
    }

    std::vector<std::string> names = healthy.column_names();
    std::vector<Column> cols;
    for (const auto& name : names) {
        std::vector<double> merged;
        merged.reserve(n_total);
        const auto& h = healthy.numeric(name);
        const auto& d = diabetic.numeric(name);
        merged.insert(merged.end(), h.begin(), h.end());
        merged.insert(merged.end(), d.begin(), d.end());
        cols.emplace_back(NumericColumn{std::move(merged)});
    }
    std::vector<double> label(n_total, 0.0);
    for (std::size_t i = spec.n_healthy; i < n_total; ++i) label[i] = 1.0;
    names.push_back("diabetic");
    cols.emplace_back(NumericColumn{std::move(label)});

    Dataset cohort = Dataset::from_columns("id", std::move(ids), std::move(names), std::move(cols));

    // plant the gray zone: healthy subjects with mid-range glucose get
    // diabetic-like VOCs while their glucose is left untouched
    DemoCohort out;
    if (spec.gray_planted > 0) {
        std::vector<std::size_t> healthy_rows(spec.n_healthy);
        std::iota(healthy_rows.begin(), healthy_rows.end(), 0);
        const auto& glucose = cohort.numeric("glucose");
        std::sort(healthy_rows.begin(), healthy_rows.end(),
                  [&](std::size_t a, std::size_t b) { return glucose[a] < glucose[b]; });
        const auto lo = static_cast<std::size_t>(spec.gray_band_lo * static_cast<double>(spec.n_healthy));
        const auto hi = static_cast<std::size_t>(spec.gray_band_hi * static_cast<double>(spec.n_healthy));
        if (hi <= lo || hi > spec.n_healthy)
            throw ConfigError("demo cohort: bad gray-zone glucose band");
        const std::size_t band = hi - lo;
        if (spec.gray_planted > band)
            throw ConfigError("demo cohort: glucose band too narrow for the requested plants");

        std::vector<std::size_t> plant_rows;
        for (std::size_t p = 0; p < spec.gray_planted; ++p)
            plant_rows.push_back(healthy_rows[lo + p * band / spec.gray_planted]);
        std::sort(plant_rows.begin(), plant_rows.end());

        for (std::size_t t = 0; t < healthy_cfg.treatments.size(); ++t) {
            const std::string& name = healthy_cfg.treatments[t].name;
            std::vector<double> col = cohort.numeric(name);
            for (std::size_t r : plant_rows) col[r] += spec.gray_voc_multiplier * gap[t];
            cohort = cohort.with_numeric(name, std::move(col));
        }
        for (std::size_t r : plant_rows) out.planted_ids.push_back(cohort.row_ids()[r]);
    }

    out.data = std::move(cohort);
    out.voc_gap = gap;
    out.roles = healthy_cfg.roles();
    out.roles.label = "diabetic";
    return out;
}

}  // namespace vocscreen
