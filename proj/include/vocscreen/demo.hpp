#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vocscreen/dataset.hpp"
#include "vocscreen/scm.hpp"

namespace vocscreen {

// Bundled demo model: four breath VOCs (acetone, isopropanol, isoprene,
// ethanol) driving glucose with planted effects (5.400, -2.8, 23.086,
// 67.109), confounded by ten lifestyle covariates. fruit_intake has no path
// into acetone, making it the designated non-confounding covariate for
// sensitivity checks; stress is the dominant shared confounder.
ScmConfig demo_scm_config(std::size_t n = 5000, std::uint64_t seed = 42);

// Two-population screening scenario built on the demo model:
//  - a healthy group drawn from the base config;
//  - a diabetic group with shifted lifestyle means plus a direct VOC
//    elevation that propagates into glucose through the structural equation;
//  - a small planted "gray zone": healthy subjects whose VOCs are raised to
//    diabetic-like levels while glucose stays at its mid-range healthy value
//    (breath signal precedes glucose elevation).
struct DemoCohortSpec {
    std::size_t n_healthy = 260;
    std::size_t n_diabetic = 260;
    std::size_t gray_planted = 12;
    double gray_voc_multiplier = 1.25;   // times the diabetic VOC gap
    double gray_band_lo = 0.30;          // glucose percentile band for plants
    double gray_band_hi = 0.55;
};

struct DemoCohort {
    Dataset data;                        // confounders, VOCs, glucose, diabetic label
    std::vector<std::string> planted_ids;
    RoleConfig roles;
    std::vector<double> voc_gap;         // diabetic-vs-healthy VOC mean gap
};

DemoCohort build_demo_cohort(std::uint64_t seed, const DemoCohortSpec& spec = {});

// Confounder mean shifts applied to the diabetic group.
std::vector<double> demo_diabetic_confounder_shift();
// Direct VOC elevation applied to the diabetic group (per treatment).
std::vector<double> demo_diabetic_voc_intervention();

}  // namespace vocscreen
