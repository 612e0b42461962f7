#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vocscreen/dataset.hpp"

namespace vocscreen {

// Linear-Gaussian structural causal model:
//   C_c ~ Normal(mean_c, sd_c), independent
//   T_j = alpha_j . C + eta_j,            eta_j ~ Normal(0, noise_sd_j)
//   Y   = beta . T + gamma . C + eps,     eps   ~ Normal(0, noise_sd)
// beta_j is the ground-truth effect every estimator is checked against.
struct ScmConfig {
    struct Confounder {
        std::string name;
        double mean = 0.0;
        double sd = 1.0;
    };
    struct Treatment {
        std::string name;
        std::vector<double> alpha;  // one entry per confounder
        double noise_sd = 1.0;
    };
    struct Outcome {
        std::string name = "glucose";
        std::vector<double> beta;   // one entry per treatment
        std::vector<double> gamma;  // one entry per confounder
        double noise_sd = 1.0;
    };

    std::vector<Confounder> confounders;
    std::vector<Treatment> treatments;
    Outcome outcome;
    std::size_t n = 100;
    std::uint64_t seed = 0;

    void validate() const;  // throws ConfigError on dimension/sd problems
    RoleConfig roles() const;
};

ScmConfig parse_scm_json(const std::string& text);
std::string scm_to_json(const ScmConfig& cfg);
ScmConfig load_scm_config(const std::string& path);

// Draws a dataset from the model. Column order: id, confounders, treatments,
// outcome. Deterministic in cfg.seed; each column consumes its own stream, so
// the first n rows of a larger run are unchanged.
Dataset simulate(const ScmConfig& cfg);

// Structural coefficient beta_j, the estimand of the backdoor estimator.
double true_ate(const ScmConfig& cfg, const std::string& treatment);

// Sum of all beta_j (the combined-effect convention of the causal engine).
double true_joint_ate(const ScmConfig& cfg);

// Closed-form slope of the unadjusted regression of Y on T_j alone:
//   Cov(T_j, Y) / Var(T_j)
// For one treatment and one confounder this reduces to the textbook
// omitted-variable bias beta + alpha*gamma*Var(C)/Var(T).
double analytic_naive_slope(const ScmConfig& cfg, const std::string& treatment);

// Model-implied moments, used by the bias oracle above.
double treatment_variance(const ScmConfig& cfg, std::size_t j);
double treatment_covariance(const ScmConfig& cfg, std::size_t j, std::size_t k);

}  // namespace vocscreen
