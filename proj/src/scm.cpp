#include "vocscreen/scm.hpp"

#include <algorithm>

#include "json.hpp"
#include "vocscreen/common.hpp"
#include "vocscreen/rng.hpp"

namespace vocscreen {

using nlohmann::json;

void ScmConfig::validate() const {
    if (confounders.empty()) throw ConfigError("scm: at least one confounder required");
    if (treatments.empty()) throw ConfigError("scm: at least one treatment required");
    if (n < 2) throw ConfigError("scm: n must be >= 2");
    for (const auto& c : confounders)
        if (c.sd <= 0.0) throw ConfigError("scm: confounder '" + c.name + "' needs sd > 0");
    for (const auto& t : treatments) {
        if (t.noise_sd <= 0.0) throw ConfigError("scm: treatment '" + t.name + "' needs noise sd > 0");
        if (t.alpha.size() != confounders.size())
            throw ConfigError("scm: treatment '" + t.name + "' has " + std::to_string(t.alpha.size()) +
                              " alpha entries, expected " + std::to_string(confounders.size()));
    }
    if (outcome.noise_sd <= 0.0) throw ConfigError("scm: outcome noise sd must be > 0");
    if (outcome.beta.size() != treatments.size())
        throw ConfigError("scm: outcome has " + std::to_string(outcome.beta.size()) +
                          " beta entries, expected " + std::to_string(treatments.size()));
    if (outcome.gamma.size() != confounders.size())
        throw ConfigError("scm: outcome has " + std::to_string(outcome.gamma.size()) +
                          " gamma entries, expected " + std::to_string(confounders.size()));
}

RoleConfig ScmConfig::roles() const {
    RoleConfig r;
    for (const auto& t : treatments) r.treatments.push_back(t.name);
    r.outcome = outcome.name;
    for (const auto& c : confounders) r.confounders.push_back(c.name);
    r.id = "id";
    return r;
}

ScmConfig parse_scm_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scm JSON: ") + e.what());
    }
    ScmConfig cfg;
    try {
        for (const auto& c : j.at("confounders"))
            cfg.confounders.push_back({c.at("name").get<std::string>(), c.at("mean").get<double>(),
                                       c.at("sd").get<double>()});
        for (const auto& t : j.at("treatments"))
            cfg.treatments.push_back({t.at("name").get<std::string>(),
                                      t.at("alpha").get<std::vector<double>>(),
                                      t.at("noise_sd").get<double>()});
        const auto& o = j.at("outcome");
        cfg.outcome.name = o.at("name").get<std::string>();
        cfg.outcome.beta = o.at("beta").get<std::vector<double>>();
        cfg.outcome.gamma = o.at("gamma").get<std::vector<double>>();
        cfg.outcome.noise_sd = o.at("noise_sd").get<double>();
        cfg.n = j.at("n").get<std::size_t>();
        if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scm JSON: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

std::string scm_to_json(const ScmConfig& cfg) {
    json j;
    j["confounders"] = json::array();
    for (const auto& c : cfg.confounders)
        j["confounders"].push_back({{"name", c.name}, {"mean", c.mean}, {"sd", c.sd}});
    j["treatments"] = json::array();
    for (const auto& t : cfg.treatments)
        j["treatments"].push_back({{"name", t.name}, {"alpha", t.alpha}, {"noise_sd", t.noise_sd}});
    j["outcome"] = {{"name", cfg.outcome.name},
                    {"beta", cfg.outcome.beta},
                    {"gamma", cfg.outcome.gamma},
                    {"noise_sd", cfg.outcome.noise_sd}};
    j["n"] = cfg.n;
    j["seed"] = cfg.seed;
    return j.dump(2) + "\n";
}

ScmConfig load_scm_config(const std::string& path) { return parse_scm_json(read_file(path)); }

Dataset simulate(const ScmConfig& cfg) {
    cfg.validate();
    const std::size_t n = cfg.n;
    const std::size_t nc = cfg.confounders.size();
    const std::size_t nt = cfg.treatments.size();

    std::vector<std::vector<double>> conf(nc);
    for (std::size_t c = 0; c < nc; ++c) {
        Rng rng = Rng::stream(cfg.seed, c);
        conf[c].resize(n);
        for (std::size_t i = 0; i < n; ++i)
            conf[c][i] = rng.normal(cfg.confounders[c].mean, cfg.confounders[c].sd);
    }

    std::vector<std::vector<double>> treat(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        Rng rng = Rng::stream(cfg.seed, nc + t);
        treat[t].resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            double v = rng.normal(0.0, cfg.treatments[t].noise_sd);
            for (std::size_t c = 0; c < nc; ++c) v += cfg.treatments[t].alpha[c] * conf[c][i];
            treat[t][i] = v;
        }
    }

    std::vector<double> outcome(n);
    {
        Rng rng = Rng::stream(cfg.seed, nc + nt);
        for (std::size_t i = 0; i < n; ++i) {
            double v = rng.normal(0.0, cfg.outcome.noise_sd);
            for (std::size_t t = 0; t < nt; ++t) v += cfg.outcome.beta[t] * treat[t][i];
            for (std::size_t c = 0; c < nc; ++c) v += cfg.outcome.gamma[c] * conf[c][i];
            outcome[i] = v;
        }
    }

    std::vector<std::string> ids(n);
    int width = 1;
    for (std::size_t v = n; v >= 10; v /= 10) ++width;
    for (std::size_t i = 0; i < n; ++i) {
        std::string num = std::to_string(i + 1);
        ids[i] = "S" + std::string(static_cast<std::size_t>(width) - num.size(), '0') + num;
    }

    std::vector<std::string> names;
    std::vector<Column> cols;
    for (std::size_t c = 0; c < nc; ++c) {
        names.push_back(cfg.confounders[c].name);
        cols.emplace_back(NumericColumn{std::move(conf[c])});
    }
    for (std::size_t t = 0; t < nt; ++t) {
        names.push_back(cfg.treatments[t].name);
        cols.emplace_back(NumericColumn{std::move(treat[t])});
    }
    names.push_back(cfg.outcome.name);
    cols.emplace_back(NumericColumn{std::move(outcome)});

    return Dataset::from_columns("id", std::move(ids), std::move(names), std::move(cols));
}

namespace {
std::size_t treatment_index(const ScmConfig& cfg, const std::string& name) {
    for (std::size_t j = 0; j < cfg.treatments.size(); ++j)
        if (cfg.treatments[j].name == name) return j;
    throw ConfigError("scm: unknown treatment '" + name + "'");
}
}  // namespace

double true_ate(const ScmConfig& cfg, const std::string& treatment) {
    return cfg.outcome.beta[treatment_index(cfg, treatment)];
}

double true_joint_ate(const ScmConfig& cfg) {
    double s = 0.0;
    for (double b : cfg.outcome.beta) s += b;
    return s;
}

double treatment_variance(const ScmConfig& cfg, std::size_t j) {
    double v = cfg.treatments[j].noise_sd * cfg.treatments[j].noise_sd;
    for (std::size_t c = 0; c < cfg.confounders.size(); ++c) {
        const double a = cfg.treatments[j].alpha[c];
        const double sd = cfg.confounders[c].sd;
        v += a * a * sd * sd;
    }
    return v;
}

double treatment_covariance(const ScmConfig& cfg, std::size_t j, std::size_t k) {
    if (j == k) return treatment_variance(cfg, j);
    double v = 0.0;
    for (std::size_t c = 0; c < cfg.confounders.size(); ++c) {
        const double sd = cfg.confounders[c].sd;
        v += cfg.treatments[j].alpha[c] * cfg.treatments[k].alpha[c] * sd * sd;
    }
    return v;
}

double analytic_naive_slope(const ScmConfig& cfg, const std::string& treatment) {
    const std::size_t j = treatment_index(cfg, treatment);
    // Cov(T_j, Y) = sum_k beta_k Cov(T_j, T_k) + sum_c gamma_c alpha_jc Var(C_c)
    double cov = 0.0;
    for (std::size_t k = 0; k < cfg.treatments.size(); ++k)
        cov += cfg.outcome.beta[k] * treatment_covariance(cfg, j, k);
    for (std::size_t c = 0; c < cfg.confounders.size(); ++c) {
        const double sd = cfg.confounders[c].sd;
        cov += cfg.outcome.gamma[c] * cfg.treatments[j].alpha[c] * sd * sd;
    }
    return cov / treatment_variance(cfg, j);
}

}  // namespace vocscreen
