#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tsrm/demand.hpp"
#include "tsrm/policies.hpp"
#include "tsrm/posterior.hpp"

namespace tsrm {

using json = nlohmann::ordered_json;

/// Invalid configuration; `path` names the offending field.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& path, const std::string& msg)
        : std::runtime_error(path + ": " + msg), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

namespace formulas {

// lambda(t,p) = 50 exp(-(p + t) / 5): demand falling with price and time.
inline double intensity_a(double t, double p, double /*T*/) { return 50.0 * std::exp(-(p + t) / 5.0); }

// lambda(t,p) = 50 exp(-p / (1/2 + 5t/T)): demand rising with time.
inline double intensity_b(double t, double p, double T) { return 50.0 * std::exp(-p / (0.5 + 5.0 * t / T)); }

inline double success_pa(double t, double p, double /*T*/) { return -std::expm1(-(t + p) / 10.0); }

inline double success_pb(double t, double p, double T) { return -std::expm1(-p / (0.5 + 5.0 * t / T)); }

}  // namespace formulas

namespace presets_detail {

template <typename T>
T get_field(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) throw ConfigError(path + "." + key, "missing required field");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + "." + key, std::string("wrong type: ") + e.what());
    }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    return get_field<T>(j, key, path);
}

inline Grid2D<double> table_from(std::size_t T, const std::vector<double>& prices, double (*fn)(double, double, double)) {
    Grid2D<double> g(T, prices.size());
    for (std::size_t t = 1; t <= T; ++t)
        for (std::size_t k = 0; k < prices.size(); ++k)
            g(t - 1, k) = fn(static_cast<double>(t), prices[k], static_cast<double>(T));
    return g;
}

}  // namespace presets_detail

/// Environment document:
///   {family: "poisson"|"negbin", T, prices: [...],
///    params: {kind: "formula-A1"|"formula-B"|"negbin-PA"|"negbin-PB"|"explicit", r?, table?}}
inline DemandEnvironment environment_from_json(const json& j, const std::string& path = "environment") {
    using namespace presets_detail;
    const auto family = get_field<std::string>(j, "family", path);
    const auto T = get_field<long long>(j, "T", path);
    if (T <= 0) throw ConfigError(path + ".T", "must be a positive integer");
    const auto prices = get_field<std::vector<double>>(j, "prices", path);
    PriceGrid grid;
    try {
        grid = PriceGrid(prices);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path + ".prices", e.what());
    }
    const std::string ppath = path + ".params";
    if (!j.contains("params")) throw ConfigError(ppath, "missing required field");
    const json& params = j.at("params");
    const auto kind = get_field<std::string>(params, "kind", ppath);
    const auto TT = static_cast<std::size_t>(T);

    Grid2D<double> table;
    if (kind == "formula-A1" || kind == "formula-A") {
        table = table_from(TT, prices, formulas::intensity_a);
    } else if (kind == "formula-B") {
        table = table_from(TT, prices, formulas::intensity_b);
    } else if (kind == "negbin-PA") {
        table = table_from(TT, prices, formulas::success_pa);
    } else if (kind == "negbin-PB") {
        table = table_from(TT, prices, formulas::success_pb);
    } else if (kind == "explicit") {
        const auto rows = get_field<std::vector<std::vector<double>>>(params, "table", ppath);
        if (rows.size() != TT) throw ConfigError(ppath + ".table", "must have T rows");
        table = Grid2D<double>(TT, prices.size());
        for (std::size_t t = 0; t < TT; ++t) {
            if (rows[t].size() != prices.size()) throw ConfigError(ppath + ".table", "rows must have one entry per price");
            for (std::size_t k = 0; k < prices.size(); ++k) table(t, k) = rows[t][k];
        }
    } else {
        throw ConfigError(ppath + ".kind", "unknown parameter kind '" + kind + "'");
    }

    const bool negbin_kind = kind == "negbin-PA" || kind == "negbin-PB";
    try {
        if (family == "poisson") {
            if (negbin_kind) throw ConfigError(ppath + ".kind", "negative-binomial law with Poisson family");
            return DemandEnvironment::poisson(grid, std::move(table));
        }
        if (family == "negbin") {
            if (kind == "formula-A1" || kind == "formula-A" || kind == "formula-B")
                throw ConfigError(ppath + ".kind", "Poisson intensity law with negbin family");
            return DemandEnvironment::negative_binomial(grid, get_or<double>(params, "r", 10.0, ppath), std::move(table));
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(ppath, e.what());
    }
    throw ConfigError(path + ".family", "unknown family '" + family + "'");
}

/// Prior document: {family:"gamma", alpha, beta} | {family:"beta-negbin", a, b, r}
/// | {family:"gp", sigma_t, sigma_p, jitter, mean}.
inline PriorSpec prior_from_json(const json& j, const std::string& path = "prior") {
    using namespace presets_detail;
    const auto family = get_field<std::string>(j, "family", path);
    PriorSpec spec;
    if (family == "gamma") {
        spec = GammaPrior{get_field<double>(j, "alpha", path), get_field<double>(j, "beta", path)};
    } else if (family == "beta-negbin") {
        spec = BetaNegBinPrior{get_field<double>(j, "a", path), get_field<double>(j, "b", path),
                               get_field<double>(j, "r", path)};
    } else if (family == "gp") {
        spec = GpPrior{get_field<double>(j, "sigma_t", path), get_field<double>(j, "sigma_p", path),
                       get_or<double>(j, "jitter", 1e-6, path), get_or<double>(j, "mean", 0.0, path)};
    } else {
        throw ConfigError(path + ".family", "unknown prior family '" + family + "'");
    }
    try {
        PosteriorState probe(spec, PriceGrid({1.0}), 1);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
    }
    return spec;
}

inline json prior_to_json(const PriorSpec& spec) {
    if (const auto* g = std::get_if<GammaPrior>(&spec)) return {{"family", "gamma"}, {"alpha", g->shape}, {"beta", g->scale}};
    if (const auto* b = std::get_if<BetaNegBinPrior>(&spec))
        return {{"family", "beta-negbin"}, {"a", b->a}, {"b", b->b}, {"r", b->r}};
    const auto& p = std::get<GpPrior>(spec);
    return {{"family", "gp"}, {"sigma_t", p.sigma_t}, {"sigma_p", p.sigma_p}, {"jitter", p.jitter}, {"mean", p.mean}};
}

struct ExperimentConfig {
    std::string name;
    json environment;  // kept in document form for canonical re-serialization
    json prior;
    std::vector<PolicyKind> policies;
    long long n0 = 0;
    std::size_t episodes = 1;
    std::size_t trials = 1;
    std::uint64_t base_seed = 0;
    std::string output;

    DemandEnvironment build_environment() const { return environment_from_json(environment); }
    PriorSpec build_prior() const { return prior_from_json(prior); }
};

inline json config_to_json(const ExperimentConfig& c) {
    json pol = json::array();
    for (PolicyKind k : c.policies) pol.push_back(to_string(k));
    return {{"name", c.name},           {"environment", c.environment}, {"prior", c.prior},
            {"policies", pol},          {"n0", c.n0},                   {"episodes", c.episodes},
            {"trials", c.trials},       {"base_seed", c.base_seed},     {"output", c.output}};
}

/// Parses and validates a config document.
inline ExperimentConfig config_from_json(const json& j) {
    using namespace presets_detail;
    if (!j.is_object()) throw ConfigError("$", "config must be a JSON object");
    ExperimentConfig c;
    c.name = get_or<std::string>(j, "name", "custom", "$");
    if (!j.contains("environment")) throw ConfigError("$.environment", "missing required field");
    if (!j.contains("prior")) throw ConfigError("$.prior", "missing required field");
    c.environment = j.at("environment");
    c.prior = j.at("prior");
    const DemandEnvironment env = environment_from_json(c.environment, "$.environment");
    const PriorSpec prior = prior_from_json(c.prior, "$.prior");
    const bool negbin_env = env.family() == DemandFamily::NegativeBinomial;
    const bool negbin_prior = std::holds_alternative<BetaNegBinPrior>(prior);
    if (negbin_env != negbin_prior)
        throw ConfigError("$.prior.family", "prior family does not match the environment's demand family");

    std::vector<std::string> names;
    if (j.contains("policies")) {
        names = get_field<std::vector<std::string>>(j, "policies", "$");
    } else {
        for (PolicyKind k : kAllPolicies) names.push_back(to_string(k));
    }
    if (names.empty()) throw ConfigError("$.policies", "at least one policy is required");
    for (std::size_t i = 0; i < names.size(); ++i) {
        try {
            c.policies.push_back(parse_policy(names[i]));
        } catch (const std::invalid_argument& e) {
            throw ConfigError("$.policies[" + std::to_string(i) + "]", e.what());
        }
    }
    c.n0 = get_field<long long>(j, "n0", "$");
    if (c.n0 < 0) throw ConfigError("$.n0", "must be >= 0");
    const auto episodes = get_field<long long>(j, "episodes", "$");
    if (episodes < 1) throw ConfigError("$.episodes", "must be >= 1");
    c.episodes = static_cast<std::size_t>(episodes);
    const auto trials = get_or<long long>(j, "trials", 1, "$");
    if (trials < 1) throw ConfigError("$.trials", "must be >= 1");
    c.trials = static_cast<std::size_t>(trials);
    c.base_seed = get_or<std::uint64_t>(j, "base_seed", 0, "$");
    c.output = get_or<std::string>(j, "output", "tsrm-out", "$");
    return c;
}

inline json paper_prices_json() { return json::array({1, 2, 3, 4, 5, 6, 7, 8, 9}); }

/// Expands a preset name. Grammar: BASE[-gp][-n<N>] where BASE is one of
/// A1 A2 B1 B2 NB-A1 NB-A2 NB-B1 NB-B2. `-gp` swaps the independent prior for
/// the GP prior (Poisson presets only); `-n<N>` overrides the initial
/// inventory. `full` selects the 100-trial GP setting instead of 20.
inline ExperimentConfig expand_preset(const std::string& name, bool full = false) {
    std::string base = name;
    std::optional<long long> n0_override;
    bool gp = false;
    if (auto pos = base.rfind("-n"); pos != std::string::npos && pos + 2 < base.size()) {
        const std::string digits = base.substr(pos + 2);
        if (digits.find_first_not_of("0123456789") == std::string::npos) {
            n0_override = std::stoll(digits);
            base = base.substr(0, pos);
        }
    }
    if (base.size() > 3 && base.substr(base.size() - 3) == "-gp") {
        gp = true;
        base = base.substr(0, base.size() - 3);
    }

    ExperimentConfig c;
    c.name = name;
    for (PolicyKind k : kAllPolicies) c.policies.push_back(k);
    c.base_seed = 0;
    c.output = "tsrm-out";

    const bool nb = base.rfind("NB-", 0) == 0;
    const std::string core = nb ? base.substr(3) : base;
    if (core.size() != 2 || (core[0] != 'A' && core[0] != 'B') || (core[1] != '1' && core[1] != '2'))
        throw ConfigError("preset", "unknown preset '" + name + "'");
    const bool law_a = core[0] == 'A';
    const bool scarce = core[1] == '1';

    if (nb) {
        if (gp) throw ConfigError("preset", "GP prior is only defined for Poisson presets");
        c.environment = {{"family", "negbin"},
                         {"T", 10},
                         {"prices", paper_prices_json()},
                         {"params", {{"kind", law_a ? "negbin-PA" : "negbin-PB"}, {"r", 10.0}}}};
        c.prior = {{"family", "beta-negbin"}, {"a", 1.0}, {"b", 1.0}, {"r", 10.0}};
        c.n0 = scarce ? 30 : 1000;
        c.episodes = 5000;
        c.trials = 100;
    } else {
        c.environment = {{"family", "poisson"},
                         {"T", 10},
                         {"prices", paper_prices_json()},
                         {"params", {{"kind", law_a ? "formula-A1" : "formula-B"}}}};
        c.n0 = scarce ? 50 : 1000;
        if (gp) {
            c.prior = prior_to_json(GpPrior{3.0, 2.5, 1e-6, 0.0});
            c.episodes = 200;
            c.trials = full ? 100 : 20;
        } else {
            c.prior = prior_to_json(GammaPrior{10.0, 1.0});
            c.episodes = law_a ? 5000 : 2000;
            c.trials = 100;
        }
    }
    if (n0_override) c.n0 = *n0_override;
    return c;
}

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {"A1",    "A2",    "B1",    "B2",    "A1-gp", "A2-gp",
                                                   "B1-gp", "B2-gp", "NB-A1", "NB-A2", "NB-B1", "NB-B2"};
    return names;
}

}  // namespace tsrm
