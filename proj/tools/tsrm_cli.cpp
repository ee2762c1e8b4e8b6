// tsrm: command-line front end for the revenue-management simulator.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tsrm/tsrm.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

tsrm::json read_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open '" + path + "'");
    try {
        return tsrm::json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
        throw tsrm::ConfigError(path, std::string("invalid JSON: ") + e.what());
    }
}

std::vector<tsrm::PolicyKind> parse_policy_list(const std::string& csv) {
    std::vector<tsrm::PolicyKind> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(tsrm::parse_policy(item));
    if (out.empty()) throw tsrm::ConfigError("--policies", "empty policy list");
    return out;
}

int cmd_lp(const std::string& instance_path) {
    const tsrm::json j = read_json_file(instance_path);
    const auto rows = j.at("lambda").get<std::vector<std::vector<double>>>();
    const auto prices = j.at("prices").get<std::vector<double>>();
    tsrm::MeanDemandMatrix lambda(rows.size(), prices.size());
    for (std::size_t t = 0; t < rows.size(); ++t) {
        if (rows[t].size() != prices.size()) throw tsrm::ConfigError("lambda", "row width must equal number of prices");
        for (std::size_t k = 0; k < prices.size(); ++k) lambda(t, k) = rows[t][k];
    }
    const auto start = j.value("start", 1ULL);
    const double inventory = j.at("inventory").get<double>();
    const tsrm::PricingPlan plan = tsrm::solve_lp(lambda, start, inventory, tsrm::PriceGrid(prices));
    tsrm::json x = tsrm::json::array();
    for (std::size_t i = 0; i < plan.x.rows(); ++i)
        x.push_back(std::vector<double>(plan.x.row_data(i), plan.x.row_data(i) + plan.x.cols()));
    std::cout << tsrm::json{{"objective", plan.objective}, {"dual_mu", plan.dual_mu}, {"x", x}}.dump() << "\n";
    return kExitOk;
}

int cmd_dp(const tsrm::ExperimentConfig& cfg, const std::string& csv_path) {
    const auto env = cfg.build_environment();
    const auto t0 = std::chrono::steady_clock::now();
    const tsrm::ValueTable table = tsrm::solve_dp(env, static_cast<std::size_t>(cfg.n0));
    const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (!csv_path.empty()) {
        std::ofstream os(csv_path, std::ios::binary);
        if (!os) throw std::runtime_error("cannot open '" + csv_path + "' for writing");
        os << "remaining,inventory,value\n";
        for (std::size_t r = 0; r <= table.horizon(); ++r)
            for (std::size_t n = 0; n <= table.max_inventory(); ++n)
                os << r << ',' << n << ',' << tsrm::format_g10(table.value(r, n)) << '\n';
    }
    std::cout << tsrm::json{{"rev_star", table.optimal_revenue()}, {"n0", cfg.n0}, {"runtime_ms", ms}}.dump() << "\n";
    return kExitOk;
}

int cmd_run(const tsrm::ExperimentConfig& cfg, std::size_t workers) {
    const auto files = tsrm::run_experiment(cfg, workers);
    std::ifstream is(files.summary);
    std::cout << is.rdbuf();
    std::cerr << "wrote " << files.csv.string() << " and " << files.summary.string() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Thompson-sampling revenue-management simulator"};
    app.require_subcommand(1);

    std::size_t workers = 0;
    std::string out_dir;

    auto* simulate = app.add_subcommand("simulate", "Run an experiment described by a JSON config file");
    std::string config_path;
    simulate->add_option("--config", config_path, "Experiment config (JSON)")->required();
    simulate->add_option("--out", out_dir, "Output directory (overrides config.output)");
    simulate->add_option("--workers", workers, "Worker threads (0 = hardware; capped by TSRM_MAX_WORKERS)");

    auto* replicate = app.add_subcommand("replicate", "Run a named preset experiment");
    std::string preset;
    std::size_t trials = 0, episodes = 0;
    std::uint64_t seed = 0;
    std::string policies;
    long long n0 = -1;
    bool full = false;
    replicate->add_option("--preset", preset, "Preset: A1 A2 B1 B2 NB-A1 NB-A2 NB-B1 NB-B2, optional -gp / -n<N> suffixes")
        ->required();
    replicate->add_option("--trials", trials, "Number of independent trials (default: preset)");
    replicate->add_option("--seed", seed, "Base seed");
    replicate->add_option("--episodes", episodes, "Episodes per trial (default: preset)");
    replicate->add_option("--policies", policies, "Comma-separated policy list (default: all six)");
    replicate->add_option("--n0", n0, "Initial inventory override");
    replicate->add_flag("--full", full, "Use the full 100-trial setting for GP presets");
    replicate->add_option("--out", out_dir, "Output directory (default: tsrm-out)");
    replicate->add_option("--workers", workers, "Worker threads (0 = hardware; capped by TSRM_MAX_WORKERS)");

    auto* dp = app.add_subcommand("dp-oracle", "Optimal expected revenue by dynamic programming");
    std::string dp_preset, dp_env, dp_csv;
    long long dp_n0 = -1;
    auto* dp_preset_opt = dp->add_option("--preset", dp_preset, "Preset name, e.g. A1 or A1-n50");
    dp->add_option("--env", dp_env, "Environment JSON file instead of a preset")->excludes(dp_preset_opt);
    dp->add_option("--n0", dp_n0, "Initial inventory (required with --env)");
    dp->add_option("--csv", dp_csv, "Dump the value table as CSV");

    auto* lp = app.add_subcommand("lp", "Solve one fluid LP instance");
    std::string instance;
    lp->add_option("--instance", instance, "Instance JSON {lambda, prices, start, inventory}")->required();

    auto* show = app.add_subcommand("show-preset", "Print the canonical config of a preset");
    std::string show_name;
    bool show_full = false;
    show->add_option("--preset", show_name, "Preset name")->required();
    show->add_flag("--full", show_full, "Full GP setting");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*simulate) {
            tsrm::ExperimentConfig cfg = tsrm::config_from_json(read_json_file(config_path));
            if (!out_dir.empty()) cfg.output = out_dir;
            return cmd_run(cfg, workers);
        }
        if (*replicate) {
            tsrm::ExperimentConfig cfg = tsrm::expand_preset(preset, full);
            if (trials > 0) cfg.trials = trials;
            if (episodes > 0) cfg.episodes = episodes;
            if (n0 >= 0) cfg.n0 = n0;
            if (!policies.empty()) cfg.policies = parse_policy_list(policies);
            cfg.base_seed = seed;
            if (!out_dir.empty()) cfg.output = out_dir;
            return cmd_run(cfg, workers);
        }
        if (*dp) {
            tsrm::ExperimentConfig cfg;
            if (!dp_env.empty()) {
                if (dp_n0 < 0) throw tsrm::ConfigError("--n0", "required with --env");
                cfg.environment = read_json_file(dp_env);
                tsrm::environment_from_json(cfg.environment);
                cfg.n0 = dp_n0;
            } else if (!dp_preset.empty()) {
                cfg = tsrm::expand_preset(dp_preset);
                if (dp_n0 >= 0) cfg.n0 = dp_n0;
            } else {
                throw tsrm::ConfigError("dp-oracle", "one of --preset or --env is required");
            }
            return cmd_dp(cfg, dp_csv);
        }
        if (*lp) return cmd_lp(instance);
        if (*show) {
            std::cout << tsrm::config_to_json(tsrm::expand_preset(show_name, show_full)).dump(2) << "\n";
            return kExitOk;
        }
    } catch (const tsrm::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
