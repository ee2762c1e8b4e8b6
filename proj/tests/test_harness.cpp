#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support/fixtures.hpp"

using namespace tsrm;

namespace {

std::string read_file(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

ExperimentConfig small_config() {
    ExperimentConfig c = expand_preset("A1");
    c.trials = 3;
    c.episodes = 7;
    c.base_seed = 11;
    return c;
}

std::string expect_config_error(const json& j) {
    try {
        config_from_json(j);
    } catch (const ConfigError& e) {
        return e.path();
    }
    ADD_FAILURE() << "expected ConfigError for " << j.dump();
    return {};
}

}  // namespace

TEST(Presets, ExpandToPublishedSettings) {
    const auto a1 = expand_preset("A1");
    EXPECT_EQ(a1.n0, 50);
    EXPECT_EQ(a1.episodes, 5000u);
    EXPECT_EQ(a1.prior.at("family"), "gamma");
    EXPECT_EQ(a1.build_environment().horizon(), 10u);
    EXPECT_EQ(a1.build_environment().num_prices(), 9u);
    EXPECT_EQ(expand_preset("A2").n0, 1000);
    EXPECT_EQ(expand_preset("B1").episodes, 2000u);
    const auto gp = expand_preset("B2-gp");
    EXPECT_EQ(gp.episodes, 200u);
    EXPECT_EQ(gp.trials, 20u);
    EXPECT_EQ(expand_preset("A1-gp", true).trials, 100u);
    EXPECT_EQ(gp.prior.at("sigma_t"), 3.0);
    EXPECT_EQ(gp.prior.at("sigma_p"), 2.5);
    const auto nb = expand_preset("NB-B1");
    EXPECT_EQ(nb.n0, 30);
    EXPECT_EQ(nb.episodes, 5000u);
    EXPECT_EQ(nb.build_environment().family(), DemandFamily::NegativeBinomial);
    EXPECT_EQ(expand_preset("A1-n50").n0, 50);
    EXPECT_EQ(expand_preset("B1-gp-n7").n0, 7);
    EXPECT_THROW(expand_preset("C1"), ConfigError);
    EXPECT_THROW(expand_preset("NB-A1-gp"), ConfigError);
}

TEST(Presets, CanonicalJsonMatchesGoldenFiles) {
    for (const auto& name : preset_names()) {
        const std::string got = config_to_json(expand_preset(name)).dump(2) + "\n";
        const auto path = std::filesystem::path(TSRM_GOLDEN_DIR) / (name + ".json");
        ASSERT_TRUE(std::filesystem::exists(path)) << path;
        EXPECT_EQ(got, read_file(path)) << name;
        // Re-parsing and re-serialising is stable.
        EXPECT_EQ(config_to_json(config_from_json(json::parse(got))).dump(2) + "\n", got) << name;
    }
}

TEST(Config, ErrorsCarryFieldPath) {
    json good = config_to_json(small_config());
    EXPECT_NO_THROW(config_from_json(good));

    json j = good;
    j.erase("n0");
    EXPECT_EQ(expect_config_error(j), "$.n0");
    j = good;
    j["episodes"] = 0;
    EXPECT_EQ(expect_config_error(j), "$.episodes");
    j = good;
    j["policies"] = {"ts-episodic", "bogus"};
    EXPECT_EQ(expect_config_error(j), "$.policies[1]");
    j = good;
    j["environment"]["params"]["kind"] = "formula-Z";
    EXPECT_EQ(expect_config_error(j), "$.environment.params.kind");
    j = good;
    j["prior"]["alpha"] = -1.0;
    EXPECT_EQ(expect_config_error(j), "$.prior");
    j = good;
    j["prior"] = {{"family", "beta-negbin"}, {"a", 1}, {"b", 1}, {"r", 10}};
    EXPECT_EQ(expect_config_error(j), "$.prior.family");
    j = good;
    j["environment"]["prices"] = {3, 2, 1};
    EXPECT_EQ(expect_config_error(j), "$.environment.prices");
}

TEST(Config, ExplicitEnvironmentTable) {
    const json env = {{"family", "poisson"},
                      {"T", 2},
                      {"prices", {1, 2}},
                      {"params", {{"kind", "explicit"}, {"table", {{3, 1}, {2, 1}}}}}};
    const auto e = environment_from_json(env);
    EXPECT_EQ(e.mean(1, 0), 3.0);
    EXPECT_EQ(e.mean(2, 1), 1.0);
    json bad = env;
    bad["params"]["table"] = {{3, 1}};
    EXPECT_THROW(environment_from_json(bad), ConfigError);
}

TEST(Experiment, CsvSchemaAndRowCount) {
    const auto cfg = small_config();
    const auto res = run_trials(cfg, 1);
    const std::string csv = regret_csv(res);
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, kCsvHeader);
    std::size_t rows = 0;
    while (std::getline(is, line)) ++rows;
    EXPECT_EQ(rows, cfg.trials * cfg.episodes * cfg.policies.size());
    EXPECT_EQ(csv.find('\r'), std::string::npos);
    EXPECT_NEAR(res.rev_star, 330.08, 0.02);
}

TEST(Experiment, OutputIndependentOfWorkerCount) {
    const auto cfg = small_config();
    const std::string one = regret_csv(run_trials(cfg, 1));
    EXPECT_EQ(regret_csv(run_trials(cfg, 4)), one);
    EXPECT_EQ(regret_csv(run_trials(cfg, 16)), one);
    EXPECT_EQ(summary_json(run_trials(cfg, 4)).dump(), summary_json(run_trials(cfg, 1)).dump());
}

TEST(Experiment, WritesFilesByteIdentically) {
    auto cfg = small_config();
    const auto dir = std::filesystem::temp_directory_path() / "tsrm_harness_test";
    std::filesystem::remove_all(dir);
    cfg.output = (dir / "a").string();
    const auto fa = run_experiment(cfg, 2);
    cfg.output = (dir / "b").string();
    const auto fb = run_experiment(cfg, 3);
    EXPECT_EQ(read_file(fa.csv), read_file(fb.csv));
    EXPECT_EQ(read_file(fa.summary), read_file(fb.summary));
    const json summary = json::parse(read_file(fa.summary));
    EXPECT_TRUE(summary.at("policies").contains("ts-episodic-star"));
    std::filesystem::remove_all(dir);
}

TEST(Experiment, FloatFormatting) {
    EXPECT_EQ(format_g10(330.0886315199), "330.0886315");
    EXPECT_EQ(format_g10(0.0), "0");
    EXPECT_EQ(format_g10(-0.025), "-0.025");
}

TEST(Experiment, WorkerCapFromEnvironment) {
    ::setenv("TSRM_MAX_WORKERS", "2", 1);
    EXPECT_EQ(effective_workers(16), 2u);
    ::unsetenv("TSRM_MAX_WORKERS");
    EXPECT_EQ(effective_workers(3), 3u);
}
