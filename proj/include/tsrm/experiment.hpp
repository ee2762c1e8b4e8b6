#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "tsrm/dp.hpp"
#include "tsrm/presets.hpp"
#include "tsrm/regret.hpp"
#include "tsrm/sim.hpp"

namespace tsrm {

inline constexpr const char* kCsvHeader = "trial,episode,policy,revenue,cum_revenue,relative_regret";

/// "%.10g" formatting used for every float in CSV output.
inline std::string format_g10(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

/// Worker count after applying the TSRM_MAX_WORKERS cap from the
/// environment. Always at least 1.
inline std::size_t effective_workers(std::size_t requested) {
    std::size_t w = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
    if (const char* cap = std::getenv("TSRM_MAX_WORKERS")) {
        const long v = std::strtol(cap, nullptr, 10);
        if (v > 0) w = std::min(w, static_cast<std::size_t>(v));
    }
    return std::max<std::size_t>(w, 1);
}

/// Runs `count` independent jobs over `workers` threads. Jobs claim indices
/// from a shared counter and write only their own slot, so output never
/// depends on scheduling. The first exception is rethrown after joining.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
    workers = std::min(std::max<std::size_t>(workers, 1), std::max<std::size_t>(count, 1));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(count);
            }
        }
    };
    if (workers == 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
}

/// Seed of one (policy, trial) stream.
inline std::uint64_t trial_seed(std::uint64_t base_seed, PolicyKind kind, std::size_t trial) {
    return stream_seed(stream_seed(base_seed, static_cast<std::uint64_t>(kind)), trial);
}

struct PolicyRun {
    PolicyKind kind;
    std::vector<TrialResult> trials;
    RegretCurve curve;
};

struct ExperimentResult {
    ExperimentConfig config;
    double rev_star = 0.0;
    std::vector<PolicyRun> runs;
};

/// Executes every (policy, trial) pair of the config.
inline ExperimentResult run_trials(const ExperimentConfig& config, std::size_t workers = 0) {
    const DemandEnvironment env = config.build_environment();
    const PriorSpec prior = config.build_prior();
    ExperimentResult res;
    res.config = config;
    res.rev_star = solve_dp(env, static_cast<std::size_t>(config.n0)).optimal_revenue();

    const std::size_t P = config.policies.size();
    res.runs.resize(P);
    for (std::size_t p = 0; p < P; ++p) {
        res.runs[p].kind = config.policies[p];
        res.runs[p].trials.resize(config.trials);
    }
    parallel_for(P * config.trials, effective_workers(workers), [&](std::size_t job) {
        const std::size_t p = job / config.trials, tr = job % config.trials;
        const PolicyKind kind = config.policies[p];
        res.runs[p].trials[tr] =
            run_trial(env, kind, prior, config.n0, config.episodes, trial_seed(config.base_seed, kind, tr));
    });
    if (res.rev_star > 0.0)
        for (auto& run : res.runs) run.curve = relative_regret_curve(run.trials, res.rev_star);
    return res;
}

/// Per-trial regret rows, ordered by policy (config order), trial, episode.
inline std::string regret_csv(const ExperimentResult& res) {
    std::string out = kCsvHeader;
    out += '\n';
    for (const auto& run : res.runs) {
        const std::string name = to_string(run.kind);
        for (std::size_t tr = 0; tr < run.trials.size(); ++tr) {
            double cum = 0.0;
            const auto& rev = run.trials[tr].episode_revenue;
            for (std::size_t s = 0; s < rev.size(); ++s) {
                cum += rev[s];
                const double rho =
                    res.rev_star > 0.0 ? 1.0 - cum / (static_cast<double>(s + 1) * res.rev_star) : 0.0;
                out += std::to_string(tr + 1);
                out += ',';
                out += std::to_string(s + 1);
                out += ',';
                out += name;
                out += ',';
                out += format_g10(rev[s]);
                out += ',';
                out += format_g10(cum);
                out += ',';
                out += format_g10(rho);
                out += '\n';
            }
        }
    }
    return out;
}

/// Per-policy summary: final-episode relative regret across trials and the
/// per-episode relative regret 1 - revenue/rev_star pooled over all
/// episodes of all trials.
inline json summary_json(const ExperimentResult& res) {
    json pols = json::object();
    for (const auto& run : res.runs) {
        std::vector<double> finals, pooled;
        for (const auto& tr : run.trials) {
            if (res.rev_star > 0.0) {
                const auto series = relative_regret_series(tr.episode_revenue, res.rev_star);
                finals.push_back(series.back());
                for (double r : tr.episode_revenue) pooled.push_back(1.0 - r / res.rev_star);
            }
        }
        const MeanAndError f = summarize(finals), e = summarize(pooled);
        json entry = {{"final_relative_regret", {{"mean", f.mean}, {"stderr", f.std_error}}},
                      {"episode_relative_regret", {{"mean", e.mean}, {"std", e.std_dev}, {"stderr", e.std_error}}}};
        pols[to_string(run.kind)] = entry;
    }
    return {{"name", res.config.name},
            {"rev_star", res.rev_star},
            {"n0", res.config.n0},
            {"episodes", res.config.episodes},
            {"trials", res.config.trials},
            {"base_seed", res.config.base_seed},
            {"policies", pols}};
}

struct ExperimentFiles {
    std::filesystem::path csv;
    std::filesystem::path summary;
};

/// Runs the experiment and writes `regret.csv` and `summary.json` into
/// `config.output` (created if needed).
inline ExperimentFiles run_experiment(const ExperimentConfig& config, std::size_t workers = 0) {
    const ExperimentResult res = run_trials(config, workers);
    const std::filesystem::path dir(config.output);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
    ExperimentFiles files{dir / "regret.csv", dir / "summary.json"};
    auto write = [](const std::filesystem::path& p, const std::string& body) {
        std::ofstream os(p, std::ios::binary);
        if (!os) throw std::runtime_error("cannot open " + p.string() + " for writing");
        os << body;
        if (!os) throw std::runtime_error("write failed: " + p.string());
    };
    write(files.csv, regret_csv(res));
    write(files.summary, summary_json(res).dump(2) + "\n");
    return files;
}

}  // namespace tsrm
