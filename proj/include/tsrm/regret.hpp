#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "tsrm/sim.hpp"

namespace tsrm {

/// Relative regret after each episode s: 1 - cum_revenue(s) / (s * rev_star).
inline std::vector<double> relative_regret_series(const std::vector<double>& episode_revenue, double rev_star) {
    if (!(rev_star > 0.0)) throw std::invalid_argument("relative regret: rev_star must be > 0");
    std::vector<double> out(episode_revenue.size());
    double cum = 0.0;
    for (std::size_t s = 0; s < episode_revenue.size(); ++s) {
        cum += episode_revenue[s];
        out[s] = 1.0 - cum / (static_cast<double>(s + 1) * rev_star);
    }
    return out;
}

struct RegretCurve {
    double rev_star = 0.0;
    std::vector<double> mean;    // per episode, across trials
    std::vector<double> std_error;  // sample std / sqrt(trials); 0 for a single trial
};

struct MeanAndError {
    double mean = 0.0;
    double std_error = 0.0;
    double std_dev = 0.0;
};

inline MeanAndError summarize(const std::vector<double>& xs) {
    MeanAndError r;
    if (xs.empty()) return r;
    double sum = 0.0;
    for (double x : xs) sum += x;
    r.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - r.mean) * (x - r.mean);
        r.std_dev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
        r.std_error = r.std_dev / std::sqrt(static_cast<double>(xs.size()));
    }
    return r;
}

inline RegretCurve relative_regret_curve(const std::vector<TrialResult>& trials, double rev_star) {
    if (!(rev_star > 0.0)) throw std::invalid_argument("relative_regret_curve: rev_star must be > 0");
    RegretCurve c;
    c.rev_star = rev_star;
    if (trials.empty()) return c;
    const std::size_t S = trials.front().episode_revenue.size();
    std::vector<std::vector<double>> series;
    series.reserve(trials.size());
    for (const auto& tr : trials) {
        if (tr.episode_revenue.size() != S) throw std::invalid_argument("relative_regret_curve: trials differ in length");
        series.push_back(relative_regret_series(tr.episode_revenue, rev_star));
    }
    c.mean.resize(S);
    c.std_error.resize(S);
    std::vector<double> col(trials.size());
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t i = 0; i < trials.size(); ++i) col[i] = series[i][s];
        const MeanAndError m = summarize(col);
        c.mean[s] = m.mean;
        c.std_error[s] = m.std_error;
    }
    return c;
}

struct AbsoluteRegret {
    double mean = 0.0;
    double half_width = 0.0;  // 1.96 standard errors
};

/// Monte-Carlo estimate of S * rev_star - sum_s revenue_s over trials,
/// using the first S episodes of each trial.
inline AbsoluteRegret absolute_regret(const std::vector<TrialResult>& trials, double rev_star, std::size_t S) {
    std::vector<double> xs;
    xs.reserve(trials.size());
    for (const auto& tr : trials) {
        if (tr.episode_revenue.size() < S) throw std::invalid_argument("absolute_regret: trial shorter than S");
        double total = 0.0;
        for (std::size_t s = 0; s < S; ++s) total += tr.episode_revenue[s];
        xs.push_back(static_cast<double>(S) * rev_star - total);
    }
    const MeanAndError m = summarize(xs);
    return {m.mean, 1.96 * m.std_error};
}

}  // namespace tsrm
