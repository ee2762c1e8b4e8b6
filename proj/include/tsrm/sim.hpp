#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tsrm/demand.hpp"
#include "tsrm/policies.hpp"
#include "tsrm/posterior.hpp"
#include "tsrm/rng.hpp"

namespace tsrm {

struct PeriodRecord {
    std::size_t period = 0;
    Action action;
    long long demand = 0;     // D, drawn even when inventory is exhausted
    long long satisfied = 0;  // min(D, inventory before)
    double revenue = 0.0;
    long long inventory_after = 0;

    bool operator==(const PeriodRecord&) const = default;
};

struct EpisodeTrace {
    long long initial_inventory = 0;
    std::vector<PeriodRecord> periods;
    double revenue = 0.0;
    long long lost_sales = 0;

    bool operator==(const EpisodeTrace&) const = default;
};

/// Applies one period of the inventory ledger.
inline PeriodRecord settle_period(std::size_t t, Action a, long long demand, long long inventory_before,
                                  const PriceGrid& grid) {
    PeriodRecord rec;
    rec.period = t;
    rec.action = a;
    rec.demand = demand;
    rec.satisfied = std::min(demand, inventory_before);
    rec.revenue = grid.price_of(a) * static_cast<double>(rec.satisfied);
    rec.inventory_after = std::max(inventory_before - demand, 0LL);
    return rec;
}

/// One selling season: at every period the policy prices, demand is drawn,
/// the ledger is settled and the policy observes the uncensored demand.
/// Policy randomness is drawn before the demand draw.
inline EpisodeTrace run_episode(const DemandEnvironment& env, Policy& policy, long long n0, Rng& rng) {
    if (n0 < 0) throw std::invalid_argument("run_episode: initial inventory must be >= 0");
    EpisodeTrace trace;
    trace.initial_inventory = n0;
    trace.periods.reserve(env.horizon());
    policy.begin_episode(static_cast<std::size_t>(n0), rng);
    long long inventory = n0;
    for (std::size_t t = 1; t <= env.horizon(); ++t) {
        const Action a = policy.choose_price(t, inventory, rng);
        const long long d = sample_demand(env, t, a, rng);
        const PeriodRecord rec = settle_period(t, a, d, inventory, env.grid());
        inventory = rec.inventory_after;
        trace.revenue += rec.revenue;
        trace.lost_sales += rec.demand - rec.satisfied;
        trace.periods.push_back(rec);
        policy.observe(t, a, d);
    }
    return trace;
}

struct TrialResult {
    std::uint64_t seed = 0;
    std::vector<double> episode_revenue;
    std::optional<SufficientStats> final_stats;  // learning policies only
};

/// Builds the policy for one trial. Oracle kinds get the true means;
/// learning kinds start from `prior`.
inline Policy make_policy(PolicyKind kind, const DemandEnvironment& env, const PriorSpec& prior) {
    if (is_oracle(kind)) return Policy::oracle(kind, mean_demand(env), env.grid());
    return Policy::learning(kind, PosteriorState(prior, env.grid(), env.horizon()));
}

/// S consecutive episodes sharing one evolving policy, driven by a single
/// rng stream seeded with `seed`.
inline TrialResult run_trial(const DemandEnvironment& env, PolicyKind kind, const PriorSpec& prior, long long n0,
                             std::size_t episodes, std::uint64_t seed) {
    if (episodes == 0) throw std::invalid_argument("run_trial: need at least one episode");
    Rng rng(seed);
    Policy policy = make_policy(kind, env, prior);
    TrialResult out;
    out.seed = seed;
    out.episode_revenue.reserve(episodes);
    for (std::size_t s = 0; s < episodes; ++s) out.episode_revenue.push_back(run_episode(env, policy, n0, rng).revenue);
    if (policy.posterior()) out.final_stats = policy.posterior()->stats();
    return out;
}

}  // namespace tsrm
