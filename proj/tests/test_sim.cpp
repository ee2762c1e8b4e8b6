#include <gtest/gtest.h>

#include <cmath>

#include "support/fixtures.hpp"

using namespace tsrm;
using namespace tsrm::testing;

TEST(Ledger, SatisfiedDemandCappedByInventory) {
    const PriceGrid grid({1, 2, 3, 4});
    const auto rec = settle_period(1, Action::price(3), 5, 3, grid);
    EXPECT_EQ(rec.satisfied, 3);
    EXPECT_EQ(rec.revenue, 12.0);
    EXPECT_EQ(rec.inventory_after, 0);
}

TEST(Ledger, ShutoffEarnsNothing) {
    const auto rec = settle_period(1, Action::shutoff(), 0, 10, PriceGrid({5}));
    EXPECT_EQ(rec.revenue, 0.0);
    EXPECT_EQ(rec.inventory_after, 10);
}

TEST(RunEpisode, NoInventoryNoRevenue) {
    const auto env = env_a();
    auto pol = make_policy(PolicyKind::TsDynamicStar, env, GammaPrior{});
    Rng rng(1);
    const auto tr = run_episode(env, pol, 0, rng);
    EXPECT_EQ(tr.revenue, 0.0);
    for (const auto& p : tr.periods) EXPECT_TRUE(p.action.is_shutoff());
}

TEST(RunEpisode, DeterministicForFixedSeed) {
    const auto env = env_b();
    for (PolicyKind k : kAllPolicies) {
        auto a = make_policy(k, env, GammaPrior{});
        auto b = make_policy(k, env, GammaPrior{});
        Rng ra(5), rb(5);
        for (int e = 0; e < 5; ++e) EXPECT_EQ(run_episode(env, a, 50, ra), run_episode(env, b, 50, rb));
    }
}

TEST(RunEpisode, TraceInvariantsHold) {
    const auto env = env_nb("negbin-PA");
    Rng rng(6);
    for (PolicyKind k : kAllPolicies) {
        auto pol = make_policy(k, env, BetaNegBinPrior{});
        for (int e = 0; e < 30; ++e) {
            const long long n0 = 30;
            const auto tr = run_episode(env, pol, n0, rng);
            long long inv = n0, sold = 0;
            double revenue = 0.0;
            bool empty = false;
            for (const auto& p : tr.periods) {
                EXPECT_EQ(p.satisfied, std::min(p.demand, inv));
                EXPECT_EQ(p.inventory_after, std::max(inv - p.demand, 0LL));
                EXPECT_DOUBLE_EQ(p.revenue, env.grid().price_of(p.action) * static_cast<double>(p.satisfied));
                if (p.action.is_shutoff()) EXPECT_EQ(p.demand, 0);
                if (empty) EXPECT_EQ(p.revenue, 0.0);
                EXPECT_LE(p.inventory_after, inv);
                // Replaying the ledger reproduces the record.
                EXPECT_EQ(settle_period(p.period, p.action, p.demand, inv, env.grid()), p);
                inv = p.inventory_after;
                empty = inv == 0;
                sold += p.satisfied;
                revenue += p.revenue;
            }
            EXPECT_LE(sold, n0);
            EXPECT_DOUBLE_EQ(revenue, tr.revenue);
            EXPECT_LE(tr.revenue, env.grid().top() * static_cast<double>(n0));
        }
    }
}

TEST(RunTrial, SingleEpisodeEqualsRunEpisode) {
    const auto env = env_a();
    const auto trial = run_trial(env, PolicyKind::TsEpisodic, GammaPrior{}, 50, 1, 77);
    auto pol = make_policy(PolicyKind::TsEpisodic, env, GammaPrior{});
    Rng rng(77);
    EXPECT_EQ(trial.episode_revenue.front(), run_episode(env, pol, 50, rng).revenue);
    EXPECT_EQ(*trial.final_stats, pol.posterior()->stats());
}

TEST(RunTrial, SeedsControlOutput) {
    const auto env = env_a();
    const auto a = run_trial(env, PolicyKind::TsDynamic, GammaPrior{}, 50, 20, 1);
    const auto b = run_trial(env, PolicyKind::TsDynamic, GammaPrior{}, 50, 20, 1);
    const auto c = run_trial(env, PolicyKind::TsDynamic, GammaPrior{}, 50, 20, 2);
    EXPECT_EQ(a.episode_revenue, b.episode_revenue);
    EXPECT_NE(a.episode_revenue, c.episode_revenue);
    EXPECT_EQ(a.episode_revenue.size(), 20u);
    for (double r : a.episode_revenue) EXPECT_GE(r, 0.0);
}

TEST(RunTrial, OracleEpisodesMatchPublishedRegret) {
    // Oracle revenue is i.i.d. across episodes. Environment B has a unique
    // LP optimum, so the published 1.73% should hold within 4 standard errors.
    const auto env = env_b();
    const double rev_star = solve_dp(env, 50).optimal_revenue();
    const auto trial = run_trial(env, PolicyKind::TsEpisodicStar, GammaPrior{}, 50, 10000, 4242);
    const auto s = summarize(trial.episode_revenue);
    EXPECT_NEAR(s.mean, (1.0 - 0.0173) * rev_star, 4.0 * s.std_error + 0.0005 * rev_star);
}
