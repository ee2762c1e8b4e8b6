#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tsrm/demand.hpp"
#include "tsrm/lp.hpp"
#include "tsrm/posterior.hpp"

namespace tsrm {

enum class PolicyKind { TsEpisodic, TsDynamic, TsFixedStar, TsUpdateStar, TsEpisodicStar, TsDynamicStar };

inline constexpr PolicyKind kAllPolicies[] = {PolicyKind::TsEpisodic,   PolicyKind::TsDynamic,
                                              PolicyKind::TsFixedStar,  PolicyKind::TsUpdateStar,
                                              PolicyKind::TsEpisodicStar, PolicyKind::TsDynamicStar};

inline std::string to_string(PolicyKind k) {
    switch (k) {
        case PolicyKind::TsEpisodic: return "ts-episodic";
        case PolicyKind::TsDynamic: return "ts-dynamic";
        case PolicyKind::TsFixedStar: return "ts-fixed-star";
        case PolicyKind::TsUpdateStar: return "ts-update-star";
        case PolicyKind::TsEpisodicStar: return "ts-episodic-star";
        default: return "ts-dynamic-star";
    }
}

inline PolicyKind parse_policy(std::string_view s) {
    for (PolicyKind k : kAllPolicies)
        if (to_string(k) == s) return k;
    throw std::invalid_argument("unknown policy: " + std::string(s));
}

/// True for the two policies that price with the true demand law.
inline bool is_oracle(PolicyKind k) { return k == PolicyKind::TsEpisodicStar || k == PolicyKind::TsDynamicStar; }

/// Draws a price from a plan row: one uniform against the cumulative row,
/// residual mass on shut-off.
inline Action sample_from_row(const double* row, std::size_t K, Rng& rng) {
    const double u = uniform01(rng);
    double acc = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        acc += row[k];
        if (u < acc) return Action::price(k);
    }
    return Action::shutoff();
}

/// One pricing policy across episodes. Learning policies own a posterior;
/// the oracle policies hold the true mean-demand matrix instead.
class Policy {
public:
    static Policy learning(PolicyKind kind, PosteriorState posterior) {
        if (is_oracle(kind)) throw std::invalid_argument("Policy::learning: oracle policy kind");
        Policy p(kind, posterior.grid(), posterior.horizon());
        p.posterior_.emplace(std::move(posterior));
        return p;
    }

    static Policy oracle(PolicyKind kind, MeanDemandMatrix true_mean, const PriceGrid& grid) {
        if (!is_oracle(kind)) throw std::invalid_argument("Policy::oracle: learning policy kind");
        Policy p(kind, grid, true_mean.rows());
        p.truth_ = std::move(true_mean);
        return p;
    }

    PolicyKind kind() const noexcept { return kind_; }
    std::size_t horizon() const noexcept { return horizon_; }
    const PriceGrid& grid() const noexcept { return grid_; }
    const std::optional<PosteriorState>& posterior() const noexcept { return posterior_; }
    const std::optional<PricingPlan>& current_plan() const noexcept { return plan_; }
    const std::optional<MeanDemandMatrix>& episode_sample() const noexcept { return sample_; }

    /// Number of fluid-LP solves (the full multi-period LP, not LP_avg).
    std::size_t lp_solves() const noexcept { return lp_solves_; }

    void begin_episode(std::size_t n0, Rng& rng) {
        n0_ = n0;
        switch (kind_) {
            case PolicyKind::TsEpisodic:
                sample_ = posterior_->sample(rng);
                plan_ = solve_lp(*sample_, 1, static_cast<double>(n0), grid_);
                ++lp_solves_;
                break;
            case PolicyKind::TsFixedStar:
            case PolicyKind::TsUpdateStar:
                sample_ = posterior_->sample(rng);
                break;
            case PolicyKind::TsEpisodicStar:
                if (!plan_ || cached_n0_ != n0) {
                    plan_ = solve_lp(*truth_, 1, static_cast<double>(n0), grid_);
                    cached_n0_ = n0;
                }
                ++lp_solves_;
                break;
            case PolicyKind::TsDynamic:
            case PolicyKind::TsDynamicStar:
                break;
        }
    }

    Action choose_price(std::size_t t, long long inventory, Rng& rng) {
        if (inventory < 0) throw std::invalid_argument("choose_price: inventory must be >= 0");
        if (t < 1 || t > horizon_) throw std::invalid_argument("choose_price: period out of range");
        const std::size_t K = grid_.size();
        const double n = static_cast<double>(inventory);
        switch (kind_) {
            case PolicyKind::TsEpisodic:
            case PolicyKind::TsEpisodicStar:
                return sample_from_row(plan_->x.row_data(t - 1), K, rng);
            case PolicyKind::TsDynamic: {
                const MeanDemandMatrix theta = posterior_->sample(rng);
                plan_ = solve_lp(theta, t, n, grid_);
                ++lp_solves_;
                return sample_from_row(plan_->x.row_data(0), K, rng);
            }
            case PolicyKind::TsDynamicStar: {
                ++lp_solves_;
                const auto key = std::make_pair(t, inventory);
                auto it = dynamic_cache_.find(key);
                if (it == dynamic_cache_.end()) {
                    const PricingPlan p = solve_lp(*truth_, t, n, grid_);
                    it = dynamic_cache_.emplace(key, std::vector<double>(p.x.row_data(0), p.x.row_data(0) + K)).first;
                }
                return sample_from_row(it->second.data(), K, rng);
            }
            case PolicyKind::TsFixedStar: {
                const std::vector<double> row(sample_->row_data(t - 1), sample_->row_data(t - 1) + K);
                const AvgPlan p = solve_lp_avg(row, static_cast<double>(n0_), horizon_, grid_);
                return sample_from_row(p.x.data(), K, rng);
            }
            case PolicyKind::TsUpdateStar: {
                const std::vector<double> row(sample_->row_data(t - 1), sample_->row_data(t - 1) + K);
                const AvgPlan p = solve_lp_avg(row, n, horizon_ - t + 1, grid_);
                return sample_from_row(p.x.data(), K, rng);
            }
        }
        return Action::shutoff();
    }

    void observe(std::size_t t, Action a, long long demand) {
        if (posterior_) posterior_->update(t, a, demand);
    }

private:
    Policy(PolicyKind kind, const PriceGrid& grid, std::size_t horizon) : kind_(kind), grid_(grid), horizon_(horizon) {}

    PolicyKind kind_;
    PriceGrid grid_;
    std::size_t horizon_;
    std::size_t n0_ = 0;
    std::optional<PosteriorState> posterior_;
    std::optional<MeanDemandMatrix> truth_;
    std::optional<PricingPlan> plan_;
    std::optional<MeanDemandMatrix> sample_;
    std::size_t lp_solves_ = 0;
    std::size_t cached_n0_ = 0;
    std::map<std::pair<std::size_t, long long>, std::vector<double>> dynamic_cache_;
};

}  // namespace tsrm
