#pragma once

#include <cmath>
#include <compare>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tsrm/grid.hpp"
#include "tsrm/rng.hpp"

namespace tsrm {

/// A pricing decision: one of the K grid prices, or the shut-off price
/// (zero demand, zero revenue).
struct Action {
    static constexpr std::size_t kShutoff = std::numeric_limits<std::size_t>::max();

    std::size_t index = kShutoff;

    static constexpr Action shutoff() noexcept { return Action{}; }
    static constexpr Action price(std::size_t k) noexcept { return Action{k}; }
    constexpr bool is_shutoff() const noexcept { return index == kShutoff; }

    auto operator<=>(const Action&) const = default;
};

class PriceGrid {
public:
    PriceGrid() = default;
    explicit PriceGrid(std::vector<double> prices) : prices_(std::move(prices)) {
        if (prices_.empty()) throw std::invalid_argument("PriceGrid: need at least one price");
        for (std::size_t k = 0; k < prices_.size(); ++k) {
            if (!std::isfinite(prices_[k]) || prices_[k] < 0.0)
                throw std::invalid_argument("PriceGrid: prices must be finite and >= 0");
            if (k > 0 && !(prices_[k] > prices_[k - 1]))
                throw std::invalid_argument("PriceGrid: prices must be strictly increasing");
        }
    }

    std::size_t size() const noexcept { return prices_.size(); }
    double operator[](std::size_t k) const { return prices_[k]; }
    double top() const { return prices_.back(); }
    const std::vector<double>& values() const noexcept { return prices_; }

    /// Revenue per unit sold under `a`; the shut-off action sells nothing.
    double price_of(Action a) const { return a.is_shutoff() ? 0.0 : prices_.at(a.index); }

    bool operator==(const PriceGrid&) const = default;

private:
    std::vector<double> prices_;
};

enum class DemandFamily { Poisson, NegativeBinomial };

inline std::string to_string(DemandFamily f) {
    return f == DemandFamily::Poisson ? "poisson" : "negbin";
}

namespace detail {

// Neumaier compensated sum.
class CompensatedSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double poisson_log_pmf(long long d, double mean) {
    return static_cast<double>(d) * std::log(mean) - mean - std::lgamma(static_cast<double>(d) + 1.0);
}

// Failures before the r-th success, success probability p.
inline double negbin_log_pmf(long long d, double r, double p) {
    const double dd = static_cast<double>(d);
    double log_fail = d == 0 ? 0.0 : dd * std::log1p(-p);
    return std::lgamma(dd + r) - std::lgamma(r) - std::lgamma(dd + 1.0) + r * std::log(p) + log_fail;
}

}  // namespace detail

/// The true demand law: per-(period, price) Poisson intensities or
/// negative-binomial success probabilities with a shared failure count r.
class DemandEnvironment {
public:
    static DemandEnvironment poisson(PriceGrid grid, Grid2D<double> intensity) {
        DemandEnvironment env;
        env.family_ = DemandFamily::Poisson;
        env.grid_ = std::move(grid);
        env.params_ = std::move(intensity);
        env.validate();
        return env;
    }

    static DemandEnvironment negative_binomial(PriceGrid grid, double r, Grid2D<double> success_prob) {
        DemandEnvironment env;
        env.family_ = DemandFamily::NegativeBinomial;
        env.grid_ = std::move(grid);
        env.r_ = r;
        env.params_ = std::move(success_prob);
        env.validate();
        return env;
    }

    DemandFamily family() const noexcept { return family_; }
    std::size_t horizon() const noexcept { return params_.rows(); }
    std::size_t num_prices() const noexcept { return grid_.size(); }
    const PriceGrid& grid() const noexcept { return grid_; }
    double failures() const noexcept { return r_; }
    /// Intensities (Poisson) or success probabilities (negative binomial).
    const Grid2D<double>& params() const noexcept { return params_; }

    /// Support bound used only where boundedness is required; draws are
    /// never truncated by it.
    std::size_t support_cap() const noexcept { return d_bar_; }
    void set_support_cap(std::size_t cap) noexcept { d_bar_ = cap; }

    double mean(std::size_t t, std::size_t k) const {
        check_cell(t, k);
        const double v = params_(t - 1, k);
        return family_ == DemandFamily::Poisson ? v : r_ * (1.0 - v) / v;
    }

    double log_pmf(std::size_t t, std::size_t k, long long d) const {
        check_cell(t, k);
        if (d < 0) return -std::numeric_limits<double>::infinity();
        const double v = params_(t - 1, k);
        return family_ == DemandFamily::Poisson ? detail::poisson_log_pmf(d, v)
                                                 : detail::negbin_log_pmf(d, r_, v);
    }

    bool operator==(const DemandEnvironment&) const = default;

private:
    DemandEnvironment() = default;

    void check_cell(std::size_t t, std::size_t k) const {
        if (t < 1 || t > horizon()) throw std::invalid_argument("demand: period out of range");
        if (k >= num_prices()) throw std::invalid_argument("demand: price index out of range");
    }

    void validate() const {
        if (params_.rows() == 0) throw std::invalid_argument("demand: horizon must be positive");
        if (params_.cols() != grid_.size())
            throw std::invalid_argument("demand: parameter table width must equal number of prices");
        for (double v : params_.raw()) {
            if (family_ == DemandFamily::Poisson) {
                if (!(v > 0.0) || !std::isfinite(v))
                    throw std::invalid_argument("demand: Poisson intensities must be finite and > 0");
            } else if (!(v > 0.0 && v < 1.0)) {
                throw std::invalid_argument("demand: success probabilities must lie in (0,1)");
            }
        }
        if (family_ == DemandFamily::NegativeBinomial && !(r_ > 0.0 && std::isfinite(r_)))
            throw std::invalid_argument("demand: failure count r must be > 0");
    }

    DemandFamily family_ = DemandFamily::Poisson;
    PriceGrid grid_;
    Grid2D<double> params_;
    double r_ = 0.0;
    std::size_t d_bar_ = std::numeric_limits<std::size_t>::max();
};

inline MeanDemandMatrix mean_demand(const DemandEnvironment& env) {
    MeanDemandMatrix m(env.horizon(), env.num_prices());
    for (std::size_t t = 1; t <= env.horizon(); ++t)
        for (std::size_t k = 0; k < env.num_prices(); ++k) m(t - 1, k) = env.mean(t, k);
    return m;
}

/// One exact draw of demand in period `t` under action `a`. Consumes no
/// randomness for the shut-off action.
inline long long sample_demand(const DemandEnvironment& env, std::size_t t, Action a, Rng& rng) {
    if (t < 1 || t > env.horizon()) throw std::invalid_argument("sample_demand: period out of range");
    if (a.is_shutoff()) return 0;
    if (a.index >= env.num_prices()) throw std::invalid_argument("sample_demand: price index out of range");
    const double v = env.params()(t - 1, a.index);
    if (env.family() == DemandFamily::Poisson) return poisson_draw(rng, v);
    // Gamma-Poisson mixture is exactly NB(r, p) in the failures parameterization.
    const double rate = gamma_draw(rng, env.failures(), (1.0 - v) / v);
    return poisson_draw(rng, rate);
}

/// Distribution of min(D, cap): entries d < cap hold P(D = d), the last
/// entry holds P(D >= cap).
inline std::vector<double> capped_demand_pmf(const DemandEnvironment& env, std::size_t t, std::size_t k,
                                             std::size_t cap) {
    std::vector<double> pmf(cap + 1, 0.0);
    detail::CompensatedSum below;
    for (std::size_t d = 0; d < cap; ++d) {
        pmf[d] = std::exp(env.log_pmf(t, k, static_cast<long long>(d)));
        below.add(pmf[d]);
    }
    pmf[cap] = std::max(0.0, 1.0 - below.value());
    return pmf;
}

}  // namespace tsrm
