#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "tsrm/demand.hpp"
#include "tsrm/grid.hpp"

namespace tsrm {

/// Optimal expected revenue and policy with the demand law known.
/// `value(r, n)` is the best expected revenue with r periods remaining and
/// n units of inventory; `action(r, n)` is the price to post then.
class ValueTable {
public:
    ValueTable() = default;
    ValueTable(std::size_t horizon, std::size_t max_inventory)
        : v_(horizon + 1, max_inventory + 1, 0.0), a_(horizon + 1, max_inventory + 1, Action::shutoff()) {}

    std::size_t horizon() const noexcept { return v_.rows() - 1; }
    std::size_t max_inventory() const noexcept { return v_.cols() - 1; }

    double value(std::size_t remaining, std::size_t inventory) const { return v_.at(remaining, inventory); }
    Action action(std::size_t remaining, std::size_t inventory) const {
        if (remaining == 0) throw std::invalid_argument("ValueTable: no decision with zero periods remaining");
        return a_.at(remaining, inventory);
    }

    /// Rev*(T, theta) at the table's starting inventory.
    double optimal_revenue() const { return v_(horizon(), max_inventory()); }

    const Grid2D<double>& values() const noexcept { return v_; }

private:
    friend ValueTable solve_dp(const DemandEnvironment&, std::size_t);
    Grid2D<double> v_;
    Grid2D<Action> a_;
};

/// Backward induction over (periods remaining, inventory):
///   V[r][n] = max_a E[p_a min(D, n) + V[r-1][n - min(D, n)]]
/// with D drawn for calendar period T - r + 1. Ties prefer shut-off, then
/// the lowest price index.
inline ValueTable solve_dp(const DemandEnvironment& env, std::size_t n0) {
    const std::size_t T = env.horizon();
    const std::size_t K = env.num_prices();
    const PriceGrid& prices = env.grid();
    ValueTable table(T, n0);

    // pmf[k][d] for d <= n0 in the current calendar period, plus prefix
    // sums for the capped tail.
    std::vector<std::vector<double>> pmf(K);
    std::vector<std::vector<double>> tail(K);  // tail[k][n] = P(D >= n)

    for (std::size_t r = 1; r <= T; ++r) {
        const std::size_t t = T - r + 1;
        for (std::size_t k = 0; k < K; ++k) {
            pmf[k] = capped_demand_pmf(env, t, k, n0);
            tail[k].assign(n0 + 1, 0.0);
            detail::CompensatedSum below;
            for (std::size_t n = 0; n <= n0; ++n) {
                tail[k][n] = std::max(0.0, 1.0 - below.value());
                if (n < n0) below.add(pmf[k][n]);
            }
        }
        table.v_(r, 0) = 0.0;
        table.a_(r, 0) = Action::shutoff();
        for (std::size_t n = 1; n <= n0; ++n) {
            double best = table.v_(r - 1, n);
            Action best_action = Action::shutoff();
            for (std::size_t k = 0; k < K; ++k) {
                const double p = prices[k];
                const std::vector<double>& q = pmf[k];
                double v = 0.0;
                for (std::size_t d = 0; d < n; ++d) v += q[d] * (p * static_cast<double>(d) + table.v_(r - 1, n - d));
                v += tail[k][n] * p * static_cast<double>(n);
                if (v > best * (1.0 + 1e-14) + 1e-300) {
                    best = v;
                    best_action = Action::price(k);
                }
            }
            table.v_(r, n) = best;
            table.a_(r, n) = best_action;
        }
    }
    return table;
}

/// Optimal action in calendar period `period` (1-based) holding `inventory`.
inline Action oracle_policy_action(const ValueTable& table, std::size_t period, std::size_t inventory) {
    if (period < 1 || period > table.horizon()) throw std::invalid_argument("oracle_policy_action: period out of range");
    if (inventory > table.max_inventory())
        throw std::invalid_argument("oracle_policy_action: inventory exceeds table bound");
    return table.action(table.horizon() - period + 1, inventory);
}

}  // namespace tsrm
