#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsrm/demand.hpp"
#include "tsrm/grid.hpp"

namespace tsrm {

/// Solution of the fluid relaxation from period `start` to the horizon.
/// Row i of `x` is period start+i; the residual 1 - sum(row) is the
/// probability of the shut-off price.
struct PricingPlan {
    std::size_t start = 1;
    Grid2D<double> x;
    double objective = 0.0;
    double dual_mu = 0.0;  // shadow price of inventory

    std::size_t periods() const noexcept { return x.rows(); }
};

namespace lp {

inline constexpr double kRowSumTol = 1e-9;
inline constexpr double kSupportTol = 1e-9;
inline constexpr double kReducedTol = 1e-9;
inline constexpr double kObjectiveTol = 1e-6;
inline constexpr double kBreakpointMerge = 1e-12;  // relative

inline double inventory_tol(double n) { return 1e-6 * std::max(1.0, n); }

inline void check_inputs(const MeanDemandMatrix& lambda, std::size_t start, double inventory, const PriceGrid& prices) {
    if (!(inventory >= 0.0) || !std::isfinite(inventory)) throw std::invalid_argument("lp: inventory must be finite and >= 0");
    if (start < 1) throw std::invalid_argument("lp: start period must be >= 1");
    if (lambda.cols() != prices.size()) throw std::invalid_argument("lp: lambda width must equal number of prices");
    for (double v : lambda.raw())
        if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("lp: lambda entries must be finite and >= 0");
}

inline double plan_objective(const Grid2D<double>& x, const MeanDemandMatrix& lambda, std::size_t start,
                             const PriceGrid& prices) {
    double v = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t k = 0; k < x.cols(); ++k) v += x(i, k) * lambda(start - 1 + i, k) * prices[k];
    return v;
}

inline double plan_consumption(const Grid2D<double>& x, const MeanDemandMatrix& lambda, std::size_t start) {
    double v = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t k = 0; k < x.cols(); ++k) v += x(i, k) * lambda(start - 1 + i, k);
    return v;
}

// Column maximising lambda*(p - mu) in one row, or shut-off when no column
// is strictly profitable. Ties go to the lowest price index.
inline Action best_column(const double* lambda_row, const PriceGrid& prices, double mu) {
    Action best = Action::shutoff();
    double best_value = 0.0;
    for (std::size_t k = 0; k < prices.size(); ++k) {
        const double v = lambda_row[k] * (prices[k] - mu);
        if (v > best_value) {
            best_value = v;
            best = Action::price(k);
        }
    }
    return best;
}

}  // namespace lp

/// Solves
///   max  sum_{tau>=start,k} x[tau,k] lambda[tau,k] p_k
///   s.t. sum x lambda <= inventory,  sum_k x[tau,k] <= 1,  x >= 0
/// exactly. With a single coupling constraint the optimum is a greedy
/// per-row choice at the inventory shadow price mu. The candidate values of
/// mu where some row switches column are enumerated, the critical one is
/// found by binary search on consumption, and rows that switch there are
/// mixed in increasing period order so consumption meets the inventory.
inline PricingPlan solve_lp(const MeanDemandMatrix& lambda, std::size_t start, double inventory,
                            const PriceGrid& prices) {
    lp::check_inputs(lambda, start, inventory, prices);
    const std::size_t K = prices.size();
    const std::size_t rows = start > lambda.rows() ? 0 : lambda.rows() - start + 1;

    PricingPlan plan;
    plan.start = start;
    plan.x = Grid2D<double>(rows, K, 0.0);
    if (rows == 0) return plan;

    auto row_ptr = [&](std::size_t i) { return lambda.row_data(start - 1 + i); };

    // Breakpoints: mu where two columns of a row tie, or where a column's
    // reduced value crosses zero.
    std::vector<double> breaks;
    for (std::size_t i = 0; i < rows; ++i) {
        const double* lam = row_ptr(i);
        for (std::size_t k = 0; k < K; ++k) {
            if (lam[k] <= 0.0) continue;
            if (prices[k] > 0.0) breaks.push_back(prices[k]);
            for (std::size_t j = k + 1; j < K; ++j) {
                if (lam[j] <= 0.0 || lam[j] == lam[k]) continue;
                const double mu = (lam[j] * prices[j] - lam[k] * prices[k]) / (lam[j] - lam[k]);
                if (mu > 0.0 && std::isfinite(mu)) breaks.push_back(mu);
            }
        }
    }
    // Breakpoints that agree up to rounding (e.g. rows of a separable
    // lambda(t, p) = g(t) h(p)) are one tie, resolved in increasing tau below.
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end(),
                             [](double a, double b) { return b - a <= lp::kBreakpointMerge * b; }),
                 breaks.end());

    // Interval j is (breaks[j-1], breaks[j]) with breaks[-1] = 0 and
    // breaks[m] = +inf. The greedy choice is constant inside each interval.
    const std::size_t m = breaks.size();
    auto interval_mu = [&](std::size_t j) {
        const double lo = j == 0 ? 0.0 : breaks[j - 1];
        const double hi = j == m ? lo + 1.0 : breaks[j];
        return 0.5 * (lo + hi);
    };
    auto choices_at = [&](double mu) {
        std::vector<Action> c(rows);
        for (std::size_t i = 0; i < rows; ++i) c[i] = lp::best_column(row_ptr(i), prices, mu);
        return c;
    };
    auto consumption = [&](const std::vector<Action>& c) {
        double v = 0.0;
        for (std::size_t i = 0; i < rows; ++i)
            if (!c[i].is_shutoff()) v += row_ptr(i)[c[i].index];
        return v;
    };

    // Smallest interval whose consumption fits; consumption is
    // non-increasing in mu and is zero on the last interval.
    std::size_t lo = 0, hi = m;
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (consumption(choices_at(interval_mu(mid))) <= inventory)
            hi = mid;
        else
            lo = mid + 1;
    }
    const std::size_t j = lo;
    const std::vector<Action> low = choices_at(interval_mu(j));

    if (j == 0) {
        for (std::size_t i = 0; i < rows; ++i)
            if (!low[i].is_shutoff()) plan.x(i, low[i].index) = 1.0;
        plan.dual_mu = 0.0;
    } else {
        const std::vector<Action> high = choices_at(interval_mu(j - 1));
        plan.dual_mu = breaks[j - 1];
        double extra = inventory - consumption(low);
        for (std::size_t i = 0; i < rows; ++i) {
            const double lam_hi = high[i].is_shutoff() ? 0.0 : row_ptr(i)[high[i].index];
            const double lam_lo = low[i].is_shutoff() ? 0.0 : row_ptr(i)[low[i].index];
            const double delta = lam_hi - lam_lo;
            double frac = 0.0;
            if (high[i] != low[i] && delta > 0.0 && extra > 0.0) {
                frac = std::min(1.0, extra / delta);
                extra -= frac * delta;
            }
            if (!high[i].is_shutoff()) plan.x(i, high[i].index) += frac;
            if (!low[i].is_shutoff()) plan.x(i, low[i].index) += 1.0 - frac;
        }
    }

    for (double& v : plan.x.raw()) v = std::clamp(v, 0.0, 1.0);
    plan.objective = lp::plan_objective(plan.x, lambda, start, prices);
    return plan;
}

struct CertificateReport {
    bool ok = true;
    std::vector<std::string> violations;

    explicit operator bool() const noexcept { return ok; }
    void fail(std::string msg) {
        ok = false;
        violations.push_back(std::move(msg));
    }
};

/// KKT check of a plan against the LP it claims to solve: primal
/// feasibility, complementary slackness on the inventory constraint, and
/// per-row support on the columns that maximise lambda*(p - mu).
inline CertificateReport check_certificate(const PricingPlan& plan, const MeanDemandMatrix& lambda, double inventory,
                                           const PriceGrid& prices) {
    CertificateReport rep;
    const std::size_t K = prices.size();
    const std::size_t expected_rows = plan.start > lambda.rows() ? 0 : lambda.rows() - plan.start + 1;
    if (plan.x.rows() != expected_rows || (expected_rows > 0 && plan.x.cols() != K)) {
        rep.fail("plan dimensions do not match the instance");
        return rep;
    }
    if (plan.dual_mu < 0.0) rep.fail("dual_mu is negative");

    for (std::size_t i = 0; i < plan.x.rows(); ++i) {
        double row_sum = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            const double v = plan.x(i, k);
            if (v < -1e-12 || v > 1.0 + 1e-12) {
                std::ostringstream os;
                os << "x[" << i << "][" << k << "] = " << v << " outside [0,1]";
                rep.fail(os.str());
            }
            row_sum += v;
        }
        if (row_sum > 1.0 + lp::kRowSumTol) {
            std::ostringstream os;
            os << "row " << i << " sums to " << row_sum;
            rep.fail(os.str());
        }
    }
    const double used = lp::plan_consumption(plan.x, lambda, plan.start);
    if (used > inventory + lp::inventory_tol(inventory)) {
        std::ostringstream os;
        os << "inventory violated: consumption " << used << " > " << inventory;
        rep.fail(os.str());
    }
    if (plan.dual_mu * (inventory - used) > lp::inventory_tol(inventory)) {
        std::ostringstream os;
        os << "complementary slackness: mu*(n - used) = " << plan.dual_mu * (inventory - used);
        rep.fail(os.str());
    }

    for (std::size_t i = 0; i < plan.x.rows(); ++i) {
        const double* lam = lambda.row_data(plan.start - 1 + i);
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < K; ++k) best = std::max(best, lam[k] * (prices[k] - plan.dual_mu));
        const double scale = std::max(1.0, std::abs(best));
        double row_sum = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            row_sum += plan.x(i, k);
            if (plan.x(i, k) <= lp::kSupportTol) continue;
            const double v = lam[k] * (prices[k] - plan.dual_mu);
            if (v < best - lp::kReducedTol * scale || v < -lp::kReducedTol) {
                std::ostringstream os;
                os << "row " << i << ": support on non-maximal column " << k;
                rep.fail(os.str());
            }
        }
        if (best > lp::kReducedTol && std::abs(row_sum - 1.0) > lp::kRowSumTol) {
            std::ostringstream os;
            os << "row " << i << ": profitable row (max reduced value " << best << ") not fully allocated";
            rep.fail(os.str());
        }
    }

    const double recomputed = lp::plan_objective(plan.x, lambda, plan.start, prices);
    if (std::abs(recomputed - plan.objective) > 1e-9 * std::max(1.0, std::abs(recomputed)))
        rep.fail("stored objective does not match the plan");
    return rep;
}

struct AvgPlan {
    std::vector<double> x;
    double objective = 0.0;
    double dual_mu = 0.0;
};

/// Single-period LP that spreads `inventory` evenly over `periods_left`
/// periods: max sum x_k lambda_k p_k s.t. sum x_k lambda_k <= n / tau,
/// sum x_k <= 1.
inline AvgPlan solve_lp_avg(const std::vector<double>& lambda_row, double inventory, std::size_t periods_left,
                            const PriceGrid& prices) {
    if (periods_left == 0) throw std::invalid_argument("lp_avg: number of periods must be >= 1");
    MeanDemandMatrix one(1, lambda_row.size());
    for (std::size_t k = 0; k < lambda_row.size(); ++k) one(0, k) = lambda_row[k];
    const PricingPlan p = solve_lp(one, 1, inventory / static_cast<double>(periods_left), prices);
    AvgPlan out;
    out.x.assign(p.x.row_data(0), p.x.row_data(0) + p.x.cols());
    out.objective = p.objective;
    out.dual_mu = p.dual_mu;
    return out;
}

}  // namespace tsrm
