#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "tsrm/lp.hpp"

namespace tsrm {

namespace simplex {

/// Dense tableau simplex for max c^T x s.t. A x <= b, x >= 0 with b >= 0
/// (the slack basis is feasible). Bland's rule for entering and leaving
/// variables, so it cannot cycle. Returns the primal solution; `objective`
/// and `duals` are filled on success.
struct Result {
    std::vector<double> x;
    std::vector<double> duals;
    double objective = 0.0;
};

inline Result maximize(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                       const std::vector<double>& c, std::size_t max_pivots = 100000) {
    const std::size_t m = A.size();
    const std::size_t n = c.size();
    const std::size_t width = n + m + 1;
    constexpr double eps = 1e-12;

    std::vector<std::vector<double>> tab(m + 1, std::vector<double>(width, 0.0));
    std::vector<std::size_t> basis(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (b[i] < 0.0) throw std::invalid_argument("simplex: right-hand side must be >= 0");
        for (std::size_t j = 0; j < n; ++j) tab[i][j] = A[i][j];
        tab[i][n + i] = 1.0;
        tab[i][width - 1] = b[i];
        basis[i] = n + i;
    }
    for (std::size_t j = 0; j < n; ++j) tab[m][j] = -c[j];

    for (std::size_t pivots = 0;; ++pivots) {
        if (pivots > max_pivots) throw std::runtime_error("simplex: pivot limit exceeded");
        std::size_t enter = width;
        for (std::size_t j = 0; j + 1 < width; ++j)
            if (tab[m][j] < -eps) {
                enter = j;
                break;
            }
        if (enter == width) break;

        std::size_t leave = m;
        double best_ratio = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (tab[i][enter] <= eps) continue;
            const double ratio = tab[i][width - 1] / tab[i][enter];
            if (leave == m || ratio < best_ratio - eps ||
                (std::abs(ratio - best_ratio) <= eps && basis[i] < basis[leave])) {
                leave = i;
                best_ratio = ratio;
            }
        }
        if (leave == m) throw std::runtime_error("simplex: problem is unbounded");

        const double piv = tab[leave][enter];
        for (double& v : tab[leave]) v /= piv;
        for (std::size_t i = 0; i <= m; ++i) {
            if (i == leave) continue;
            const double f = tab[i][enter];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < width; ++j) tab[i][j] -= f * tab[leave][j];
        }
        basis[leave] = enter;
    }

    Result r;
    r.x.assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        if (basis[i] < n) r.x[basis[i]] = tab[i][width - 1];
    r.duals.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) r.duals[i] = tab[m][n + i];
    r.objective = tab[m][width - 1];
    return r;
}

}  // namespace simplex

/// Same LP as solve_lp, solved by a generic dense simplex over all
/// (T-start+1)*K variables. Intended as a test oracle.
inline PricingPlan solve_lp_reference(const MeanDemandMatrix& lambda, std::size_t start, double inventory,
                                      const PriceGrid& prices) {
    lp::check_inputs(lambda, start, inventory, prices);
    const std::size_t K = prices.size();
    const std::size_t rows = start > lambda.rows() ? 0 : lambda.rows() - start + 1;
    PricingPlan plan;
    plan.start = start;
    plan.x = Grid2D<double>(rows, K, 0.0);
    if (rows == 0) return plan;

    const std::size_t n = rows * K;
    std::vector<std::vector<double>> A(rows + 1, std::vector<double>(n, 0.0));
    std::vector<double> b(rows + 1, 1.0), c(n, 0.0);
    b[0] = inventory;
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t k = 0; k < K; ++k) {
            const double lam = lambda(start - 1 + i, k);
            A[0][i * K + k] = lam;
            A[i + 1][i * K + k] = 1.0;
            c[i * K + k] = lam * prices[k];
        }
    const simplex::Result r = simplex::maximize(A, b, c);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t k = 0; k < K; ++k) plan.x(i, k) = std::clamp(r.x[i * K + k], 0.0, 1.0);
    plan.dual_mu = std::max(0.0, r.duals[0]);
    plan.objective = lp::plan_objective(plan.x, lambda, start, prices);
    return plan;
}

}  // namespace tsrm
