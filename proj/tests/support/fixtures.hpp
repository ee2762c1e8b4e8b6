#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "tsrm/tsrm.hpp"

namespace tsrm::testing {

inline PriceGrid paper_grid() { return PriceGrid({1, 2, 3, 4, 5, 6, 7, 8, 9}); }

inline DemandEnvironment env_a(std::size_t T = 10) {
    return environment_from_json({{"family", "poisson"},
                                  {"T", T},
                                  {"prices", paper_prices_json()},
                                  {"params", {{"kind", "formula-A1"}}}});
}

inline DemandEnvironment env_b(std::size_t T = 10) {
    return environment_from_json({{"family", "poisson"},
                                  {"T", T},
                                  {"prices", paper_prices_json()},
                                  {"params", {{"kind", "formula-B"}}}});
}

inline DemandEnvironment env_nb(const char* kind, std::size_t T = 10) {
    return environment_from_json({{"family", "negbin"},
                                  {"T", T},
                                  {"prices", paper_prices_json()},
                                  {"params", {{"kind", kind}, {"r", 10.0}}}});
}

inline DemandEnvironment constant_poisson(std::size_t T, std::vector<double> prices, double lambda) {
    const std::size_t K = prices.size();
    return DemandEnvironment::poisson(PriceGrid(std::move(prices)), Grid2D<double>(T, K, lambda));
}

/// Random Poisson environment with integer-ish small intensities.
inline DemandEnvironment random_poisson(Rng& rng, std::size_t T, std::size_t K, double max_lambda) {
    std::vector<double> prices;
    double p = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        p += 0.5 + 2.0 * uniform01(rng);
        prices.push_back(p);
    }
    Grid2D<double> lam(T, K);
    for (double& v : lam.raw()) v = 0.05 + max_lambda * uniform01(rng);
    return DemandEnvironment::poisson(PriceGrid(prices), lam);
}

inline DemandEnvironment random_negbin(Rng& rng, std::size_t T, std::size_t K) {
    std::vector<double> prices;
    double p = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        p += 0.5 + 2.0 * uniform01(rng);
        prices.push_back(p);
    }
    Grid2D<double> succ(T, K);
    for (double& v : succ.raw()) v = 0.2 + 0.75 * uniform01(rng);
    return DemandEnvironment::negative_binomial(PriceGrid(prices), 1.0 + 9.0 * uniform01(rng), succ);
}

struct LpInstance {
    MeanDemandMatrix lambda;
    PriceGrid prices;
    std::size_t start;
    double inventory;
};

inline LpInstance random_lp_instance(Rng& rng) {
    const std::size_t T = 1 + rng() % 12, K = 1 + rng() % 10;
    std::vector<double> prices;
    double p = 0.0;
    for (std::size_t k = 0; k < K; ++k) prices.push_back(p += 0.1 + 3.0 * uniform01(rng));
    MeanDemandMatrix lam(T, K);
    double total = 0.0;
    for (double& v : lam.raw()) {
        v = 60.0 * uniform01(rng);
        total += v;
    }
    const std::size_t start = 1 + rng() % T;
    return {lam, PriceGrid(prices), start, 2.0 * total * uniform01(rng)};
}

/// Fills roughly 60% of cells with 1..30 Poisson observations.
inline void randomize_stats(PosteriorState& st, Rng& rng, double max_lambda) {
    for (std::size_t t = 1; t <= st.horizon(); ++t)
        for (std::size_t k = 0; k < st.num_prices(); ++k) {
            if (uniform01(rng) < 0.4) continue;
            const long long n = 1 + static_cast<long long>(rng() % 30);
            const double lam = 0.2 + max_lambda * uniform01(rng);
            st.add_observations(t, k, n, poisson_draw(rng, lam * static_cast<double>(n)));
        }
}

// Independent evaluation of the unnormalised GP log posterior using an
// explicit factorisation of the prior covariance.
struct GpObjective {
    Eigen::MatrixXd K;
    Eigen::LDLT<Eigen::MatrixXd> ldlt;
    Eigen::VectorXd N, S;
    double mean;

    explicit GpObjective(PosteriorState& st) : K(st.gp_kernel()), ldlt(K), mean(std::get<GpPrior>(st.prior()).mean) {
        const auto n = K.rows();
        N.resize(n);
        S.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            N(i) = static_cast<double>(st.stats().counts.raw()[static_cast<std::size_t>(i)]);
            S(i) = static_cast<double>(st.stats().sums.raw()[static_cast<std::size_t>(i)]);
        }
    }
    double operator()(const Eigen::VectorXd& g) const {
        const Eigen::VectorXd d = g.array() - mean;
        return (S.array() * g.array() - N.array() * g.array().exp()).sum() - 0.5 * d.dot(ldlt.solve(d));
    }
};

/// Largest |central difference - reported gradient| at the mode, h = 1e-5.
inline double laplace_fd_gap(PosteriorState& st) {
    const auto& fit = st.laplace_fit();
    const GpObjective obj(st);
    const double h = 1e-5;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < fit.mode.size(); ++i) {
        Eigen::VectorXd up = fit.mode, dn = fit.mode;
        up(i) += h;
        dn(i) -= h;
        worst = std::max(worst, std::abs((obj(up) - obj(dn)) / (2.0 * h) - fit.gradient(i)));
    }
    return worst;
}

}  // namespace tsrm::testing
