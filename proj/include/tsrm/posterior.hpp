#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "tsrm/demand.hpp"
#include "tsrm/grid.hpp"
#include "tsrm/rng.hpp"

namespace tsrm {

/// Per-(period, price) offer counts N and demand sums S. Exact summaries of
/// the observation history for every likelihood in this library.
struct SufficientStats {
    Grid2D<long long> counts;
    Grid2D<long long> sums;

    SufficientStats() = default;
    SufficientStats(std::size_t horizon, std::size_t num_prices)
        : counts(horizon, num_prices, 0), sums(horizon, num_prices, 0) {}

    bool operator==(const SufficientStats&) const = default;
};

struct GammaPrior {
    double shape = 10.0;  // alpha
    double scale = 1.0;   // beta; prior mean = shape * scale
};

struct BetaNegBinPrior {
    double a = 1.0;
    double b = 1.0;
    double r = 10.0;  // known failure count of the demand law
};

struct GpPrior {
    double sigma_t = 3.0;
    double sigma_p = 2.5;
    double jitter = 1e-6;
    double mean = 0.0;  // constant prior mean of log-intensity
};

using PriorSpec = std::variant<GammaPrior, BetaNegBinPrior, GpPrior>;

enum class PosteriorFamily { IndependentGamma, BetaNegBin, GPLaplace };

/// Raised when the Laplace fit cannot produce a usable Gaussian.
class FitError : public std::runtime_error {
public:
    FitError(const std::string& what, int iterations, double objective, double grad_norm)
        : std::runtime_error(what), iterations_(iterations), objective_(objective), grad_norm_(grad_norm) {}

    int iterations() const noexcept { return iterations_; }
    double objective() const noexcept { return objective_; }
    double grad_norm() const noexcept { return grad_norm_; }

private:
    int iterations_;
    double objective_;
    double grad_norm_;
};

namespace gp {

inline constexpr int kMaxNewtonIterations = 50;
inline constexpr double kObjectiveTolerance = 1e-10;
inline constexpr double kGradientTolerance = 1e-8;
inline constexpr double kMaxJitter = 1e-2;
inline constexpr int kMaxStepHalvings = 30;

/// Cholesky of `m` with diagonal jitter escalated x10 from `jitter` up to
/// 1e-2 until it succeeds.
inline Eigen::LLT<Eigen::MatrixXd> robust_cholesky(const Eigen::MatrixXd& m, double jitter, double* used = nullptr) {
    const auto n = m.rows();
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() == Eigen::Success) {
        if (used) *used = 0.0;
        return llt;
    }
    for (double j = std::max(jitter, 1e-12); j <= kMaxJitter * (1 + 1e-12); j *= 10.0) {
        llt.compute(m + j * Eigen::MatrixXd::Identity(n, n));
        if (llt.info() == Eigen::Success) {
            if (used) *used = j;
            return llt;
        }
    }
    throw FitError("Cholesky failed after jitter escalation", 0, std::nan(""), std::nan(""));
}

}  // namespace gp

/// Anisotropic RBF kernel over the (period, price) grid, flattened row-major
/// (index (t-1)*K + k), with `jitter` on the diagonal.
inline Eigen::MatrixXd kernel_matrix(const PriceGrid& grid, std::size_t horizon, double sigma_t, double sigma_p,
                                     double jitter) {
    if (!(sigma_t > 0.0) || !(sigma_p > 0.0)) throw std::invalid_argument("kernel_matrix: length scales must be > 0");
    const std::size_t K = grid.size();
    const auto n = static_cast<Eigen::Index>(horizon * K);
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double ti = static_cast<double>(i / K + 1), pi = grid[i % K];
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double tj = static_cast<double>(j / K + 1), pj = grid[j % K];
            const double dt = ti - tj, dp = pi - pj;
            const double v = std::exp(-dt * dt / (sigma_t * sigma_t) - dp * dp / (sigma_p * sigma_p));
            m(i, j) = v;
            m(j, i) = v;
        }
    }
    m.diagonal().array() += jitter;
    gp::robust_cholesky(m, jitter);  // throws FitError if not PD
    return m;
}

/// Result of a Laplace fit: posterior mode of log-intensity and a factor
/// L with L L^T = (K^-1 + W)^-1.
struct LaplaceFit {
    Eigen::VectorXd mode;
    Eigen::MatrixXd cov_factor;
    Eigen::VectorXd gradient;  // gradient of the log posterior at `mode`
    double objective = 0.0;
    std::vector<double> objective_trace;  // objective after each accepted Newton step, starting at the prior mean
    int iterations = 0;
};

class PosteriorState {
public:
    PosteriorState(PriorSpec prior, const PriceGrid& grid, std::size_t horizon)
        : prior_(std::move(prior)), grid_(grid), stats_(horizon, grid.size()) {
        if (horizon == 0) throw std::invalid_argument("PosteriorState: horizon must be positive");
        std::visit([](const auto& p) { validate_prior(p); }, prior_);
    }

    PosteriorFamily family() const noexcept {
        switch (prior_.index()) {
            case 0: return PosteriorFamily::IndependentGamma;
            case 1: return PosteriorFamily::BetaNegBin;
            default: return PosteriorFamily::GPLaplace;
        }
    }

    const PriorSpec& prior() const noexcept { return prior_; }
    const SufficientStats& stats() const noexcept { return stats_; }
    const PriceGrid& grid() const noexcept { return grid_; }
    std::size_t horizon() const noexcept { return stats_.counts.rows(); }
    std::size_t num_prices() const noexcept { return stats_.counts.cols(); }
    bool has_cached_fit() const noexcept { return fit_ != nullptr; }

    /// Records one observation. Shut-off observations carry no likelihood
    /// information and are dropped.
    void update(std::size_t t, Action a, long long demand) {
        if (a.is_shutoff()) return;
        if (t < 1 || t > horizon()) throw std::invalid_argument("posterior update: period out of range");
        if (a.index >= num_prices()) throw std::invalid_argument("posterior update: price index out of range");
        if (demand < 0) throw std::invalid_argument("posterior update: demand must be >= 0");
        add_observations(t, a.index, 1, demand);
    }

    /// Bulk form of `update`: `count` observations at one cell with demands
    /// summing to `demand_sum`.
    void add_observations(std::size_t t, std::size_t k, long long count, long long demand_sum) {
        if (count < 0 || demand_sum < 0) throw std::invalid_argument("posterior update: negative statistics");
        if (count == 0 && demand_sum != 0) throw std::invalid_argument("posterior update: demand without offers");
        stats_.counts.at(t - 1, k) += count;
        stats_.sums.at(t - 1, k) += demand_sum;
        fit_.reset();
    }

    /// Closed-form cell posterior for the Gamma family: (shape, scale).
    std::pair<double, double> gamma_cell(std::size_t t, std::size_t k) const {
        const auto& p = std::get<GammaPrior>(prior_);
        const double n = static_cast<double>(stats_.counts.at(t - 1, k));
        const double s = static_cast<double>(stats_.sums.at(t - 1, k));
        return {p.shape + s, p.scale / (1.0 + n * p.scale)};
    }

    /// Closed-form cell posterior for the Beta family: (a, b).
    std::pair<double, double> beta_cell(std::size_t t, std::size_t k) const {
        const auto& p = std::get<BetaNegBinPrior>(prior_);
        const double n = static_cast<double>(stats_.counts.at(t - 1, k));
        const double s = static_cast<double>(stats_.sums.at(t - 1, k));
        return {p.a + p.r * n, p.b + s};
    }

    /// Draws one mean-demand matrix from the posterior. All entries are > 0.
    MeanDemandMatrix sample(Rng& rng) {
        MeanDemandMatrix out(horizon(), num_prices());
        switch (family()) {
            case PosteriorFamily::IndependentGamma:
                for (std::size_t t = 1; t <= horizon(); ++t)
                    for (std::size_t k = 0; k < num_prices(); ++k) {
                        const auto [shape, scale] = gamma_cell(t, k);
                        double v = gamma_draw(rng, shape, scale);
                        out(t - 1, k) = std::max(v, std::numeric_limits<double>::min());
                    }
                break;
            case PosteriorFamily::BetaNegBin: {
                const double r = std::get<BetaNegBinPrior>(prior_).r;
                for (std::size_t t = 1; t <= horizon(); ++t)
                    for (std::size_t k = 0; k < num_prices(); ++k) {
                        const auto [a, b] = beta_cell(t, k);
                        const double q = draw_success_prob(rng, a, b);
                        out(t - 1, k) = std::max(r * (1.0 - q) / q, std::numeric_limits<double>::min());
                    }
                break;
            }
            case PosteriorFamily::GPLaplace: {
                const LaplaceFit& f = laplace_fit();
                const auto n = f.mode.size();
                Eigen::VectorXd z(n);
                std::normal_distribution<double> normal;
                for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(rng);
                const Eigen::VectorXd g = f.mode + f.cov_factor * z;
                for (Eigen::Index i = 0; i < n; ++i)
                    out.raw()[static_cast<std::size_t>(i)] = std::max(std::exp(g(i)), std::numeric_limits<double>::min());
                break;
            }
        }
        return out;
    }

    /// Laplace fit of the GP posterior, cached until the statistics change.
    const LaplaceFit& laplace_fit() {
        if (family() != PosteriorFamily::GPLaplace)
            throw std::logic_error("laplace_fit: posterior family is not GP");
        if (!fit_) fit_ = std::make_shared<const LaplaceFit>(compute_laplace_fit());
        return *fit_;
    }

    /// Prior covariance over the flattened grid (GP family only).
    const Eigen::MatrixXd& gp_kernel() {
        if (family() != PosteriorFamily::GPLaplace) throw std::logic_error("gp_kernel: posterior family is not GP");
        if (!kernel_) {
            const auto& p = std::get<GpPrior>(prior_);
            kernel_ = std::make_shared<const Eigen::MatrixXd>(
                kernel_matrix(grid_, horizon(), p.sigma_t, p.sigma_p, p.jitter));
        }
        return *kernel_;
    }

private:
    static void validate_prior(const GammaPrior& p) {
        if (!(p.shape > 0.0) || !(p.scale > 0.0)) throw std::invalid_argument("gamma prior: shape and scale must be > 0");
    }
    static void validate_prior(const BetaNegBinPrior& p) {
        if (!(p.a > 0.0) || !(p.b > 0.0) || !(p.r > 0.0))
            throw std::invalid_argument("beta-negbin prior: a, b, r must be > 0");
    }
    static void validate_prior(const GpPrior& p) {
        if (!(p.sigma_t > 0.0) || !(p.sigma_p > 0.0) || !(p.jitter >= 0.0))
            throw std::invalid_argument("gp prior: sigma_t, sigma_p must be > 0 and jitter >= 0");
    }

    static double draw_success_prob(Rng& rng, double a, double b) {
        constexpr double kMinSuccessProb = 1e-12;
        constexpr int kMaxRedraws = 100;
        for (int i = 0; i < kMaxRedraws; ++i) {
            const double q = beta_draw(rng, a, b);
            if (q >= kMinSuccessProb && q < 1.0) return q;
        }
        throw std::runtime_error("beta-negbin posterior: success probability draw stuck near 0");
    }

    // Newton iteration on f = g - m, parameterised through a = K^-1 f so the
    // prior precision is never formed explicitly.
    LaplaceFit compute_laplace_fit() {
        const auto& prior = std::get<GpPrior>(prior_);
        const Eigen::MatrixXd& K = gp_kernel();
        const auto n = K.rows();

        Eigen::VectorXd N(n), S(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            N(i) = static_cast<double>(stats_.counts.raw()[static_cast<std::size_t>(i)]);
            S(i) = static_cast<double>(stats_.sums.raw()[static_cast<std::size_t>(i)]);
        }
        const Eigen::VectorXd m = Eigen::VectorXd::Constant(n, prior.mean);

        auto loglik = [&](const Eigen::VectorXd& g) {
            return (S.array() * g.array() - N.array() * g.array().exp()).sum();
        };
        auto objective = [&](const Eigen::VectorXd& f, const Eigen::VectorXd& a) {
            return loglik(f + m) - 0.5 * a.dot(f);
        };

        Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
        Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
        double obj = objective(f, a);
        auto gradient = [&](const Eigen::VectorXd& fv, const Eigen::VectorXd& av) -> Eigen::VectorXd {
            return (S.array() - N.array() * (fv + m).array().exp()).matrix() - av;
        };
        Eigen::VectorXd grad = gradient(f, a);
        std::vector<double> trace{obj};

        // Stops when the gradient vanishes, or when a full Newton step changes
        // the objective by less than kObjectiveTolerance relative to its size
        // and no longer shrinks the gradient. With large counts the gradient bottoms out at rounding level
        // (K^-1 is badly conditioned) well above kGradientTolerance.
        int iter = 0;
        bool stalled = false;
        while (!stalled && grad.norm() >= gp::kGradientTolerance) {
            if (iter >= gp::kMaxNewtonIterations)
                throw FitError("Laplace fit: Newton did not converge", iter, obj, grad.norm());
            ++iter;
            const Eigen::VectorXd w = (N.array() * (f + m).array().exp()).matrix();
            const Eigen::VectorXd sw = w.array().sqrt().matrix();
            Eigen::MatrixXd B = sw.asDiagonal() * K * sw.asDiagonal();
            B.diagonal().array() += 1.0;
            Eigen::LLT<Eigen::MatrixXd> llt(B);
            if (llt.info() != Eigen::Success)
                throw FitError("Laplace fit: Newton system not positive definite", iter, obj, grad.norm());

            // Newton increment from the current gradient: da = (I + W K)^-1 grad
            // and df = K da. Solving for the increment keeps rounding
            // proportional to the gradient rather than to a itself.
            const Eigen::VectorXd Kg = K * grad;
            const Eigen::VectorXd da = grad - sw.asDiagonal() * llt.solve(sw.asDiagonal() * Kg);
            const Eigen::VectorXd df = K * da;

            // Step-halving; a step is accepted unless it lowers the objective
            // beyond rounding level.
            const double slack = 1e-12 * std::max(1.0, std::abs(obj));
            double step = 1.0;
            bool accepted = false;
            Eigen::VectorXd f_new, a_new;
            double obj_new = obj;
            for (int h = 0; h <= gp::kMaxStepHalvings; ++h, step *= 0.5) {
                f_new = f + step * df;
                a_new = a + step * da;
                obj_new = objective(f_new, a_new);
                if (std::isfinite(obj_new) && obj_new >= obj - slack) {
                    accepted = true;
                    break;
                }
            }
            if (!accepted)
                throw FitError("Laplace fit: Newton step decreased the objective", iter, obj, grad.norm());
            const bool flat =
                step == 1.0 && std::abs(obj_new - obj) <= gp::kObjectiveTolerance * std::max(1.0, std::abs(obj));
            const double old_norm = grad.norm();
            f = std::move(f_new);
            a = std::move(a_new);
            obj = obj_new;
            grad = gradient(f, a);
            stalled = flat && grad.norm() >= 0.5 * old_norm;
            trace.push_back(obj_new);
        }

        // Posterior covariance (K^-1 + W)^-1 = K - K W^1/2 B^-1 W^1/2 K.
        const Eigen::VectorXd w = (N.array() * (f + m).array().exp()).matrix();
        const Eigen::VectorXd sw = w.array().sqrt().matrix();
        Eigen::MatrixXd B = sw.asDiagonal() * K * sw.asDiagonal();
        B.diagonal().array() += 1.0;
        Eigen::LLT<Eigen::MatrixXd> llt(B);
        if (llt.info() != Eigen::Success)
            throw FitError("Laplace fit: covariance system not positive definite", iter, obj, grad.norm());
        const Eigen::MatrixXd V = llt.matrixL().solve(sw.asDiagonal() * K);
        Eigen::MatrixXd cov = K - V.transpose() * V;
        cov = 0.5 * (cov + cov.transpose());
        Eigen::LLT<Eigen::MatrixXd> cov_llt;
        try {
            cov_llt = gp::robust_cholesky(cov, std::max(prior.jitter, 1e-12));
        } catch (const FitError&) {
            throw FitError("Laplace fit: posterior covariance not positive definite", iter, obj, grad.norm());
        }

        LaplaceFit out;
        out.mode = f + m;
        out.cov_factor = cov_llt.matrixL();
        out.gradient = grad;
        out.objective = obj;
        out.objective_trace = std::move(trace);
        out.iterations = iter;
        return out;
    }

    PriorSpec prior_;
    PriceGrid grid_;
    SufficientStats stats_;
    std::shared_ptr<const LaplaceFit> fit_;
    std::shared_ptr<const Eigen::MatrixXd> kernel_;
};

inline std::string to_string(PosteriorFamily f) {
    switch (f) {
        case PosteriorFamily::IndependentGamma: return "gamma";
        case PosteriorFamily::BetaNegBin: return "beta-negbin";
        default: return "gp";
    }
}

}  // namespace tsrm
