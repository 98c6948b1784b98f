#include "sglarma/estimation.hpp"

#include "sglarma/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace sglarma {

void NewtonConfig::validate() const {
    if (max_iter < 1) throw ConfigError("max_iter must be at least 1");
    if (!(tol_inf > 0.0)) throw ConfigError("tol_inf must be positive");
    if (max_halvings < 0 || max_ridge_retries < 0)
        throw ConfigError("halving and ridge retry limits must be nonnegative");
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Objective value at a trial point; divergent points count as -inf so the
// damping loop backs off from them.
double safe_value(const ObjectiveValue& value, const Vector& x) {
    try {
        const double v = value(x);
        return std::isfinite(v) ? v : kNegInf;
    } catch (const OverflowGuard&) {
        return kNegInf;
    }
}

Vector solve_newton_system(const Matrix& neg_hess, const Vector& grad) {
    Eigen::ColPivHouseholderQR<Matrix> qr(neg_hess);
    if (qr.rank() < neg_hess.rows())
        throw SingularSystem("Newton system is rank deficient (rank " + std::to_string(qr.rank()) +
                             " of " + std::to_string(neg_hess.rows()) + ")");
    Vector step = qr.solve(grad);
    if (!step.allFinite()) throw SingularSystem("Newton step is not finite");
    return step;
}

}  // namespace

NewtonReport newton_maximize(const Objective& objective, const ObjectiveValue& value,
                             Vector start, const NewtonConfig& cfg) {
    cfg.validate();
    NewtonReport report;
    Vector x = std::move(start);
    ObjectiveEval ev = objective(x);
    report.trajectory.push_back(x);
    report.loglik.push_back(ev.value);

    const int dim = static_cast<int>(x.size());
    for (int iter = 1; iter <= cfg.max_iter; ++iter) {
        if (!ev.grad.allFinite() || !ev.neg_hess.allFinite())
            throw NonFiniteCurvature("non-finite gradient or Hessian at Newton iteration " +
                                     std::to_string(iter));
        Vector step = solve_newton_system(ev.neg_hess, ev.grad);

        Vector next;
        if (!cfg.damping) {
            next = x + step;
        } else {
            const double floor_value = ev.value - 1e-12 * (1.0 + std::fabs(ev.value));
            const double ridge_scale = 1.0 + std::fabs(ev.neg_hess.trace()) / dim;
            double ridge = cfg.ridge * ridge_scale;
            bool accepted = false;
            for (int retry = 0; retry <= cfg.max_ridge_retries && !accepted; ++retry) {
                if (retry > 0) {
                    Matrix regularized = ev.neg_hess;
                    regularized.diagonal().array() += ridge;
                    step = solve_newton_system(regularized, ev.grad);
                    ridge *= 10.0;
                }
                double scale = 1.0;
                for (int h = 0; h <= cfg.max_halvings; ++h, scale *= 0.5) {
                    Vector trial = x + scale * step;
                    if (safe_value(value, trial) >= floor_value) {
                        next = std::move(trial);
                        accepted = true;
                        break;
                    }
                }
            }
            if (!accepted) {
                // No ascent direction left: x is already numerically stationary.
                if (step.lpNorm<Eigen::Infinity>() < cfg.tol_inf) {
                    report.step_norms.push_back(step.lpNorm<Eigen::Infinity>());
                    report.converged = true;
                    report.iterations = iter - 1;
                    report.estimate = x;
                    return report;
                }
                throw NoConvergence("no ascent step found at Newton iteration " +
                                    std::to_string(iter));
            }
        }

        const double step_norm = (next - x).lpNorm<Eigen::Infinity>();
        x = std::move(next);
        ev = objective(x);
        report.trajectory.push_back(x);
        report.loglik.push_back(ev.value);
        report.step_norms.push_back(step_norm);
        report.iterations = iter;
        if (step_norm < cfg.tol_inf) {
            report.converged = true;
            break;
        }
    }
    report.estimate = x;
    if (!report.converged)
        throw NoConvergence("Newton-Raphson did not converge in " + std::to_string(cfg.max_iter) +
                            " iterations");
    return report;
}

GlmFit fit_glm(const SeriesData& data, const GlmConfig& cfg) {
    data.validate();
    const int n = data.n();
    const int cols = static_cast<int>(data.x.cols());
    const double mean_y = data.y.mean();
    if (!(mean_y > 0.0)) throw Separation("all counts are zero; the intercept diverges");

    GlmFit fit;
    fit.penalized = cols >= n;
    if (cols == 1) {
        fit.beta = Vector::Constant(1, std::log(mean_y));
        return fit;
    }

    const double ridge = fit.penalized ? cfg.ridge_per_obs * n : 0.0;
    Vector penalty_diag = Vector::Constant(cols, ridge);
    penalty_diag[0] = 0.0;

    auto objective = [&](const Vector& beta, Vector* eta_out) {
        Vector eta = data.x * beta;
        if (!(eta.cwiseAbs().maxCoeff() <= kDefaultWCap)) return kNegInf;
        if (eta_out) *eta_out = eta;
        return data.y.dot(eta) - eta.array().exp().sum() -
               0.5 * (penalty_diag.array() * beta.array().square()).sum();
    };

    Vector beta = Vector::Zero(cols);
    beta[0] = std::log(mean_y);
    Vector eta;
    double value = objective(beta, &eta);

    for (int iter = 1; iter <= cfg.max_iter; ++iter) {
        const Vector mu = eta.array().exp();
        const Vector grad = data.x.transpose() * (data.y - mu) -
                            (penalty_diag.array() * beta.array()).matrix();
        Matrix info = data.x.transpose() * mu.asDiagonal() * data.x;
        info.diagonal() += penalty_diag;

        Eigen::LDLT<Matrix> ldlt(info);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
            throw SingularSystem("GLM information matrix is not positive definite");
        const Vector step = ldlt.solve(grad);
        if (!step.allFinite()) throw SingularSystem("GLM step is not finite");

        double scale = 1.0;
        Vector trial;
        double trial_value = kNegInf;
        for (int h = 0; h <= 30; ++h, scale *= 0.5) {
            trial = beta + scale * step;
            trial_value = objective(trial, nullptr);
            if (trial_value >= value - 1e-12 * (1.0 + std::fabs(value))) break;
        }
        if (trial_value == kNegInf) throw Separation("GLM linear predictor diverges");

        const double change = (trial - beta).lpNorm<Eigen::Infinity>();
        beta = trial;
        value = objective(beta, &eta);
        fit.iterations = iter;
        if (change < cfg.tol * (1.0 + beta.lpNorm<Eigen::Infinity>())) {
            fit.beta = beta;
            return fit;
        }
    }
    throw Separation("GLM IRLS did not converge in " + std::to_string(cfg.max_iter) +
                     " iterations");
}

Vector fit_glm_init(const SeriesData& data, const GlmConfig& cfg) { return fit_glm(data, cfg).beta; }

NewtonReport newton_gamma(const Vector& beta0, const SeriesData& data, int q,
                          const NewtonConfig& cfg, const std::optional<Vector>& gamma_start) {
    if (q < 1) throw ConfigError("newton_gamma needs q >= 1");
    Vector gamma0 = gamma_start ? *gamma_start : Vector::Zero(q);
    if (gamma0.size() != q) throw ConfigError("gamma_start must have length q");

    const int p = static_cast<int>(beta0.size()) - 1;
    std::vector<int> coords(static_cast<std::size_t>(q));
    for (int l = 0; l < q; ++l) coords[static_cast<std::size_t>(l)] = p + 1 + l;

    auto objective = [&](const Vector& gamma) {
        const GlarmaParams params(beta0, gamma);
        LikelihoodEval ev = evaluate_block(params, data, coords, true, cfg.likelihood);
        return ObjectiveEval{ev.value, std::move(ev.grad), -ev.hess};
    };
    auto value = [&](const Vector& gamma) {
        return log_likelihood(GlarmaParams(beta0, gamma), data, cfg.likelihood.w_cap);
    };
    return newton_maximize(objective, value, std::move(gamma0), cfg);
}

NewtonReport newton_full(const GlarmaParams& delta0, const SeriesData& data,
                         const NewtonConfig& cfg) {
    const int q = delta0.q();
    auto objective = [&](const Vector& delta) {
        LikelihoodEval ev = evaluate(GlarmaParams::from_delta(delta, q), data, cfg.likelihood);
        return ObjectiveEval{ev.value, std::move(ev.grad), -ev.hess};
    };
    auto value = [&](const Vector& delta) {
        return log_likelihood(GlarmaParams::from_delta(delta, q), data, cfg.likelihood.w_cap);
    };
    return newton_maximize(objective, value, delta0.delta(), cfg);
}

}  // namespace sglarma
