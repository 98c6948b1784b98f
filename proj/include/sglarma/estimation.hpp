#pragma once

#include "sglarma/likelihood.hpp"
#include "sglarma/model.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace sglarma {

struct NewtonConfig {
    int max_iter = 100;
    double tol_inf = 1e-6;     // stop once the sup-norm step falls below this
    bool damping = true;
    int max_halvings = 20;
    double ridge = 1e-8;       // scaled by (1 + trace / dim) of the negated Hessian
    int max_ridge_retries = 8; // ridge grows tenfold per retry
    LikelihoodOptions likelihood{};

    void validate() const;
};

struct NewtonReport {
    Vector estimate;
    int iterations = 0;
    bool converged = false;
    std::vector<Vector> trajectory;  // iterate after each step, starting point first
    std::vector<double> loglik;      // L at each trajectory entry
    std::vector<double> step_norms;  // sup-norm of each accepted step
};

/// Objective for the generic maximizer: value, gradient and the negated
/// Hessian at a point.
struct ObjectiveEval {
    double value;
    Vector grad;
    Matrix neg_hess;
};
using Objective = std::function<ObjectiveEval(const Vector&)>;
using ObjectiveValue = std::function<double(const Vector&)>;

/// Damped Newton-Raphson ascent: x <- x + (-H)^{-1} g. A trial point that
/// lowers the objective (or overflows) is halved up to max_halvings times;
/// when halving is exhausted a ridge is added to -H and the step recomputed.
/// Throws SingularSystem when -H is rank deficient and NoConvergence when no
/// ascent step can be found or max_iter is hit without meeting tol_inf.
NewtonReport newton_maximize(const Objective& objective, const ObjectiveValue& value,
                             Vector start, const NewtonConfig& cfg);

struct GlmConfig {
    int max_iter = 100;
    double tol = 1e-10;
    /// Ridge weight on non-intercept coefficients, used when p + 1 >= n.
    /// Expressed as a multiple of n.
    double ridge_per_obs = 1e-3;
};

struct GlmFit {
    Vector beta;
    int iterations = 0;
    bool penalized = false;
};

/// Poisson log-link GLM of y on x by IRLS, ignoring the ARMA part. When
/// p + 1 >= n the ridge-penalized fit is returned instead.
GlmFit fit_glm(const SeriesData& data, const GlmConfig& cfg = {});

/// beta^(0) for the two-stage procedure.
Vector fit_glm_init(const SeriesData& data, const GlmConfig& cfg = {});

/// Newton-Raphson over gamma with beta held at beta0. gamma starts at zero
/// unless gamma_start is given.
NewtonReport newton_gamma(const Vector& beta0, const SeriesData& data, int q,
                          const NewtonConfig& cfg = {},
                          const std::optional<Vector>& gamma_start = std::nullopt);

/// Newton-Raphson over the full delta = (beta', gamma').
NewtonReport newton_full(const GlarmaParams& delta0, const SeriesData& data,
                         const NewtonConfig& cfg = {});

}  // namespace sglarma
