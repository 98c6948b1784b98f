#pragma once

#include "sglarma/estimation.hpp"
#include "sglarma/model.hpp"
#include "sglarma/quad_lasso.hpp"
#include "sglarma/selection.hpp"

#include <vector>

namespace sglarma {

struct PipelineConfig {
    int q = 1;
    SelectionConfig selection{};
    NewtonConfig newton{};
    GlmConfig glm{};
    PseudoOptions pseudo{};
    int max_outer_iters = 10;
    double gamma_stab_tol = 1e-4;  // sup-norm change of gamma between outer iterations
    /// Pick the grid ratio from the series shape (1e-4, or 1e-2 when p + 1 > n)
    /// instead of selection.grid_ratio.
    bool auto_grid_ratio = true;

    void validate() const;
};

struct OuterIteration {
    Vector gamma;                // gamma^(R_k)
    std::vector<int> support;    // selected support at iteration k
    Vector frequencies;
    Vector beta_hat;
    double loglik = 0.0;         // L(beta_hat_k, gamma^(R_k))
    int newton_iterations = 0;
    double lambda_used = 0.0;
};

struct PipelineResult {
    Vector beta_init;  // GLM initialization beta^(0)
    Vector beta_hat;
    Vector gamma_hat;
    std::vector<int> support;
    std::vector<OuterIteration> history;
    int outer_iters = 0;
    bool stabilized = false;
};

/// Two-stage estimation: GLM initialization, then alternating Newton-Raphson
/// on gamma (beta fixed) and stability selection on beta through the
/// pseudo-problem (gamma fixed) until gamma stabilizes.
PipelineResult run_pipeline(const SeriesData& data, const PipelineConfig& cfg);

}  // namespace sglarma
