#pragma once

#include "sglarma/model.hpp"
#include "sglarma/quad_lasso.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sglarma {

enum class Method { SsCv, SsMin, FastSs };

std::string to_string(Method method);
Method parse_method(const std::string& name);

/// Threshold that balances TPR and FPR at 5% sparsity: 0.7 / 0.8 / 0.4.
double default_threshold(Method method);

struct SelectionConfig {
    Method method = Method::SsMin;
    double threshold = 0.8;
    int n_subsamples = 1000;
    int grid_count = 100;
    double grid_ratio = 1e-4;  // smallest grid value relative to lambda_max
    int cv_folds = 10;
    std::uint64_t seed = 0;
    bool penalize_intercept = true;
    int threads = 1;

    void validate() const;
    LassoOptions lasso_options() const;
};

struct SelectionResult {
    Vector frequencies;     // per coefficient, in [0, 1]
    std::vector<int> support;
    Vector beta_hat;        // refit on the support, zero elsewhere
    double lambda_used = 0.0;  // the fixed lambda (standard) or the smallest grid value (fast)
    Vector grid;
    std::vector<int> counts;    // times each coefficient was nonzero
    std::vector<int> path_nonzeros;  // fast: nonzeros per grid value; standard: per subsample
};

/// Coefficients whose frequency reaches the threshold; a coefficient that
/// was never selected is never kept, even at threshold 0.
std::vector<int> threshold_support(const Vector& frequencies, double threshold);

/// Stability selection over random half-size subsamples of the
/// pseudo-observations at a single lambda (ss_cv: cross-validated,
/// ss_min: smallest grid value).
SelectionResult select_standard(const PseudoProblem& prob, const SelectionConfig& cfg);

/// Fast stability selection: selection frequency along the lambda grid.
SelectionResult select_fast(const PseudoProblem& prob, const SelectionConfig& cfg);

/// Dispatches on cfg.method.
SelectionResult select(const PseudoProblem& prob, const SelectionConfig& cfg);

/// Unpenalized least squares of Y on the support columns of X (minimum
/// norm when rank deficient), zeros elsewhere.
Vector refit_support(const PseudoProblem& prob, const std::vector<int>& support);

/// TPR and FPR over covariate indices 1..p. |true| = 0 gives TPR 1 and
/// p = |true| gives FPR 0.
struct Rates {
    double tpr = 0.0;
    double fpr = 0.0;
};
Rates tpr_fpr(const std::vector<int>& est_support, const std::vector<int>& true_support, int p);

struct BaselineResults {
    SelectionResult lasso_cv;
    std::optional<SelectionResult> lasso_best;
};

/// Plain lasso on the pseudo-problem: lasso_cv fits at the cross-validated
/// lambda; lasso_best picks the grid lambda maximizing TPR - FPR against the
/// true support (benchmark-only oracle). Coefficients are the lasso fits.
SelectionResult lasso_cv_baseline(const PseudoProblem& prob, const SelectionConfig& cfg);
SelectionResult lasso_best_baseline(const PseudoProblem& prob,
                                    const std::optional<std::vector<int>>& true_support,
                                    const SelectionConfig& cfg);
BaselineResults lasso_baselines(const PseudoProblem& prob,
                                const std::optional<std::vector<int>>& true_support,
                                const SelectionConfig& cfg, bool want_best);

// --- l1-penalized Poisson GLM directly on (y, x), ignoring the ARMA part ---

struct GlmLassoOptions {
    int grid_count = 100;
    double grid_ratio = 1e-4;  // 1e-2 when p + 1 > n
    int cv_folds = 10;
    bool standardize = true;
    int max_irls = 50;
    double tol = 1e-7;
};

struct GlmLassoPath {
    Vector lambdas;
    std::vector<Vector> betas;  // original covariate scale, intercept first
};

/// Regularization path of -(1/n) sum_t (y_t eta_t - exp(eta_t)) + lambda ||beta_{1..p}||_1
/// by IRLS with an inner coordinate descent; the intercept is unpenalized.
GlmLassoPath glm_lasso_path(const SeriesData& data, const GlmLassoOptions& opts,
                            const std::optional<Vector>& lambdas = std::nullopt);

struct GlmLassoCv {
    GlmLassoPath path;
    Vector cv_deviance;
    int index = 0;
};

/// K-fold cross-validation of the path by held-out Poisson deviance.
GlmLassoCv glm_lasso_cv(const SeriesData& data, const GlmLassoOptions& opts, std::uint64_t seed);

}  // namespace sglarma
