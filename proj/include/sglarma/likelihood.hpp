#pragma once

#include "sglarma/model.hpp"

#include <span>
#include <vector>

namespace sglarma {

struct LikelihoodOptions {
    /// Keep the sum_t (Y_t - mu_t) d2W_t term of the Hessian. Turning it off
    /// gives the Fisher-scoring style curvature.
    bool include_w_curvature = true;
    double w_cap = kDefaultWCap;
};

/// Log-likelihood together with its derivatives restricted to a set of
/// coordinates of delta = (beta', gamma'). For a full evaluation the
/// coordinates are 0..p+q in order.
struct LikelihoodEval {
    double value = 0.0;
    std::vector<int> coords;  // flat delta indices the derivatives refer to
    Vector grad;              // dL/d delta_coords
    Matrix hess;              // d2L, symmetrized (H + H')/2
    Matrix dw;                // n x coords.size(), dW_t / d delta_coords
    double max_asymmetry = 0.0;  // before symmetrization, relative to max |H|
};

/// L(delta) = sum_t (Y_t W_t - exp(W_t)); the log(Y_t!) constant is omitted.
double log_likelihood(const GlarmaParams& params, const SeriesData& data,
                      double w_cap = kDefaultWCap);

/// Full analytic gradient, ordered (beta_0..beta_p, gamma_1..gamma_q).
Vector gradient(const GlarmaParams& params, const SeriesData& data,
                const LikelihoodOptions& opts = {});

/// Full analytic Hessian, same ordering as gradient().
Matrix hessian(const GlarmaParams& params, const SeriesData& data,
               const LikelihoodOptions& opts = {});

/// Value, gradient, Hessian and dW over every coordinate.
LikelihoodEval evaluate(const GlarmaParams& params, const SeriesData& data,
                        const LikelihoodOptions& opts = {});

/// Value and derivatives over a subset of coordinates.
///
/// The first- and second-derivative recursions of W_t only couple a
/// coordinate pair (a, b) with the same pair at earlier lags, so any block
/// can be computed on its own. Entries are bit-identical to the matching
/// entries of a full evaluation.
LikelihoodEval evaluate_block(const GlarmaParams& params, const SeriesData& data,
                              std::span<const int> coords, bool with_hessian = true,
                              const LikelihoodOptions& opts = {});

struct BetaBlock {
    Vector grad_beta;      // dL/d beta
    Matrix neg_hess_beta;  // -d2L/d beta d beta'
};

/// Beta block of the gradient and negated Hessian. Throws
/// NonFiniteCurvature if any entry is not finite.
BetaBlock beta_block(const GlarmaParams& params, const SeriesData& data,
                     const LikelihoodOptions& opts = {});

/// Flat indices of the gamma coordinates, p+1 .. p+q.
std::vector<int> gamma_coords(const GlarmaParams& params);
std::vector<int> beta_coords(const GlarmaParams& params);
std::vector<int> all_coords(const GlarmaParams& params);

}  // namespace sglarma
