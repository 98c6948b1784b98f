#pragma once

#include "sglarma/likelihood.hpp"
#include "sglarma/model.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace sglarma {

/// Least-squares reformulation of the quadratic Taylor model of L in beta
/// around beta^(0):
///
///   -L_Q(beta) = 1/2 || Y - X beta ||^2,
///   X = Lambda^{1/2} U',  Y = Lambda^{1/2} U' beta0 + Lambda^{-1/2} U' g,
///
/// where U Lambda U' is the eigendecomposition of the negated beta-Hessian
/// and g the beta-gradient, both at (beta0, gamma_hat).
struct PseudoProblem {
    Vector Y;
    Matrix X;
    Matrix U;
    Vector lambda_diag;        // nonincreasing, floored
    std::vector<int> dropped;  // eigenvalue indices raised to the floor
    Vector beta0;
    Vector grad;               // g at beta0
    Matrix neg_hess;           // -H at beta0, before flooring

    int dim() const { return static_cast<int>(X.cols()); }
    int rows() const { return static_cast<int>(X.rows()); }

    /// Same columns, a subset of the pseudo-observations (rows).
    PseudoProblem subproblem(std::span<const int> rows) const;
};

struct PseudoOptions {
    double eigen_floor_ratio = 1e-10;  // floor = ratio * largest eigenvalue
    double indefinite_ratio = 0.01;    // most negative eigenvalue allowed, times the largest
};

/// Pseudo-problem from an explicit gradient and negated Hessian.
PseudoProblem pseudo_from_curvature(const Vector& beta0, const Vector& grad,
                                    const Matrix& neg_hess, const PseudoOptions& opts = {});

/// Pseudo-problem at (beta0, gamma_hat) on the given series.
PseudoProblem build_pseudo_problem(const Vector& beta0, const Vector& gamma_hat,
                                   const SeriesData& data, const PseudoOptions& opts = {},
                                   const LikelihoodOptions& lik = {});

struct LassoOptions {
    /// The l1 norm sums over beta_0..beta_p, intercept included, by default.
    bool penalize_intercept = true;
    int max_sweeps = 100000;
    double tol = 1e-9;            // max coordinate change, relative to 1 + ||beta||_inf
    double kkt_tol = 1e-6;        // required KKT residual, relative to 1 + lambda
    bool check_monotone = false;  // verify the objective never increases across sweeps
};

struct LassoFit {
    Vector beta;
    double lambda = 0.0;
    double objective = 0.0;
    double kkt_violation = 0.0;
    int sweeps = 0;

    std::vector<int> support(int first = 0) const;
};

/// Cyclic coordinate descent for 1/2 ||Y - X beta||^2 + lambda ||beta||_1
/// over a fixed design. The Gram matrix is formed once, so a path of
/// penalties costs O(d^2) per sweep.
class LassoSolver {
public:
    LassoSolver(Matrix X, Vector Y, LassoOptions opts = {});

    LassoFit solve(double lambda, const std::optional<Vector>& warm = std::nullopt) const;

    /// Smallest penalty whose solution is identically zero (on the
    /// penalized coordinates).
    double lambda_max() const;

    double objective(const Vector& beta, double lambda) const;

    /// Largest KKT residual of beta at lambda.
    double kkt_violation(const Vector& beta, double lambda) const;

    const Matrix& X() const { return X_; }
    const Vector& Y() const { return Y_; }
    const LassoOptions& options() const { return opts_; }

private:
    bool penalized(int j) const { return j > 0 || opts_.penalize_intercept; }
    enum class PolishOutcome { Unchanged, Moved, Blocked, Solved };
    // Exact solve on the current signed support, see quad_lasso.cpp.
    PolishOutcome polish(Vector& beta, double lambda, double kkt_target) const;

    Matrix X_;
    Vector Y_;
    Matrix gram_;
    Vector xty_;
    LassoOptions opts_;
};

LassoFit lasso_cd(const PseudoProblem& prob, double lambda,
                  const std::optional<Vector>& warm = std::nullopt, const LassoOptions& opts = {});

double lambda_max(const PseudoProblem& prob, const LassoOptions& opts = {});

/// Log-spaced grid from lambda_max down to ratio * lambda_max.
Vector lambda_grid(const PseudoProblem& prob, int count, double ratio,
                   const LassoOptions& opts = {});

/// Grid ratio convention: 1e-4, or 1e-2 when p + 1 > n.
double default_grid_ratio(int n_obs, int dim);

struct CvResult {
    double lambda_cv = 0.0;
    int index = 0;
    Vector curve;  // mean held-out squared error per pseudo-observation
};

/// K-fold cross-validation over the rows of the pseudo-problem. Rows are
/// dealt into folds by a seeded shuffle; the minimum-error lambda wins
/// (the largest one on ties).
CvResult cross_validate(const PseudoProblem& prob, const Vector& grid, int k, std::uint64_t seed,
                        const LassoOptions& opts = {});

}  // namespace sglarma
