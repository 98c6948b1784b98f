#include "sglarma/quad_lasso.hpp"

#include "sglarma/errors.hpp"
#include "sglarma/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sglarma {

namespace {

constexpr int kSweepsPerPolish = 20;
// Active-Gram eigenvalues at or below this fraction of the largest count as null.
constexpr double kNullRatio = 1e-8;

}  // namespace

PseudoProblem PseudoProblem::subproblem(std::span<const int> rows) const {
    PseudoProblem sub;
    sub.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
    sub.Y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        sub.X.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
        sub.Y[static_cast<Eigen::Index>(i)] = Y[rows[i]];
    }
    sub.beta0 = beta0;
    return sub;
}

PseudoProblem pseudo_from_curvature(const Vector& beta0, const Vector& grad, const Matrix& neg_hess,
                                    const PseudoOptions& opts) {
    const auto d = beta0.size();
    if (grad.size() != d || neg_hess.rows() != d || neg_hess.cols() != d)
        throw ConfigError("pseudo-problem inputs have inconsistent dimensions");
    if (!grad.allFinite() || !neg_hess.allFinite())
        throw NonFiniteCurvature("gradient or Hessian is not finite");

    Eigen::SelfAdjointEigenSolver<Matrix> eig(neg_hess);
    if (eig.info() != Eigen::Success)
        throw NonFiniteCurvature("eigendecomposition of the negated Hessian failed");

    // Eigen returns ascending eigenvalues; store them nonincreasing.
    PseudoProblem prob;
    prob.lambda_diag = eig.eigenvalues().reverse();
    prob.U = eig.eigenvectors().rowwise().reverse();
    const double top = prob.lambda_diag[0];
    if (!(top > 0.0)) throw DegenerateProblem("negated Hessian has no positive curvature");
    const double lowest = prob.lambda_diag[d - 1];
    if (lowest < -opts.indefinite_ratio * top)
        throw IndefiniteHessian("negated beta-Hessian is indefinite (min eigenvalue " +
                                std::to_string(lowest) + ", max " + std::to_string(top) + ")");

    const double floor = opts.eigen_floor_ratio * top;
    for (Eigen::Index k = 0; k < d; ++k) {
        if (prob.lambda_diag[k] < floor) {
            prob.lambda_diag[k] = floor;
            prob.dropped.push_back(static_cast<int>(k));
        }
    }

    const Vector root = prob.lambda_diag.cwiseSqrt();
    const Vector ut_beta0 = prob.U.transpose() * beta0;
    const Vector ut_grad = prob.U.transpose() * grad;
    prob.X = root.asDiagonal() * prob.U.transpose();
    prob.Y = root.cwiseProduct(ut_beta0) + ut_grad.cwiseQuotient(root);
    prob.beta0 = beta0;
    prob.grad = grad;
    prob.neg_hess = neg_hess;
    return prob;
}

PseudoProblem build_pseudo_problem(const Vector& beta0, const Vector& gamma_hat,
                                   const SeriesData& data, const PseudoOptions& opts,
                                   const LikelihoodOptions& lik) {
    const BetaBlock block = beta_block(GlarmaParams(beta0, gamma_hat), data, lik);
    return pseudo_from_curvature(beta0, block.grad_beta, block.neg_hess_beta, opts);
}

std::vector<int> LassoFit::support(int first) const {
    std::vector<int> out;
    for (Eigen::Index j = first; j < beta.size(); ++j)
        if (beta[j] != 0.0) out.push_back(static_cast<int>(j));
    return out;
}

LassoSolver::LassoSolver(Matrix X, Vector Y, LassoOptions opts)
    : X_(std::move(X)), Y_(std::move(Y)), opts_(opts) {
    if (X_.rows() != Y_.size()) throw ConfigError("lasso design and response disagree in length");
    gram_ = X_.transpose() * X_;
    xty_ = X_.transpose() * Y_;
}

double LassoSolver::lambda_max() const {
    if (opts_.penalize_intercept || X_.cols() == 1) return xty_.lpNorm<Eigen::Infinity>();
    // Intercept fitted alone first; the remaining correlations set the bound.
    Vector corr = xty_;
    if (gram_(0, 0) > 0.0) corr -= gram_.col(0) * (xty_[0] / gram_(0, 0));
    return corr.tail(corr.size() - 1).lpNorm<Eigen::Infinity>();
}

double LassoSolver::objective(const Vector& beta, double lambda) const {
    double l1 = 0.0;
    for (Eigen::Index j = 0; j < beta.size(); ++j)
        if (penalized(static_cast<int>(j))) l1 += std::fabs(beta[j]);
    return 0.5 * (Y_ - X_ * beta).squaredNorm() + lambda * l1;
}

double LassoSolver::kkt_violation(const Vector& beta, double lambda) const {
    const Vector corr = X_.transpose() * (Y_ - X_ * beta);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        double v;
        if (!penalized(static_cast<int>(j)) || gram_(j, j) == 0.0)
            v = std::fabs(corr[j]);
        else if (beta[j] != 0.0)
            v = std::fabs(corr[j] - lambda * (beta[j] > 0.0 ? 1.0 : -1.0));
        else
            v = std::max(0.0, std::fabs(corr[j]) - lambda);
        worst = std::max(worst, v);
    }
    return worst;
}

// Minimizes the quadratic obtained by fixing the signs of the current
// nonzeros. Along the segment towards that minimizer the lasso objective
// equals the quadratic until a coordinate crosses zero, so stepping to the
// first crossing (or all the way) never increases the objective.
LassoSolver::PolishOutcome LassoSolver::polish(Vector& beta, double lambda,
                                               double kkt_target) const {
    std::vector<int> on;
    for (Eigen::Index j = 0; j < beta.size(); ++j)
        if (beta[j] != 0.0) on.push_back(static_cast<int>(j));
    if (on.empty()) return PolishOutcome::Unchanged;

    // More nonzeros than the active columns have rank: moving along a null
    // direction keeps the fit and, signed so the l1 norm does not grow, can
    // be followed until a coordinate reaches zero. Rank is numerical, since
    // floored pseudo-rows leave directions that carry almost no curvature.
    bool reduced = false;
    const auto k = static_cast<Eigen::Index>(on.size());
    Matrix ga(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b)
            ga(a, b) = gram_(on[static_cast<std::size_t>(a)], on[static_cast<std::size_t>(b)]);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(ga);
    Eigen::Index nullity = 0;
    if (eig.info() == Eigen::Success) {
        const double cut = kNullRatio * std::max(eig.eigenvalues()[k - 1], 0.0);
        while (nullity < k && eig.eigenvalues()[nullity] <= cut) ++nullity;
    }
    if (nullity > 0 && nullity < k) {
        // Eigenvalues ascend, so the leading eigenvectors span the null space.
        Matrix kernel = eig.eigenvectors().leftCols(nullity);
        std::vector<char> dropped(static_cast<std::size_t>(k), 0);
        for (Eigen::Index c = 0; c < kernel.cols(); ++c) {
            Vector v = kernel.col(c);
            double slope = 0.0;
            for (Eigen::Index a = 0; a < k; ++a) {
                const int j = on[static_cast<std::size_t>(a)];
                if (penalized(j) && !dropped[static_cast<std::size_t>(a)])
                    slope += (beta[j] > 0.0 ? 1.0 : -1.0) * v[a];
            }
            if (slope > 0.0) v = -v;
            double step = std::numeric_limits<double>::infinity();
            Eigen::Index blocker = -1;
            for (Eigen::Index a = 0; a < k; ++a) {
                const int j = on[static_cast<std::size_t>(a)];
                if (dropped[static_cast<std::size_t>(a)] || !penalized(j) || v[a] * beta[j] >= 0.0) continue;
                const double t = -beta[j] / v[a];
                if (t < step) {
                    step = t;
                    blocker = a;
                }
            }
            if (blocker < 0) continue;
            Vector candidate = beta;
            for (Eigen::Index a = 0; a < k; ++a)
                if (!dropped[static_cast<std::size_t>(a)]) candidate[on[static_cast<std::size_t>(a)]] += step * v[a];
            candidate[on[static_cast<std::size_t>(blocker)]] = 0.0;
            if (objective(candidate, lambda) > objective(beta, lambda)) break;
            beta = std::move(candidate);
            dropped[static_cast<std::size_t>(blocker)] = 1;
            reduced = true;
            // Keep the remaining null directions at zero on the dropped coordinate.
            for (Eigen::Index r = c + 1; r < kernel.cols(); ++r) {
                kernel.col(r) -= (kernel(blocker, r) / v[blocker]) * v;
                kernel(blocker, r) = 0.0;
            }
        }
        std::vector<int> kept;
        for (Eigen::Index a = 0; a < k; ++a)
            if (!dropped[static_cast<std::size_t>(a)] && beta[on[static_cast<std::size_t>(a)]] != 0.0)
                kept.push_back(on[static_cast<std::size_t>(a)]);
        on = std::move(kept);
    }
    const PolishOutcome fallback = reduced ? PolishOutcome::Moved : PolishOutcome::Unchanged;
    if (on.empty()) return fallback;
    const auto m = static_cast<Eigen::Index>(on.size());
    Matrix g(m, m);
    Vector rhs(m);
    for (Eigen::Index a = 0; a < m; ++a) {
        const int j = on[static_cast<std::size_t>(a)];
        for (Eigen::Index b = 0; b < m; ++b) g(a, b) = gram_(j, on[static_cast<std::size_t>(b)]);
        rhs[a] = xty_[j] - (penalized(j) ? lambda * (beta[j] > 0.0 ? 1.0 : -1.0) : 0.0);
    }
    const Eigen::LDLT<Matrix> ldlt(g);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.rcond() < 1e-12) return fallback;
    const Vector coef = ldlt.solve(rhs);
    if (!coef.allFinite()) return fallback;

    double step = 1.0;
    Eigen::Index blocker = -1;
    for (Eigen::Index a = 0; a < m; ++a) {
        const int j = on[static_cast<std::size_t>(a)];
        if (!penalized(j) || coef[a] * beta[j] > 0.0) continue;
        const double t = beta[j] / (beta[j] - coef[a]);
        if (t < step) {
            step = t;
            blocker = a;
        }
    }
    Vector candidate = beta;
    for (Eigen::Index a = 0; a < m; ++a) {
        const int j = on[static_cast<std::size_t>(a)];
        candidate[j] = beta[j] + step * (coef[a] - beta[j]);
    }
    if (blocker >= 0) candidate[on[static_cast<std::size_t>(blocker)]] = 0.0;
    if (objective(candidate, lambda) > objective(beta, lambda)) return fallback;
    beta = std::move(candidate);
    if (blocker >= 0) return PolishOutcome::Blocked;
    if (kkt_violation(beta, lambda) <= kkt_target) return PolishOutcome::Solved;
    return PolishOutcome::Moved;
}

namespace {

inline double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

}  // namespace

LassoFit LassoSolver::solve(double lambda, const std::optional<Vector>& warm) const {
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be nonnegative");
    const int d = static_cast<int>(X_.cols());
    Vector beta = warm ? *warm : Vector::Zero(d);
    if (beta.size() != d) throw ConfigError("warm start has the wrong length");
    for (int j = 0; j < d; ++j)
        if (gram_(j, j) == 0.0) beta[j] = 0.0;

    // corr = X'(Y - X beta), kept up to date coordinate by coordinate.
    Vector corr = xty_ - gram_ * beta;
    std::vector<char> active(static_cast<std::size_t>(d), 0);

    auto update = [&](int j) {
        const double gjj = gram_(j, j);
        if (gjj == 0.0) return 0.0;
        const double old = beta[j];
        const double z = corr[j] + gjj * old;
        const double fresh = penalized(j) ? soft_threshold(z, lambda) / gjj : z / gjj;
        const double delta = fresh - old;
        if (delta != 0.0) {
            beta[j] = fresh;
            corr.noalias() -= delta * gram_.col(j);
        }
        if (fresh != 0.0) active[static_cast<std::size_t>(j)] = 1;
        return std::fabs(delta);
    };

    double last_obj = opts_.check_monotone ? objective(beta, lambda) : 0.0;
    auto after_sweep = [&]() {
        if (!opts_.check_monotone) return;
        const double obj = objective(beta, lambda);
        if (obj > last_obj + 1e-12 * (1.0 + std::fabs(last_obj)))
            throw NoConvergence("lasso objective increased across a sweep");
        last_obj = obj;
    };

    const double kkt_target = opts_.kkt_tol * (1.0 + lambda);
    double tol = opts_.tol;
    LassoFit fit;
    int sweeps = 0;
    auto out_of_sweeps = [&]() {
        return NoConvergence("lasso coordinate descent exceeded " + std::to_string(opts_.max_sweeps) +
                             " sweeps");
    };
    for (;;) {
        if (sweeps >= opts_.max_sweeps) throw out_of_sweeps();
        double max_delta = 0.0;
        for (int j = 0; j < d; ++j) max_delta = std::max(max_delta, update(j));
        ++sweeps;
        after_sweep();

        if (max_delta < tol * (1.0 + beta.lpNorm<Eigen::Infinity>())) {
            corr = xty_ - gram_ * beta;
            if (kkt_violation(beta, lambda) <= kkt_target) break;
            // Coordinate changes are small but the residual correlations
            // have not settled; tighten and keep sweeping.
            tol *= 0.1;
            if (tol < 1e-18) break;
            continue;
        }

        // Sweep the active set for a while, then jump along the exact
        // solution for the current signed support.
        for (int inner_sweeps = 0; inner_sweeps < kSweepsPerPolish; ++inner_sweeps) {
            double inner = 0.0;
            for (int j = 0; j < d; ++j)
                if (active[static_cast<std::size_t>(j)]) inner = std::max(inner, update(j));
            ++sweeps;
            after_sweep();
            if (inner < tol * (1.0 + beta.lpNorm<Eigen::Infinity>())) break;
            if (sweeps >= opts_.max_sweeps) throw out_of_sweeps();
        }
        // A blocked step zeroes one coordinate; re-solve on the smaller
        // support until a full step lands.
        PolishOutcome outcome = polish(beta, lambda, kkt_target);
        for (int drops = 0; outcome == PolishOutcome::Blocked && drops < d; ++drops)
            outcome = polish(beta, lambda, kkt_target);
        if (outcome == PolishOutcome::Solved) break;
        if (outcome != PolishOutcome::Unchanged) {
            corr = xty_ - gram_ * beta;
            after_sweep();
        }
    }

    fit.beta = std::move(beta);
    fit.lambda = lambda;
    fit.objective = objective(fit.beta, lambda);
    fit.kkt_violation = kkt_violation(fit.beta, lambda);
    fit.sweeps = sweeps;
    return fit;
}

LassoFit lasso_cd(const PseudoProblem& prob, double lambda, const std::optional<Vector>& warm,
                  const LassoOptions& opts) {
    return LassoSolver(prob.X, prob.Y, opts).solve(lambda, warm);
}

double lambda_max(const PseudoProblem& prob, const LassoOptions& opts) {
    return LassoSolver(prob.X, prob.Y, opts).lambda_max();
}

Vector lambda_grid(const PseudoProblem& prob, int count, double ratio, const LassoOptions& opts) {
    if (count < 2) throw ConfigError("lambda grid needs at least two values");
    if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("lambda grid ratio must lie in (0, 1)");
    const double top = lambda_max(prob, opts);
    if (!(top > 0.0)) throw DegenerateProblem("lambda_max is zero; nothing to penalize");
    Vector grid(count);
    const double log_ratio = std::log(ratio);
    for (int i = 0; i < count; ++i)
        grid[i] = top * std::exp(log_ratio * static_cast<double>(i) / (count - 1));
    grid[0] = top;
    grid[count - 1] = top * ratio;
    return grid;
}

double default_grid_ratio(int n_obs, int dim) { return dim > n_obs ? 1e-2 : 1e-4; }

CvResult cross_validate(const PseudoProblem& prob, const Vector& grid, int k, std::uint64_t seed,
                        const LassoOptions& opts) {
    const int rows = prob.rows();
    if (k < 2 || k > rows)
        throw ConfigError("cross-validation needs 2 <= k <= " + std::to_string(rows));
    if (grid.size() < 1) throw ConfigError("empty lambda grid");

    Rng rng(seed);
    const std::vector<int> perm = rng.permutation(rows);
    std::vector<std::vector<int>> folds(static_cast<std::size_t>(k));
    for (int i = 0; i < rows; ++i) folds[static_cast<std::size_t>(i % k)].push_back(perm[i]);

    CvResult out;
    out.curve = Vector::Zero(grid.size());
    for (const auto& held : folds) {
        std::vector<char> in_test(static_cast<std::size_t>(rows), 0);
        for (int r : held) in_test[static_cast<std::size_t>(r)] = 1;
        std::vector<int> train;
        for (int r = 0; r < rows; ++r)
            if (!in_test[static_cast<std::size_t>(r)]) train.push_back(r);
        if (train.empty() || held.empty()) throw DegenerateProblem("empty cross-validation fold");
        std::sort(train.begin(), train.end());
        std::vector<int> test = held;
        std::sort(test.begin(), test.end());

        const PseudoProblem tr = prob.subproblem(train);
        const PseudoProblem te = prob.subproblem(test);
        const LassoSolver solver(tr.X, tr.Y, opts);
        std::optional<Vector> warm;
        for (Eigen::Index i = 0; i < grid.size(); ++i) {
            LassoFit fit = solver.solve(grid[i], warm);
            out.curve[i] += (te.Y - te.X * fit.beta).squaredNorm();
            warm = std::move(fit.beta);
        }
    }
    out.curve /= static_cast<double>(rows);

    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < grid.size(); ++i)
        if (out.curve[i] < out.curve[best]) best = i;
    out.index = static_cast<int>(best);
    out.lambda_cv = grid[best];
    return out;
}

}  // namespace sglarma
