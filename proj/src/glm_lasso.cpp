// l1-penalized Poisson regression on the raw series, the "plain lasso"
// baseline that ignores temporal dependence.

#include "sglarma/errors.hpp"
#include "sglarma/rng.hpp"
#include "sglarma/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sglarma {

namespace {

constexpr double kEtaClamp = 30.0;

struct Standardized {
    Matrix z;          // centered and scaled covariates, intercept dropped
    Vector center;
    Vector scale;      // 0 marks a constant column, excluded from the fit
};

Standardized standardize(const Matrix& x, bool enabled) {
    const auto n = x.rows();
    const auto p = x.cols() - 1;
    Standardized s{Matrix(n, p), Vector::Zero(p), Vector::Ones(p)};
    for (Eigen::Index j = 0; j < p; ++j) {
        const auto col = x.col(j + 1);
        const double mean = col.mean();
        const double sd = std::sqrt((col.array() - mean).square().mean());
        if (!(sd > 0.0)) {
            s.scale[j] = 0.0;
            s.z.col(j).setZero();
            continue;
        }
        if (enabled) {
            s.center[j] = mean;
            s.scale[j] = sd;
            s.z.col(j) = (col.array() - mean) / sd;
        } else {
            s.z.col(j) = col;
        }
    }
    return s;
}

inline double soft(double v, double t) { return v > t ? v - t : (v < -t ? v + t : 0.0); }

double penalized_objective(const Vector& y, const Matrix& z, double b0, const Vector& b,
                           double lambda) {
    const Vector eta = ((z * b).array() + b0).cwiseMax(-kEtaClamp).cwiseMin(kEtaClamp);
    const double n = static_cast<double>(y.size());
    return -(y.dot(eta) - eta.array().exp().sum()) / n + lambda * b.lpNorm<1>();
}

// One penalty value by IRLS + coordinate descent, warm-started in place.
void fit_one(const Vector& y, const Matrix& z, double lambda, double& b0, Vector& b,
             const GlmLassoOptions& opts) {
    const auto n = z.rows();
    const auto p = z.cols();
    const double inv_n = 1.0 / static_cast<double>(n);
    double obj = penalized_objective(y, z, b0, b, lambda);

    for (int irls = 0; irls < opts.max_irls; ++irls) {
        const Vector eta = ((z * b).array() + b0).cwiseMax(-kEtaClamp).cwiseMin(kEtaClamp);
        const Vector mu = eta.array().exp();
        const Vector w = mu * inv_n;
        const Vector work = eta.array() + (y - mu).array() / mu.array();
        Vector r = work - eta;

        Vector xwx(p);
        for (Eigen::Index j = 0; j < p; ++j) xwx[j] = w.dot(z.col(j).cwiseAbs2());
        const double wsum = w.sum();

        const double old_b0 = b0;
        const Vector old_b = b;
        std::vector<char> active(static_cast<std::size_t>(p), 0);
        for (Eigen::Index j = 0; j < p; ++j) active[static_cast<std::size_t>(j)] = b[j] != 0.0;

        auto sweep = [&](bool all) {
            double worst = 0.0;
            const double d0 = w.dot(r) / wsum;
            if (d0 != 0.0) {
                b0 += d0;
                r.array() -= d0;
                worst = std::max(worst, wsum * d0 * d0);
            }
            for (Eigen::Index j = 0; j < p; ++j) {
                if (!all && !active[static_cast<std::size_t>(j)]) continue;
                if (xwx[j] <= 0.0) continue;
                const double g = z.col(j).dot(w.cwiseProduct(r)) + xwx[j] * b[j];
                const double fresh = soft(g, lambda) / xwx[j];
                const double delta = fresh - b[j];
                if (delta != 0.0) {
                    b[j] = fresh;
                    r.noalias() -= delta * z.col(j);
                    worst = std::max(worst, xwx[j] * delta * delta);
                }
                if (fresh != 0.0) active[static_cast<std::size_t>(j)] = 1;
            }
            return worst;
        };

        const double inner_tol = opts.tol * opts.tol;
        for (int outer = 0; outer < 1000; ++outer) {
            if (sweep(true) < inner_tol) break;
            for (int inner = 0; inner < 10000; ++inner)
                if (sweep(false) < inner_tol) break;
        }

        // Step halving keeps the penalized objective from increasing.
        double fresh_obj = penalized_objective(y, z, b0, b, lambda);
        for (int h = 0; h < 30 && fresh_obj > obj + 1e-12 * (1.0 + std::fabs(obj)); ++h) {
            b0 = 0.5 * (b0 + old_b0);
            b = 0.5 * (b + old_b);
            fresh_obj = penalized_objective(y, z, b0, b, lambda);
        }
        const double change = std::max(std::fabs(b0 - old_b0), (b - old_b).lpNorm<Eigen::Infinity>());
        obj = fresh_obj;
        if (change < opts.tol) return;
    }
}

GlmLassoPath fit_path(const Vector& y, const Matrix& x, const Vector& lambdas,
                      const GlmLassoOptions& opts) {
    const Standardized s = standardize(x, opts.standardize);
    const auto p = s.z.cols();
    double b0 = std::log(std::max(y.mean(), 1e-10));
    Vector b = Vector::Zero(p);

    GlmLassoPath path;
    path.lambdas = lambdas;
    for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
        fit_one(y, s.z, lambdas[i], b0, b, opts);
        Vector beta = Vector::Zero(p + 1);
        double intercept = b0;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (s.scale[j] == 0.0) continue;
            beta[j + 1] = b[j] / s.scale[j];
            intercept -= beta[j + 1] * s.center[j];
        }
        beta[0] = intercept;
        path.betas.push_back(std::move(beta));
    }
    return path;
}

Vector default_lambdas(const Vector& y, const Matrix& x, const GlmLassoOptions& opts) {
    const Standardized s = standardize(x, opts.standardize);
    const double n = static_cast<double>(y.size());
    const Vector centered = y.array() - y.mean();
    const double top = (s.z.transpose() * centered).lpNorm<Eigen::Infinity>() / n;
    if (!(top > 0.0)) throw DegenerateProblem("no covariate correlates with the counts");
    const int count = std::max(opts.grid_count, 2);
    Vector grid(count);
    for (int i = 0; i < count; ++i)
        grid[i] = top * std::exp(std::log(opts.grid_ratio) * i / (count - 1));
    return grid;
}

}  // namespace

GlmLassoPath glm_lasso_path(const SeriesData& data, const GlmLassoOptions& opts,
                            const std::optional<Vector>& lambdas) {
    data.validate();
    if (data.p() < 1) throw ConfigError("glm lasso needs at least one covariate");
    if (!(data.y.sum() > 0.0)) throw Separation("all counts are zero");
    const Vector grid = lambdas ? *lambdas : default_lambdas(data.y, data.x, opts);
    return fit_path(data.y, data.x, grid, opts);
}

GlmLassoCv glm_lasso_cv(const SeriesData& data, const GlmLassoOptions& opts, std::uint64_t seed) {
    GlmLassoCv out;
    out.path = glm_lasso_path(data, opts);
    const int n = data.n();
    const int k = std::min(opts.cv_folds, n);
    if (k < 2) throw ConfigError("cross-validation needs at least two folds");

    Rng rng(seed);
    const std::vector<int> perm = rng.permutation(n);
    out.cv_deviance = Vector::Zero(out.path.lambdas.size());
    for (int f = 0; f < k; ++f) {
        std::vector<int> train;
        std::vector<int> test;
        for (int i = 0; i < n; ++i) (i % k == f ? test : train).push_back(perm[i]);
        std::sort(train.begin(), train.end());
        std::sort(test.begin(), test.end());

        Matrix xtr(static_cast<Eigen::Index>(train.size()), data.x.cols());
        Vector ytr(static_cast<Eigen::Index>(train.size()));
        for (std::size_t i = 0; i < train.size(); ++i) {
            xtr.row(static_cast<Eigen::Index>(i)) = data.x.row(train[i]);
            ytr[static_cast<Eigen::Index>(i)] = data.y[train[i]];
        }
        if (!(ytr.sum() > 0.0)) throw DegenerateProblem("training fold has only zero counts");
        const GlmLassoPath fold_path = fit_path(ytr, xtr, out.path.lambdas, opts);

        for (Eigen::Index l = 0; l < out.path.lambdas.size(); ++l) {
            const Vector& beta = fold_path.betas[static_cast<std::size_t>(l)];
            for (int i : test) {
                const double eta = std::clamp(data.x.row(i).dot(beta), -kEtaClamp, kEtaClamp);
                const double mu = std::exp(eta);
                const double yi = data.y[i];
                out.cv_deviance[l] += 2.0 * ((yi > 0.0 ? yi * std::log(yi / mu) : 0.0) - (yi - mu));
            }
        }
    }
    out.cv_deviance /= static_cast<double>(n);
    Eigen::Index best = 0;
    for (Eigen::Index l = 1; l < out.cv_deviance.size(); ++l)
        if (out.cv_deviance[l] < out.cv_deviance[best]) best = l;
    out.index = static_cast<int>(best);
    return out;
}

}  // namespace sglarma
