#include "sglarma/selection.hpp"

#include "sglarma/errors.hpp"
#include "sglarma/parallel.hpp"
#include "sglarma/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sglarma {

namespace {

// Subsample draws use their own stream so they do not depend on whether
// cross-validation consumed random numbers first.
constexpr std::uint64_t kSubsampleStream = 0x9e3779b97f4a7c15ULL;

Vector selection_grid(const PseudoProblem& prob, const SelectionConfig& cfg) {
    const LassoOptions lopts = cfg.lasso_options();
    if (cfg.grid_count == 1) {
        const double top = lambda_max(prob, lopts);
        if (!(top > 0.0)) throw DegenerateProblem("lambda_max is zero; nothing to penalize");
        return Vector::Constant(1, top * cfg.grid_ratio);
    }
    return lambda_grid(prob, cfg.grid_count, cfg.grid_ratio, lopts);
}

SelectionResult finish(const PseudoProblem& prob, SelectionResult res, int denominator,
                       double threshold) {
    res.frequencies.resize(prob.dim());
    for (int j = 0; j < prob.dim(); ++j)
        res.frequencies[j] = static_cast<double>(res.counts[static_cast<std::size_t>(j)]) /
                             static_cast<double>(denominator);
    res.support = threshold_support(res.frequencies, threshold);
    res.beta_hat = refit_support(prob, res.support);
    return res;
}

}  // namespace

std::string to_string(Method method) {
    switch (method) {
        case Method::SsCv: return "ss_cv";
        case Method::SsMin: return "ss_min";
        case Method::FastSs: return "fast_ss";
    }
    return "unknown";
}

Method parse_method(const std::string& name) {
    if (name == "ss_cv") return Method::SsCv;
    if (name == "ss_min") return Method::SsMin;
    if (name == "fast_ss") return Method::FastSs;
    throw UsageError("unknown selection method '" + name + "' (expected ss_cv, ss_min or fast_ss)");
}

double default_threshold(Method method) {
    switch (method) {
        case Method::SsCv: return 0.7;
        case Method::SsMin: return 0.8;
        case Method::FastSs: return 0.4;
    }
    return 0.8;
}

void SelectionConfig::validate() const {
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("threshold must lie in [0, 1]");
    if (n_subsamples < 1) throw ConfigError("n_subsamples must be at least 1");
    if (grid_count < 1) throw ConfigError("grid_count must be at least 1");
    if (!(grid_ratio > 0.0 && grid_ratio < 1.0)) throw ConfigError("grid_ratio must lie in (0, 1)");
    if (cv_folds < 2) throw ConfigError("cv_folds must be at least 2");
}

LassoOptions SelectionConfig::lasso_options() const {
    LassoOptions opts;
    opts.penalize_intercept = penalize_intercept;
    return opts;
}

std::vector<int> threshold_support(const Vector& frequencies, double threshold) {
    std::vector<int> out;
    for (Eigen::Index j = 0; j < frequencies.size(); ++j)
        if (frequencies[j] > 0.0 && frequencies[j] >= threshold) out.push_back(static_cast<int>(j));
    return out;
}

SelectionResult select_standard(const PseudoProblem& prob, const SelectionConfig& cfg) {
    cfg.validate();
    if (cfg.method == Method::FastSs) throw ConfigError("select_standard needs ss_cv or ss_min");
    const int rows = prob.rows();
    const int half = rows / 2;
    if (half < 2)
        throw SubsampleTooSmall("subsample size floor((p+1)/2) = " + std::to_string(half) +
                                " is below 2");

    const LassoOptions lopts = cfg.lasso_options();
    SelectionResult res;
    res.grid = selection_grid(prob, cfg);
    if (cfg.method == Method::SsCv) {
        if (res.grid.size() < 2) throw ConfigError("ss_cv needs a grid of at least two values");
        res.lambda_used = cross_validate(prob, res.grid, std::min(cfg.cv_folds, rows), cfg.seed, lopts)
                              .lambda_cv;
    } else {
        res.lambda_used = res.grid[res.grid.size() - 1];
    }

    Rng rng(cfg.seed + kSubsampleStream);
    std::vector<std::vector<int>> subsets(static_cast<std::size_t>(cfg.n_subsamples));
    for (auto& s : subsets) s = rng.subset(rows, half);

    const int d = prob.dim();
    std::vector<std::vector<char>> hits(static_cast<std::size_t>(cfg.n_subsamples));
    parallel_for(cfg.n_subsamples, cfg.threads, [&](int s) {
        const PseudoProblem sub = prob.subproblem(subsets[static_cast<std::size_t>(s)]);
        const LassoFit fit = LassoSolver(sub.X, sub.Y, lopts).solve(res.lambda_used);
        auto& h = hits[static_cast<std::size_t>(s)];
        h.assign(static_cast<std::size_t>(d), 0);
        for (int j = 0; j < d; ++j) h[static_cast<std::size_t>(j)] = fit.beta[j] != 0.0;
    });

    res.counts.assign(static_cast<std::size_t>(d), 0);
    res.path_nonzeros.reserve(static_cast<std::size_t>(cfg.n_subsamples));
    for (const auto& h : hits) {
        int nz = 0;
        for (int j = 0; j < d; ++j) {
            res.counts[static_cast<std::size_t>(j)] += h[static_cast<std::size_t>(j)];
            nz += h[static_cast<std::size_t>(j)];
        }
        res.path_nonzeros.push_back(nz);
    }
    return finish(prob, std::move(res), cfg.n_subsamples, cfg.threshold);
}

SelectionResult select_fast(const PseudoProblem& prob, const SelectionConfig& cfg) {
    cfg.validate();
    if (cfg.method != Method::FastSs) throw ConfigError("select_fast needs fast_ss");
    const int d = prob.dim();
    SelectionResult res;
    res.grid = selection_grid(prob, cfg);
    res.lambda_used = res.grid[res.grid.size() - 1];
    res.counts.assign(static_cast<std::size_t>(d), 0);

    const LassoSolver solver(prob.X, prob.Y, cfg.lasso_options());
    std::optional<Vector> warm;
    for (Eigen::Index i = 0; i < res.grid.size(); ++i) {
        LassoFit fit = solver.solve(res.grid[i], warm);
        int nz = 0;
        for (int j = 0; j < d; ++j) {
            if (fit.beta[j] != 0.0) {
                ++res.counts[static_cast<std::size_t>(j)];
                ++nz;
            }
        }
        res.path_nonzeros.push_back(nz);
        warm = std::move(fit.beta);
    }
    return finish(prob, std::move(res), static_cast<int>(res.grid.size()), cfg.threshold);
}

SelectionResult select(const PseudoProblem& prob, const SelectionConfig& cfg) {
    return cfg.method == Method::FastSs ? select_fast(prob, cfg) : select_standard(prob, cfg);
}

Vector refit_support(const PseudoProblem& prob, const std::vector<int>& support) {
    Vector beta = Vector::Zero(prob.dim());
    if (support.empty()) return beta;
    Matrix xs(prob.rows(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t k = 0; k < support.size(); ++k)
        xs.col(static_cast<Eigen::Index>(k)) = prob.X.col(support[k]);
    const Vector coef = Eigen::CompleteOrthogonalDecomposition<Matrix>(xs).solve(prob.Y);
    for (std::size_t k = 0; k < support.size(); ++k)
        beta[support[k]] = coef[static_cast<Eigen::Index>(k)];
    return beta;
}

Rates tpr_fpr(const std::vector<int>& est_support, const std::vector<int>& true_support, int p) {
    std::vector<char> is_true(static_cast<std::size_t>(p + 1), 0);
    int n_true = 0;
    for (int j : true_support) {
        if (j < 1 || j > p) continue;
        if (!is_true[static_cast<std::size_t>(j)]) ++n_true;
        is_true[static_cast<std::size_t>(j)] = 1;
    }
    int tp = 0;
    int fp = 0;
    std::vector<char> seen(static_cast<std::size_t>(p + 1), 0);
    for (int j : est_support) {
        if (j < 1 || j > p || seen[static_cast<std::size_t>(j)]) continue;
        seen[static_cast<std::size_t>(j)] = 1;
        if (is_true[static_cast<std::size_t>(j)]) ++tp;
        else ++fp;
    }
    Rates r;
    r.tpr = n_true == 0 ? 1.0 : static_cast<double>(tp) / n_true;
    r.fpr = n_true == p ? 0.0 : static_cast<double>(fp) / (p - n_true);
    return r;
}

namespace {

SelectionResult from_fit(const LassoFit& fit, const Vector& grid) {
    SelectionResult res;
    const auto d = fit.beta.size();
    res.frequencies = Vector::Zero(d);
    res.counts.assign(static_cast<std::size_t>(d), 0);
    for (Eigen::Index j = 0; j < d; ++j) {
        if (fit.beta[j] != 0.0) {
            res.frequencies[j] = 1.0;
            res.counts[static_cast<std::size_t>(j)] = 1;
            res.support.push_back(static_cast<int>(j));
        }
    }
    res.beta_hat = fit.beta;
    res.lambda_used = fit.lambda;
    res.grid = grid;
    res.path_nonzeros.push_back(static_cast<int>(res.support.size()));
    return res;
}

}  // namespace

SelectionResult lasso_cv_baseline(const PseudoProblem& prob, const SelectionConfig& cfg) {
    cfg.validate();
    const LassoOptions lopts = cfg.lasso_options();
    const Vector grid = lambda_grid(prob, std::max(cfg.grid_count, 2), cfg.grid_ratio, lopts);
    const CvResult cv = cross_validate(prob, grid, std::min(cfg.cv_folds, prob.rows()), cfg.seed, lopts);
    return from_fit(LassoSolver(prob.X, prob.Y, lopts).solve(cv.lambda_cv), grid);
}

SelectionResult lasso_best_baseline(const PseudoProblem& prob,
                                    const std::optional<std::vector<int>>& true_support,
                                    const SelectionConfig& cfg) {
    if (!true_support) throw MissingOracle("lasso_best needs the true support");
    cfg.validate();
    const LassoOptions lopts = cfg.lasso_options();
    const Vector grid = lambda_grid(prob, std::max(cfg.grid_count, 2), cfg.grid_ratio, lopts);
    const LassoSolver solver(prob.X, prob.Y, lopts);
    const int p = prob.dim() - 1;

    std::optional<Vector> warm;
    std::optional<LassoFit> best;
    double best_score = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        LassoFit fit = solver.solve(grid[i], warm);
        const Rates r = tpr_fpr(fit.support(1), *true_support, p);
        if (r.tpr - r.fpr > best_score) {
            best_score = r.tpr - r.fpr;
            best = fit;
        }
        warm = std::move(fit.beta);
    }
    return from_fit(*best, grid);
}

BaselineResults lasso_baselines(const PseudoProblem& prob,
                                const std::optional<std::vector<int>>& true_support,
                                const SelectionConfig& cfg, bool want_best) {
    BaselineResults out{lasso_cv_baseline(prob, cfg), std::nullopt};
    if (want_best) out.lasso_best = lasso_best_baseline(prob, true_support, cfg);
    return out;
}

}  // namespace sglarma
