#include "oracles.hpp"

#include "sglarma/bench.hpp"
#include "sglarma/errors.hpp"
#include "sglarma/estimation.hpp"
#include "sglarma/selection.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace sglarma;

namespace {

PseudoProblem bench_pseudo(std::uint64_t seed, int n = 400, int p = 20) {
    const Matrix x = fourier_covariates(n, p, 0.7);
    Vector beta = Vector::Zero(p + 1);
    beta[0] = 2.0;
    beta[1] = 0.8;
    beta[3] = 0.4;
    beta[7] = -0.5;
    const SeriesData d = simulate(GlarmaParams(beta, Vector::Constant(1, 0.4)), x, n, seed);
    const Vector b0 = fit_glm_init(d);
    return build_pseudo_problem(b0, newton_gamma(b0, d, 1).estimate, d);
}

SelectionConfig small_cfg(Method m) {
    SelectionConfig c;
    c.method = m;
    c.threshold = default_threshold(m);
    c.n_subsamples = 60;
    c.grid_count = 40;
    c.seed = 3;
    return c;
}

}  // namespace

TEST_SUITE("selection") {

TEST_CASE("method names and default thresholds") {
    CHECK(parse_method("ss_cv") == Method::SsCv);
    CHECK(parse_method("ss_min") == Method::SsMin);
    CHECK(parse_method("fast_ss") == Method::FastSs);
    CHECK_THROWS_AS(parse_method("lasso"), UsageError);
    CHECK(default_threshold(Method::SsCv) == 0.7);
    CHECK(default_threshold(Method::SsMin) == 0.8);
    CHECK(default_threshold(Method::FastSs) == 0.4);
}

TEST_CASE("boundary thresholds") {
    Vector f(5);
    f << 0.0, 0.2, 1.0, 0.999, 0.5;
    CHECK(threshold_support(f, 0.0) == std::vector<int>{1, 2, 3, 4});
    CHECK(threshold_support(f, 1.0) == std::vector<int>{2});
    SelectionConfig c;
    c.threshold = 1.0 + 1e-9;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("support shrinks as the threshold rises") {
    const PseudoProblem pp = bench_pseudo(1);
    const SelectionResult r = select(pp, small_cfg(Method::SsMin));
    std::vector<int> prev = threshold_support(r.frequencies, 0.0);
    for (double t = 0.05; t <= 1.0; t += 0.05) {
        const std::vector<int> cur = threshold_support(r.frequencies, t);
        CHECK(std::includes(prev.begin(), prev.end(), cur.begin(), cur.end()));
        prev = cur;
    }
}

TEST_CASE("frequencies are proportions and dead columns never enter") {
    PseudoProblem pp = bench_pseudo(2);
    pp.X.col(5).setZero();
    for (Method m : {Method::SsCv, Method::SsMin, Method::FastSs}) {
        const SelectionResult r = select(pp, small_cfg(m));
        CHECK(r.frequencies.minCoeff() >= 0.0);
        CHECK(r.frequencies.maxCoeff() <= 1.0);
        CHECK(r.frequencies[5] == 0.0);
        for (int j = 0; j < pp.dim(); ++j)
            if (std::find(r.support.begin(), r.support.end(), j) == r.support.end()) CHECK(r.beta_hat[j] == 0.0);
        CHECK(r.support == threshold_support(r.frequencies, small_cfg(m).threshold));
    }
}

TEST_CASE("standard selection counts subsample fits") {
    const PseudoProblem pp = bench_pseudo(3);
    const SelectionConfig cfg = small_cfg(Method::SsMin);
    const SelectionResult r = select(pp, cfg);
    const Vector grid = lambda_grid(pp, cfg.grid_count, cfg.grid_ratio);
    CHECK(r.lambda_used == grid[grid.size() - 1]);
    for (int j = 0; j < pp.dim(); ++j) CHECK(r.frequencies[j] == double(r.counts[j]) / cfg.n_subsamples);
}

TEST_CASE("fast selection counts grid entries") {
    const PseudoProblem pp = bench_pseudo(4);
    SelectionConfig cfg = small_cfg(Method::FastSs);
    cfg.grid_count = 100;
    const SelectionResult r = select(pp, cfg);
    const Vector grid = lambda_grid(pp, 100, cfg.grid_ratio);
    std::vector<int> counts(pp.dim(), 0);
    for (int i = 0; i < 100; ++i) {
        const LassoFit f = lasso_cd(pp, grid[i]);
        for (int j : f.support()) ++counts[j];
    }
    for (int j = 0; j < pp.dim(); ++j) {
        CHECK(r.counts[j] == counts[j]);
        CHECK(r.frequencies[j] == doctest::Approx(counts[j] / 100.0));
    }
    // A coefficient seen at one grid value has frequency 1/100.
    for (int j = 0; j < pp.dim(); ++j)
        if (counts[j] == 1) CHECK(r.frequencies[j] == 0.01);
}

TEST_CASE("single-point grid") {
    const PseudoProblem pp = bench_pseudo(5);
    SelectionConfig cfg = small_cfg(Method::FastSs);
    cfg.grid_count = 1;
    const SelectionResult r = select(pp, cfg);
    const LassoFit f = lasso_cd(pp, cfg.grid_ratio * lambda_max(pp));
    for (int j = 0; j < pp.dim(); ++j) CHECK((r.frequencies[j] == 0.0 || r.frequencies[j] == 1.0));
    for (double t : {0.1, 0.5, 1.0}) CHECK(threshold_support(r.frequencies, t) == f.support());
}

TEST_CASE("refining a nested grid moves each frequency by at most 2 / count") {
    const PseudoProblem pp = bench_pseudo(6);
    SelectionConfig coarse = small_cfg(Method::FastSs);
    coarse.grid_count = 21;
    coarse.grid_ratio = 1e-4;
    SelectionConfig fine = coarse;
    fine.grid_count = 41;  // every other point is a coarse point
    const SelectionResult a = select(pp, coarse);
    const SelectionResult b = select(pp, fine);
    CHECK((a.frequencies - b.frequencies).cwiseAbs().maxCoeff() <= 2.0 / coarse.grid_count + 1e-12);
}

TEST_CASE("refit on the support") {
    std::mt19937_64 g(8);
    const Matrix a = oracle::random_matrix(12, 6, g);
    PseudoProblem pp = pseudo_from_curvature(Vector::Zero(6), Vector::Zero(6), Matrix(a.transpose() * a));
    pp.Y = oracle::random_vector(6, g);
    const Vector ols = pp.X.colPivHouseholderQr().solve(pp.Y);
    CHECK(oracle::rel_err(refit_support(pp, {0, 1, 2, 3, 4, 5}), ols) < 1e-10);
    CHECK(refit_support(pp, {}).isZero(0));

    Vector truth = Vector::Zero(6);
    truth[1] = 2.0;
    truth[4] = -0.7;
    pp.Y = pp.X * truth;
    CHECK((refit_support(pp, {1, 4}) - truth).cwiseAbs().maxCoeff() < 1e-8);

    // Rank deficient: duplicated column gets the minimum-norm split.
    pp.X.col(2) = pp.X.col(1);
    const Vector mn = refit_support(pp, {1, 2});
    CHECK(mn[1] == doctest::Approx(mn[2]).epsilon(1e-8));
}

TEST_CASE("true and false positive rates") {
    const std::vector<int> truth{1, 3, 17, 33, 44};
    Rates r = tpr_fpr(truth, truth, 100);
    CHECK(r.tpr == 1.0);
    CHECK(r.fpr == 0.0);
    r = tpr_fpr({1, 3, 17, 33}, truth, 100);
    CHECK(r.tpr == doctest::Approx(0.8));
    CHECK(r.fpr == 0.0);
    std::vector<int> all(100);
    for (int i = 0; i < 100; ++i) all[i] = i + 1;
    r = tpr_fpr(all, truth, 100);
    CHECK(r.tpr == 1.0);
    CHECK(r.fpr == 1.0);
    r = tpr_fpr({0, 2}, truth, 100);  // the intercept is not a covariate
    CHECK(r.fpr == doctest::Approx(1.0 / 95));
    CHECK(tpr_fpr({2}, {}, 10).tpr == 1.0);
    CHECK(tpr_fpr({1, 2}, {1, 2}, 2).fpr == 0.0);
}

TEST_CASE("lasso baselines") {
    const PseudoProblem pp = bench_pseudo(9);
    SelectionConfig cfg = small_cfg(Method::SsCv);
    cfg.grid_count = 50;
    CHECK_THROWS_AS(lasso_best_baseline(pp, std::nullopt, cfg), MissingOracle);

    std::vector<int> everything;
    for (int j = 1; j < pp.dim(); ++j) everything.push_back(j);
    const SelectionResult best_all = lasso_best_baseline(pp, everything, cfg);
    const Vector grid = lambda_grid(pp, cfg.grid_count, cfg.grid_ratio);
    std::size_t most = 0;
    for (int i = 0; i < grid.size(); ++i) most = std::max(most, lasso_cd(pp, grid[i]).support(1).size());
    int covered = 0;
    for (int j : best_all.support) covered += j > 0;
    CHECK(covered == static_cast<int>(most));

    const std::vector<int> truth{1, 3, 7};
    const BaselineResults both = lasso_baselines(pp, truth, cfg, true);
    REQUIRE(both.lasso_best);
    const Rates rb = tpr_fpr(both.lasso_best->support, truth, pp.dim() - 1);
    const Rates rc = tpr_fpr(both.lasso_cv.support, truth, pp.dim() - 1);
    CHECK(rb.tpr - rb.fpr >= rc.tpr - rc.fpr);
}

TEST_CASE("deterministic and independent of the thread count") {
    const PseudoProblem pp = bench_pseudo(10);
    for (Method m : {Method::SsCv, Method::SsMin, Method::FastSs}) {
        SelectionConfig c1 = small_cfg(m);
        SelectionConfig c4 = c1;
        c4.threads = 4;
        const SelectionResult a = select(pp, c1);
        const SelectionResult b = select(pp, c1);
        const SelectionResult c = select(pp, c4);
        CHECK(a.frequencies == b.frequencies);
        CHECK(a.frequencies == c.frequencies);
        CHECK(a.beta_hat == c.beta_hat);
    }
}

TEST_CASE("subsamples must hold two rows") {
    const PseudoProblem pp = pseudo_from_curvature(Vector::Zero(3), Vector::Ones(3), Matrix::Identity(3, 3));
    CHECK_THROWS_AS(select(pp, small_cfg(Method::SsMin)), SubsampleTooSmall);
}

}
