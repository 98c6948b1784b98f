import numpy as np
import pytest

import sglarma


def small_series(seed=1, n=300, p=20):
    x = sglarma.fourier_covariates(n, p, 0.7)
    beta = np.zeros(p + 1)
    beta[0], beta[1], beta[3] = 2.0, 0.8, -0.5
    y = sglarma.simulate(beta, np.array([0.4]), x, n, seed)
    return y, x, beta


def test_simulate_is_deterministic():
    y1, x, _ = small_series()
    y2, _, _ = small_series()
    assert x.shape == (300, 21)
    assert np.all(x[:, 0] == 1.0)
    assert np.array_equal(y1, y2)
    assert np.all(y1 >= 0) and np.all(y1 == np.round(y1))


def test_gradient_matches_finite_differences():
    y, x, beta = small_series(n=60, p=3)
    gamma = np.array([0.2])
    g = sglarma.gradient(beta, gamma, y, x)
    delta = np.concatenate([beta, gamma])
    fd = np.zeros_like(delta)
    for i in range(delta.size):
        h = 1e-6 * max(1.0, abs(delta[i]))
        up, dn = delta.copy(), delta.copy()
        up[i] += h
        dn[i] -= h
        fd[i] = (sglarma.log_likelihood(up[:-1], up[-1:], y, x) - sglarma.log_likelihood(dn[:-1], dn[-1:], y, x)) / (2 * h)
    assert np.max(np.abs(g - fd)) / max(1.0, np.max(np.abs(fd))) < 1e-6
    H = sglarma.hessian(beta, gamma, y, x)
    assert H.shape == (5, 5)
    assert np.allclose(H, H.T)


def test_pseudo_problem_and_lasso():
    y, x, _ = small_series()
    b0 = sglarma.fit_glm_init(y, x)
    gam = sglarma.newton_gamma(b0, y, x, 1)
    assert gam["converged"]
    pp = sglarma.pseudo_problem(b0, gam["estimate"], y, x)
    X, Y = pp["X"], pp["Y"]
    lam_max = np.max(np.abs(X.T @ Y))
    fit = sglarma.lasso(X, Y, 0.1 * lam_max)
    assert fit["kkt_violation"] <= 1e-6 * (1 + 0.1 * lam_max)
    assert np.all(sglarma.lasso(X, Y, 1.01 * lam_max)["beta"] == 0.0)


def test_pipeline_recovers_support():
    y, x, beta = small_series()
    res = sglarma.run_pipeline(y, x, q=1, method="fast_ss", seed=2)
    assert {1, 3} <= set(res["support"])
    assert len(res["gamma_history"]) == res["outer_iters"]
    tpr, fpr = sglarma.tpr_fpr(res["support"], [1, 3], 20)
    assert tpr == 1.0
    assert 0.0 <= fpr <= 1.0


def test_errors_map_to_exception_classes():
    with pytest.raises(sglarma.UsageError):
        sglarma.run_pipeline(np.ones(10), sglarma.fourier_covariates(10, 2, 0.7), method="lasso")
    with pytest.raises(sglarma.ConfigError):
        sglarma.fourier_covariates(10, 0, 0.7)
    assert issubclass(sglarma.NoConvergence, sglarma.Error)


def test_run_experiment():
    out = sglarma.run_experiment(
        {"n": 300, "p": 50, "replicates": 1, "methods": ["fast_ss", "lasso_cv"], "n_subsamples": 20, "seed": 4}
    )
    assert [r["method"] for r in out["rows"]] == ["fast_ss", "lasso_cv"]
    assert len(out["records"]) == 2
    with pytest.raises(sglarma.UsageError):
        sglarma.run_experiment({"methods": []})
