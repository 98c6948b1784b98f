#include "sglarma/likelihood.hpp"

#include "sglarma/errors.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace sglarma {

std::vector<int> gamma_coords(const GlarmaParams& params) {
    std::vector<int> out(static_cast<std::size_t>(params.q()));
    std::iota(out.begin(), out.end(), params.p() + 1);
    return out;
}

std::vector<int> beta_coords(const GlarmaParams& params) {
    std::vector<int> out(static_cast<std::size_t>(params.p() + 1));
    std::iota(out.begin(), out.end(), 0);
    return out;
}

std::vector<int> all_coords(const GlarmaParams& params) {
    std::vector<int> out(static_cast<std::size_t>(params.dim()));
    std::iota(out.begin(), out.end(), 0);
    return out;
}

double log_likelihood(const GlarmaParams& params, const SeriesData& data, double w_cap) {
    const StatePath path = compute_state_path(params, data, w_cap);
    double value = 0.0;
    for (int t = 0; t < data.n(); ++t) value += data.y[t] * path.w[t] - path.mu[t];
    return value;
}

LikelihoodEval evaluate_block(const GlarmaParams& params, const SeriesData& data,
                              std::span<const int> coords, bool with_hessian,
                              const LikelihoodOptions& opts) {
    const int n = data.n();
    const int p = params.p();
    const int q = params.q();
    const int m = static_cast<int>(coords.size());
    for (int c : coords)
        if (c < 0 || c >= params.dim())
            throw ConfigError("coordinate " + std::to_string(c) + " out of range");

    const StatePath path = compute_state_path(params, data, opts.w_cap);

    LikelihoodEval out;
    out.coords.assign(coords.begin(), coords.end());
    out.grad = Vector::Zero(m);
    out.dw = Matrix::Zero(n, m);
    if (with_hessian) out.hess = Matrix::Zero(m, m);

    // Lag l of each coordinate when it is a gamma coordinate, 0 for beta.
    std::vector<int> lag_of(static_cast<std::size_t>(m), 0);
    for (int a = 0; a < m; ++a)
        if (coords[a] > p) lag_of[a] = coords[a] - p;

    // Ring buffer of d2W_{t-j} for j = 1..q, slot t % q.
    std::vector<Matrix> ring;
    if (with_hessian) ring.assign(static_cast<std::size_t>(std::max(q, 1)), Matrix::Zero(m, m));
    Matrix d2w(m, m);
    Matrix lag_term(m, m);

    Vector dw_t(m);
    for (int t = 0; t < n; ++t) {
        const int lags = std::min(q, t);

        // dW_t = a_t - sum_j gamma_j (1 + E_{t-j}) dW_{t-j}, a_t = (x_t, E_{t-1..t-q}).
        for (int a = 0; a < m; ++a) {
            const int c = coords[a];
            if (c <= p) {
                dw_t[a] = data.x(t, c);
            } else {
                const int s = t - lag_of[a];
                dw_t[a] = s >= 0 ? path.e[s] : 0.0;
            }
        }
        for (int j = 1; j <= lags; ++j) {
            const double coef = params.gamma[j - 1] * (1.0 + path.e[t - j]);
            dw_t.noalias() -= coef * out.dw.row(t - j).transpose();
        }
        out.dw.row(t) = dw_t.transpose();

        out.value += data.y[t] * path.w[t] - path.mu[t];
        const double resid = data.y[t] - path.mu[t];
        out.grad.noalias() += resid * dw_t;

        if (!with_hessian) continue;

        // d2W_t[a,b] = A[a,b] + A[b,a]
        //   + sum_j gamma_j (1 + E_{t-j}) (dW_{t-j}[a] dW_{t-j}[b] - d2W_{t-j}[a,b]),
        // with A[a,b] = -(1 + E_{t-l}) dW_{t-l}[b] when a is gamma_l and t-l >= 0.
        if (q > 0 && opts.include_w_curvature) {
            lag_term.setZero();
            for (int a = 0; a < m; ++a) {
                const int s = t - lag_of[a];
                if (lag_of[a] == 0 || s < 0) continue;
                lag_term.row(a) = -(1.0 + path.e[s]) * out.dw.row(s);
            }
            d2w = lag_term + lag_term.transpose();
            for (int j = 1; j <= lags; ++j) {
                const int s = t - j;
                const double coef = params.gamma[j - 1] * (1.0 + path.e[s]);
                const auto dws = out.dw.row(s);
                d2w.noalias() += coef * (dws.transpose() * dws - ring[static_cast<std::size_t>(s % q)]);
            }
            out.hess.noalias() += resid * d2w;
            ring[static_cast<std::size_t>(t % q)] = d2w;
        }
        out.hess.noalias() -= path.mu[t] * (dw_t * dw_t.transpose());
    }

    if (with_hessian) {
        const double scale = std::max(out.hess.cwiseAbs().maxCoeff(), 1e-300);
        out.max_asymmetry = (out.hess - out.hess.transpose()).cwiseAbs().maxCoeff() / scale;
        out.hess = 0.5 * (out.hess + out.hess.transpose()).eval();
    }
    return out;
}

LikelihoodEval evaluate(const GlarmaParams& params, const SeriesData& data,
                        const LikelihoodOptions& opts) {
    const auto coords = all_coords(params);
    return evaluate_block(params, data, coords, true, opts);
}

Vector gradient(const GlarmaParams& params, const SeriesData& data, const LikelihoodOptions& opts) {
    const auto coords = all_coords(params);
    return evaluate_block(params, data, coords, false, opts).grad;
}

Matrix hessian(const GlarmaParams& params, const SeriesData& data, const LikelihoodOptions& opts) {
    return evaluate(params, data, opts).hess;
}

BetaBlock beta_block(const GlarmaParams& params, const SeriesData& data,
                     const LikelihoodOptions& opts) {
    const auto coords = beta_coords(params);
    LikelihoodEval ev = evaluate_block(params, data, coords, true, opts);
    BetaBlock out{std::move(ev.grad), -ev.hess};
    if (!out.grad_beta.allFinite() || !out.neg_hess_beta.allFinite())
        throw NonFiniteCurvature("beta gradient or Hessian contains non-finite entries");
    return out;
}

}  // namespace sglarma
