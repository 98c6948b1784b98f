#include "sglarma/model.hpp"

#include "sglarma/errors.hpp"
#include "sglarma/rng.hpp"

#include <cmath>
#include <string>

namespace sglarma {

Vector GlarmaParams::delta() const {
    Vector out(dim());
    out << beta, gamma;
    return out;
}

GlarmaParams GlarmaParams::from_delta(const Vector& delta, int q) {
    const auto nb = delta.size() - q;
    return GlarmaParams(delta.head(nb), delta.tail(q));
}

void GlarmaParams::validate() const {
    if (beta.size() < 1) throw ConfigError("beta must contain at least the intercept");
    if (!beta.allFinite() || !gamma.allFinite())
        throw ConfigError("model parameters must be finite");
}

void SeriesData::validate() const {
    if (y.size() < 1) throw ConfigError("series must contain at least one observation");
    if (x.rows() != y.size())
        throw ConfigError("covariate rows (" + std::to_string(x.rows()) +
                          ") do not match series length (" + std::to_string(y.size()) + ")");
    if (x.cols() < 1) throw ConfigError("covariate matrix needs an intercept column");
    if (!x.allFinite()) throw ConfigError("covariates must be finite");
    for (Eigen::Index t = 0; t < x.rows(); ++t)
        if (x(t, 0) != 1.0) throw ConfigError("covariate column 0 must be all ones");
    for (Eigen::Index t = 0; t < y.size(); ++t)
        if (!(y[t] >= 0.0) || y[t] != std::floor(y[t]))
            throw ConfigError("counts must be nonnegative integers");
}

namespace {

void check_dims(const GlarmaParams& params, const SeriesData& data) {
    if (params.beta.size() != data.x.cols())
        throw ConfigError("beta has length " + std::to_string(params.beta.size()) +
                          " but covariates have " + std::to_string(data.x.cols()) + " columns");
}

double guarded_exp(double w, int t, double cap) {
    if (!(std::fabs(w) <= cap))
        throw OverflowGuard("|W_t| exceeds " + std::to_string(cap) + " at t = " +
                            std::to_string(t + 1) + " (W_t = " + std::to_string(w) + ")");
    return std::exp(w);
}

// W_t given the residual history e[0..t-1].
double linear_predictor(const GlarmaParams& params, const Matrix& x, const Vector& e, int t) {
    double w = x.row(t).dot(params.beta);
    const int lags = std::min(params.q(), t);
    for (int j = 1; j <= lags; ++j) w += params.gamma[j - 1] * e[t - j];
    return w;
}

}  // namespace

StatePath compute_state_path(const GlarmaParams& params, const SeriesData& data, double w_cap) {
    check_dims(params, data);
    const int n = data.n();
    StatePath path{Vector(n), Vector(n), Vector(n)};
    for (int t = 0; t < n; ++t) {
        const double w = linear_predictor(params, data.x, path.e, t);
        const double mu = guarded_exp(w, t, w_cap);
        path.w[t] = w;
        path.mu[t] = mu;
        path.e[t] = data.y[t] * std::exp(-w) - 1.0;
    }
    return path;
}

SeriesData simulate(const GlarmaParams& params, const Matrix& x, int n, std::uint64_t seed,
                    StatePath& path, double w_cap) {
    params.validate();
    if (n < 1) throw ConfigError("n must be positive");
    if (x.rows() != n) throw ConfigError("covariate matrix must have n rows");
    if (x.cols() != params.beta.size())
        throw ConfigError("covariate columns must match beta length");

    Rng rng(seed);
    SeriesData out(Vector(n), x);
    path = StatePath{Vector(n), Vector(n), Vector(n)};
    for (int t = 0; t < n; ++t) {
        const double w = linear_predictor(params, x, path.e, t);
        const double mu = guarded_exp(w, t, w_cap);
        const double y = static_cast<double>(rng.poisson(mu));
        out.y[t] = y;
        path.w[t] = w;
        path.mu[t] = mu;
        path.e[t] = y * std::exp(-w) - 1.0;
    }
    return out;
}

SeriesData simulate(const GlarmaParams& params, const Matrix& x, int n, std::uint64_t seed,
                    double w_cap) {
    StatePath path;
    return simulate(params, x, n, seed, path, w_cap);
}

Matrix intercept_only(int n) { return Matrix::Ones(n, 1); }

}  // namespace sglarma
