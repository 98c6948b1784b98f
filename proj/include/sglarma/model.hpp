#pragma once

// GLARMA Poisson model with covariates:
//
//   Y_t | F_{t-1} ~ Poisson(mu_t),  mu_t = exp(W_t),
//   W_t = beta' x_t + sum_{j=1}^{q} gamma_j E_{t-j},
//   E_t = Y_t exp(-W_t) - 1  for t >= 1,  E_t = 0 for t <= 0.
//
// Index mapping between the 1-based formulas above and the 0-based arrays
// used throughout the library:
//
//   formula              | array
//   ---------------------+-----------------------------------------
//   t = 1..n             | t = 0..n-1
//   x_{t,k}, k = 0..p    | data.x(t, k), column 0 is the intercept
//   beta_k, k = 0..p     | params.beta[k]
//   gamma_l, l = 1..q    | params.gamma[l - 1]
//   delta = (beta, gamma)| flat index k for beta_k, p + l for gamma_l
//   E_{t-j}, t - j <= 0  | lag reaches before index 0, contributes 0

#include <Eigen/Dense>

#include <cstdint>

namespace sglarma {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Divergence guard: any |W_t| beyond this raises OverflowGuard.
inline constexpr double kDefaultWCap = 50.0;

struct GlarmaParams {
    Vector beta;   // beta_0 (intercept) .. beta_p
    Vector gamma;  // gamma_1 .. gamma_q

    GlarmaParams() = default;
    GlarmaParams(Vector b, Vector g) : beta(std::move(b)), gamma(std::move(g)) {}

    int p() const { return static_cast<int>(beta.size()) - 1; }
    int q() const { return static_cast<int>(gamma.size()); }
    int dim() const { return static_cast<int>(beta.size() + gamma.size()); }

    /// Flattened delta = (beta', gamma').
    Vector delta() const;
    static GlarmaParams from_delta(const Vector& delta, int q);

    /// Throws ConfigError unless beta is nonempty and every entry is finite.
    void validate() const;
};

struct SeriesData {
    Vector y;  // counts, stored as doubles holding nonnegative integers
    Matrix x;  // n x (p+1), column 0 all ones

    SeriesData() = default;
    SeriesData(Vector counts, Matrix covariates) : y(std::move(counts)), x(std::move(covariates)) {}

    int n() const { return static_cast<int>(y.size()); }
    int p() const { return static_cast<int>(x.cols()) - 1; }

    /// Throws ConfigError on shape mismatch, a non-unit intercept column,
    /// non-finite covariates or negative / non-integer counts.
    void validate() const;
};

struct StatePath {
    Vector w;   // W_t
    Vector e;   // E_t
    Vector mu;  // exp(W_t)
};

/// Forward recursion for W_t, E_t and mu_t.
StatePath compute_state_path(const GlarmaParams& params, const SeriesData& data,
                             double w_cap = kDefaultWCap);

/// Sequentially simulates Y_1..Y_n from the model with the given covariates.
/// Identical inputs and seed give a bit-identical series.
SeriesData simulate(const GlarmaParams& params, const Matrix& x, int n, std::uint64_t seed,
                    double w_cap = kDefaultWCap);

/// Same as simulate, also returning the W/E/mu path generated along the way.
SeriesData simulate(const GlarmaParams& params, const Matrix& x, int n, std::uint64_t seed,
                    StatePath& path, double w_cap = kDefaultWCap);

/// Covariate matrix with only the intercept column.
Matrix intercept_only(int n);

}  // namespace sglarma
