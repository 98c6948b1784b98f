#pragma once

#include "sglarma/model.hpp"
#include "sglarma/pipeline.hpp"
#include "sglarma/selection.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace sglarma {

/// Fourier design: column 0 ones, x_{t,i} = cos(2 pi i t f / n) for
/// i = 1..floor(p/2) and sin(2 pi i t f / n) for i = floor(p/2)+1..p, t = 1..n.
Matrix fourier_covariates(int n, int p, double f);

enum class Sparsity { FivePct, TenPct, Custom };

std::string to_string(Sparsity s);
Sparsity parse_sparsity(const std::string& name);

/// Sparse coefficient vector of the synthetic benchmarks (length p + 1,
/// intercept first). Custom returns `custom` unchanged.
Vector sparse_beta(int p, Sparsity level, double intercept = 0.0, const Vector& custom = {});

/// Indices 1..p of the nonzero covariate coefficients.
std::vector<int> true_support(const Vector& beta);

/// Method names accepted by run_experiment. The three selection strategies
/// run the full pipeline; lasso_cv / lasso_best run on the pseudo-problem of
/// the first outer iteration; lasso_cv_glm / lasso_best_glm run an
/// l1-penalized Poisson GLM on the raw series.
const std::vector<std::string>& known_methods();

struct ExperimentConfig {
    int n = 1000;
    int p = 100;
    int q = 1;
    double f = 0.7;
    Sparsity sparsity = Sparsity::FivePct;
    Vector custom_beta;
    Vector gamma_true = Vector::Constant(1, 0.5);
    double beta0_intercept = 3.0;  // not given for the sparse benchmarks; see README
    int replicates = 20;
    std::vector<std::string> methods{"ss_min"};
    std::map<std::string, double> thresholds;  // missing entries use the defaults
    std::uint64_t seed = 1;
    int n_subsamples = 1000;
    int grid_count = 100;
    int max_outer_iters = 10;
    double gamma_stab_tol = 1e-4;
    int threads = 1;

    void validate() const;
    double threshold_for(const std::string& method) const;
};

struct ReplicateRecord {
    int replicate = 0;
    std::uint64_t seed = 0;
    std::string method;
    std::string status = "ok";  // or the error kind
    double tpr = 0.0;
    double fpr = 0.0;
    double runtime_s = 0.0;
    std::vector<int> support;
    Vector gamma_hat;
    std::vector<Vector> gamma_history;  // per outer iteration, pipeline methods only
    int outer_iters = 0;
    bool stabilized = false;
};

struct MetricRow {
    std::string method;
    double tpr_mean = 0.0;
    double tpr_sd = 0.0;
    double fpr_mean = 0.0;
    double fpr_sd = 0.0;
    int n = 0;
    int q = 0;
    std::string sparsity;
    double runtime_s = 0.0;  // mean wall time per replicate
    int effective_replicates = 0;
    int failures = 0;
};

struct ExperimentResult {
    std::vector<MetricRow> rows;
    std::vector<ReplicateRecord> records;
};

/// Monte-Carlo support-recovery experiment. Replicate r uses seed + r;
/// failures are recorded per replicate and excluded from the means.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Means and sample standard deviations per method from raw records. Values
/// are summed in sorted order so replicate order does not matter.
std::vector<MetricRow> aggregate(const std::vector<ReplicateRecord>& records,
                                 const ExperimentConfig& cfg);

/// Runs one replicate of one method on an already simulated series.
ReplicateRecord run_method(const std::string& method, const SeriesData& data,
                           const std::vector<int>& truth, const ExperimentConfig& cfg,
                           std::uint64_t seed);

/// True ARMA coefficients of the p = 0 study for q = 1, 2, 3.
Vector study_gamma(int q);

struct GammaStudyConfig {
    std::vector<int> n_values{50, 100, 250, 500, 1000};
    std::vector<int> q_values{1, 2, 3};
    double beta0 = 3.0;
    int replicates = 100;
    std::uint64_t seed = 1;
    int threads = 1;
};

struct GammaSample {
    int n = 0;
    int q = 0;
    int replicate = 0;
    std::string status = "ok";
    double beta0_hat = 0.0;
    Vector gamma_hat;
};

/// p = 0 estimation study: simulate with beta_0 and the study gamma, then
/// estimate (beta_0, gamma) jointly by Newton-Raphson from the GLM start.
std::vector<GammaSample> run_gamma_study(const GammaStudyConfig& cfg);

double median(std::vector<double> values);

}  // namespace sglarma
