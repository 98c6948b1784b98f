#include "sglarma/bench.hpp"

#include "sglarma/errors.hpp"
#include "sglarma/estimation.hpp"
#include "sglarma/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <set>

namespace sglarma {

Matrix fourier_covariates(int n, int p, double f) {
    if (p < 1) throw ConfigError("fourier_covariates needs p >= 1");
    if (n < 1) throw ConfigError("fourier_covariates needs n >= 1");
    Matrix x(n, p + 1);
    const int half = p / 2;
    for (int t = 1; t <= n; ++t) {
        x(t - 1, 0) = 1.0;
        for (int i = 1; i <= p; ++i) {
            const double angle = 2.0 * M_PI * i * t * f / n;
            x(t - 1, i) = i <= half ? std::cos(angle) : std::sin(angle);
        }
    }
    return x;
}

std::string to_string(Sparsity s) {
    switch (s) {
        case Sparsity::FivePct: return "5";
        case Sparsity::TenPct: return "10";
        case Sparsity::Custom: return "custom";
    }
    return "custom";
}

Sparsity parse_sparsity(const std::string& name) {
    if (name == "5" || name == "5pct" || name == "five_pct") return Sparsity::FivePct;
    if (name == "10" || name == "10pct" || name == "ten_pct") return Sparsity::TenPct;
    if (name == "custom") return Sparsity::Custom;
    throw ConfigError("unknown sparsity '" + name + "'");
}

Vector sparse_beta(int p, Sparsity level, double intercept, const Vector& custom) {
    if (level == Sparsity::Custom) return custom;
    if (p < 44) throw ConfigError("the named sparsity configurations need p >= 44");
    Vector beta = Vector::Zero(p + 1);
    beta[0] = intercept;
    if (level == Sparsity::FivePct) {
        beta[1] = 1.73;
        beta[3] = 0.38;
        beta[17] = 0.29;
        beta[33] = -0.64;
        beta[44] = -0.13;
    } else {
        beta[1] = 1.73;
        beta[3] = 1.2;
        beta[5] = 0.67;
        beta[10] = 0.5;
        beta[14] = -0.38;
        beta[17] = 0.29;
        beta[30] = -0.64;
        beta[33] = -0.13;
        beta[38] = -0.1;
        beta[44] = -0.07;
    }
    return beta;
}

std::vector<int> true_support(const Vector& beta) {
    std::vector<int> out;
    for (Eigen::Index j = 1; j < beta.size(); ++j)
        if (beta[j] != 0.0) out.push_back(static_cast<int>(j));
    return out;
}

const std::vector<std::string>& known_methods() {
    static const std::vector<std::string> names{"ss_cv",    "ss_min",       "fast_ss",
                                                "lasso_cv", "lasso_best",   "lasso_cv_glm",
                                                "lasso_best_glm"};
    return names;
}

void ExperimentConfig::validate() const {
    if (replicates < 1) throw ConfigError("replicates must be at least 1");
    if (!(f > 0.0 && f <= 1.0)) throw ConfigError("f must lie in (0, 1]");
    if (n < 1 || p < 1 || q < 1) throw ConfigError("n, p and q must be positive");
    if (gamma_true.size() != q) throw ConfigError("gamma_true must have length q");
    if (methods.empty()) throw UsageError("no methods configured");
    for (const auto& m : methods)
        if (std::find(known_methods().begin(), known_methods().end(), m) == known_methods().end())
            throw UsageError("unknown method '" + m + "'");
    for (const auto& [name, th] : thresholds)
        if (!(th >= 0.0 && th <= 1.0)) throw ConfigError("threshold for " + name + " outside [0, 1]");
    if (sparsity == Sparsity::Custom && custom_beta.size() != p + 1)
        throw ConfigError("custom beta must have length p + 1");
}

double ExperimentConfig::threshold_for(const std::string& method) const {
    if (auto it = thresholds.find(method); it != thresholds.end()) return it->second;
    if (method == "ss_cv" || method == "ss_min" || method == "fast_ss")
        return default_threshold(parse_method(method));
    return 0.0;
}

namespace {

using Clock = std::chrono::steady_clock;

SelectionConfig selection_config(const ExperimentConfig& cfg, const SeriesData& data,
                                 std::uint64_t seed) {
    SelectionConfig sel;
    sel.n_subsamples = cfg.n_subsamples;
    sel.grid_count = cfg.grid_count;
    sel.grid_ratio = default_grid_ratio(data.n(), data.p() + 1);
    sel.seed = seed;
    return sel;
}

}  // namespace

ReplicateRecord run_method(const std::string& method, const SeriesData& data,
                           const std::vector<int>& truth, const ExperimentConfig& cfg,
                           std::uint64_t seed) {
    ReplicateRecord rec;
    rec.method = method;
    rec.seed = seed;
    const int p = data.p();
    const auto start = Clock::now();
    try {
        if (method == "ss_cv" || method == "ss_min" || method == "fast_ss") {
            PipelineConfig pc;
            pc.q = cfg.q;
            pc.selection = selection_config(cfg, data, seed);
            pc.selection.method = parse_method(method);
            pc.selection.threshold = cfg.threshold_for(method);
            pc.selection.threads = 1;
            pc.max_outer_iters = cfg.max_outer_iters;
            pc.gamma_stab_tol = cfg.gamma_stab_tol;
            const PipelineResult res = run_pipeline(data, pc);
            rec.support = res.support;
            rec.gamma_hat = res.gamma_hat;
            for (const auto& it : res.history) rec.gamma_history.push_back(it.gamma);
            rec.outer_iters = res.outer_iters;
            rec.stabilized = res.stabilized;
        } else if (method == "lasso_cv" || method == "lasso_best") {
            const Vector beta0 = fit_glm_init(data);
            const NewtonReport nr = newton_gamma(beta0, data, cfg.q);
            const PseudoProblem prob = build_pseudo_problem(beta0, nr.estimate, data);
            const SelectionConfig sel = selection_config(cfg, data, seed);
            const SelectionResult sr = method == "lasso_cv"
                                           ? lasso_cv_baseline(prob, sel)
                                           : lasso_best_baseline(prob, truth, sel);
            rec.support = sr.support;
            rec.gamma_hat = nr.estimate;
        } else {
            GlmLassoOptions go;
            go.grid_count = cfg.grid_count;
            go.grid_ratio = default_grid_ratio(data.n(), data.p() + 1);
            const GlmLassoCv cv = glm_lasso_cv(data, go, seed);
            int pick = cv.index;
            if (method == "lasso_best_glm") {
                double best = -std::numeric_limits<double>::infinity();
                for (std::size_t l = 0; l < cv.path.betas.size(); ++l) {
                    const Rates r = tpr_fpr(true_support(cv.path.betas[l]), truth, p);
                    if (r.tpr - r.fpr > best) {
                        best = r.tpr - r.fpr;
                        pick = static_cast<int>(l);
                    }
                }
            }
            const Vector& beta = cv.path.betas[static_cast<std::size_t>(pick)];
            rec.support = true_support(beta);
        }
        const Rates r = tpr_fpr(rec.support, truth, p);
        rec.tpr = r.tpr;
        rec.fpr = r.fpr;
    } catch (const Error& err) {
        rec.status = to_string(err.kind());
    }
    rec.runtime_s = std::chrono::duration<double>(Clock::now() - start).count();
    return rec;
}

double median(std::vector<double> values) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const auto m = values.size() / 2;
    return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

namespace {

std::pair<double, double> mean_sd(std::vector<double> v) {
    if (v.empty()) return {std::numeric_limits<double>::quiet_NaN(), 0.0};
    std::sort(v.begin(), v.end());
    double sum = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / static_cast<double>(v.size());
    if (v.size() < 2) return {mean, 0.0};
    std::vector<double> dev(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) dev[i] = (v[i] - mean) * (v[i] - mean);
    std::sort(dev.begin(), dev.end());
    double ss = 0.0;
    for (double x : dev) ss += x;
    return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

}  // namespace

std::vector<MetricRow> aggregate(const std::vector<ReplicateRecord>& records,
                                 const ExperimentConfig& cfg) {
    std::vector<MetricRow> rows;
    for (const auto& method : cfg.methods) {
        std::vector<double> tpr, fpr, runtime;
        int failures = 0;
        for (const auto& rec : records) {
            if (rec.method != method) continue;
            if (rec.status != "ok") {
                ++failures;
                continue;
            }
            tpr.push_back(rec.tpr);
            fpr.push_back(rec.fpr);
            runtime.push_back(rec.runtime_s);
        }
        MetricRow row;
        row.method = method;
        std::tie(row.tpr_mean, row.tpr_sd) = mean_sd(tpr);
        std::tie(row.fpr_mean, row.fpr_sd) = mean_sd(fpr);
        row.runtime_s = mean_sd(runtime).first;
        row.n = cfg.n;
        row.q = cfg.q;
        row.sparsity = to_string(cfg.sparsity);
        row.effective_replicates = static_cast<int>(tpr.size());
        row.failures = failures;
        rows.push_back(row);
    }
    return rows;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const Matrix x = fourier_covariates(cfg.n, cfg.p, cfg.f);
    const Vector beta = sparse_beta(cfg.p, cfg.sparsity, cfg.beta0_intercept, cfg.custom_beta);
    const std::vector<int> truth = true_support(beta);
    const GlarmaParams truth_params(beta, cfg.gamma_true);
    const std::size_t per_rep = cfg.methods.size();

    std::vector<ReplicateRecord> records(static_cast<std::size_t>(cfg.replicates) * per_rep);
    parallel_for(cfg.replicates, cfg.threads, [&](int r) {
        const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(r);
        SeriesData data;
        std::string sim_status;
        try {
            data = simulate(truth_params, x, cfg.n, seed);
        } catch (const Error& err) {
            sim_status = to_string(err.kind());
        }
        for (std::size_t m = 0; m < per_rep; ++m) {
            ReplicateRecord rec;
            if (sim_status.empty()) {
                rec = run_method(cfg.methods[m], data, truth, cfg, seed);
            } else {
                rec.method = cfg.methods[m];
                rec.seed = seed;
                rec.status = sim_status;
            }
            rec.replicate = r;
            records[static_cast<std::size_t>(r) * per_rep + m] = std::move(rec);
        }
    });

    ExperimentResult out;
    out.rows = aggregate(records, cfg);
    out.records = std::move(records);
    return out;
}

Vector study_gamma(int q) {
    switch (q) {
        case 1: return (Vector(1) << 0.5).finished();
        case 2: return (Vector(2) << 0.5, 0.25).finished();
        case 3: return (Vector(3) << 0.5, 1.0 / 3.0, 0.25).finished();
        default: throw ConfigError("the gamma study covers q = 1, 2, 3");
    }
}

std::vector<GammaSample> run_gamma_study(const GammaStudyConfig& cfg) {
    if (cfg.replicates < 1) throw ConfigError("replicates must be at least 1");
    struct Case {
        int n, q, index;
    };
    std::vector<Case> cases;
    int index = 0;
    for (int q : cfg.q_values)
        for (int n : cfg.n_values) cases.push_back({n, q, index++});

    const int reps = cfg.replicates;
    std::vector<GammaSample> samples(cases.size() * static_cast<std::size_t>(reps));
    parallel_for(static_cast<int>(samples.size()), cfg.threads, [&](int i) {
        const Case& c = cases[static_cast<std::size_t>(i / reps)];
        const int r = i % reps;
        GammaSample s;
        s.n = c.n;
        s.q = c.q;
        s.replicate = r;
        // Distinct streams per (n, q) cell so cells are independent.
        const std::uint64_t seed = cfg.seed + 1000003ULL * static_cast<std::uint64_t>(c.index) +
                                   static_cast<std::uint64_t>(r);
        try {
            const GlarmaParams truth(Vector::Constant(1, cfg.beta0), study_gamma(c.q));
            const SeriesData data = simulate(truth, intercept_only(c.n), c.n, seed);
            const GlarmaParams start(fit_glm_init(data), Vector::Zero(c.q));
            const NewtonReport nr = newton_full(start, data);
            s.beta0_hat = nr.estimate[0];
            s.gamma_hat = nr.estimate.tail(c.q);
        } catch (const Error& err) {
            s.status = to_string(err.kind());
        }
        samples[static_cast<std::size_t>(i)] = std::move(s);
    });
    return samples;
}

}  // namespace sglarma
