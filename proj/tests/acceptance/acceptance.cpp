// Acceptance checks, one PASS/FAIL line per criterion.
//
//   sglarma_acceptance --cli <path to sglarma> [--criterion N ...] [--work DIR]
//
// Exit status is 0 only when every selected criterion passes.

#include "../unit/oracles.hpp"

#include "sglarma/bench.hpp"
#include "sglarma/errors.hpp"
#include "sglarma/estimation.hpp"
#include "sglarma/io.hpp"
#include "sglarma/likelihood.hpp"
#include "sglarma/pipeline.hpp"
#include "sglarma/quad_lasso.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace sglarma;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

// Normwise relative error, no floor.
double rel(const Matrix& got, const Matrix& want) {
    return (got - want).cwiseAbs().maxCoeff() / want.cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------- 1

Outcome derivative_exactness() {
    const auto t0 = Clock::now();
    std::mt19937_64 g(20240601);
    std::uniform_int_distribution<int> n_d(10, 50), p_d(0, 5), q_d(1, 3);
    std::uniform_real_distribution<double> u(-1, 1);
    double worst_g = 0, worst_h = 0;
    int made = 0, attempts = 0;
    while (made < 25) {
        ++attempts;
        const int n = n_d(g), p = p_d(g), q = q_d(g);
        Matrix x(n, p + 1);
        x.col(0).setOnes();
        for (int k = 1; k <= p; ++k)
            for (int t = 0; t < n; ++t) x(t, k) = u(g);
        Vector beta(p + 1), gamma(q);
        beta[0] = 1.5 + 0.5 * u(g);
        for (int k = 1; k <= p; ++k) beta[k] = 0.4 * u(g);
        for (int l = 0; l < q; ++l) gamma[l] = 0.3 * u(g);
        SeriesData d;
        try {
            d = simulate(GlarmaParams(beta, gamma), x, n, g());
        } catch (const Error&) {
            continue;
        }
        // Evaluate away from the generating point.
        Vector delta = GlarmaParams(beta, gamma).delta();
        for (int i = 0; i < delta.size(); ++i) delta[i] += 0.2 * u(g);
        const oracle::Path path = oracle::state_path(oracle::to_std(delta.head(p + 1)), oracle::to_std(delta.tail(q)), x,
                                                     oracle::to_std(d.y));
        double wmax = 0;
        for (double w : path.w) wmax = std::max(wmax, std::fabs(w));
        if (!(wmax < 30)) continue;

        auto f = [&](const Vector& v) { return oracle::loglik_flat(v, q, x, d.y); };
        const GlarmaParams at = GlarmaParams::from_delta(delta, q);
        const Vector grad = gradient(at, d);
        worst_g = std::max(worst_g, rel(grad, oracle::fd_gradient(f, delta)));
        auto grad_at = [&](const Vector& v) { return gradient(GlarmaParams::from_delta(v, q), d); };
        worst_h = std::max(worst_h, rel(hessian(at, d), oracle::fd_jacobian(grad_at, delta)));
        ++made;
    }
    const double secs = since(t0);
    Outcome o;
    o.pass = worst_g < 1e-6 && worst_h < 1e-5 && secs < 10;
    o.detail = "25 instances (" + std::to_string(attempts) + " drawn): max gradient rel err " + fmt(worst_g) +
               " (< 1e-6), max Hessian rel err " + fmt(worst_h) + " (< 1e-5), " + fmt(secs) + " s (< 10 s)";
    return o;
}

// ---------------------------------------------------------------- 2

Outcome quadratic_identity() {
    const int n = 1000, p = 100;
    const Matrix x = fourier_covariates(n, p, 0.7);
    const Vector beta = sparse_beta(p, Sparsity::FivePct, 3.0);
    const SeriesData d = simulate(GlarmaParams(beta, Vector::Constant(1, 0.5)), x, n, 77);
    const Vector b0 = fit_glm_init(d);
    const Vector gam = newton_gamma(b0, d, 1).estimate;
    const PseudoProblem pp = build_pseudo_problem(b0, gam, d);
    // Taylor model from the likelihood module directly.
    const BetaBlock bb = beta_block(GlarmaParams(b0, gam), d);

    std::mt19937_64 g(5);
    std::normal_distribution<double> nd;
    const double base = 0.5 * (pp.Y - pp.X * b0).squaredNorm();
    double worst = 0;
    for (int r = 0; r < 50; ++r) {
        Vector db(p + 1);
        for (int k = 0; k <= p; ++k) db[k] = 0.05 * nd(g);
        const Vector b = b0 + db;
        const double lhs = 0.5 * (pp.Y - pp.X * b).squaredNorm() - base;
        const double rhs = -(bb.grad_beta.dot(db) - 0.5 * db.dot(bb.neg_hess_beta * db));
        worst = std::max(worst, std::fabs(lhs - rhs) / std::max(std::fabs(lhs), std::fabs(rhs)));
    }
    Outcome o;
    o.pass = worst < 1e-8;
    o.detail = "50 random beta around beta0 on an n = 1000, p = 100 series: max rel deviation " + fmt(worst) +
               " (< 1e-8), floored eigenvalues " + std::to_string(pp.dropped.size());
    return o;
}

// ---------------------------------------------------------------- 3

Outcome lasso_oracle() {
    std::mt19937_64 g(99);
    std::uniform_int_distribution<int> dim_d(5, 50);
    std::uniform_real_distribution<double> frac(0.02, 0.5);
    double worst_obj = 0, worst_kkt = 0;
    int support_mismatch = 0;
    for (int i = 0; i < 20; ++i) {
        const int d = dim_d(g);
        const Matrix a = oracle::random_matrix(d + 10, d, g);
        const PseudoProblem pp = pseudo_from_curvature(oracle::random_vector(d, g), 3.0 * oracle::random_vector(d, g),
                                                       Matrix(a.transpose() * a));
        const double lambda = frac(g) * lambda_max(pp);
        const LassoFit fit = lasso_cd(pp, lambda);
        Vector ref = oracle::fista(pp.X, pp.Y, lambda, 200000);
        ref = oracle::ista(pp.X, pp.Y, lambda, ref, 20000);
        const double fo = oracle::lasso_objective(pp.X, pp.Y, fit.beta, lambda);
        const double ro = oracle::lasso_objective(pp.X, pp.Y, ref, lambda);
        worst_obj = std::max(worst_obj, std::fabs(fo - ro) / std::fabs(ro));
        for (int j = 0; j < d; ++j) support_mismatch += (fit.beta[j] != 0) != (ref[j] != 0);
        // KKT residual recomputed here rather than trusting the solver's report.
        const Vector corr = pp.X.transpose() * (pp.Y - pp.X * fit.beta);
        double kkt = 0;
        for (int j = 0; j < d; ++j)
            kkt = std::max(kkt, fit.beta[j] != 0 ? std::fabs(corr[j] - lambda * (fit.beta[j] > 0 ? 1 : -1))
                                                 : std::max(0.0, std::fabs(corr[j]) - lambda));
        worst_kkt = std::max(worst_kkt, kkt / (1 + lambda));
    }
    Outcome o;
    o.pass = worst_obj <= 1e-8 && support_mismatch == 0 && worst_kkt <= 1e-6;
    o.detail = "20 problems (dim 5..50): max objective rel gap " + fmt(worst_obj) + " (<= 1e-8), support mismatches " +
               std::to_string(support_mismatch) + " (0), max KKT/(1+lambda) " + fmt(worst_kkt) + " (<= 1e-6)";
    return o;
}

// ---------------------------------------------------------------- 4

Outcome gamma_consistency() {
    const auto t0 = Clock::now();
    GammaStudyConfig cfg;
    cfg.n_values = {50, 250, 1000};
    cfg.q_values = {1};
    cfg.beta0 = 3.0;
    cfg.replicates = 100;
    cfg.seed = 4;
    const std::vector<GammaSample> samples = run_gamma_study(cfg);
    std::vector<double> med;
    std::string per_n;
    int failures = 0;
    for (int n : cfg.n_values) {
        std::vector<double> err;
        for (const auto& s : samples) {
            if (s.n != n) continue;
            if (s.status != "ok") {
                ++failures;
                continue;
            }
            err.push_back(std::fabs(s.gamma_hat[0] - 0.5));
        }
        med.push_back(median(err));
        per_n += (per_n.empty() ? "" : ", ") + std::string("n=") + std::to_string(n) + ": " + fmt(med.back());
    }
    const double secs = since(t0);
    Outcome o;
    o.pass = med[0] > med[1] && med[1] > med[2] && med[2] < 0.05 && secs < 300;
    o.detail = "median |gamma_1 - 0.5| " + per_n + " (strictly decreasing, last < 0.05), failed fits " +
               std::to_string(failures) + ", " + fmt(secs) + " s (< 300 s)";
    return o;
}

// ---------------------------------------------------------------- 5 and 6

// Run once per process and shared by criteria 5 and 6. Replicates are
// seeded per replicate, so a run with fewer methods gives the same records
// for the methods it has.
std::optional<ExperimentResult> bench_cache;
std::vector<std::string> bench_methods;

const ExperimentResult& benchmark(const std::vector<std::string>& methods) {
    const bool covered = bench_cache && std::all_of(methods.begin(), methods.end(), [](const std::string& m) {
        return std::find(bench_methods.begin(), bench_methods.end(), m) != bench_methods.end();
    });
    if (!covered) {
        ExperimentConfig cfg;
        cfg.n = 1000;
        cfg.p = 100;
        cfg.q = 1;
        cfg.sparsity = Sparsity::FivePct;
        cfg.replicates = 20;
        cfg.methods = methods;
        cfg.seed = 20240101;
        const auto t0 = Clock::now();
        bench_cache = run_experiment(cfg);
        bench_methods = methods;
        std::cerr << "benchmark: " << fmt(since(t0)) << " s\n";
    }
    return *bench_cache;
}

const std::vector<std::string> kTableMethods{"ss_min", "fast_ss", "lasso_cv_glm", "lasso_cv"};

double bench_seconds = 0;

const MetricRow& row_for(const ExperimentResult& r, const std::string& m) {
    for (const auto& row : r.rows)
        if (row.method == m) return row;
    throw std::runtime_error("missing method " + m);
}

std::string rates(const MetricRow& r) {
    return "TPR " + fmt(r.tpr_mean) + " FPR " + fmt(r.fpr_mean) +
           (r.failures ? " (" + std::to_string(r.failures) + " failed)" : std::string());
}

Outcome table_reproduction() {
    const auto t0 = Clock::now();
    const ExperimentResult& res = benchmark(kTableMethods);
    bench_seconds = since(t0);
    const MetricRow& ss_min = row_for(res, "ss_min");
    const MetricRow& fast = row_for(res, "fast_ss");
    const MetricRow& lasso = row_for(res, "lasso_cv_glm");
    const MetricRow& lasso_pseudo = row_for(res, "lasso_cv");
    const bool ok_min = ss_min.tpr_mean >= 0.98 && ss_min.fpr_mean <= 0.02 && ss_min.effective_replicates == 20;
    const bool ok_fast = fast.tpr_mean >= 0.95 && fast.fpr_mean <= 0.03 && fast.effective_replicates == 20;
    const bool ok_tpr = lasso.tpr_mean >= 0.7 && lasso.tpr_mean <= 0.9;
    const bool ok_fpr = lasso.fpr_mean >= 0.2;
    Outcome o;
    o.pass = ok_min && ok_fast && ok_tpr && ok_fpr && bench_seconds < 3600;
    o.detail = "ss_min " + rates(ss_min) + (ok_min ? " ok" : " FAIL") + "; fast_ss " + rates(fast) +
               (ok_fast ? " ok" : " FAIL") + "; lasso_cv (GLM lasso on raw data) " + rates(lasso) +
               " [TPR in 0.7..0.9 " + (ok_tpr ? "ok" : "FAIL") + ", FPR >= 0.2 " + (ok_fpr ? "ok" : "FAIL") +
               "]; pseudo-problem lasso_cv " + rates(lasso_pseudo) + " (informational); " + fmt(bench_seconds) +
               " s (< 3600 s)";
    return o;
}

Outcome stabilization() {
    const ExperimentResult& res = benchmark({"ss_min"});
    std::vector<const ReplicateRecord*> runs;
    for (const auto& r : res.records)
        if (r.method == "ss_min" && r.status == "ok") runs.push_back(&r);
    int max_iter = 0;
    for (const auto* r : runs) max_iter = std::max(max_iter, static_cast<int>(r->gamma_history.size()));
    bool within = true;
    std::string meds;
    for (int k = 2; k <= max_iter; ++k) {
        std::vector<double> v;
        for (const auto* r : runs)
            if (static_cast<int>(r->gamma_history.size()) >= k) v.push_back(r->gamma_history[k - 1][0]);
        const double m = median(v);
        within = within && std::fabs(m - 0.5) <= 0.1;
        meds += (meds.empty() ? "" : ", ") + std::string("k=") + std::to_string(k) + ": " + fmt(m);
    }
    int stable6 = 0;
    for (const auto* r : runs) stable6 += r->stabilized && r->outer_iters <= 6;
    const double share = runs.empty() ? 0.0 : double(stable6) / 20.0;
    Outcome o;
    o.pass = within && share >= 0.9 && max_iter >= 2;
    o.detail = "median gamma_1 per outer iteration " + meds + " (each within 0.5 +- 0.1); stabilized within 6 iterations " +
               std::to_string(stable6) + "/20 (>= 90%)";
    return o;
}

// ---------------------------------------------------------------- 7

Outcome timing() {
    const int n = 1000, p = 100;
    const Matrix x = fourier_covariates(n, p, 0.7);
    const SeriesData d = simulate(GlarmaParams(sparse_beta(p, Sparsity::FivePct, 3.0), Vector::Constant(1, 0.5)), x, n, 7);
    PipelineConfig cfg;
    cfg.q = 1;
    cfg.max_outer_iters = 1;
    cfg.selection.method = Method::SsMin;
    cfg.selection.threshold = 0.8;
    cfg.selection.n_subsamples = 1000;
    cfg.selection.threads = 1;
    const auto t0 = Clock::now();
    const PipelineResult r = run_pipeline(d, cfg);
    const double secs = since(t0);
    Outcome o;
    o.pass = secs <= 300 && r.outer_iters == 1;
    o.detail = "ss_min, n = 1000, p = 100, 1000 subsamples, one outer iteration, one thread: " + fmt(secs) +
               " s (<= 300 s)";
    return o;
}

// ---------------------------------------------------------------- 8

int run(const std::string& cmd) {
    const int rc = std::system((cmd + " > /dev/null 2>&1").c_str());
    return rc;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

Outcome determinism(const std::string& cli, const fs::path& work) {
    fs::remove_all(work);
    fs::create_directories(work);
    io::write_text((work / "bench.json").string(),
                   R"({"n": 300, "p": 50, "replicates": 2, "methods": ["ss_min", "fast_ss", "ss_cv", "lasso_cv", "lasso_best", "lasso_cv_glm", "lasso_best_glm"], "n_subsamples": 30, "seed": 3})");
    io::write_text((work / "gamma.json").string(),
                   R"({"kind": "gamma_study", "n_values": [50, 200], "q_values": [1, 2], "replicates": 5, "seed": 2})");
    const fs::path out = work / "out";
    const std::vector<std::string> cmds{
        "simulate --n 400 --beta " + q(work / "beta.txt") +
            " --gamma 0.4 --covariates fourier:50,0.7 --seed 11 --out " + q(out / "sim.csv"),
        "simulate --n 100 --beta 3 --gamma 0.5 --seed 1 --out " + q(out / "s.csv"),
        "select --series " + q(out / "sim.csv") + " --covariates " + q(out / "sim_covariates.csv") +
            " --q 1 --method ss_min --subsamples 40 --seed 5 --out-prefix " + q(out / "sel_min"),
        "select --series " + q(out / "sim.csv") + " --covariates " + q(out / "sim_covariates.csv") +
            " --q 1 --method fast_ss --seed 5 --threads 2 --out-prefix " + q(out / "sel_fast"),
        "select --series " + q(out / "sim.csv") + " --covariates " + q(out / "sim_covariates.csv") +
            " --q 1 --method ss_cv --subsamples 40 --seed 5 --out-prefix " + q(out / "sel_cv"),
        "bench --config " + q(work / "bench.json") + " --out-dir " + q(out / "bench"),
        "bench --config " + q(work / "gamma.json") + " --out-dir " + q(out / "gamma"),
    };
    {
        std::string b;
        for (double v : sparse_beta(50, Sparsity::FivePct, 3.0)) b += io::format_double(v) + "\n";
        io::write_text((work / "beta.txt").string(), b);
    }

    auto run_all = [&]() {
        for (const auto& c : cmds)
            if (run(q(cli) + " " + c) != 0) return c;
        return std::string();
    };
    auto snapshot = [&]() {
        std::vector<std::pair<std::string, std::string>> files;
        for (const auto& e : fs::recursive_directory_iterator(out))
            if (e.is_regular_file() && e.path().filename() != "timing.json" &&
                e.path().filename().string().find("timing.json") == std::string::npos)
                files.emplace_back(fs::relative(e.path(), out).string(), io::read_file(e.path().string()));
        std::sort(files.begin(), files.end());
        return files;
    };

    Outcome o;
    if (const std::string bad = run_all(); !bad.empty()) {
        o.detail = "command failed: " + bad;
        return o;
    }
    const auto first = snapshot();
    fs::remove_all(out);
    if (const std::string bad = run_all(); !bad.empty()) {
        o.detail = "command failed on rerun: " + bad;
        return o;
    }
    const auto second = snapshot();
    int differing = 0;
    std::string names;
    if (first.size() != second.size()) differing = -1;
    else
        for (std::size_t i = 0; i < first.size(); ++i)
            if (first[i] != second[i]) {
                ++differing;
                names += " " + first[i].first;
            }
    o.pass = differing == 0 && !first.empty();
    o.detail = std::to_string(cmds.size()) + " commands run twice, " + std::to_string(first.size()) +
               " output files compared (timing files excluded): " +
               (differing == 0 ? std::string("all byte-identical") : std::to_string(differing) + " differ:" + names);
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    std::string cli;
    fs::path work = fs::temp_directory_path() / "sglarma_acceptance";
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--cli" && i + 1 < argc) cli = argv[++i];
        else if (a == "--work" && i + 1 < argc) work = argv[++i];
        else if (a == "--criterion" && i + 1 < argc) only.insert(std::atoi(argv[++i]));
        else {
            std::cerr << "usage: " << argv[0] << " --cli PATH [--criterion N]... [--work DIR]\n";
            return 2;
        }
    }

    struct Entry {
        int id;
        const char* name;
        std::function<Outcome()> check;
    };
    const std::vector<Entry> all{
        {1, "derivative exactness", derivative_exactness},
        {2, "quadratic-approximation identity", quadratic_identity},
        {3, "lasso solver oracle", lasso_oracle},
        {4, "gamma consistency direction", gamma_consistency},
        {5, "benchmark TPR/FPR reproduction", table_reproduction},
        {6, "pipeline stabilization", stabilization},
        {7, "timing", timing},
        {8, "determinism", [&] { return determinism(cli, work); }},
    };

    int failed = 0;
    for (const auto& e : all) {
        if (!only.empty() && !only.count(e.id)) continue;
        Outcome o;
        try {
            if (e.id == 8 && cli.empty()) o.detail = "no --cli given";
            else o = e.check();
        } catch (const std::exception& ex) {
            o.pass = false;
            o.detail = std::string("exception: ") + ex.what();
        }
        failed += !o.pass;
        std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << "criterion " << e.id << " (" << e.name << "): " << o.detail
                  << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
