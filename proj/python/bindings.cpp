#include "sglarma/bench.hpp"
#include "sglarma/errors.hpp"
#include "sglarma/estimation.hpp"
#include "sglarma/io.hpp"
#include "sglarma/likelihood.hpp"
#include "sglarma/pipeline.hpp"
#include "sglarma/quad_lasso.hpp"
#include "sglarma/selection.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

namespace py = pybind11;
using namespace sglarma;

namespace {

SeriesData series(const Vector& y, const Matrix& x) {
    SeriesData d(y, x);
    d.validate();
    return d;
}

GlarmaParams params(const Vector& beta, const Vector& gamma) {
    GlarmaParams p(beta, gamma);
    p.validate();
    return p;
}

py::dict pseudo_dict(const PseudoProblem& pp) {
    py::dict out;
    out["X"] = pp.X;
    out["Y"] = pp.Y;
    out["lambda_diag"] = pp.lambda_diag;
    out["dropped"] = pp.dropped;
    return out;
}

py::dict record_dict(const ReplicateRecord& r) {
    py::dict out;
    out["replicate"] = r.replicate;
    out["seed"] = r.seed;
    out["method"] = r.method;
    out["status"] = r.status;
    out["tpr"] = r.tpr;
    out["fpr"] = r.fpr;
    out["support"] = r.support;
    out["gamma_hat"] = r.gamma_hat;
    out["gamma_history"] = r.gamma_history;
    out["outer_iters"] = r.outer_iters;
    out["stabilized"] = r.stabilized;
    return out;
}

py::dict row_dict(const MetricRow& r) {
    py::dict out;
    out["method"] = r.method;
    out["n"] = r.n;
    out["q"] = r.q;
    out["sparsity"] = r.sparsity;
    out["tpr_mean"] = r.tpr_mean;
    out["tpr_sd"] = r.tpr_sd;
    out["fpr_mean"] = r.fpr_mean;
    out["fpr_sd"] = r.fpr_sd;
    out["runtime_s"] = r.runtime_s;
    out["effective_replicates"] = r.effective_replicates;
    out["failures"] = r.failures;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Sparse GLARMA variable selection";
    m.attr("__version__") = io::library_version();

    // One Python class per error kind, all deriving from sglarma.Error.
    static py::exception<Error> base(m, "Error");
    auto kind = [&](const char* name) { return py::exception<Error>(m, name, base.ptr()); };
    static py::exception<Error> overflow = kind("OverflowGuard");
    static py::exception<Error> nonfinite = kind("NonFiniteCurvature");
    static py::exception<Error> indefinite = kind("IndefiniteHessian");
    static py::exception<Error> singular = kind("SingularSystem");
    static py::exception<Error> noconv = kind("NoConvergence");
    static py::exception<Error> separation = kind("Separation");
    static py::exception<Error> degenerate = kind("DegenerateProblem");
    static py::exception<Error> subsample = kind("SubsampleTooSmall");
    static py::exception<Error> oracle = kind("MissingOracle");
    static py::exception<Error> config = kind("ConfigError");
    static py::exception<Error> ioerr = kind("IoError");
    static py::exception<Error> usage = kind("UsageError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::exception<Error>* target = &base;
            switch (e.kind()) {
                case ErrorKind::Overflow: target = &overflow; break;
                case ErrorKind::NonFiniteCurvature: target = &nonfinite; break;
                case ErrorKind::IndefiniteHessian: target = &indefinite; break;
                case ErrorKind::SingularSystem: target = &singular; break;
                case ErrorKind::NoConvergence: target = &noconv; break;
                case ErrorKind::Separation: target = &separation; break;
                case ErrorKind::DegenerateProblem: target = &degenerate; break;
                case ErrorKind::SubsampleTooSmall: target = &subsample; break;
                case ErrorKind::MissingOracle: target = &oracle; break;
                case ErrorKind::Config: target = &config; break;
                case ErrorKind::Io: target = &ioerr; break;
                case ErrorKind::Usage: target = &usage; break;
            }
            PyErr_SetString(target->ptr(), e.what());
        }
    });

    m.def("fourier_covariates", &fourier_covariates, py::arg("n"), py::arg("p"), py::arg("f") = 0.7,
          "n x (p+1) design: intercept, cosine columns up to p/2, then sine columns.");
    m.def(
        "sparse_beta",
        [](int p, const std::string& sparsity, double intercept) {
            return sparse_beta(p, parse_sparsity(sparsity), intercept);
        },
        py::arg("p"), py::arg("sparsity") = "5", py::arg("intercept") = 3.0);
    m.def("true_support", &true_support, py::arg("beta"));

    m.def(
        "simulate",
        [](const Vector& beta, const Vector& gamma, const Matrix& x, int n, std::uint64_t seed) {
            return simulate(params(beta, gamma), x, n, seed).y;
        },
        py::arg("beta"), py::arg("gamma"), py::arg("x"), py::arg("n"), py::arg("seed"),
        "Simulated counts y_1..y_n.");

    m.def(
        "log_likelihood",
        [](const Vector& beta, const Vector& gamma, const Vector& y, const Matrix& x) {
            return log_likelihood(params(beta, gamma), series(y, x));
        },
        py::arg("beta"), py::arg("gamma"), py::arg("y"), py::arg("x"));
    m.def(
        "gradient",
        [](const Vector& beta, const Vector& gamma, const Vector& y, const Matrix& x) {
            return gradient(params(beta, gamma), series(y, x));
        },
        py::arg("beta"), py::arg("gamma"), py::arg("y"), py::arg("x"), "Gradient in (beta, gamma).");
    m.def(
        "hessian",
        [](const Vector& beta, const Vector& gamma, const Vector& y, const Matrix& x) {
            return hessian(params(beta, gamma), series(y, x));
        },
        py::arg("beta"), py::arg("gamma"), py::arg("y"), py::arg("x"));

    m.def(
        "fit_glm_init",
        [](const Vector& y, const Matrix& x) { return fit_glm_init(series(y, x)); }, py::arg("y"),
        py::arg("x"), "Poisson GLM start; ridge-penalized when p + 1 >= n.");
    m.def(
        "newton_gamma",
        [](const Vector& beta, const Vector& y, const Matrix& x, int q) {
            const NewtonReport r = newton_gamma(beta, series(y, x), q);
            py::dict out;
            out["estimate"] = r.estimate;
            out["iterations"] = r.iterations;
            out["converged"] = r.converged;
            return out;
        },
        py::arg("beta"), py::arg("y"), py::arg("x"), py::arg("q"));

    m.def(
        "pseudo_problem",
        [](const Vector& beta0, const Vector& gamma, const Vector& y, const Matrix& x) {
            return pseudo_dict(build_pseudo_problem(beta0, gamma, series(y, x)));
        },
        py::arg("beta0"), py::arg("gamma"), py::arg("y"), py::arg("x"),
        "Least-squares form of the quadratic model of L in beta around beta0.");

    m.def(
        "lasso",
        [](const Matrix& X, const Vector& Y, double lambda, bool penalize_intercept) {
            LassoOptions opts;
            opts.penalize_intercept = penalize_intercept;
            const LassoFit f = LassoSolver(X, Y, opts).solve(lambda);
            py::dict out;
            out["beta"] = f.beta;
            out["objective"] = f.objective;
            out["kkt_violation"] = f.kkt_violation;
            out["sweeps"] = f.sweeps;
            return out;
        },
        py::arg("X"), py::arg("Y"), py::arg("lam"), py::arg("penalize_intercept") = true,
        "Minimizes 1/2 ||Y - X b||^2 + lam ||b||_1 by coordinate descent.");

    m.def(
        "run_pipeline",
        [](const Vector& y, const Matrix& x, int q, const std::string& method, std::optional<double> threshold,
           int n_subsamples, std::uint64_t seed, int max_outer_iters, int threads) {
            PipelineConfig cfg;
            cfg.q = q;
            cfg.selection.method = parse_method(method);
            cfg.selection.threshold = threshold.value_or(default_threshold(cfg.selection.method));
            cfg.selection.n_subsamples = n_subsamples;
            cfg.selection.seed = seed;
            cfg.selection.threads = threads;
            cfg.max_outer_iters = max_outer_iters;
            PipelineResult r;
            {
                py::gil_scoped_release release;
                r = run_pipeline(series(y, x), cfg);
            }
            py::dict out;
            out["beta_hat"] = r.beta_hat;
            out["gamma_hat"] = r.gamma_hat;
            out["support"] = r.support;
            out["frequencies"] = r.history.back().frequencies;
            std::vector<Vector> gammas;
            for (const auto& h : r.history) gammas.push_back(h.gamma);
            out["gamma_history"] = gammas;
            out["outer_iters"] = r.outer_iters;
            out["stabilized"] = r.stabilized;
            return out;
        },
        py::arg("y"), py::arg("x"), py::arg("q") = 1, py::arg("method") = "ss_min",
        py::arg("threshold") = py::none(), py::arg("n_subsamples") = 1000, py::arg("seed") = 1,
        py::arg("max_outer_iters") = 10, py::arg("threads") = 1);

    m.def(
        "tpr_fpr",
        [](const std::vector<int>& est, const std::vector<int>& truth, int p) {
            const Rates r = tpr_fpr(est, truth, p);
            return py::make_tuple(r.tpr, r.fpr);
        },
        py::arg("estimated"), py::arg("truth"), py::arg("p"));

    m.def(
        "_run_experiment",
        [](const std::string& config_json) {
            const ExperimentConfig cfg = io::experiment_from_json(io::Json::parse(config_json));
            ExperimentResult res;
            {
                py::gil_scoped_release release;
                res = run_experiment(cfg);
            }
            py::list rows, records;
            for (const auto& r : res.rows) rows.append(row_dict(r));
            for (const auto& r : res.records) records.append(record_dict(r));
            py::dict out;
            out["rows"] = rows;
            out["records"] = records;
            return out;
        },
        py::arg("config_json"));
}
