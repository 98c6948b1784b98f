#include "sglarma/pipeline.hpp"

#include "sglarma/errors.hpp"

#include <string>

namespace sglarma {

void PipelineConfig::validate() const {
    if (q < 1) throw ConfigError("the pipeline needs q >= 1");
    if (max_outer_iters < 1) throw ConfigError("max_outer_iters must be at least 1");
    if (!(gamma_stab_tol > 0.0)) throw ConfigError("gamma_stab_tol must be positive");
    selection.validate();
    newton.validate();
}

namespace {

// Rethrows a library error with the outer iteration attached.
[[noreturn]] void annotate(const Error& err, int k) {
    const std::string msg = "outer iteration " + std::to_string(k) + ": " + err.what();
    switch (err.kind()) {
        case ErrorKind::Overflow: throw OverflowGuard(msg);
        case ErrorKind::NonFiniteCurvature: throw NonFiniteCurvature(msg);
        case ErrorKind::IndefiniteHessian: throw IndefiniteHessian(msg);
        case ErrorKind::SingularSystem: throw SingularSystem(msg);
        case ErrorKind::NoConvergence: throw NoConvergence(msg);
        case ErrorKind::Separation: throw Separation(msg);
        case ErrorKind::DegenerateProblem: throw DegenerateProblem(msg);
        case ErrorKind::SubsampleTooSmall: throw SubsampleTooSmall(msg);
        default: throw Error(err.kind(), msg);
    }
}

}  // namespace

PipelineResult run_pipeline(const SeriesData& data, const PipelineConfig& cfg) {
    cfg.validate();
    data.validate();

    PipelineResult result;
    try {
        result.beta_init = fit_glm_init(data, cfg.glm);
    } catch (const Error& err) {
        annotate(err, 0);
    }

    SelectionConfig sel = cfg.selection;
    if (cfg.auto_grid_ratio) sel.grid_ratio = default_grid_ratio(data.n(), data.p() + 1);

    Vector beta = result.beta_init;
    Vector gamma = Vector::Zero(cfg.q);
    for (int k = 1; k <= cfg.max_outer_iters; ++k) {
        try {
            OuterIteration it;
            const NewtonReport nr = newton_gamma(beta, data, cfg.q, cfg.newton,
                                                 k == 1 ? std::nullopt : std::optional<Vector>(gamma));
            it.gamma = nr.estimate;
            it.newton_iterations = nr.iterations;

            const PseudoProblem prob = build_pseudo_problem(beta, it.gamma, data, cfg.pseudo,
                                                            cfg.newton.likelihood);
            sel.seed = cfg.selection.seed + static_cast<std::uint64_t>(k);
            SelectionResult sr = select(prob, sel);

            it.support = sr.support;
            it.frequencies = sr.frequencies;
            it.lambda_used = sr.lambda_used;
            it.beta_hat = sr.support.empty() ? refit_support(prob, {0}) : sr.beta_hat;
            it.loglik = log_likelihood(GlarmaParams(it.beta_hat, it.gamma), data,
                                       cfg.newton.likelihood.w_cap);

            const double gamma_change = (it.gamma - gamma).lpNorm<Eigen::Infinity>();
            beta = it.beta_hat;
            gamma = it.gamma;
            result.history.push_back(std::move(it));
            result.outer_iters = k;
            if (k > 1 && gamma_change < cfg.gamma_stab_tol) {
                result.stabilized = true;
                break;
            }
        } catch (const Error& err) {
            annotate(err, k);
        }
    }

    result.beta_hat = beta;
    result.gamma_hat = gamma;
    result.support = result.history.back().support;
    return result;
}

}  // namespace sglarma
