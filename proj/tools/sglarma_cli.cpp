// Command-line front end: simulate, select, bench.

#include "sglarma/bench.hpp"
#include "sglarma/errors.hpp"
#include "sglarma/io.hpp"
#include "sglarma/parallel.hpp"
#include "sglarma/pipeline.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace sglarma;
using io::Json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// "s.csv" -> "s" so companion files land next to the main output.
std::string stem_of(const std::string& path) {
    const fs::path p(path);
    return (p.parent_path() / p.stem()).string();
}

void ensure_parent(const std::string& path) {
    const fs::path parent = fs::path(path).parent_path();
    if (parent.empty()) return;
    std::error_code ec;
    fs::create_directories(parent, ec);
    if (ec) throw IoError("cannot create directory '" + parent.string() + "': " + ec.message());
}

void write_manifest(const std::string& stem, io::RunManifest manifest, double wall_time) {
    manifest.library_version = io::library_version();
    io::write_json(stem + "manifest.json", manifest.to_json());
    Json timing;
    timing["command"] = manifest.command;
    timing["wall_time_s"] = wall_time;
    io::write_json(stem + "timing.json", timing);
}

struct Covariates {
    Matrix x;
    std::vector<std::string> notes;
};

Covariates load_covariates(const std::string& arg, int n) {
    Covariates c;
    if (arg.empty()) {
        c.x = intercept_only(n);
        return c;
    }
    if (arg.rfind("fourier:", 0) == 0) {
        const std::string body = arg.substr(8);
        const auto comma = body.find(',');
        if (comma == std::string::npos) throw UsageError("expected fourier:p,f, got '" + arg + "'");
        long long p = 0;
        double f = 0.0;
        try {
            p = io::parse_int(body.substr(0, comma));
            f = io::parse_double(body.substr(comma + 1));
        } catch (const IoError&) {
            throw UsageError("expected fourier:p,f, got '" + arg + "'");
        }
        if (p < 1) throw UsageError("fourier covariates need p >= 1");
        c.x = fourier_covariates(n, static_cast<int>(p), f);
        return c;
    }
    io::Covariates file = io::read_covariates_csv(arg);
    if (file.intercept_prepended)
        c.notes.push_back("covariate file has no 'intercept' column; a ones column was prepended");
    if (n >= 0 && file.x.rows() != n)
        throw UsageError("covariate file has " + std::to_string(file.x.rows()) + " rows, expected " +
                         std::to_string(n));
    c.x = std::move(file.x);
    return c;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    int n = 0;
    std::optional<int> q;
    std::string beta = "0";
    std::string gamma;
    std::string covariates;
    std::uint64_t seed = 1;
    std::string out;
    std::string covariates_out;
};

void run_simulate(const SimulateArgs& a, const std::string& command_line) {
    const auto start = Clock::now();
    if (a.n < 1) throw UsageError("--n must be at least 1");
    const Vector gamma = a.gamma.empty() ? Vector() : io::parse_vector_arg(a.gamma);
    const int q = a.q.value_or(static_cast<int>(gamma.size()));
    if (q < 0) throw UsageError("--q must be nonnegative");
    if (a.gamma.empty() && q > 0) throw UsageError("--q " + std::to_string(q) + " needs --gamma with " + std::to_string(q) + " values");
    if (gamma.size() != q)
        throw UsageError("--gamma has " + std::to_string(gamma.size()) + " values but --q is " +
                         std::to_string(q));

    Covariates cov = load_covariates(a.covariates, a.n);
    const Vector beta = io::parse_vector_arg(a.beta);
    if (beta.size() != cov.x.cols())
        throw UsageError("--beta has " + std::to_string(beta.size()) + " values but the design has " +
                         std::to_string(cov.x.cols()) + " columns (intercept included)");

    const GlarmaParams params(beta, gamma);
    params.validate();
    const SeriesData data = simulate(params, cov.x, a.n, a.seed);

    ensure_parent(a.out);
    io::write_series_csv(a.out, data.y);
    io::RunManifest m;
    m.command = "simulate";
    m.seed = a.seed;
    m.notes = cov.notes;
    if (a.covariates.rfind("fourier:", 0) == 0) {
        const std::string cov_out = a.covariates_out.empty() ? stem_of(a.out) + "_covariates.csv" : a.covariates_out;
        ensure_parent(cov_out);
        io::write_covariates_csv(cov_out, cov.x);
        m.args["covariates_out"] = cov_out;
    }
    m.args["n"] = a.n;
    m.args["q"] = q;
    m.args["beta"] = a.beta;
    m.args["gamma"] = a.gamma;
    m.args["covariates"] = a.covariates;
    m.args["seed"] = a.seed;
    m.args["out"] = a.out;
    m.args["command_line"] = command_line;
    m.config_hash = io::sha256_hex(m.args.dump());
    write_manifest(stem_of(a.out) + ".", m, seconds_since(start));
}

// ------------------------------------------------------------------ select

struct SelectArgs {
    std::string series;
    std::string covariates;
    int q = 1;
    std::string method = "ss_min";
    std::optional<double> threshold;
    int subsamples = 1000;
    std::uint64_t seed = 1;
    std::string out_prefix;
    int threads = 1;
    int max_outer_iters = 10;
};

void run_select(const SelectArgs& a, const std::string& command_line) {
    const auto start = Clock::now();
    const Vector y = io::read_series_csv(a.series);
    Covariates cov = load_covariates(a.covariates, static_cast<int>(y.size()));
    const SeriesData data(y, cov.x);
    data.validate();

    PipelineConfig cfg;
    cfg.q = a.q;
    cfg.max_outer_iters = a.max_outer_iters;
    cfg.selection.method = parse_method(a.method);
    cfg.selection.threshold = a.threshold.value_or(default_threshold(cfg.selection.method));
    cfg.selection.n_subsamples = a.subsamples;
    cfg.selection.seed = a.seed;
    cfg.selection.threads = resolve_threads(a.threads);
    const PipelineResult res = run_pipeline(data, cfg);

    ensure_parent(a.out_prefix + "_support.csv");
    const OuterIteration& last = res.history.back();
    io::CsvTable support;
    support.header = {"index", "frequency", "selected", "beta_hat"};
    std::vector<char> selected(static_cast<std::size_t>(data.p() + 1), 0);
    for (int j : res.support) selected[static_cast<std::size_t>(j)] = 1;
    for (int j = 0; j <= data.p(); ++j)
        support.rows.push_back({std::to_string(j), io::format_double(last.frequencies[j]),
                                selected[static_cast<std::size_t>(j)] ? "1" : "0",
                                io::format_double(res.beta_hat[j])});
    io::write_csv(a.out_prefix + "_support.csv", support);

    io::CsvTable gamma;
    gamma.header = {"outer_iter"};
    for (int l = 1; l <= a.q; ++l) gamma.header.push_back("gamma_" + std::to_string(l));
    for (std::size_t k = 0; k < res.history.size(); ++k) {
        std::vector<std::string> row{std::to_string(k + 1)};
        for (int l = 0; l < a.q; ++l) row.push_back(io::format_double(res.history[k].gamma[l]));
        gamma.rows.push_back(std::move(row));
    }
    io::write_csv(a.out_prefix + "_gamma.csv", gamma);

    io::RunManifest m;
    m.command = "select";
    m.seed = a.seed;
    m.notes = cov.notes;
    m.notes.push_back(std::string("outer iterations: ") + std::to_string(res.outer_iters) +
                      (res.stabilized ? " (gamma stabilized)" : " (gamma not stabilized)"));
    m.args["series"] = a.series;
    m.args["covariates"] = a.covariates;
    m.args["q"] = a.q;
    m.args["method"] = a.method;
    m.args["threshold"] = cfg.selection.threshold;
    m.args["subsamples"] = a.subsamples;
    m.args["seed"] = a.seed;
    m.args["max_outer_iters"] = a.max_outer_iters;
    m.args["out_prefix"] = a.out_prefix;
    m.args["command_line"] = command_line;
    // Thread count changes nothing in the output, so it stays out of the hash.
    m.config_hash = io::sha256_hex(m.args.dump());
    m.args["threads"] = a.threads;
    write_manifest(a.out_prefix + "_", m, seconds_since(start));
}

// ------------------------------------------------------------------- bench

struct BenchArgs {
    std::string config;
    std::string out_dir;
    std::optional<int> threads;
};

void run_bench(const BenchArgs& a, const std::string& command_line) {
    const auto start = Clock::now();
    const std::string bytes = io::read_file(a.config);
    Json j;
    try {
        j = Json::parse(bytes);
    } catch (const nlohmann::json::parse_error& err) {
        throw ConfigError(a.config + ": " + err.what());
    }
    if (!j.is_object()) throw ConfigError(a.config + ": expected a JSON object");
    const std::string kind = j.value("kind", std::string("experiment"));

    std::error_code ec;
    fs::create_directories(a.out_dir, ec);
    if (ec) throw IoError("cannot create '" + a.out_dir + "': " + ec.message());
    const std::string dir = (fs::path(a.out_dir) / "").string();

    io::RunManifest m;
    m.command = "bench";
    m.config_hash = io::sha256_hex(bytes);
    m.args["config"] = a.config;
    m.args["out_dir"] = a.out_dir;
    m.args["command_line"] = command_line;
    Json timing;

    if (kind == "experiment") {
        ExperimentConfig cfg = io::experiment_from_json(j);
        if (a.threads) cfg.threads = *a.threads;
        cfg.threads = resolve_threads(cfg.threads);
        const ExperimentResult res = run_experiment(cfg);
        io::write_csv(dir + "table1.csv", io::metric_table(res.rows));
        io::write_csv(dir + "summary.csv", io::metric_table(res.rows, true));
        io::write_csv(dir + "records.csv", io::records_table(res.records));
        m.seed = cfg.seed;
        Json resolved = io::to_json(cfg);
        resolved.erase("threads");
        m.args["resolved_config"] = resolved;
        if (!j.contains("beta0_intercept"))
            m.notes.push_back("beta0_intercept not set in the config; default " +
                              io::format_double(cfg.beta0_intercept) + " used (the source leaves it unstated)");
        for (const auto& row : res.rows) timing["runtime_s_mean"][row.method] = row.runtime_s;
    } else if (kind == "gamma_study") {
        GammaStudyConfig cfg = io::gamma_study_from_json(j);
        if (a.threads) cfg.threads = *a.threads;
        cfg.threads = resolve_threads(cfg.threads);
        const std::vector<GammaSample> samples = run_gamma_study(cfg);
        io::write_csv(dir + "gamma_samples.csv", io::gamma_samples_table(samples));

        io::CsvTable summary;
        summary.header = {"n", "q", "component", "true_value", "median_estimate", "median_abs_error", "failures"};
        for (int q : cfg.q_values) {
            const Vector truth = study_gamma(q);
            for (int n : cfg.n_values) {
                for (int l = 0; l < q; ++l) {
                    std::vector<double> est, err;
                    int failures = 0;
                    for (const auto& s : samples) {
                        if (s.n != n || s.q != q) continue;
                        if (s.status != "ok") {
                            ++failures;
                            continue;
                        }
                        est.push_back(s.gamma_hat[l]);
                        err.push_back(std::fabs(s.gamma_hat[l] - truth[l]));
                    }
                    summary.rows.push_back({std::to_string(n), std::to_string(q), "gamma_" + std::to_string(l + 1),
                                            io::format_double(truth[l]), io::format_double(median(est)),
                                            io::format_double(median(err)), std::to_string(failures)});
                }
            }
        }
        io::write_csv(dir + "gamma_summary.csv", summary);
        m.seed = cfg.seed;
        Json resolved = io::to_json(cfg);
        resolved.erase("threads");
        m.args["resolved_config"] = resolved;
    } else {
        throw ConfigError("unknown config kind '" + kind + "' (expected experiment or gamma_study)");
    }

    m.library_version = io::library_version();
    io::write_json(dir + "manifest.json", m.to_json());
    timing["command"] = "bench";
    timing["wall_time_s"] = seconds_since(start);
    io::write_json(dir + "timing.json", timing);
}

std::string join_args(int argc, char** argv) {
    std::string s;
    for (int i = 1; i < argc; ++i) {
        if (i > 1) s += ' ';
        s += argv[i];
    }
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse GLARMA variable selection"};
    app.set_version_flag("--version", io::library_version());
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate_cmd = app.add_subcommand("simulate", "Simulate a GLARMA Poisson series");
    simulate_cmd->add_option("--n", sim.n, "Series length")->required();
    simulate_cmd->add_option("--q", sim.q, "ARMA order (defaults to the length of --gamma)");
    simulate_cmd->add_option("--beta", sim.beta, "Regression coefficients, intercept first (list or file)");
    simulate_cmd->add_option("--gamma", sim.gamma, "ARMA coefficients (list or file)");
    simulate_cmd->add_option("--covariates", sim.covariates, "Covariate CSV or fourier:p,f");
    simulate_cmd->add_option("--covariates-out", sim.covariates_out, "Where to write generated covariates");
    simulate_cmd->add_option("--seed", sim.seed, "Random seed");
    simulate_cmd->add_option("--out", sim.out, "Output series CSV")->required();

    SelectArgs sel;
    auto* select_cmd = app.add_subcommand("select", "Run the two-stage selection pipeline");
    select_cmd->add_option("--series", sel.series, "Series CSV (t,y)")->required();
    select_cmd->add_option("--covariates", sel.covariates, "Covariate CSV");
    select_cmd->add_option("--q", sel.q, "ARMA order");
    select_cmd->add_option("--method", sel.method, "ss_cv, ss_min or fast_ss");
    select_cmd->add_option("--threshold", sel.threshold, "Selection frequency threshold");
    select_cmd->add_option("--subsamples", sel.subsamples, "Number of subsamples");
    select_cmd->add_option("--seed", sel.seed, "Random seed");
    select_cmd->add_option("--max-outer-iters", sel.max_outer_iters, "Outer iteration limit");
    select_cmd->add_option("--out-prefix", sel.out_prefix, "Output prefix")->required();
    select_cmd->add_option("--threads", sel.threads, "Worker threads (0 = auto)");

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark experiment from a JSON config");
    bench_cmd->add_option("--config", bench.config, "Experiment JSON")->required();
    bench_cmd->add_option("--out-dir", bench.out_dir, "Output directory")->required();
    bench_cmd->add_option("--threads", bench.threads, "Worker threads (0 = auto), overrides the config");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    const std::string command_line = join_args(argc, argv);
    try {
        if (*simulate_cmd) run_simulate(sim, command_line);
        else if (*select_cmd) run_select(sel, command_line);
        else if (*bench_cmd) run_bench(bench, command_line);
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
