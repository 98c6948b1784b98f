#include "sglarma/io.hpp"

#include "sglarma/errors.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace sglarma::io {

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

std::string format_int(long long value) { return std::to_string(value); }

double parse_double(std::string_view text) {
    if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (text == "inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    std::string_view body = text;
    if (!body.empty() && body.front() == '+') body.remove_prefix(1);
    double value = 0.0;
    const auto res = std::from_chars(body.data(), body.data() + body.size(), value);
    if (body.empty() || res.ec != std::errc{} || res.ptr != body.data() + body.size())
        throw IoError("not a number: '" + std::string(text) + "'");
    return value;
}

long long parse_int(std::string_view text) {
    long long value = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw IoError("not an integer: '" + std::string(text) + "'");
    return value;
}

int CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

namespace {

std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        std::string_view field = line.substr(start, pos == std::string_view::npos ? line.npos : pos - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '"')) field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '"')) field.remove_suffix(1);
        out.emplace_back(field);
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string join(const std::vector<std::string>& fields) {
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) line += ',';
        line += fields[i];
    }
    return line;
}

}  // namespace

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << text;
    out.flush();
    if (!out) throw IoError("write failed for '" + path + "'");
}

CsvTable read_csv(const std::string& path) {
    const std::string text = read_file(path);
    CsvTable table;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split(line);
        if (first) {
            if (!fields.empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) fields[0].erase(0, 3);
            table.header = std::move(fields);
            first = false;
            continue;
        }
        if (fields.size() != table.header.size())
            throw IoError(path + ": row " + std::to_string(table.rows.size() + 1) + " has " +
                          std::to_string(fields.size()) + " fields, header has " +
                          std::to_string(table.header.size()));
        table.rows.push_back(std::move(fields));
    }
    if (first) throw IoError(path + ": empty file");
    return table;
}

void write_csv(const std::string& path, const CsvTable& table) {
    std::string text = join(table.header) + '\n';
    for (const auto& row : table.rows) text += join(row) + '\n';
    write_text(path, text);
}

void write_series_csv(const std::string& path, const Vector& y) {
    CsvTable t;
    t.header = {"t", "y"};
    for (Eigen::Index i = 0; i < y.size(); ++i)
        t.rows.push_back({format_int(i + 1), format_double(y[i])});
    write_csv(path, t);
}

Vector read_series_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    int col = t.column("y");
    if (col < 0) {
        if (t.header.size() != 1) throw IoError(path + ": series file needs a 'y' column");
        col = 0;
    }
    Vector y(static_cast<Eigen::Index>(t.rows.size()));
    for (std::size_t i = 0; i < t.rows.size(); ++i)
        y[static_cast<Eigen::Index>(i)] = parse_double(t.rows[i][static_cast<std::size_t>(col)]);
    return y;
}

Covariates read_covariates_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    Covariates c;
    c.intercept_prepended = t.header.empty() || t.header[0] != "intercept";
    const auto n = static_cast<Eigen::Index>(t.rows.size());
    const auto cols = static_cast<Eigen::Index>(t.header.size());
    const Eigen::Index offset = c.intercept_prepended ? 1 : 0;
    c.x.resize(n, cols + offset);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (offset) c.x(i, 0) = 1.0;
        for (Eigen::Index j = 0; j < cols; ++j)
            c.x(i, j + offset) = parse_double(t.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
    }
    return c;
}

void write_covariates_csv(const std::string& path, const Matrix& x) {
    CsvTable t;
    t.header.push_back("intercept");
    for (Eigen::Index j = 1; j < x.cols(); ++j) t.header.push_back("x" + std::to_string(j));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        std::vector<std::string> row;
        row.reserve(static_cast<std::size_t>(x.cols()));
        for (Eigen::Index j = 0; j < x.cols(); ++j) row.push_back(format_double(x(i, j)));
        t.rows.push_back(std::move(row));
    }
    write_csv(path, t);
}

Vector parse_vector_arg(const std::string& text) {
    std::vector<double> values;
    auto take = [&](const std::string& blob, bool allow_header) {
        std::string normalized = blob;
        for (char& ch : normalized)
            if (ch == '\n' || ch == '\r' || ch == ';') ch = ',';
        bool first = true;
        for (const auto& field : split(normalized)) {
            if (field.empty()) {
                // Blank lines in a file are fine; ",," on the command line is not.
                if (allow_header) continue;
                throw IoError("empty field");
            }
            try {
                values.push_back(parse_double(field));
            } catch (const IoError&) {
                if (!(allow_header && first)) throw;
            }
            first = false;
        }
    };
    std::ifstream probe(text);
    if (probe.good() && !text.empty()) {
        take(read_file(text), true);
    } else {
        try {
            take(text, false);
        } catch (const IoError& err) {
            throw UsageError(std::string("cannot read numbers from '") + text + "': " + err.what());
        }
    }
    if (values.empty()) throw UsageError("no numbers in '" + text + "'");
    Vector v(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = values[i];
    return v;
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw IoError("sha256 failed");
    std::ostringstream out;
    for (unsigned int i = 0; i < len; ++i)
        out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    return out.str();
}

void write_json(const std::string& path, const Json& value) { write_text(path, value.dump(2) + "\n"); }

std::string library_version() { return SGLARMA_VERSION; }

Json RunManifest::to_json() const {
    Json j;
    j["command"] = command;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["library_version"] = library_version;
    j["rng"] = "mt19937_64/sglarma-v1";
    j["args"] = args;
    j["notes"] = notes;
    return j;
}

namespace {

Vector json_vector(const Json& j, const char* what) {
    if (!j.is_array()) throw ConfigError(std::string(what) + " must be an array of numbers");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ConfigError(std::string(what) + " must hold numbers");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

Json vector_json(const Vector& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

template <class T>
void read_field(const Json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& err) {
        throw ConfigError(std::string("config field '") + key + "': " + err.what());
    }
}

void reject_unknown(const Json& j, std::initializer_list<const char*> keys) {
    for (const auto& [key, _] : j.items()) {
        bool known = false;
        for (const char* k : keys) known = known || key == k;
        if (!known) throw ConfigError("unknown config field '" + key + "'");
    }
}

}  // namespace

ExperimentConfig experiment_from_json(const Json& j) {
    if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
    reject_unknown(j, {"kind", "n", "p", "q", "f", "sparsity", "custom_beta", "gamma_true",
                       "beta0_intercept", "replicates", "methods", "thresholds", "seed",
                       "n_subsamples", "grid_count", "max_outer_iters", "gamma_stab_tol",
                       "threads"});
    ExperimentConfig cfg;
    read_field(j, "n", cfg.n);
    read_field(j, "p", cfg.p);
    read_field(j, "q", cfg.q);
    read_field(j, "f", cfg.f);
    if (j.contains("sparsity")) {
        const Json& s = j.at("sparsity");
        cfg.sparsity = parse_sparsity(s.is_number() ? std::to_string(s.get<int>()) : s.get<std::string>());
    }
    if (j.contains("custom_beta")) cfg.custom_beta = json_vector(j.at("custom_beta"), "custom_beta");
    if (j.contains("gamma_true")) {
        cfg.gamma_true = json_vector(j.at("gamma_true"), "gamma_true");
    } else if (cfg.q != 1) {
        cfg.gamma_true = study_gamma(cfg.q);
    }
    read_field(j, "beta0_intercept", cfg.beta0_intercept);
    read_field(j, "replicates", cfg.replicates);
    read_field(j, "methods", cfg.methods);
    read_field(j, "thresholds", cfg.thresholds);
    read_field(j, "seed", cfg.seed);
    read_field(j, "n_subsamples", cfg.n_subsamples);
    read_field(j, "grid_count", cfg.grid_count);
    read_field(j, "max_outer_iters", cfg.max_outer_iters);
    read_field(j, "gamma_stab_tol", cfg.gamma_stab_tol);
    read_field(j, "threads", cfg.threads);
    cfg.validate();
    return cfg;
}

Json to_json(const ExperimentConfig& cfg) {
    Json j;
    j["kind"] = "experiment";
    j["n"] = cfg.n;
    j["p"] = cfg.p;
    j["q"] = cfg.q;
    j["f"] = cfg.f;
    j["sparsity"] = to_string(cfg.sparsity);
    if (cfg.sparsity == Sparsity::Custom) j["custom_beta"] = vector_json(cfg.custom_beta);
    j["gamma_true"] = vector_json(cfg.gamma_true);
    j["beta0_intercept"] = cfg.beta0_intercept;
    j["replicates"] = cfg.replicates;
    j["methods"] = cfg.methods;
    j["thresholds"] = cfg.thresholds;
    j["seed"] = cfg.seed;
    j["n_subsamples"] = cfg.n_subsamples;
    j["grid_count"] = cfg.grid_count;
    j["max_outer_iters"] = cfg.max_outer_iters;
    j["gamma_stab_tol"] = cfg.gamma_stab_tol;
    j["threads"] = cfg.threads;
    return j;
}

GammaStudyConfig gamma_study_from_json(const Json& j) {
    if (!j.is_object()) throw ConfigError("gamma study config must be a JSON object");
    reject_unknown(j, {"kind", "n_values", "q_values", "beta0", "replicates", "seed", "threads"});
    GammaStudyConfig cfg;
    read_field(j, "n_values", cfg.n_values);
    read_field(j, "q_values", cfg.q_values);
    read_field(j, "beta0", cfg.beta0);
    read_field(j, "replicates", cfg.replicates);
    read_field(j, "seed", cfg.seed);
    read_field(j, "threads", cfg.threads);
    if (cfg.n_values.empty() || cfg.q_values.empty()) throw UsageError("gamma study needs n_values and q_values");
    for (int q : cfg.q_values) study_gamma(q);
    for (int n : cfg.n_values)
        if (n < 2) throw ConfigError("gamma study needs n >= 2");
    return cfg;
}

Json to_json(const GammaStudyConfig& cfg) {
    Json j;
    j["kind"] = "gamma_study";
    j["n_values"] = cfg.n_values;
    j["q_values"] = cfg.q_values;
    j["beta0"] = cfg.beta0;
    j["replicates"] = cfg.replicates;
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    return j;
}

CsvTable metric_table(const std::vector<MetricRow>& rows, bool extended) {
    CsvTable t;
    t.header = {"n", "q", "sparsity", "method", "tpr_mean", "tpr_sd", "fpr_mean", "fpr_sd"};
    if (extended) {
        t.header.push_back("effective_replicates");
        t.header.push_back("failures");
    }
    for (const auto& r : rows) {
        std::vector<std::string> row{format_int(r.n),          format_int(r.q),
                                     r.sparsity,               r.method,
                                     format_double(r.tpr_mean), format_double(r.tpr_sd),
                                     format_double(r.fpr_mean), format_double(r.fpr_sd)};
        if (extended) {
            row.push_back(format_int(r.effective_replicates));
            row.push_back(format_int(r.failures));
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

namespace {

std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ';';
        s += std::to_string(v[i]);
    }
    return s;
}

std::string join_doubles(const Vector& v) {
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) s += ';';
        s += format_double(v[i]);
    }
    return s;
}

}  // namespace

CsvTable records_table(const std::vector<ReplicateRecord>& records) {
    CsvTable t;
    t.header = {"replicate", "seed", "method", "status", "tpr", "fpr",
                "outer_iters", "stabilized", "gamma_hat", "gamma_history", "support"};
    for (const auto& r : records) {
        std::string history;
        for (std::size_t k = 0; k < r.gamma_history.size(); ++k) {
            if (k) history += '|';
            history += join_doubles(r.gamma_history[k]);
        }
        t.rows.push_back({format_int(r.replicate), std::to_string(r.seed), r.method, r.status,
                          format_double(r.tpr), format_double(r.fpr), format_int(r.outer_iters),
                          r.stabilized ? "1" : "0", join_doubles(r.gamma_hat), history,
                          join_ints(r.support)});
    }
    return t;
}

CsvTable gamma_samples_table(const std::vector<GammaSample>& samples) {
    int max_q = 0;
    for (const auto& s : samples) max_q = std::max(max_q, s.q);
    CsvTable t;
    t.header = {"n", "q", "replicate", "status", "beta0_hat"};
    for (int l = 1; l <= max_q; ++l) t.header.push_back("gamma_" + std::to_string(l));
    for (const auto& s : samples) {
        std::vector<std::string> row{format_int(s.n), format_int(s.q), format_int(s.replicate),
                                     s.status, s.status == "ok" ? format_double(s.beta0_hat) : ""};
        for (int l = 0; l < max_q; ++l)
            row.push_back(l < s.gamma_hat.size() ? format_double(s.gamma_hat[l]) : "");
        t.rows.push_back(std::move(row));
    }
    return t;
}

}  // namespace sglarma::io
