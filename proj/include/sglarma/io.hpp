#pragma once

// Bit-stable file formats. Numbers are written in the shortest decimal form
// that parses back to the identical double, so reading any emitted file
// reproduces the in-memory values exactly.

#include "sglarma/bench.hpp"
#include "sglarma/model.hpp"

#include <json.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace sglarma::io {

using Json = nlohmann::ordered_json;

std::string format_double(double value);
std::string format_int(long long value);

/// Strict parse of a whole field; throws IoError on trailing junk or overflow.
double parse_double(std::string_view text);
long long parse_int(std::string_view text);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column position by name, or -1.
    int column(std::string_view name) const;
};

/// Comma-delimited, header row, LF line endings. CRLF input is accepted.
CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);

/// Series file: header `t,y`, t = 1..n.
void write_series_csv(const std::string& path, const Vector& y);
Vector read_series_csv(const std::string& path);

struct Covariates {
    Matrix x;
    bool intercept_prepended = false;  // the file had no `intercept` column
};

/// Covariate file: one row per time point. A first column named `intercept`
/// is used as is; otherwise a ones column is prepended.
Covariates read_covariates_csv(const std::string& path);
void write_covariates_csv(const std::string& path, const Matrix& x);

/// Comma separated numbers, or the path of a file holding them (one per
/// line or comma separated, optional single-column header).
Vector parse_vector_arg(const std::string& text);

std::string sha256_hex(std::string_view bytes);
std::string read_file(const std::string& path);
void write_text(const std::string& path, const std::string& text);
void write_json(const std::string& path, const Json& value);

struct RunManifest {
    std::string command;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string library_version;
    Json args = Json::object();
    std::vector<std::string> notes;

    Json to_json() const;
};

std::string library_version();

ExperimentConfig experiment_from_json(const Json& j);
Json to_json(const ExperimentConfig& cfg);
GammaStudyConfig gamma_study_from_json(const Json& j);
Json to_json(const GammaStudyConfig& cfg);

/// Columns n,q,sparsity,method,tpr_mean,tpr_sd,fpr_mean,fpr_sd (plus
/// effective_replicates and failures when `extended`).
CsvTable metric_table(const std::vector<MetricRow>& rows, bool extended = false);
/// One row per (replicate, method) without timing, so reruns compare equal.
CsvTable records_table(const std::vector<ReplicateRecord>& records);
CsvTable gamma_samples_table(const std::vector<GammaSample>& samples);

}  // namespace sglarma::io
