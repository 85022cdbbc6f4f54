#pragma once

// JSON file formats and experiment configs.
//
//   kernel:  {"order": k, "dim": n, "entries": [{"idx": [i1, ..., ik], "coef": c}, ...]}
//   chaos:   {"dim": n, "constant": c, "kernels": [<kernel>, ...]}
//   vector:  {"components": [<chaos>, ...]}
//   multilinear: {"n": n, "degree": p, "law": <law>, "terms": [{"set": [...], "coef": c}, ...]}
//   law:     "gaussian" | "rademacher" | {"values": [...], "probs": [...]}
//
// Every loader throws SchemaError whose where() is a JSON pointer into the
// document (prefixed by the file name when loading from disk).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wienerlab/chaos.hpp"
#include "wienerlab/multilinear.hpp"
#include "wienerlab/report.hpp"
#include "wienerlab/sampling.hpp"
#include "wienerlab/theorem_lab.hpp"

namespace wienerlab {

Json to_json(const SymmetricKernel& f);
Json to_json(const ChaosElement& f);
Json to_json(const ChaosVector& v);
Json to_json(const MultilinearSpec& spec);

SymmetricKernel kernel_from_json(const Json& j, const std::string& where = "");
ChaosElement chaos_from_json(const Json& j, const std::string& where = "");
ChaosVector chaos_vector_from_json(const Json& j, const std::string& where = "");
MultilinearSpec multilinear_from_json(const Json& j, const std::string& where = "");
InputLaw law_from_json(const Json& j, const std::string& where = "");

/// Parses a JSON file; SchemaError on I/O or syntax errors.
Json read_json_file(const std::filesystem::path& path);

SymmetricKernel load_kernel(const std::filesystem::path& path);
ChaosElement load_chaos(const std::filesystem::path& path);
ChaosVector load_chaos_vector(const std::filesystem::path& path);

/// Writes through a temporary file in the same directory and renames it
/// over `path`, so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

void save_kernel(const std::filesystem::path& path, const SymmetricKernel& f);
void save_chaos(const std::filesystem::path& path, const ChaosElement& f);

enum class ReportFormat { json, csv };

/// JSON report text (2-space indent, trailing newline). Deterministic.
std::string report_text(const ExperimentReport& r);
void save_report(const std::filesystem::path& path, const ExperimentReport& r, ReportFormat format = ReportFormat::json);
ExperimentReport load_report(const std::filesystem::path& path);

/// "value" header for scalars, "x1,...,xd" for vectors; one row per sample.
std::string samples_csv(const SampleBatch& batch);

/// Parsed experiment config. Kernel, chaos and multilinear inputs may be
/// given inline or as file paths relative to the config file.
struct ExperimentConfig {
    std::string experiment;
    std::uint64_t seed = 0;
    std::size_t n_samples = 0;
    std::optional<std::filesystem::path> output;
    ReportFormat format = ReportFormat::json;
    Json params;
    std::filesystem::path base_dir;
};

ExperimentConfig parse_config(const Json& j, std::filesystem::path base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Builds the inputs named by the config and runs the experiment. Throws
/// SchemaError naming the offending field.
ExperimentReport run_config(const ExperimentConfig& cfg);

}  // namespace wienerlab
