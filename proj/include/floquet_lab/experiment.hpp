#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "floquet_lab/io.hpp"

namespace floquet_lab {

enum class ExperimentType { spectrum, evolve, scan, verify, sweep };

std::string_view to_string(ExperimentType type);
std::optional<ExperimentType> parse_experiment_type(std::string_view name);

struct ModelSection {
    BaseKind kind = BaseKind::rotor;
    std::size_t dim = 64;
    double period_T = default_period;
    double hbar = 1.0;
    std::vector<double> custom_alpha;
};

struct PerturbationSection {
    std::size_t rank = 1;
    std::vector<CoefficientProfile> profiles;
    std::vector<double> lambdas;
};

struct ExperimentConfig {
    std::optional<ModelSection> model;
    std::optional<PerturbationSection> perturbation;
    ExperimentType type = ExperimentType::spectrum;
    Json params = Json::object();  // normalized, every default explicit
    std::string output_directory = "floquet-out";
    std::vector<std::string> formats = {"csv", "json"};
    std::uint64_t seed = 12345;

    /// Normalized document; parsing it again yields the same configuration.
    Json to_json() const;
};

/// Parse errors raise config-error (with line and column); inconsistent sections raise
/// validation-error.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig config_from_json(const Json& doc);
void validate(const ExperimentConfig& config);

struct RunOptions {
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
};

struct RunManifest {
    Json config;
    std::string started_at;
    double wall_clock_seconds = 0.0;
    Json seeds = Json::object();
    Json versions = Json::object();
    std::vector<std::string> outputs;  // relative to the output directory
    Json summability = Json::array();
    Json summary = Json::object();
    std::optional<bool> verify_pass;
    Json sweep = Json::array();

    Json to_json() const;
};

/// Executes the configured experiment, writes its outputs and manifest.json.
RunManifest run(const ExperimentConfig& config, const RunOptions& options = {});
RunManifest run_file(const std::filesystem::path& config_path, const RunOptions& options = {});

/// Resolves "perturbation.lambdas[0]" or a short alias ("T", "gamma", "lambdas[0]") to a
/// JSON pointer into the normalized config; config-error when it is not a numeric leaf.
Json::json_pointer resolve_axis_path(const Json& normalized_config, std::string_view path);

}  // namespace floquet_lab
