// floquet-lab: batch runner for Floquet-operator experiments.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "floquet_lab/error.hpp"
#include "floquet_lab/experiment.hpp"

namespace {

using floquet_lab::Error;
using floquet_lab::ErrorKind;
using floquet_lab::Json;

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::config_error: return 2;
        case ErrorKind::numerical_failure:
        case ErrorKind::unconverged_spectrum: return 4;
        default: return 3;
    }
}

int report_error(std::string_view kind, const std::string& message, int code) {
    std::cerr << Json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << '\n';
    return code;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::config_error, "cannot read " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void print_manifest_summary(const floquet_lab::RunManifest& m, const std::string& dir) {
    std::cout << "outputs in " << dir << ":\n";
    for (const auto& f : m.outputs) std::cout << "  " << f << '\n';
    std::cout << "  manifest.json\n";
    if (m.verify_pass) std::cout << "verify: " << (*m.verify_pass ? "PASS" : "FAIL") << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"floquet-lab: Floquet operators of rank-N kicked systems"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    unsigned threads = 1;
    std::optional<std::uint64_t> seed;

    auto add_common = [&](CLI::App* cmd, bool config_required) {
        auto* opt = cmd->add_option("--config", config_path, "experiment config (JSON)");
        if (config_required) opt->required();
        cmd->add_option("--out", out_dir, "output directory (overrides output.directory)");
        cmd->add_option("--threads", threads, "worker threads for sweeps")->check(CLI::PositiveNumber);
        cmd->add_option("--seed", seed, "global seed override");
    };

    auto* run_cmd = app.add_subcommand("run", "run the experiment named in a config");
    add_common(run_cmd, true);
    auto* sweep_cmd = app.add_subcommand("sweep", "run a parameter sweep config");
    add_common(sweep_cmd, true);
    auto* verify_cmd = app.add_subcommand("verify", "run the analytic verification suite");
    add_common(verify_cmd, false);
    auto* inspect_cmd = app.add_subcommand("inspect", "pretty-print a config or manifest");
    std::string inspect_path;
    inspect_cmd->add_option("path", inspect_path, "config or manifest JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        floquet_lab::RunOptions options;
        if (!out_dir.empty()) options.out_dir = out_dir;
        options.seed = seed;
        options.threads = threads;

        if (*inspect_cmd) {
            const Json doc = [&] {
                const std::string text = read_text(inspect_path);
                try {
                    return Json::parse(text);
                } catch (const nlohmann::json::parse_error& e) {
                    throw Error(ErrorKind::config_error, e.what());
                }
            }();
            if (doc.contains("experiment")) {
                const auto config = floquet_lab::config_from_json(doc);
                std::cout << config.to_json().dump(2) << '\n';
            } else {
                std::cout << doc.dump(2) << '\n';
            }
            return 0;
        }

        floquet_lab::ExperimentConfig config;
        if (*verify_cmd && config_path.empty()) {
            config.type = floquet_lab::ExperimentType::verify;
            config.output_directory = "floquet-verify";
        } else {
            config = floquet_lab::parse_config(read_text(config_path));
        }
        if (*sweep_cmd && config.type != floquet_lab::ExperimentType::sweep) {
            throw Error(ErrorKind::config_error, "field 'experiment.type': the sweep verb needs a sweep experiment");
        }
        if (*verify_cmd && config.type != floquet_lab::ExperimentType::verify) {
            throw Error(ErrorKind::config_error, "field 'experiment.type': the verify verb needs a verify experiment");
        }

        const auto manifest = floquet_lab::run(config, options);
        print_manifest_summary(manifest, options.out_dir ? options.out_dir->string() : config.output_directory);
        if (manifest.verify_pass && !*manifest.verify_pass) return 4;
        return 0;
    } catch (const Error& e) {
        return report_error(floquet_lab::to_string(e.kind()), e.what(), exit_code(e.kind()));
    } catch (const std::exception& e) {
        return report_error("internal-error", e.what(), 1);
    }
}
