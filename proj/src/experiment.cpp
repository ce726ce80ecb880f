#include "floquet_lab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include <Eigen/Core>

#include "floquet_lab/error.hpp"

namespace floquet_lab {

namespace fs = std::filesystem;

std::string_view to_string(ExperimentType type) {
    switch (type) {
        case ExperimentType::spectrum: return "spectrum";
        case ExperimentType::evolve: return "evolve";
        case ExperimentType::scan: return "scan";
        case ExperimentType::verify: return "verify";
        case ExperimentType::sweep: return "sweep";
    }
    return "unknown";
}

std::optional<ExperimentType> parse_experiment_type(std::string_view name) {
    for (auto t : {ExperimentType::spectrum, ExperimentType::evolve, ExperimentType::scan, ExperimentType::verify,
                   ExperimentType::sweep}) {
        if (to_string(t) == name) return t;
    }
    return std::nullopt;
}

namespace {

[[noreturn]] void config_fail(const std::string& field, const std::string& what) {
    throw Error(ErrorKind::config_error, "field '" + field + "': " + what);
}

[[noreturn]] void validation_fail(const std::string& what) { throw Error(ErrorKind::validation_error, what); }

const Json* find(const Json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() || it->is_null() ? nullptr : &*it;
}

double get_number(const Json& obj, const char* key, const std::string& where, std::optional<double> fallback = {}) {
    const Json* v = find(obj, key);
    if (!v) {
        if (fallback) return *fallback;
        config_fail(where + key, "missing");
    }
    if (!v->is_number()) config_fail(where + key, "expected a number");
    return v->get<double>();
}

std::uint64_t get_unsigned(const Json& obj, const char* key, const std::string& where,
                           std::optional<std::uint64_t> fallback = {}) {
    const Json* v = find(obj, key);
    if (!v) {
        if (fallback) return *fallback;
        config_fail(where + key, "missing");
    }
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0)) {
        config_fail(where + key, "expected a non-negative integer");
    }
    return v->get<std::uint64_t>();
}

std::string get_string(const Json& obj, const char* key, const std::string& where,
                       std::optional<std::string> fallback = {}) {
    const Json* v = find(obj, key);
    if (!v) {
        if (fallback) return *fallback;
        config_fail(where + key, "missing");
    }
    if (!v->is_string()) config_fail(where + key, "expected a string");
    return v->get<std::string>();
}

std::vector<double> get_number_list(const Json& obj, const char* key, const std::string& where) {
    const Json* v = find(obj, key);
    if (!v) config_fail(where + key, "missing");
    if (!v->is_array()) config_fail(where + key, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_number()) config_fail(where + key + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back((*v)[i].get<double>());
    }
    return out;
}

void require_object(const Json& j, const std::string& field) {
    if (!j.is_object()) config_fail(field, "expected an object");
}

ModelSection parse_model(const Json& j) {
    require_object(j, "model");
    ModelSection m;
    const auto kind_name = get_string(j, "kind", "model.", "rotor");
    const auto kind = parse_base_kind(kind_name);
    if (!kind) config_fail("model.kind", "unknown kind '" + kind_name + "'");
    m.kind = *kind;
    m.dim = get_unsigned(j, "dim", "model.");
    m.period_T = get_number(j, "T", "model.", default_period);
    m.hbar = get_number(j, "hbar", "model.", 1.0);
    if (find(j, "custom_alpha")) m.custom_alpha = get_number_list(j, "custom_alpha", "model.");
    return m;
}

CoefficientProfile parse_profile(const Json& j, std::size_t index, std::size_t model_dim) {
    const std::string where = "perturbation.profiles[" + std::to_string(index) + "].";
    require_object(j, where.substr(0, where.size() - 1));
    const auto family_name = get_string(j, "family", where);
    const auto family = parse_profile_family(family_name);
    if (!family) config_fail(where + "family", "unknown family '" + family_name + "'");

    CoefficientProfile p;
    p.family = *family;
    p.dim = get_unsigned(j, "dim", where, model_dim);
    if (p.family == ProfileFamily::power_law) p.gamma = get_number(j, "gamma", where);
    if (p.family == ProfileFamily::exponential) p.rate = get_number(j, "rate", where);
    if (p.family == ProfileFamily::explicit_list) {
        const Json* values = find(j, "values");
        if (!values || !values->is_array()) config_fail(where + "values", "expected an array of numbers or [re, im]");
        for (std::size_t i = 0; i < values->size(); ++i) {
            try {
                p.values.push_back(complex_from_json((*values)[i]));
            } catch (const Error&) {
                config_fail(where + "values[" + std::to_string(i) + "]", "expected a number or [re, im]");
            }
        }
        if (find(j, "tail_gamma")) p.tail_gamma = get_number(j, "tail_gamma", where);
    }
    if (find(j, "phase_seed")) p.phase_seed = get_unsigned(j, "phase_seed", where);
    return p;
}

PerturbationSection parse_perturbation(const Json& j, std::size_t model_dim) {
    require_object(j, "perturbation");
    PerturbationSection p;
    const Json* profiles = find(j, "profiles");
    if (!profiles || !profiles->is_array()) config_fail("perturbation.profiles", "expected an array");
    for (std::size_t i = 0; i < profiles->size(); ++i) p.profiles.push_back(parse_profile((*profiles)[i], i, model_dim));
    p.lambdas = get_number_list(j, "lambdas", "perturbation.");
    p.rank = get_unsigned(j, "N", "perturbation.", p.profiles.size());
    return p;
}

// -- experiment parameters, normalized with explicit defaults --------------------------------

Json normalize_params(ExperimentType type, const Json& in, std::string where);

Json normalize_spectrum(const Json& in, const std::string& where) {
    return {{"dense_limit", get_unsigned(in, "dense_limit", where, default_dense_limit)},
            {"export_matrix", in.value("export_matrix", false)},
            {"export_eigenvectors", in.value("export_eigenvectors", false)}};
}

Json normalize_evolve(const Json& in, const std::string& where) {
    const auto steps = get_unsigned(in, "steps", where, 10000);
    Json window = Json::array({100.0, 10000.0});
    if (const Json* w = find(in, "window")) {
        if (!w->is_array() || w->size() != 2 || !(*w)[0].is_number() || !(*w)[1].is_number()) {
            config_fail(where + "window", "expected [lo, hi]");
        }
        window = *w;
    }
    return {{"steps", steps},
            {"record_every", get_unsigned(in, "record_every", where, 1)},
            {"initial_state", get_unsigned(in, "initial_state", where, 0)},
            {"window", window}};
}

Json normalize_scan(const Json& in, const std::string& where) {
    Json exps = Json::array({1, 14});
    if (const Json* e = find(in, "eps_exponents")) {
        if (!e->is_array() || e->size() != 2 || !(*e)[0].is_number_integer() || !(*e)[1].is_number_integer()) {
            config_fail(where + "eps_exponents", "expected [first, last] integers");
        }
        exps = *e;
    }
    return {{"theta_points", get_unsigned(in, "theta_points", where, 512)},
            {"eps_exponents", exps},
            {"threshold", get_number(in, "threshold", where, 0.5)},
            {"density", in.value("density", true)},
            {"initial_state", get_unsigned(in, "initial_state", where, 0)}};
}

Json normalize_sweep(const Json& in, const std::string& where) {
    const Json* base = find(in, "base");
    if (!base || !base->is_object()) config_fail(where + "base", "expected {type, params}");
    const auto base_type_name = get_string(*base, "type", where + "base.");
    const auto base_type = parse_experiment_type(base_type_name);
    if (!base_type || *base_type == ExperimentType::sweep || *base_type == ExperimentType::verify) {
        config_fail(where + "base.type", "sweeps run spectrum, evolve or scan experiments");
    }
    const Json base_params = base->contains("params") ? base->at("params") : Json::object();
    const Json* axis = find(in, "axis");
    if (!axis || !axis->is_object()) config_fail(where + "axis", "expected {path, values}");
    const auto path = get_string(*axis, "path", where + "axis.");
    const auto values = get_number_list(*axis, "values", where + "axis.");
    return {{"base", {{"type", base_type_name}, {"params", normalize_params(*base_type, base_params, where + "base.params.")}}},
            {"axis", {{"path", path}, {"values", values}}}};
}

Json normalize_params(ExperimentType type, const Json& in, std::string where) {
    if (!in.is_object()) config_fail(where.substr(0, where.size() - 1), "expected an object");
    switch (type) {
        case ExperimentType::spectrum: return normalize_spectrum(in, where);
        case ExperimentType::evolve: return normalize_evolve(in, where);
        case ExperimentType::scan: return normalize_scan(in, where);
        case ExperimentType::verify: return Json::object();
        case ExperimentType::sweep: return normalize_sweep(in, where);
    }
    return Json::object();
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

Json versions() {
    std::ostringstream eigen;
    eigen << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;
#ifdef FLOQUET_LAB_VERSION
    const char* version = FLOQUET_LAB_VERSION;
#else
    const char* version = "unknown";
#endif
    return {{"floquet_lab", version}, {"eigen", eigen.str()}, {"compiler", __VERSION__},
            {"json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                         "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

bool wants(const ExperimentConfig& config, std::string_view format) {
    return std::find(config.formats.begin(), config.formats.end(), format) != config.formats.end();
}

struct Built {
    BaseHamiltonian base;
    RankNPerturbation pert;
};

Built build_model(const ExperimentConfig& config) {
    const auto& m = *config.model;
    const auto& p = *config.perturbation;
    BaseParams params;
    params.period_T = m.period_T;
    params.hbar = m.hbar;
    params.custom_alpha = m.custom_alpha;
    auto base = build_base_hamiltonian(m.kind, m.dim, params);
    auto pert = RankNPerturbation::from_profiles(p.profiles, p.lambdas);
    return {std::move(base), std::move(pert)};
}

StateVector basis_state(std::size_t dim, std::size_t index) {
    if (index >= dim) validation_fail("initial_state index " + std::to_string(index) + " is outside dim " + std::to_string(dim));
    StateVector x = StateVector::Zero(static_cast<Eigen::Index>(dim));
    x[static_cast<Eigen::Index>(index)] = 1.0;
    return x;
}

class OutputSink {
public:
    OutputSink(fs::path dir, std::vector<std::string>& listing) : dir_(std::move(dir)), listing_(listing) {}

    void write(const std::string& name, std::string_view contents) {
        write_file_atomic(dir_ / name, contents);
        listing_.push_back(name);
    }

private:
    fs::path dir_;
    std::vector<std::string>& listing_;
};

Json run_spectrum(const ExperimentConfig& config, const Built& built, OutputSink& out) {
    const FloquetModel model(built.base, built.pert);
    const auto limit = config.params.at("dense_limit").get<std::size_t>();
    const CMatrix v = dense_floquet_matrix(model, limit);
    const SpectralResult spectrum = quasi_energies(v);
    if (!spectrum.converged) {
        throw Error(ErrorKind::numerical_failure, "spectrum: eigen-residuals exceed " + format_number(residual_gate));
    }
    Json summary = {{"dim", spectrum.dim()},
                    {"converged", spectrum.converged},
                    {"max_residual", *std::max_element(spectrum.residuals.begin(), spectrum.residuals.end())}};
    if (wants(config, "csv")) out.write("quasi_energies.csv", spectrum_csv(spectrum));
    if (spectrum.dim() >= 3) {
        const SpacingStats stats = level_spacing_stats(spectrum);
        summary["mean_ratio"] = stats.mean_ratio;
        if (wants(config, "json")) out.write("spacing_stats.json", to_json(stats).dump(2) + "\n");
    }
    if (wants(config, "json")) {
        Json doc = to_json(spectrum);
        if (!config.params.at("export_eigenvectors").get<bool>()) doc.erase("eigenvectors");
        out.write("spectrum.json", doc.dump(2) + "\n");
        if (config.params.at("export_matrix").get<bool>()) out.write("floquet_matrix.json", matrix_to_json(v).dump() + "\n");
    }
    return summary;
}

Json run_evolve(const ExperimentConfig& config, const Built& built, OutputSink& out) {
    const FloquetModel model(built.base, built.pert);
    const auto steps = config.params.at("steps").get<std::size_t>();
    const auto every = config.params.at("record_every").get<std::size_t>();
    const StateVector psi0 = basis_state(model.dim(), config.params.at("initial_state").get<std::size_t>());
    const TrajectoryRecord rec = evolve(model, psi0, steps, every);

    Json summary = {{"steps", steps},
                    {"renormalizations", rec.renormalizations},
                    {"max_norm_drift", rec.max_norm_drift},
                    {"max_step_drift", rec.max_step_drift},
                    {"max_tail_weight", rec.max_tail_weight},
                    {"truncation_contaminated", rec.truncation_contaminated},
                    {"final_energy", rec.energy.back()}};
    if (rec.autocorr.size() > 1) summary["wiener_average"] = wiener_average(rec.autocorr, rec.autocorr.size() - 1);

    const auto& w = config.params.at("window");
    const GrowthWindow window{w[0].get<double>(), w[1].get<double>()};
    try {
        const GrowthFit fit = growth_fit(rec.n, rec.energy, window, true);
        summary["growth"] = to_json(fit);
        summary["label"] = to_string(classify_growth(fit, rec.truncation_contaminated));
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::invalid_input) throw;
        summary["growth"] = nullptr;
        summary["label"] = "inconclusive";
    }
    if (wants(config, "csv")) out.write("trajectory.csv", trajectory_csv(rec));
    if (wants(config, "json")) out.write("evolve_summary.json", summary.dump(2) + "\n");
    return summary;
}

Json run_scan(const ExperimentConfig& config, const Built& built, OutputSink& out) {
    const auto& e = config.params.at("eps_exponents");
    SupportScanConfig scan_config;
    scan_config.axes = ScanAxes::uniform(config.params.at("theta_points").get<std::size_t>(), e[0].get<int>(),
                                         e[1].get<int>());
    scan_config.threshold = config.params.at("threshold").get<double>();
    const SupportScan scan = singular_support_scan(built.base, built.pert.vectors(), scan_config);

    Json summary = {{"flagged_count", scan.flagged.size()}, {"threshold", scan_config.threshold}};
    if (wants(config, "csv")) out.write("g_epsilon_scan.csv", measure_scan_csv(scan.g_values));
    if (wants(config, "json")) {
        Json doc = {{"flagged_theta", scan.flagged},
                    {"theta_grid", scan.theta_grid},
                    {"g_exponent", scan.g_exponent},
                    {"q_exponent", scan.q_exponent},
                    {"threshold", scan_config.threshold}};
        out.write("support_scan.json", doc.dump(2) + "\n");
    }
    if (config.params.at("density").get<bool>()) {
        const FloquetModel model(built.base, built.pert);
        const StateVector y = basis_state(model.dim(), config.params.at("initial_state").get<std::size_t>());
        const MeasureScan density = spectral_density(model, y, scan_config.axes);
        if (wants(config, "csv")) out.write("spectral_density.csv", measure_scan_csv(density));
        if (wants(config, "json")) out.write("spectral_density.json", to_json(density).dump() + "\n");
    }
    return summary;
}

Json run_verify(const ExperimentConfig& config, OutputSink& out, bool& pass) {
    const VerifySuite suite = run_verify_suite(config.seed);
    pass = suite.pass();
    Json reports = Json::array();
    Json summary = {{"pass", pass}, {"reports", Json::object()}};
    for (const auto& r : suite.reports) {
        reports.push_back(to_json(r));
        summary["reports"][r.name] = r.pass();
    }
    // Reports always go out as JSON; the grid CSV follows the format list.
    out.write("verify_report.json", Json{{"pass", pass}, {"reports", reports}}.dump(2) + "\n");
    if (wants(config, "csv")) out.write("fourier_grid.csv", fourier_grid_csv(suite.fourier_rows));
    return summary;
}

Json summability_of(const ExperimentConfig& config) {
    Json out = Json::array();
    if (!config.perturbation) return out;
    for (const auto& p : config.perturbation->profiles) out.push_back(to_json(classify_summability(p)));
    return out;
}

Json seed_registry(const ExperimentConfig& config) {
    Json profiles = Json::array();
    if (config.perturbation) {
        for (const auto& p : config.perturbation->profiles) {
            profiles.push_back(p.phase_seed ? Json(*p.phase_seed) : Json(nullptr));
        }
    }
    return {{"global", config.seed}, {"profile_phase_seeds", profiles}};
}

ExperimentConfig apply_seed_override(ExperimentConfig config, std::optional<std::uint64_t> seed) {
    if (!seed) return config;
    config.seed = *seed;
    if (config.perturbation) {
        for (std::size_t k = 0; k < config.perturbation->profiles.size(); ++k) {
            auto& p = config.perturbation->profiles[k];
            if (p.family != ProfileFamily::explicit_list) p.phase_seed = *seed + k;
        }
    }
    return config;
}

void check_outputs(const fs::path& dir, const std::vector<std::string>& outputs) {
    for (const auto& name : outputs) {
        const fs::path p = dir / name;
        if (!fs::exists(p) || fs::file_size(p) == 0) {
            throw std::runtime_error("declared output " + p.string() + " is missing or empty");
        }
    }
}

std::string sweep_csv(const std::vector<double>& values, const std::vector<Json>& summaries, ExperimentType base) {
    std::vector<std::string> columns;
    switch (base) {
        case ExperimentType::spectrum: columns = {"mean_ratio", "max_residual"}; break;
        case ExperimentType::evolve:
            columns = {"wiener_average", "growth_exponent", "growth_r2", "label", "max_tail_weight"};
            break;
        case ExperimentType::scan: columns = {"flagged_count"}; break;
        default: break;
    }
    std::string out(csv_schema_line);
    out += "\nvalue";
    for (const auto& c : columns) out += "," + c;
    out += '\n';
    auto cell = [](const Json& s, const std::string& column) -> std::string {
        const Json* v = nullptr;
        if (column == "growth_exponent" || column == "growth_r2") {
            const Json& g = s.contains("growth") ? s.at("growth") : Json();
            if (g.is_object()) v = &g.at(column == "growth_exponent" ? "exponent" : "r2");
        } else if (s.contains(column)) {
            v = &s.at(column);
        }
        if (!v || v->is_null()) return "";
        if (v->is_string()) return v->get<std::string>();
        if (v->is_number_integer()) return std::to_string(v->get<std::int64_t>());
        return format_number(v->get<double>());
    };
    for (std::size_t i = 0; i < values.size(); ++i) {
        out += format_number(values[i]);
        for (const auto& c : columns) out += "," + cell(summaries[i], c);
        out += '\n';
    }
    return out;
}

RunManifest run_single(const ExperimentConfig& config, const fs::path& dir, std::vector<std::string>& outputs) {
    RunManifest manifest;
    OutputSink sink(dir, outputs);
    switch (config.type) {
        case ExperimentType::spectrum: manifest.summary = run_spectrum(config, build_model(config), sink); break;
        case ExperimentType::evolve: manifest.summary = run_evolve(config, build_model(config), sink); break;
        case ExperimentType::scan: manifest.summary = run_scan(config, build_model(config), sink); break;
        case ExperimentType::verify: {
            bool pass = false;
            manifest.summary = run_verify(config, sink, pass);
            manifest.verify_pass = pass;
            break;
        }
        case ExperimentType::sweep: break;
    }
    return manifest;
}

}  // namespace

Json ExperimentConfig::to_json() const {
    Json doc = Json::object();
    if (model) {
        doc["model"] = {{"kind", floquet_lab::to_string(model->kind)},
                        {"dim", model->dim},
                        {"T", model->period_T},
                        {"hbar", model->hbar}};
        if (model->kind == BaseKind::custom) doc["model"]["custom_alpha"] = model->custom_alpha;
    }
    if (perturbation) {
        Json profiles = Json::array();
        for (const auto& p : perturbation->profiles) profiles.push_back(floquet_lab::to_json(p));
        doc["perturbation"] = {{"N", perturbation->rank}, {"profiles", profiles}, {"lambdas", perturbation->lambdas}};
    }
    doc["experiment"] = {{"type", floquet_lab::to_string(type)}, {"params", params}};
    doc["output"] = {{"directory", output_directory}, {"formats", formats}};
    doc["seed"] = seed;
    return doc;
}

ExperimentConfig config_from_json(const Json& doc) {
    if (!doc.is_object()) config_fail("<root>", "expected an object");
    ExperimentConfig config;

    const Json* experiment = find(doc, "experiment");
    if (!experiment) config_fail("experiment", "missing");
    require_object(*experiment, "experiment");
    const auto type_name = get_string(*experiment, "type", "experiment.");
    const auto type = parse_experiment_type(type_name);
    if (!type) config_fail("experiment.type", "unknown experiment '" + type_name + "'");
    config.type = *type;
    const Json params = experiment->contains("params") ? experiment->at("params") : Json::object();
    config.params = normalize_params(config.type, params, "experiment.params.");

    if (const Json* m = find(doc, "model")) config.model = parse_model(*m);
    if (const Json* p = find(doc, "perturbation")) {
        config.perturbation = parse_perturbation(*p, config.model ? config.model->dim : 1);
    }
    if (const Json* o = find(doc, "output")) {
        require_object(*o, "output");
        config.output_directory = get_string(*o, "directory", "output.", config.output_directory);
        if (const Json* f = find(*o, "formats")) {
            if (!f->is_array()) config_fail("output.formats", "expected an array of strings");
            config.formats.clear();
            for (std::size_t i = 0; i < f->size(); ++i) {
                const Json& v = (*f)[i];
                if (!v.is_string() || (v != "csv" && v != "json")) {
                    config_fail("output.formats[" + std::to_string(i) + "]", "expected \"csv\" or \"json\"");
                }
                config.formats.push_back(v.get<std::string>());
            }
        }
    }
    config.seed = get_unsigned(doc, "seed", "", config.seed);
    validate(config);
    return config;
}

ExperimentConfig parse_config(std::string_view text) {
    Json doc;
    try {
        doc = Json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        std::size_t line = 1, column = 1;
        for (std::size_t i = 0; i < upto; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw Error(ErrorKind::config_error,
                    "parse error at line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + e.what());
    }
    return config_from_json(doc);
}

void validate(const ExperimentConfig& config) {
    const bool needs_model = config.type != ExperimentType::verify;
    if (needs_model && (!config.model || !config.perturbation)) {
        validation_fail(std::string(to_string(config.type)) + " experiments need model and perturbation sections");
    }
    if (config.model) {
        const auto& m = *config.model;
        if (m.dim == 0) validation_fail("model.dim must be >= 1");
        if (!(m.period_T > 0.0)) validation_fail("model.T must be > 0");
        if (!(m.hbar > 0.0)) validation_fail("model.hbar must be > 0");
        if (m.kind == BaseKind::custom && m.custom_alpha.size() != m.dim) {
            validation_fail("model.custom_alpha has " + std::to_string(m.custom_alpha.size()) + " entries, dim is " +
                            std::to_string(m.dim));
        }
    }
    if (config.perturbation) {
        const auto& p = *config.perturbation;
        if (p.rank == 0) validation_fail("perturbation.N must be >= 1");
        if (p.lambdas.size() != p.rank || p.profiles.size() != p.rank) {
            validation_fail("perturbation.N = " + std::to_string(p.rank) + " but there are " +
                            std::to_string(p.profiles.size()) + " profiles and " + std::to_string(p.lambdas.size()) +
                            " lambdas");
        }
        if (config.model) {
            if (p.rank > config.model->dim) validation_fail("perturbation.N exceeds model.dim");
            for (std::size_t k = 0; k < p.profiles.size(); ++k) {
                if (p.profiles[k].dim != config.model->dim) {
                    validation_fail("perturbation.profiles[" + std::to_string(k) + "] has dim " +
                                    std::to_string(p.profiles[k].dim) + ", model.dim is " +
                                    std::to_string(config.model->dim));
                }
            }
        }
    }
    if (config.type == ExperimentType::sweep && config.params.at("axis").at("values").empty()) {
        validation_fail("sweep axis has no values");
    }
}

Json::json_pointer resolve_axis_path(const Json& normalized, std::string_view path) {
    auto to_pointer = [](std::string_view dotted) {
        std::string out;
        std::string token;
        auto flush = [&] {
            if (!token.empty()) out += "/" + token;
            token.clear();
        };
        for (char c : dotted) {
            if (c == '.' || c == '[') {
                flush();
            } else if (c == ']') {
                flush();
            } else {
                token += c;
            }
        }
        flush();
        return out;
    };
    const std::string p(path);
    std::vector<std::string> candidates = {p, "model." + p, "perturbation." + p, "perturbation.profiles[0]." + p};
    for (const auto& c : candidates) {
        try {
            Json::json_pointer ptr(to_pointer(c));
            if (normalized.contains(ptr) && normalized.at(ptr).is_number()) {
                // Sizes are not sweepable: dims must agree across sections.
                if (ptr.back() == "dim" || ptr.back() == "N") continue;
                return ptr;
            }
        } catch (const nlohmann::json::exception&) {
        }
    }
    config_fail("experiment.params.axis.path", "'" + p + "' is not a numeric parameter of the base experiment");
}

Json RunManifest::to_json() const {
    Json doc = {{"tool", "floquet-lab"},
                {"versions", versions},
                {"config", config},
                {"started_at", started_at},
                {"wall_clock_seconds", wall_clock_seconds},
                {"seeds", seeds},
                {"outputs", outputs},
                {"summability", summability},
                {"summary", summary}};
    if (verify_pass) doc["verify_pass"] = *verify_pass;
    if (!sweep.empty()) doc["sweep"] = sweep;
    return doc;
}

RunManifest run(const ExperimentConfig& input, const RunOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::string started_at = utc_timestamp();
    ExperimentConfig config = apply_seed_override(input, options.seed);
    if (options.out_dir) config.output_directory = options.out_dir->string();
    validate(config);
    const fs::path dir(config.output_directory);
    fs::create_directories(dir);

    RunManifest manifest;
    std::vector<std::string> outputs;
    if (config.type != ExperimentType::sweep) {
        manifest = run_single(config, dir, outputs);
    } else {
        const Json normalized = config.to_json();
        const Json& axis = config.params.at("axis");
        const auto pointer = resolve_axis_path(normalized, axis.at("path").get<std::string>());
        const auto values = axis.at("values").get<std::vector<double>>();
        const Json& base = config.params.at("base");

        std::vector<ExperimentConfig> runs;
        for (double value : values) {
            Json doc = normalized;
            doc["experiment"] = base;
            doc[pointer] = value;
            runs.push_back(config_from_json(doc));
        }

        std::vector<RunManifest> results(runs.size());
        std::vector<std::vector<std::string>> run_outputs(runs.size());
        std::vector<std::exception_ptr> failures(runs.size());
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i = next++; i < runs.size(); i = next++) {
                try {
                    char name[32];
                    std::snprintf(name, sizeof name, "sweep_%03zu", i);
                    results[i] = run_single(runs[i], dir / name, run_outputs[i]);
                    for (auto& f : run_outputs[i]) f = std::string(name) + "/" + f;
                } catch (...) {
                    failures[i] = std::current_exception();
                }
            }
        };
        const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(runs.size())));
        std::vector<std::thread> pool;
        for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
        worker();
        for (auto& t : pool) t.join();
        for (auto& f : failures) {
            if (f) std::rethrow_exception(f);
        }

        std::vector<Json> summaries;
        for (std::size_t i = 0; i < runs.size(); ++i) {
            summaries.push_back(results[i].summary);
            outputs.insert(outputs.end(), run_outputs[i].begin(), run_outputs[i].end());
            manifest.sweep.push_back({{"value", values[i]},
                                      {"outputs", run_outputs[i]},
                                      {"summary", results[i].summary},
                                      {"summability", summability_of(runs[i])},
                                      {"seeds", seed_registry(runs[i])}});
        }
        const auto base_type = *parse_experiment_type(base.at("type").get<std::string>());
        write_file_atomic(dir / "sweep.csv", sweep_csv(values, summaries, base_type));
        outputs.push_back("sweep.csv");
        manifest.summary = {{"axis", axis.at("path")}, {"pointer", pointer.to_string()}, {"runs", runs.size()}};
    }

    check_outputs(dir, outputs);
    manifest.config = config.to_json();
    manifest.started_at = started_at;
    manifest.seeds = seed_registry(config);
    manifest.versions = versions();
    manifest.outputs = outputs;
    manifest.summability = summability_of(config);
    manifest.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_file_atomic(dir / "manifest.json", manifest.to_json().dump(2) + "\n");
    return manifest;
}

RunManifest run_file(const fs::path& config_path, const RunOptions& options) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw Error(ErrorKind::config_error, "cannot read config file " + config_path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return run(parse_config(buffer.str()), options);
}

}  // namespace floquet_lab
