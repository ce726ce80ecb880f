#include "floquet_lab/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "floquet_lab/error.hpp"

namespace floquet_lab {

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << std::setprecision(17) << x;
    return os.str();
}

Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Complex complex_from_json(const Json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw Error(ErrorKind::invalid_input, "complex numbers are [re, im] pairs");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

Json to_json(const BaseHamiltonian& base) {
    return {{"dim", base.dim()}, {"alpha", base.alpha()}, {"period_T", base.period()}, {"hbar", base.hbar()}};
}

BaseHamiltonian base_from_json(const Json& j) {
    try {
        auto alpha = j.at("alpha").get<std::vector<double>>();
        if (j.contains("dim") && j.at("dim").get<std::size_t>() != alpha.size()) {
            throw Error(ErrorKind::invalid_input, "alpha length does not match dim");
        }
        return BaseHamiltonian(std::move(alpha), j.value("period_T", default_period), j.value("hbar", 1.0));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::invalid_input, std::string("malformed base Hamiltonian: ") + e.what());
    }
}

Json to_json(const CoefficientProfile& profile) {
    Json j = {{"family", to_string(profile.family)}, {"dim", profile.dim}};
    switch (profile.family) {
        case ProfileFamily::power_law: j["gamma"] = profile.gamma; break;
        case ProfileFamily::exponential: j["rate"] = profile.rate; break;
        case ProfileFamily::explicit_list: {
            Json values = Json::array();
            for (const auto& v : profile.values) values.push_back(complex_to_json(v));
            j["values"] = std::move(values);
            if (profile.tail_gamma) j["tail_gamma"] = *profile.tail_gamma;
            break;
        }
    }
    if (profile.phase_seed) j["phase_seed"] = *profile.phase_seed;
    return j;
}

CoefficientProfile profile_from_json(const Json& j) {
    try {
        const auto name = j.at("family").get<std::string>();
        const auto family = parse_profile_family(name);
        if (!family) throw Error(ErrorKind::invalid_input, "unknown profile family '" + name + "'");
        CoefficientProfile p;
        p.family = *family;
        if (p.family == ProfileFamily::explicit_list) {
            for (const auto& v : j.at("values")) p.values.push_back(complex_from_json(v));
            p.dim = j.value("dim", p.values.size());
            if (j.contains("tail_gamma")) p.tail_gamma = j.at("tail_gamma").get<double>();
        } else {
            p.dim = j.at("dim").get<std::size_t>();
            p.gamma = j.value("gamma", p.gamma);
            p.rate = j.value("rate", p.rate);
        }
        if (j.contains("phase_seed") && !j.at("phase_seed").is_null()) {
            p.phase_seed = j.at("phase_seed").get<std::uint64_t>();
        }
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::invalid_input, std::string("malformed profile: ") + e.what());
    }
}

Json to_json(const SummabilityClass& cls) {
    return {{"tag", to_string(cls.tag)},
            {"l1_partial", cls.l1_partial},
            {"divergence_estimate", std::isfinite(cls.divergence_estimate) ? Json(cls.divergence_estimate) : Json("inf")},
            {"truncated_classification", cls.truncated_classification}};
}

Json matrix_to_json(const CMatrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
        rows.push_back(std::move(row));
    }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

CMatrix matrix_from_json(const Json& j) {
    try {
        const auto rows = j.at("rows").get<Eigen::Index>();
        const auto cols = j.at("cols").get<Eigen::Index>();
        const Json& data = j.at("data");
        if (static_cast<Eigen::Index>(data.size()) != rows) throw Error(ErrorKind::invalid_input, "row count mismatch");
        CMatrix m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i) {
            if (static_cast<Eigen::Index>(data[i].size()) != cols) {
                throw Error(ErrorKind::invalid_input, "column count mismatch");
            }
            for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = complex_from_json(data[i][k]);
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::invalid_input, std::string("malformed matrix: ") + e.what());
    }
}

Json to_json(const SpectralResult& result) {
    return {{"dim", result.dim()},
            {"converged", result.converged},
            {"theta", result.theta},
            {"residuals", result.residuals},
            {"eigenvectors", matrix_to_json(result.eigenvectors)}};
}

Json to_json(const SpacingStats& stats) {
    return {{"spacings", stats.spacings},
            {"ratios", stats.ratios},
            {"mean_ratio", stats.mean_ratio},
            {"cdf", {{"x", stats.cdf_x}, {"y", stats.cdf_y}}}};
}

Json to_json(const MeasureScan& scan) {
    return {{"theta_grid", scan.theta_grid}, {"epsilon_ladder", scan.epsilon_ladder}, {"values", scan.values}};
}

namespace {

Json number_or_string(double x) { return std::isfinite(x) ? Json(x) : Json(format_number(x)); }

std::string_view to_string(CheckKind kind) {
    switch (kind) {
        case CheckKind::equality: return "equality";
        case CheckKind::positivity: return "positivity";
        case CheckKind::predicate: return "predicate";
    }
    return "unknown";
}

}  // namespace

Json to_json(const KernelCheck& check) {
    return {{"name", check.name},
            {"kind", to_string(check.kind)},
            {"tolerance", check.tolerance},
            {"max_abs_error", number_or_string(check.max_abs_error)},
            {"min_value", number_or_string(check.min_value)},
            {"samples", check.samples},
            {"pass", check.pass}};
}

Json to_json(const KernelCheckReport& report) {
    Json checks = Json::array(), diagnostics = Json::array();
    for (const auto& c : report.checks) checks.push_back(to_json(c));
    for (const auto& c : report.diagnostics) diagnostics.push_back(to_json(c));
    return {{"name", report.name},
            {"grid", report.grid},
            {"pass", report.pass()},
            {"max_abs_error", report.max_abs_error()},
            {"checks", std::move(checks)},
            {"diagnostics", std::move(diagnostics)},
            {"findings", report.findings}};
}

Json to_json(const GrowthFit& fit) {
    return {{"exponent", fit.exponent},
            {"r2", fit.r2},
            {"offset_applied", fit.offset_applied},
            {"offset", fit.offset},
            {"samples", fit.samples}};
}

std::string measure_scan_csv(const MeasureScan& scan) {
    std::string out(csv_schema_line);
    out += "\ntheta,epsilon,value\n";
    for (std::size_t i = 0; i < scan.theta_grid.size(); ++i) {
        for (std::size_t k = 0; k < scan.epsilon_ladder.size(); ++k) {
            out += format_number(scan.theta_grid[i]) + ',' + format_number(scan.epsilon_ladder[k]) + ',' +
                   format_number(scan.at(i, k)) + '\n';
        }
    }
    return out;
}

std::string spectrum_csv(const SpectralResult& result) {
    std::string out(csv_schema_line);
    out += "\nj,theta,residual\n";
    for (std::size_t j = 0; j < result.dim(); ++j) {
        out += std::to_string(j) + ',' + format_number(result.theta[j]) + ',' + format_number(result.residuals[j]) + '\n';
    }
    return out;
}

std::string trajectory_csv(const TrajectoryRecord& record) {
    std::string out(csv_schema_line);
    out += "\nn,energy,re_autocorr,im_autocorr,participation,norm_drift\n";
    for (std::size_t i = 0; i < record.n.size(); ++i) {
        out += std::to_string(record.n[i]) + ',' + format_number(record.energy[i]) + ',' +
               format_number(record.autocorr[i].real()) + ',' + format_number(record.autocorr[i].imag()) + ',' +
               format_number(record.participation[i]) + ',' + format_number(record.norm_drift[i]) + '\n';
    }
    return out;
}

std::string fourier_grid_csv(std::span<const FourierGridRow> rows) {
    std::string out(csv_schema_line);
    out += "\nomega,kappa,analytic,numeric,abs_err\n";
    for (const auto& r : rows) {
        out += format_number(r.omega) + ',' + format_number(r.kappa) + ',' + format_number(r.analytic) + ',' +
               format_number(r.numeric) + ',' + format_number(std::abs(r.analytic - r.numeric)) + '\n';
    }
    return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw std::runtime_error("failed writing " + tmp.string());
    }
    fs::rename(tmp, path);
}

}  // namespace floquet_lab
