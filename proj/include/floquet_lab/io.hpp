#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "floquet_lab/dynamics.hpp"
#include "floquet_lab/spectral.hpp"
#include "floquet_lab/verify.hpp"

namespace floquet_lab {

using Json = nlohmann::json;

inline constexpr std::string_view csv_schema_line = "# floquet-lab schema v1";

/// Shortest round-trip-safe rendering fixed at 17 significant digits.
std::string format_number(double x);

Json complex_to_json(Complex z);
Complex complex_from_json(const Json& j);

Json to_json(const BaseHamiltonian& base);
BaseHamiltonian base_from_json(const Json& j);

Json to_json(const CoefficientProfile& profile);
CoefficientProfile profile_from_json(const Json& j);

Json to_json(const SummabilityClass& cls);

/// Row-major [[re, im], ...] rows.
Json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const Json& j);

Json to_json(const SpectralResult& result);
Json to_json(const SpacingStats& stats);
Json to_json(const MeasureScan& scan);
Json to_json(const KernelCheck& check);
Json to_json(const KernelCheckReport& report);
Json to_json(const GrowthFit& fit);

/// CSV documents; every one starts with the schema line.
std::string measure_scan_csv(const MeasureScan& scan);
std::string spectrum_csv(const SpectralResult& result);
std::string trajectory_csv(const TrajectoryRecord& record);
std::string fourier_grid_csv(std::span<const FourierGridRow> rows);

/// Writes through a temporary sibling file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace floquet_lab
