#pragma once

#include "duc/chain.hpp"
#include "duc/fit.hpp"
#include "duc/microstrip.hpp"
#include "duc/planner.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace duc {

/// "5.026e9", "5.026GHz", "450 MHz", "10kHz", "7Hz". Throws ConfigError.
double parse_frequency(std::string_view text);

/// Chain config as read from JSON. Frequencies accept numbers or SI strings.
///
/// {
///   "input": [{"frequency_hz": "450MHz", "power_dbm": 10}],
///   "mixers": [{...}, {...}],           // exactly two
///   "filters": [{...}, {...}],          // exactly two; "prototype" | "touchstone" | "cascade"
///   "lo1_hz": ..., "lo2_hz": ...,       // optional, planned when absent
///   "lo1_power_dbm": 10, "lo2_power_dbm": 10,
///   "leakage": [{"source": "stage" | "lo", "stage": 1, "coupling_db": -45}],
///   "plan": {"if_range_hz": [..], "stage1_passband_hz": [..], "stage2_passband_hz": [..],
///            "stage1_sideband": "lower", "stage2_sideband": "lower", "target_hz": ...},
///   "max_order": 3, "power_floor_dbm": -120, "merge_tolerance_hz": 1000
/// }
///
/// Unknown keys anywhere are rejected. Mixer LO ranges feed the plan
/// constraints. Touchstone paths are resolved against `base_dir`.
struct ChainConfig {
    DoubleUpconversionTemplate setup;
    Spectrum input;
    std::optional<double> lo1_hz;
    std::optional<double> lo2_hz;
    std::optional<double> target_hz;
};

ChainConfig parse_chain_config(std::string_view json_text, const std::filesystem::path& base_dir = ".");
ChainConfig load_chain_config(const std::filesystem::path& path);

/// The plan the config describes: LO1 from the config or plan_lo1, LO2 from
/// the config or planned for the target. Throws PlanningError.
Plan resolve_plan(const ChainConfig& config, std::optional<double> target_override = std::nullopt);

std::string plan_to_json(const Plan& plan);
std::string geometry_to_json(const ParallelCoupledGeometry& geometry);
ParallelCoupledGeometry parse_geometry_json(std::string_view json_text);
std::string passband_metrics_to_json(const PassbandMetrics& metrics);
std::string fit_to_json(const FitResult& fit);

/// `x,population` rows, 17 significant digits.
void write_xy_csv(std::ostream& out, const std::vector<double>& x, const std::vector<double>& population);

/// `frequency_hz,s21_db` rows, 9 significant digits.
void write_response_csv(std::ostream& out, const TabulatedResponse& response);

} // namespace duc
