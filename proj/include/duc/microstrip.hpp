#pragma once

#include "duc/responses.hpp"
#include "duc/two_port.hpp"

#include <optional>
#include <string>
#include <vector>

namespace duc {

/// Dielectric board under a microstrip. Analysis is quasi-static and
/// lossless; conductor thickness and loss tangent are carried for
/// documentation and manufacturability only.
struct Substrate {
    double eps_r = 4.35;
    double height_m = 1.6e-3;
    double loss_tangent = 0.0;
    double conductor_thickness_m = 35e-6;

    void validate() const;
};

struct LineParameters {
    double z0_ohm = 0.0;
    double eps_eff = 1.0;
};

/// Hammerstad-Jensen single-line characteristic impedance and effective
/// permittivity (zero strip thickness, no dispersion).
LineParameters line_parameters(double width_m, const Substrate& substrate);

/// Width giving the requested impedance, by bisection on line_parameters.
double line_width_for_impedance(double z0_ohm, const Substrate& substrate);

struct CoupledLineParameters {
    double z0_even_ohm = 0.0;
    double z0_odd_ohm = 0.0;
    double eps_eff_even = 1.0;
    double eps_eff_odd = 1.0;
};

/// Garg-Bahl static even/odd-mode model of a symmetric coupled pair.
CoupledLineParameters coupled_line_parameters(double width_m, double gap_m,
                                              const Substrate& substrate);

struct CoupledSection {
    double width_m = 0.0;
    double length_m = 0.0;
    double gap_m = 0.0;
};

struct ParallelCoupledGeometry {
    std::vector<CoupledSection> sections;
    Substrate substrate;

    /// All dimensions positive and section k equal to section (count+1-k).
    void validate() const;
};

/// Tapped interdigital layout: feed width W0, resonator width W and length L,
/// tap position t, end gap e, inter-resonator gaps S1..S3 (mirrored about
/// the middle resonator) and board thickness d.
struct InterdigitalGeometry {
    double feed_width_m = 0.0;
    double resonator_width_m = 0.0;
    double resonator_length_m = 0.0;
    double tap_m = 0.0;
    double end_gap_m = 0.0;
    double gaps_m[3] = {0.0, 0.0, 0.0};
    double board_thickness_m = 0.0;

    void validate() const;
};

/// Fabricated interdigital first-stage filter (3-3.5 GHz design).
InterdigitalGeometry reference_interdigital_geometry();
/// Fabricated parallel-coupled second-stage filter (4.5-8 GHz design).
ParallelCoupledGeometry reference_parallel_coupled_geometry();

struct ParallelCoupledSpec {
    FilterFamily family = FilterFamily::Butterworth;
    int order = 5;
    double f_low_hz = 0.0;
    double f_high_hz = 0.0;
    double z0_ohm = 50.0;
    std::optional<double> ripple_db;
};

/// Even/odd-mode impedances required for each of the order+1 sections.
std::vector<CoupledLineParameters> required_section_impedances(const ParallelCoupledSpec& spec);

/// Admittance-inverter synthesis of a parallel-coupled bandpass filter.
/// Each (Z0e, Z0o) pair is inverted to (width, gap) with a damped Newton
/// solve (bisection fallback). Throws SynthesisError naming the section when
/// the requested coupling is not realisable on the substrate.
ParallelCoupledGeometry synthesize_parallel_coupled(const ParallelCoupledSpec& spec,
                                                    const Substrate& substrate);

/// ABCD matrix of one coupled-line bandpass section (diagonal ports used,
/// the other two open) at frequency f.
Abcd coupled_section_abcd(const CoupledSection& section, const Substrate& substrate, double f_hz);

/// |S21| of the cascaded sections between z0_ohm ports.
TabulatedResponse analyze_parallel_coupled(const ParallelCoupledGeometry& geometry,
                                           const std::vector<double>& grid_hz,
                                           double z0_ohm = 50.0);

inline constexpr double kMinimumFeatureM = 0.2e-3;

struct Violation {
    std::string parameter;
    double value_m = 0.0;
};

/// Widths and gaps below the minimum feature size (inclusive bound).
std::vector<Violation> manufacturability_check(const ParallelCoupledGeometry& geometry,
                                               double min_feature_m = kMinimumFeatureM);
std::vector<Violation> manufacturability_check(const InterdigitalGeometry& geometry,
                                               double min_feature_m = kMinimumFeatureM);

} // namespace duc
