#pragma once

#include "duc/chain.hpp"
#include "duc/spectra.hpp"

#include <limits>
#include <vector>

namespace duc {

/// Two-level system. Infinite t1/t2_star means no damping.
struct QubitSpec {
    double f_qubit_hz = 5.61e9;
    double t1_s = std::numeric_limits<double>::infinity();
    double t2_star_s = std::numeric_limits<double>::infinity();
    double drive_coupling = 2e9; // rad/s per volt of tone amplitude

    /// Throws std::invalid_argument unless all fields are positive and
    /// t2_star <= 2 * t1.
    void validate() const;
};

/// Peak voltage of a tone of the given power into 50 ohm.
double tone_amplitude_v(double power_dbm);

struct DriveOptions {
    /// Tones further than this from the qubit are ignored.
    double detuning_cutoff_hz = std::numeric_limits<double>::infinity();
    /// RK4 steps per cycle of the fastest rate in the problem.
    double steps_per_cycle = 50.0;
};

/// Excited population after driving from the ground state for `duration_s`
/// with every tone of the spectrum. Rotating frame at f_qubit, rotating-wave
/// approximation per tone, Rabi rate per tone = coupling * scale * V_peak.
/// Fixed-step RK4 on the Bloch vector with T1/T2* relaxation.
double drive_response(const QubitSpec& qubit, const Spectrum& spectrum, double duration_s,
                      double amplitude_scale, const DriveOptions& options = {});

/// Population versus dimensionless drive amplitude. The spectrum is scaled
/// so the strongest tone has Rabi rate coupling * amplitude; the default is
/// a single resonant tone.
std::vector<double> rabi_sweep(const QubitSpec& qubit, const std::vector<double>& amplitudes,
                               double duration_s = 50e-9);
std::vector<double> rabi_sweep(const QubitSpec& qubit, const Spectrum& spectrum,
                               const std::vector<double>& amplitudes, double duration_s = 50e-9,
                               const DriveOptions& options = {});

/// Ideal Ramsey fringe with instantaneous pi/2 pulses:
/// P(t) = (1 + exp(-t/T2*) cos(2 pi detuning t)) / 2.
std::vector<double> ramsey_sweep(const QubitSpec& qubit, double detuning_hz, const std::vector<double>& waits_s);

/// Weak continuous-drive steady state. Each tone contributes its own
/// Lorentzian, (1/2) W T1 T2 / (1 + (Delta T2)^2 + W T1 T2) with W the
/// squared Rabi rate; contributions add (valid while the total stays well
/// below saturation) and the sum is capped at 1/2.
double steady_state_population(const QubitSpec& qubit, const Spectrum& spectrum, double amplitude_scale);

/// For each target: plan, propagate, steady-state population. Points whose
/// planning fails come back as NaN.
std::vector<double> spectroscopy_sweep(const QubitSpec& qubit, const DoubleUpconversionTemplate& setup,
                                       const std::vector<double>& targets_hz, const Spectrum& input,
                                       double amplitude_scale);

} // namespace duc
