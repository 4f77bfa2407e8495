#pragma once

#include "duc/planner.hpp"
#include "duc/responses.hpp"
#include "duc/spectra.hpp"

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace duc {

struct MixerStage {
    MixerSpec spec;
    Tone lo;
};

struct FilterStage {
    std::string name = "filter";
    FilterResponse response;
};

struct AttenuatorStage {
    double attenuation_db = 0.0;
};

/// Where a leakage path picks up its signal: the output spectrum of an
/// earlier stage, or the LO tone driving an earlier mixer stage.
enum class LeakageSource { StageOutput, MixerLo };

struct LeakageCoupling {
    LeakageSource source = LeakageSource::StageOutput;
    std::size_t stage_index = 0;
    double coupling_db = -kUnbounded; // -inf disables the path
};

struct LeakageStage {
    std::vector<LeakageCoupling> couplings;
};

using Stage = std::variant<MixerStage, FilterStage, AttenuatorStage, LeakageStage>;

struct PropagationOptions {
    int max_order = 3;
    double power_floor_dbm = -120.0;
};

class Chain {
public:
    Chain() = default;
    /// Throws std::invalid_argument if a leakage coupling references a stage
    /// that does not precede it, or a MixerLo source that is not a mixer.
    explicit Chain(std::vector<Stage> stages);

    const std::vector<Stage>& stages() const { return m_stages; }
    std::size_t size() const { return m_stages.size(); }
    std::size_t mixer_count() const;

    /// A copy with the LO of mixer stage `stage_index` replaced.
    Chain with_lo(std::size_t stage_index, const Tone& lo) const;

private:
    std::vector<Stage> m_stages;
};

/// [Mixer1, Filter1, Mixer2, Filter2] plus an optional trailing Leakage.
/// Throws RangeError naming the mixer stage whose LO is out of range.
Chain build_double_upconversion(const MixerSpec& mixer1, const MixerSpec& mixer2,
                                const FilterResponse& filter1, const FilterResponse& filter2,
                                const Tone& lo1, const Tone& lo2,
                                const std::optional<LeakageStage>& leakage = std::nullopt);

/// Spectrum after each stage. Tones below the power floor are dropped after
/// every stage. Throws std::invalid_argument on an empty input.
std::vector<Spectrum> propagate(const Chain& chain, const Spectrum& input,
                                const PropagationOptions& options = {});
std::vector<Spectrum> propagate(const Chain& chain, const Spectrum& input, int max_order);

/// Final output, or the input itself for an empty chain.
Spectrum propagate_output(const Chain& chain, const Spectrum& input,
                          const PropagationOptions& options = {});

/// Everything needed to rebuild the double-upconversion chain for a new
/// target: components, LO powers, planning constraints and leakage paths.
/// Leakage stage indices refer to the four-stage chain (0 = mixer 1,
/// 1 = filter 1, 2 = mixer 2, 3 = filter 2).
struct DoubleUpconversionTemplate {
    MixerSpec mixer1;
    MixerSpec mixer2;
    FilterResponse filter1;
    FilterResponse filter2;
    PlanConstraints constraints;
    double lo1_power_dbm = 10.0;
    double lo2_power_dbm = 10.0;
    std::vector<LeakageCoupling> leakage;
    PropagationOptions options;
};

/// LO1 from plan_lo1 and LO2 for the target.
Plan plan_for(const DoubleUpconversionTemplate& setup, double target_hz);
Chain chain_for(const DoubleUpconversionTemplate& setup, const Plan& plan);

struct DbcPoint {
    double target_hz = 0.0;
    double lo2_hz = 0.0;
    double dbc_db = 0.0;           // |dbc_vs(output, target, lo2)|, kUnbounded if LO2 is absent
    std::optional<std::string> error; // planning error; the other fields are then unset
};

/// One point per target in input order. Points are computed in parallel.
std::vector<DbcPoint> sweep_dbc(const DoubleUpconversionTemplate& setup,
                                const std::vector<double>& targets_hz, const Spectrum& input);
DbcPoint evaluate_dbc(const DoubleUpconversionTemplate& setup, double target_hz,
                      const Spectrum& input);

/// `target_hz,dbc_db,lo2_hz`; failed points are written with empty fields.
void write_sweep_csv(std::ostream& out, const std::vector<DbcPoint>& points);

/// Unwanted-sideband suppression of an IQ modulator, in dB (positive).
/// Returns kUnbounded for perfect quadrature.
double iq_image_rejection(double amplitude_imbalance_db, double phase_error_deg);

/// Phase error (degrees, >= 0) that gives `rejection_db` at the given
/// imbalance, or nullopt if the imbalance alone already limits rejection
/// below the target.
std::optional<double> iq_phase_error_for_rejection(double amplitude_imbalance_db,
                                                   double rejection_db);

} // namespace duc
