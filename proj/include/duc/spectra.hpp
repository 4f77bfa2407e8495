#pragma once

#include "duc/responses.hpp"

#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace duc {

inline constexpr double kDefaultMergeToleranceHz = 1e3;
inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

struct Tone {
    double frequency_hz = 0.0;
    double power_dbm = 0.0;
    std::string label;

    /// Throws std::invalid_argument unless frequency is finite and positive
    /// and power is finite.
    void validate() const;
};

/// Tones sorted by frequency with no two closer than the merge tolerance.
/// Construction merges coincident tones by summing linear power.
class Spectrum {
public:
    Spectrum() = default;
    explicit Spectrum(std::vector<Tone> tones,
                      double merge_tolerance_hz = kDefaultMergeToleranceHz);

    const std::vector<Tone>& tones() const { return m_tones; }
    double merge_tolerance_hz() const { return m_tolerance; }
    std::size_t size() const { return m_tones.size(); }
    bool empty() const { return m_tones.empty(); }

    /// Tone within the merge tolerance of f, or nullptr.
    const Tone* find(double f_hz) const;
    /// As find(), but throws LookupError naming the frequency.
    const Tone& at(double f_hz) const;

    /// Same spectrum with every power offset by delta_db.
    Spectrum offset(double delta_db) const;
    /// Drops tones below floor_dbm.
    Spectrum pruned(double floor_dbm) const;

    bool operator==(const Spectrum& other) const;

private:
    std::vector<Tone> m_tones;
    double m_tolerance = kDefaultMergeToleranceHz;
};

double dbm_to_mw(double dbm);
double mw_to_dbm(double mw);

/// Groups tones whose neighbours lie within tolerance (chained), sums their
/// linear power, keeps the strongest member's frequency and joins labels
/// with " + ". The result is sorted ascending.
Spectrum merge(const Spectrum& spectrum, double tolerance_hz);
Spectrum merge(std::vector<Tone> tones, double tolerance_hz);

/// Mixer non-idealities. Spur suppression is relative to the (1,1) product;
/// entries in `spur_table` override the fallback rule
/// `spur_slope_db * (|m| + |n| - 2)` for |n| >= 1. Products with n = 0 are
/// LO harmonics on the signal path and are suppressed (not emitted) unless
/// the table lists them; LO feedthrough is modelled by lo_to_rf_isolation_db.
/// Infinite values disable a path entirely.
struct MixerSpec {
    std::string name = "mixer";
    double conversion_loss_db = 7.0;
    double lo_to_rf_isolation_db = 35.0;
    double if_to_rf_isolation_db = 30.0;
    double spur_slope_db = 10.0;
    std::map<std::pair<int, int>, double> spur_table;
    std::pair<double, double> lo_range_hz{0.0, kUnbounded};

    void validate() const;
    double spur_suppression_db(int m, int n) const;
};

/// All products |m*f_lo + n*f_in| for 1 <= m <= max_order, |n| <= max_order
/// (the (m,n) and (-m,-n) pairs describe the same product and are counted
/// once), plus LO leakage and per-tone input feedthrough. DC products are
/// dropped. Throws RangeError naming the mixer if the LO is out of range.
Spectrum mix(const Spectrum& input, const Tone& lo, const MixerSpec& mixer, int max_order);

/// Reduces every tone by the response's |S21| at its frequency.
Spectrum apply_response(const Spectrum& spectrum, const FilterResponse& response);

/// P(reference) - P(desired) in dB. Throws LookupError if either is absent.
double dbc_vs(const Spectrum& spectrum, double desired_hz, double reference_hz);

/// P(desired) minus the strongest other tone inside [band.first, band.second].
/// Returns kUnbounded when no other tone lies in the band.
double sfdr(const Spectrum& spectrum, double desired_hz, std::pair<double, double> band_hz);

/// `frequency_hz,power_dbm,label` with 9 significant digits.
void write_csv(std::ostream& out, const Spectrum& spectrum);
std::string to_csv(const Spectrum& spectrum);

} // namespace duc
