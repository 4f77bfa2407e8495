#pragma once

#include <optional>
#include <utility>
#include <variant>
#include <vector>

namespace duc {

enum class FilterFamily { Butterworth, Chebyshev };
enum class FilterKind { Bandpass, Lowpass };

/// Normalised lowpass-prototype element values g1..gn followed by the load
/// g(n+1). Chebyshev requires a ripple; Butterworth rejects one.
std::vector<double> prototype_g_values(FilterFamily family, int order,
                                       std::optional<double> ripple_db = std::nullopt);

/// Analytic filter surrogate.
///
/// Bandpass responses use the geometric centre f0 = sqrt(f_low * f_high) and
/// the mapping w = (f/f0 - f0/f) / ((f_high - f_low) / f0). Lowpass responses
/// use w = f / f_high. The Butterworth edge (|w| = 1) sits at -3.0103 dB
/// below the insertion loss; the Chebyshev edge sits at the ripple level.
///
/// `stopband_floor_db` optionally caps the rejection: the response never
/// drops below that absolute level. It models parasitic feedthrough around
/// a real board-level filter.
struct PrototypeResponse {
    FilterFamily family = FilterFamily::Butterworth;
    int order = 5;
    FilterKind kind = FilterKind::Bandpass;
    double f_low_hz = 0.0;  // bandpass only
    double f_high_hz = 0.0; // upper edge, or cutoff for lowpass
    std::optional<double> ripple_db;
    double insertion_loss_db = 0.0;
    std::optional<double> stopband_floor_db;

    /// Throws std::invalid_argument when the invariants do not hold.
    void validate() const;

    double center_hz() const;
    /// Normalised lowpass frequency for f.
    double normalized_frequency(double f_hz) const;
};

enum class Extrapolation { HoldLast, Floor };

/// Measured |S21| samples with linear-in-dB interpolation over linear frequency.
struct TabulatedResponse {
    std::vector<std::pair<double, double>> points; // (frequency_hz, s21_db)
    Extrapolation extrapolation = Extrapolation::HoldLast;

    void validate() const;
};

using ResponseElement = std::variant<PrototypeResponse, TabulatedResponse>;

/// A cascade of one or more response elements; dB values add.
class FilterResponse {
public:
    FilterResponse() = default;
    FilterResponse(PrototypeResponse p) : m_elements{std::move(p)} { validate(); }
    FilterResponse(TabulatedResponse t) : m_elements{std::move(t)} { validate(); }
    explicit FilterResponse(std::vector<ResponseElement> elements)
        : m_elements(std::move(elements)) { validate(); }

    const std::vector<ResponseElement>& elements() const { return m_elements; }
    bool empty() const { return m_elements.empty(); }

    /// |S21| in dB at f.
    double s21_db(double f_hz) const;

    FilterResponse then(const FilterResponse& next) const;

private:
    void validate() const;
    std::vector<ResponseElement> m_elements;
};

double evaluate_s21(const PrototypeResponse& response, double f_hz);
double evaluate_s21(const TabulatedResponse& response, double f_hz);
double evaluate_s21(const ResponseElement& response, double f_hz);

/// Sample a response on a frequency grid.
TabulatedResponse sample(const FilterResponse& response, const std::vector<double>& grid_hz,
                         Extrapolation extrapolation = Extrapolation::HoldLast);

struct PassbandMetrics {
    double f_low_edge_hz = 0.0;
    double f_high_edge_hz = 0.0;
    double mean_insertion_loss_db = 0.0;
    double min_insertion_loss_db = 0.0;
};

/// Edges are the outermost crossings of (peak - edge_drop_db) around the
/// global peak, linearly interpolated between samples. Throws
/// NoPassbandError if the data never falls below the threshold on one side.
PassbandMetrics passband_metrics(const TabulatedResponse& response, double edge_drop_db = 3.0);

} // namespace duc
