#include "duc/responses.hpp"

#include "duc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace duc {

namespace {

// Chebyshev polynomial of the first kind, valid for any real w.
double chebyshev_t(int n, double w) {
    const double a = std::abs(w);
    if (a <= 1.0) {
        return std::cos(n * std::acos(w));
    }
    const double magnitude = std::cosh(n * std::acosh(a));
    return (w < 0.0 && n % 2 == 1) ? -magnitude : magnitude;
}

} // namespace

std::vector<double> prototype_g_values(FilterFamily family, int order,
                                       std::optional<double> ripple_db) {
    if (order < 1) {
        throw std::invalid_argument("prototype order must be >= 1");
    }
    const double pi = std::numbers::pi;
    std::vector<double> g(order + 1);

    if (family == FilterFamily::Butterworth) {
        if (ripple_db) {
            throw std::invalid_argument("ripple is not defined for a Butterworth prototype");
        }
        for (int k = 1; k <= order; ++k) {
            g[k - 1] = 2.0 * std::sin((2.0 * k - 1.0) * pi / (2.0 * order));
        }
        g[order] = 1.0;
        return g;
    }

    if (!ripple_db || !(*ripple_db > 0.0)) {
        throw std::invalid_argument("Chebyshev prototype requires ripple_db > 0");
    }
    // Matthaei, Young & Jones recurrence.
    const double beta = std::log(1.0 / std::tanh(*ripple_db / (40.0 / std::log(10.0))));
    const double gamma = std::sinh(beta / (2.0 * order));
    auto a = [&](int k) { return std::sin((2.0 * k - 1.0) * pi / (2.0 * order)); };
    auto b = [&](int k) {
        const double s = std::sin(k * pi / order);
        return gamma * gamma + s * s;
    };
    g[0] = 2.0 * a(1) / gamma;
    for (int k = 2; k <= order; ++k) {
        g[k - 1] = 4.0 * a(k - 1) * a(k) / (b(k - 1) * g[k - 2]);
    }
    if (order % 2 == 1) {
        g[order] = 1.0;
    } else {
        const double c = 1.0 / std::tanh(beta / 4.0);
        g[order] = c * c;
    }
    return g;
}

void PrototypeResponse::validate() const {
    if (order < 1) {
        throw std::invalid_argument("prototype order must be >= 1");
    }
    if (kind == FilterKind::Bandpass) {
        if (!(f_low_hz > 0.0) || !(f_high_hz > f_low_hz)) {
            throw std::invalid_argument("bandpass prototype requires 0 < f_low < f_high");
        }
    } else if (!(f_high_hz > 0.0)) {
        throw std::invalid_argument("lowpass prototype requires a positive cutoff");
    }
    if (family == FilterFamily::Chebyshev) {
        if (!ripple_db || !(*ripple_db > 0.0)) {
            throw std::invalid_argument("Chebyshev prototype requires ripple_db > 0");
        }
    } else if (ripple_db) {
        throw std::invalid_argument("ripple is only defined for Chebyshev prototypes");
    }
    if (!(insertion_loss_db >= 0.0)) {
        throw std::invalid_argument("insertion loss must be >= 0 dB");
    }
    if (stopband_floor_db && !(*stopband_floor_db <= -insertion_loss_db)) {
        throw std::invalid_argument("stopband floor must lie at or below -insertion_loss_db");
    }
}

double PrototypeResponse::center_hz() const {
    return kind == FilterKind::Bandpass ? std::sqrt(f_low_hz * f_high_hz) : 0.0;
}

double PrototypeResponse::normalized_frequency(double f_hz) const {
    if (kind == FilterKind::Lowpass) {
        return f_hz / f_high_hz;
    }
    const double f0 = center_hz();
    const double fractional_bw = (f_high_hz - f_low_hz) / f0;
    return (f_hz / f0 - f0 / f_hz) / fractional_bw;
}

double evaluate_s21(const PrototypeResponse& r, double f_hz) {
    const double w = r.normalized_frequency(f_hz);
    double rejection_db;
    if (r.family == FilterFamily::Butterworth) {
        // pow(w, 2n) overflows far into the stopband.
        const double aw = std::abs(w);
        if (aw > 1e3) {
            rejection_db = 20.0 * r.order * std::log10(aw);
        } else {
            rejection_db = 10.0 * std::log10(1.0 + std::pow(aw, 2.0 * r.order));
        }
    } else {
        const double eps2 = std::pow(10.0, *r.ripple_db / 10.0) - 1.0;
        const double t = chebyshev_t(r.order, w);
        rejection_db = 10.0 * std::log10(1.0 + eps2 * t * t);
    }
    double s21 = -r.insertion_loss_db - rejection_db;
    if (r.stopband_floor_db) {
        s21 = std::max(s21, *r.stopband_floor_db);
    }
    return s21;
}

void TabulatedResponse::validate() const {
    if (points.size() < 2) {
        throw std::invalid_argument("tabulated response needs at least 2 points");
    }
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (!(points[i].first > points[i - 1].first)) {
            throw std::invalid_argument("tabulated response frequencies must be strictly increasing");
        }
    }
}

double evaluate_s21(const TabulatedResponse& r, double f_hz) {
    const auto& p = r.points;
    if (f_hz < p.front().first) {
        return r.extrapolation == Extrapolation::HoldLast ? p.front().second
                                                          : -std::numeric_limits<double>::infinity();
    }
    if (f_hz > p.back().first) {
        return r.extrapolation == Extrapolation::HoldLast ? p.back().second
                                                          : -std::numeric_limits<double>::infinity();
    }
    auto it = std::lower_bound(p.begin(), p.end(), f_hz,
                               [](const auto& pt, double f) { return pt.first < f; });
    if (it->first == f_hz) {
        return it->second;
    }
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double t = (f_hz - lo.first) / (hi.first - lo.first);
    return lo.second + t * (hi.second - lo.second);
}

double evaluate_s21(const ResponseElement& r, double f_hz) {
    return std::visit([f_hz](const auto& e) { return evaluate_s21(e, f_hz); }, r);
}

void FilterResponse::validate() const {
    for (const auto& e : m_elements) {
        std::visit([](const auto& x) { x.validate(); }, e);
    }
}

double FilterResponse::s21_db(double f_hz) const {
    double total = 0.0;
    for (const auto& e : m_elements) {
        total += evaluate_s21(e, f_hz);
    }
    return total;
}

FilterResponse FilterResponse::then(const FilterResponse& next) const {
    std::vector<ResponseElement> all = m_elements;
    all.insert(all.end(), next.m_elements.begin(), next.m_elements.end());
    return FilterResponse(std::move(all));
}

TabulatedResponse sample(const FilterResponse& response, const std::vector<double>& grid_hz,
                         Extrapolation extrapolation) {
    TabulatedResponse out;
    out.extrapolation = extrapolation;
    out.points.reserve(grid_hz.size());
    for (double f : grid_hz) {
        out.points.emplace_back(f, response.s21_db(f));
    }
    out.validate();
    return out;
}

PassbandMetrics passband_metrics(const TabulatedResponse& response, double edge_drop_db) {
    response.validate();
    const auto& p = response.points;
    const auto peak_it = std::max_element(p.begin(), p.end(), [](const auto& a, const auto& b) {
        return a.second < b.second;
    });
    const std::size_t peak = static_cast<std::size_t>(peak_it - p.begin());
    const double threshold = peak_it->second - edge_drop_db;

    auto crossing = [&](std::size_t below, std::size_t above) {
        const double f0 = p[below].first, f1 = p[above].first;
        const double v0 = p[below].second, v1 = p[above].second;
        if (!std::isfinite(v0)) {
            return f0;
        }
        return f0 + (threshold - v0) / (v1 - v0) * (f1 - f0);
    };

    // Outermost crossings: the first sample from each end that reaches the
    // threshold, paired with its outer neighbour below it.
    std::size_t lo = 0;
    while (lo < peak && p[lo].second < threshold) {
        ++lo;
    }
    std::size_t hi = p.size() - 1;
    while (hi > peak && p[hi].second < threshold) {
        --hi;
    }
    if (lo == 0 || hi == p.size() - 1) {
        throw NoPassbandError("response does not fall " + std::to_string(edge_drop_db) +
                              " dB below its peak on both sides");
    }

    PassbandMetrics m;
    m.f_low_edge_hz = crossing(lo - 1, lo);
    m.f_high_edge_hz = crossing(hi + 1, hi);
    double sum = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) {
        sum += -p[i].second;
    }
    m.mean_insertion_loss_db = sum / static_cast<double>(hi - lo + 1);
    m.min_insertion_loss_db = -peak_it->second;
    return m;
}

} // namespace duc
