#include "duc/spectra.hpp"

#include "duc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace duc {

void Tone::validate() const {
    if (!std::isfinite(frequency_hz) || !(frequency_hz > 0.0)) {
        throw std::invalid_argument("tone frequency must be finite and positive");
    }
    if (!std::isfinite(power_dbm)) {
        throw std::invalid_argument("tone power must be finite");
    }
}

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

Spectrum merge(std::vector<Tone> tones, double tolerance_hz) {
    if (!(tolerance_hz >= 0.0)) {
        throw std::invalid_argument("merge tolerance must be >= 0");
    }
    for (const auto& t : tones) {
        t.validate();
    }
    std::stable_sort(tones.begin(), tones.end(), [](const Tone& a, const Tone& b) {
        return a.frequency_hz < b.frequency_hz;
    });

    std::vector<Tone> out;
    out.reserve(tones.size());
    std::size_t i = 0;
    while (i < tones.size()) {
        std::size_t j = i + 1;
        while (j < tones.size() && tones[j].frequency_hz - tones[j - 1].frequency_hz <= tolerance_hz) {
            ++j;
        }
        if (j == i + 1) {
            out.push_back(std::move(tones[i]));
        } else {
            std::size_t strongest = i;
            double total_mw = 0.0;
            std::string label;
            for (std::size_t k = i; k < j; ++k) {
                total_mw += dbm_to_mw(tones[k].power_dbm);
                if (tones[k].power_dbm > tones[strongest].power_dbm) {
                    strongest = k;
                }
                if (!label.empty()) {
                    label += " + ";
                }
                label += tones[k].label;
            }
            out.push_back(Tone{tones[strongest].frequency_hz, mw_to_dbm(total_mw), std::move(label)});
        }
        i = j;
    }

    // Groups are separated by more than the tolerance, so the constructor
    // accepts `out` without merging again.
    return Spectrum(std::move(out), tolerance_hz);
}

Spectrum::Spectrum(std::vector<Tone> tones, double merge_tolerance_hz)
    : m_tolerance(merge_tolerance_hz) {
    if (!(merge_tolerance_hz >= 0.0)) {
        throw std::invalid_argument("merge tolerance must be >= 0");
    }
    for (const auto& t : tones) {
        t.validate();
    }
    const bool sorted_and_separated = [&] {
        for (std::size_t i = 1; i < tones.size(); ++i) {
            if (!(tones[i].frequency_hz - tones[i - 1].frequency_hz > merge_tolerance_hz)) {
                return false;
            }
        }
        return true;
    }();
    if (sorted_and_separated) {
        m_tones = std::move(tones);
    } else {
        m_tones = merge(std::move(tones), merge_tolerance_hz).m_tones;
    }
}

Spectrum merge(const Spectrum& spectrum, double tolerance_hz) {
    return merge(spectrum.tones(), tolerance_hz);
}

const Tone* Spectrum::find(double f_hz) const {
    auto it = std::lower_bound(m_tones.begin(), m_tones.end(), f_hz - m_tolerance,
                               [](const Tone& t, double f) { return t.frequency_hz < f; });
    const Tone* best = nullptr;
    for (; it != m_tones.end() && it->frequency_hz <= f_hz + m_tolerance; ++it) {
        if (!best || std::abs(it->frequency_hz - f_hz) < std::abs(best->frequency_hz - f_hz)) {
            best = &*it;
        }
    }
    return best;
}

const Tone& Spectrum::at(double f_hz) const {
    if (const Tone* t = find(f_hz)) {
        return *t;
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "no tone within tolerance of %.9g Hz", f_hz);
    throw LookupError(buf);
}

Spectrum Spectrum::offset(double delta_db) const {
    Spectrum s = *this;
    for (auto& t : s.m_tones) {
        t.power_dbm += delta_db;
    }
    return s;
}

Spectrum Spectrum::pruned(double floor_dbm) const {
    Spectrum s;
    s.m_tolerance = m_tolerance;
    for (const auto& t : m_tones) {
        if (t.power_dbm >= floor_dbm) {
            s.m_tones.push_back(t);
        }
    }
    return s;
}

bool Spectrum::operator==(const Spectrum& other) const {
    if (m_tolerance != other.m_tolerance || m_tones.size() != other.m_tones.size()) {
        return false;
    }
    for (std::size_t i = 0; i < m_tones.size(); ++i) {
        const auto& a = m_tones[i];
        const auto& b = other.m_tones[i];
        if (a.frequency_hz != b.frequency_hz || a.power_dbm != b.power_dbm || a.label != b.label) {
            return false;
        }
    }
    return true;
}

void MixerSpec::validate() const {
    if (!(conversion_loss_db >= 0.0)) {
        throw std::invalid_argument(name + ": conversion loss must be >= 0 dB");
    }
    if (!(lo_range_hz.first < lo_range_hz.second)) {
        throw std::invalid_argument(name + ": LO range must be non-empty");
    }
    if (auto it = spur_table.find({1, 1}); it != spur_table.end() && it->second != 0.0) {
        throw std::invalid_argument(name + ": spur table entry (1,1) must be 0 dB");
    }
}

double MixerSpec::spur_suppression_db(int m, int n) const {
    m = std::abs(m);
    n = std::abs(n);
    if (auto it = spur_table.find({m, n}); it != spur_table.end()) {
        return it->second;
    }
    if (n == 0) {
        return kUnbounded;
    }
    return spur_slope_db * static_cast<double>(m + n - 2);
}

namespace {

std::string product_label(const std::string& input, const std::string& mixer, int m, int n) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "(m=%+d,n=%+d)", m, n);
    return input + ">" + mixer + buf;
}

} // namespace

Spectrum mix(const Spectrum& input, const Tone& lo, const MixerSpec& mixer, int max_order) {
    mixer.validate();
    lo.validate();
    if (max_order < 1) {
        throw std::invalid_argument("max_order must be >= 1");
    }
    if (lo.frequency_hz < mixer.lo_range_hz.first || lo.frequency_hz > mixer.lo_range_hz.second) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%s: LO %.9g Hz outside specified range [%.9g, %.9g] Hz",
                      mixer.name.c_str(), lo.frequency_hz, mixer.lo_range_hz.first,
                      mixer.lo_range_hz.second);
        throw RangeError(buf);
    }

    std::vector<Tone> out;
    if (std::isfinite(mixer.lo_to_rf_isolation_db)) {
        out.push_back(Tone{lo.frequency_hz, lo.power_dbm - mixer.lo_to_rf_isolation_db,
                           mixer.name + " LO leakage"});
    }
    for (const Tone& in : input.tones()) {
        if (std::isfinite(mixer.if_to_rf_isolation_db)) {
            out.push_back(Tone{in.frequency_hz, in.power_dbm - mixer.if_to_rf_isolation_db,
                               in.label + ">" + mixer.name + " feedthrough"});
        }
        for (int m = 1; m <= max_order; ++m) {
            for (int n = -max_order; n <= max_order; ++n) {
                const double suppression = mixer.spur_suppression_db(m, n);
                if (!std::isfinite(suppression)) {
                    continue;
                }
                const double f = std::abs(m * lo.frequency_hz + n * in.frequency_hz);
                if (f == 0.0) {
                    continue;
                }
                out.push_back(Tone{f, in.power_dbm - mixer.conversion_loss_db - suppression,
                                   product_label(in.label, mixer.name, m, n)});
            }
        }
    }
    return merge(std::move(out), input.merge_tolerance_hz());
}

Spectrum apply_response(const Spectrum& spectrum, const FilterResponse& response) {
    std::vector<Tone> out;
    out.reserve(spectrum.size());
    for (const Tone& t : spectrum.tones()) {
        Tone u = t;
        u.power_dbm += response.s21_db(t.frequency_hz);
        // A floor-extrapolated tabulated response removes the tone entirely.
        if (std::isfinite(u.power_dbm)) {
            out.push_back(std::move(u));
        }
    }
    return Spectrum(std::move(out), spectrum.merge_tolerance_hz());
}

double dbc_vs(const Spectrum& spectrum, double desired_hz, double reference_hz) {
    const Tone& desired = spectrum.at(desired_hz);
    const Tone& reference = spectrum.at(reference_hz);
    return reference.power_dbm - desired.power_dbm;
}

double sfdr(const Spectrum& spectrum, double desired_hz, std::pair<double, double> band_hz) {
    if (!(band_hz.first < band_hz.second)) {
        throw std::invalid_argument("sfdr band must be non-empty");
    }
    const Tone& desired = spectrum.at(desired_hz);
    double strongest = -kUnbounded;
    for (const Tone& t : spectrum.tones()) {
        if (&t == &desired || t.frequency_hz < band_hz.first || t.frequency_hz > band_hz.second) {
            continue;
        }
        strongest = std::max(strongest, t.power_dbm);
    }
    if (strongest == -kUnbounded) {
        return kUnbounded;
    }
    return desired.power_dbm - strongest;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') {
            q += '"';
        }
        q += c;
    }
    return q + "\"";
}

} // namespace

void write_csv(std::ostream& out, const Spectrum& spectrum) {
    out << "frequency_hz,power_dbm,label\n";
    char buf[64];
    for (const Tone& t : spectrum.tones()) {
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g,", t.frequency_hz, t.power_dbm);
        out << buf << csv_field(t.label) << '\n';
    }
}

std::string to_csv(const Spectrum& spectrum) {
    std::ostringstream ss;
    write_csv(ss, spectrum);
    return ss.str();
}

} // namespace duc
