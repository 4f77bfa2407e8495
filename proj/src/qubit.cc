#include "duc/qubit.hpp"

#include "duc/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace duc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Drive {
    double omega = 0.0; // rad/s
    double delta = 0.0; // rad/s, tone minus qubit
};

std::vector<Drive> drives_for(const QubitSpec& q, const Spectrum& s, double scale, double cutoff_hz) {
    std::vector<Drive> out;
    for (const auto& t : s.tones()) {
        const double df = t.frequency_hz - q.f_qubit_hz;
        if (std::abs(df) > cutoff_hz) {
            continue;
        }
        const double omega = q.drive_coupling * scale * tone_amplitude_v(t.power_dbm);
        if (omega != 0.0) {
            out.push_back({omega, kTwoPi * df});
        }
    }
    return out;
}

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

} // namespace

void QubitSpec::validate() const {
    if (!(f_qubit_hz > 0.0) || !(t1_s > 0.0) || !(t2_star_s > 0.0) || !(drive_coupling > 0.0) ||
        !std::isfinite(f_qubit_hz) || !std::isfinite(drive_coupling)) {
        throw std::invalid_argument("qubit parameters must be positive");
    }
    if (!(t2_star_s <= 2.0 * t1_s)) {
        throw std::invalid_argument("qubit t2_star must not exceed 2*t1");
    }
}

double tone_amplitude_v(double power_dbm) {
    const double watts = 1e-3 * std::pow(10.0, power_dbm / 10.0);
    return std::sqrt(2.0 * 50.0 * watts);
}

double drive_response(const QubitSpec& q, const Spectrum& spectrum, double duration_s, double amplitude_scale,
                      const DriveOptions& options) {
    q.validate();
    if (!(duration_s >= 0.0)) {
        throw std::invalid_argument("drive duration must be >= 0");
    }
    const auto drives = drives_for(q, spectrum, amplitude_scale, options.detuning_cutoff_hz);
    if (drives.empty() || duration_s == 0.0) {
        return 0.0;
    }

    const double g1 = 1.0 / q.t1_s;
    const double g2 = 1.0 / q.t2_star_s;
    double rate = std::max(g1, g2);
    double omega_sum = 0.0;
    for (const auto& d : drives) {
        rate = std::max(rate, std::abs(d.delta));
        omega_sum += std::abs(d.omega);
    }
    rate = std::max(rate, omega_sum) / kTwoPi;
    const auto n = static_cast<long long>(std::max(1.0, std::ceil(duration_s * rate * options.steps_per_cycle)));
    const double h = duration_s / static_cast<double>(n);

    using V = std::array<double, 3>;
    auto deriv = [&](double t, const V& r) {
        double wx = 0.0, wy = 0.0;
        for (const auto& d : drives) {
            wx += d.omega * std::cos(d.delta * t);
            wy += d.omega * std::sin(d.delta * t);
        }
        // (wx, wy, 0) x r, then relaxation towards the ground state z = +1.
        return V{wy * r[2] - g2 * r[0], -wx * r[2] - g2 * r[1], wx * r[1] - wy * r[0] - g1 * (r[2] - 1.0)};
    };

    V r{0.0, 0.0, 1.0};
    for (long long i = 0; i < n; ++i) {
        const double t = h * static_cast<double>(i);
        const V k1 = deriv(t, r);
        V tmp;
        for (int j = 0; j < 3; ++j) tmp[j] = r[j] + 0.5 * h * k1[j];
        const V k2 = deriv(t + 0.5 * h, tmp);
        for (int j = 0; j < 3; ++j) tmp[j] = r[j] + 0.5 * h * k2[j];
        const V k3 = deriv(t + 0.5 * h, tmp);
        for (int j = 0; j < 3; ++j) tmp[j] = r[j] + h * k3[j];
        const V k4 = deriv(t + h, tmp);
        for (int j = 0; j < 3; ++j) r[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
    return clamp01(0.5 * (1.0 - r[2]));
}

std::vector<double> rabi_sweep(const QubitSpec& q, const std::vector<double>& amplitudes, double duration_s) {
    return rabi_sweep(q, Spectrum({Tone{q.f_qubit_hz, 0.0, "drive"}}), amplitudes, duration_s);
}

std::vector<double> rabi_sweep(const QubitSpec& q, const Spectrum& spectrum, const std::vector<double>& amplitudes,
                               double duration_s, const DriveOptions& options) {
    if (spectrum.empty()) {
        throw std::invalid_argument("rabi sweep needs a drive spectrum");
    }
    double strongest = -kUnbounded;
    for (const auto& t : spectrum.tones()) {
        strongest = std::max(strongest, t.power_dbm);
    }
    const double v_ref = tone_amplitude_v(strongest);
    std::vector<double> out;
    out.reserve(amplitudes.size());
    for (double a : amplitudes) {
        if (!(a >= 0.0)) {
            throw std::invalid_argument("rabi amplitudes must be >= 0");
        }
        out.push_back(drive_response(q, spectrum, duration_s, a / v_ref, options));
    }
    return out;
}

std::vector<double> ramsey_sweep(const QubitSpec& q, double detuning_hz, const std::vector<double>& waits_s) {
    q.validate();
    std::vector<double> out;
    out.reserve(waits_s.size());
    for (double t : waits_s) {
        if (!(t >= 0.0)) {
            throw std::invalid_argument("ramsey waits must be >= 0");
        }
        out.push_back(clamp01(0.5 * (1.0 + std::exp(-t / q.t2_star_s) * std::cos(kTwoPi * detuning_hz * t))));
    }
    return out;
}

double steady_state_population(const QubitSpec& q, const Spectrum& spectrum, double amplitude_scale) {
    q.validate();
    if (!std::isfinite(q.t1_s) || !std::isfinite(q.t2_star_s)) {
        throw std::invalid_argument("steady state needs finite t1 and t2_star");
    }
    const double t1t2 = q.t1_s * q.t2_star_s;
    double p = 0.0;
    for (const auto& d : drives_for(q, spectrum, amplitude_scale, kUnbounded)) {
        const double w = d.omega * d.omega * t1t2;
        const double x = d.delta * q.t2_star_s;
        p += 0.5 * w / (1.0 + x * x + w);
    }
    return std::min(p, 0.5);
}

std::vector<double> spectroscopy_sweep(const QubitSpec& q, const DoubleUpconversionTemplate& setup,
                                       const std::vector<double>& targets_hz, const Spectrum& input,
                                       double amplitude_scale) {
    std::vector<double> out;
    out.reserve(targets_hz.size());
    for (double f : targets_hz) {
        try {
            const Plan p = plan_for(setup, f);
            const Spectrum s = propagate_output(chain_for(setup, p), input, setup.options);
            out.push_back(steady_state_population(q, s, amplitude_scale));
        } catch (const PlanningError&) {
            out.push_back(std::numeric_limits<double>::quiet_NaN());
        } catch (const RangeError&) {
            out.push_back(std::numeric_limits<double>::quiet_NaN());
        }
    }
    return out;
}

} // namespace duc
