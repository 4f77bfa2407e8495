#include "duc/fit.hpp"
#include "duc/presets.hpp"
#include "duc/qubit.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

using namespace duc;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Spectroscopy drive scale: saturation parameter of order one for the -17 dBm output tone.
constexpr double kWeak = 1e-3;

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

// dBm that gives a Rabi rate of omega (rad/s) at unit scale.
double dbm_for_rate(const QubitSpec& q, double omega) {
    const double v = omega / q.drive_coupling;
    return 10.0 * std::log10(v * v / 100.0 / 1e-3);
}

struct OracleTone {
    double omega, delta;
};

// Schroedinger-picture RK4 on the two amplitudes (undamped), written
// independently of the library's Bloch integrator.
double schroedinger_oracle(const std::vector<OracleTone>& tones, double duration, int steps) {
    using C = std::complex<double>;
    using S = std::array<C, 2>;
    const C i(0, 1);
    auto f = [&](double t, const S& c) {
        C w = 0;
        for (const auto& d : tones) w += d.omega * std::exp(i * d.delta * t);
        return S{-i * 0.5 * std::conj(w) * c[1], -i * 0.5 * w * c[0]};
    };
    S c{1.0, 0.0};
    const double h = duration / steps;
    for (int k = 0; k < steps; ++k) {
        const double t = k * h;
        const S k1 = f(t, c);
        const S k2 = f(t + h / 2, {c[0] + h / 2 * k1[0], c[1] + h / 2 * k1[1]});
        const S k3 = f(t + h / 2, {c[0] + h / 2 * k2[0], c[1] + h / 2 * k2[1]});
        const S k4 = f(t + h, {c[0] + h * k3[0], c[1] + h * k3[1]});
        for (int j = 0; j < 2; ++j) c[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
    return std::norm(c[1]);
}

// Bloch-vector oracle with damping, midpoint-free classic RK4 at a caller-chosen step.
double bloch_oracle(const std::vector<OracleTone>& tones, double t1, double t2, double duration, int steps) {
    using V = std::array<double, 3>;
    auto f = [&](double t, const V& r) {
        double wx = 0, wy = 0;
        for (const auto& d : tones) {
            wx += d.omega * std::cos(d.delta * t);
            wy += d.omega * std::sin(d.delta * t);
        }
        return V{wy * r[2] - r[0] / t2, -wx * r[2] - r[1] / t2, wx * r[1] - wy * r[0] - (r[2] - 1) / t1};
    };
    auto axpy = [](const V& a, double s, const V& b) { return V{a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]}; };
    V r{0, 0, 1};
    const double h = duration / steps;
    for (int k = 0; k < steps; ++k) {
        const double t = k * h;
        const V k1 = f(t, r), k2 = f(t + h / 2, axpy(r, h / 2, k1)), k3 = f(t + h / 2, axpy(r, h / 2, k2)),
                k4 = f(t + h, axpy(r, h, k3));
        for (int j = 0; j < 3; ++j) r[j] += h / 6 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
    }
    return (1 - r[2]) / 2;
}

// Library step count for the same problem, so the oracle can use 10x more.
int library_steps(const std::vector<OracleTone>& tones, double g, double duration) {
    double rate = g, sum = 0;
    for (const auto& d : tones) {
        rate = std::max(rate, std::abs(d.delta));
        sum += d.omega;
    }
    rate = std::max(rate, sum) / kTwoPi;
    return static_cast<int>(std::ceil(duration * rate * 50.0));
}

Spectrum tones_for(const QubitSpec& q, const std::vector<OracleTone>& tones) {
    std::vector<Tone> v;
    for (std::size_t k = 0; k < tones.size(); ++k)
        v.push_back({q.f_qubit_hz + tones[k].delta / kTwoPi, dbm_for_rate(q, tones[k].omega), "t" + std::to_string(k)});
    return Spectrum(v, 0.0);
}

} // namespace

TEST(Qubit, SpecValidation) {
    QubitSpec q;
    q.t1_s = 10e-6;
    q.t2_star_s = 25e-6;
    EXPECT_THROW(q.validate(), std::invalid_argument);
    q.t2_star_s = 20e-6;
    EXPECT_NO_THROW(q.validate());
}

TEST(Qubit, AmplitudeConversion) {
    EXPECT_NEAR(tone_amplitude_v(10.0), std::sqrt(2.0 * 50.0 * 0.01), 1e-15);
    EXPECT_NEAR(tone_amplitude_v(0.0), 0.31622776601683794, 1e-15);
}

TEST(Drive, PiPulseAndZeroAmplitude) {
    const QubitSpec q;
    const double a_pi = std::numbers::pi / (q.drive_coupling * 50e-9);
    const auto p = rabi_sweep(q, {0.0, a_pi, 2 * a_pi});
    EXPECT_NEAR(p[0], 0.0, 1e-12);
    EXPECT_NEAR(p[1], 1.0, 1e-5);
    EXPECT_NEAR(p[2], 0.0, 1e-5);
    EXPECT_EQ(drive_response(q, Spectrum({{q.f_qubit_hz, 0.0, "d"}}), 50e-9, 0.0), 0.0);
}

TEST(Drive, DetunedToneMatchesRabiFormula) {
    const QubitSpec q;
    const double omega = kTwoPi * 10e6, delta = kTwoPi * 7e6;
    const auto s = tones_for(q, {{omega, delta}});
    for (double t : linspace(10e-9, 300e-9, 12)) {
        const double w = std::hypot(omega, delta);
        const double exact = omega * omega / (w * w) * std::pow(std::sin(w * t / 2), 2);
        EXPECT_NEAR(drive_response(q, s, t, 1.0), exact, 1e-4) << t;
    }
}

TEST(Drive, MatchesRefinedIntegrationUndamped) {
    const QubitSpec q;
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> om(kTwoPi * 1e6, kTwoPi * 20e6), de(-kTwoPi * 30e6, kTwoPi * 30e6);
    for (int trial = 0; trial < 10; ++trial) {
        const std::vector<OracleTone> tones{{om(rng), de(rng)}, {0.3 * om(rng), de(rng)}};
        const double t = 200e-9;
        const double ref = schroedinger_oracle(tones, t, 10 * library_steps(tones, 0.0, t));
        EXPECT_NEAR(drive_response(q, tones_for(q, tones), t, 1.0), ref, 1e-4);
    }
}

TEST(Drive, MatchesRefinedIntegrationDamped) {
    QubitSpec q;
    q.t1_s = 300e-9;
    q.t2_star_s = 200e-9;
    const std::vector<OracleTone> tones{{kTwoPi * 8e6, kTwoPi * 3e6}, {kTwoPi * 2e6, -kTwoPi * 11e6}};
    const double t = 500e-9;
    const double ref = bloch_oracle(tones, q.t1_s, q.t2_star_s, t, 10 * library_steps(tones, 1 / q.t2_star_s, t));
    EXPECT_NEAR(drive_response(q, tones_for(q, tones), t, 1.0), ref, 1e-4);
}

TEST(DriveProperty, PopulationBounded) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> om(0.0, kTwoPi * 50e6), de(-kTwoPi * 50e6, kTwoPi * 50e6),
        t1(20e-9, 2e-6), dur(0.0, 400e-9);
    for (int trial = 0; trial < 60; ++trial) {
        QubitSpec q;
        if (trial % 2) {
            q.t1_s = t1(rng);
            q.t2_star_s = q.t1_s * (0.1 + 1.9 * std::uniform_real_distribution<double>(0, 1)(rng));
        }
        const double p = drive_response(q, tones_for(q, {{om(rng) + 1.0, de(rng)}, {om(rng) + 1.0, de(rng)}}),
                                        dur(rng), 1.0);
        EXPECT_GE(p, 0.0);
        EXPECT_LE(p, 1.0);
    }
}

TEST(DriveProperty, TranslationInvariant) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> om(kTwoPi * 1e6, kTwoPi * 20e6), de(-kTwoPi * 20e6, kTwoPi * 20e6),
        shift(-2e9, 2e9);
    for (int trial = 0; trial < 10; ++trial) {
        QubitSpec a;
        a.t1_s = 1e-6;
        a.t2_star_s = 0.8e-6;
        QubitSpec b = a;
        // Shifts are whole kHz so tone and qubit frequencies stay exactly representable.
        b.f_qubit_hz += std::round(shift(rng) / 1e3) * 1e3;
        const std::vector<OracleTone> tones{{om(rng), std::round(de(rng) / 1e3) * 1e3}, {om(rng), std::round(de(rng) / 1e3) * 1e3}};
        EXPECT_NEAR(drive_response(a, tones_for(a, tones), 150e-9, 1.0),
                    drive_response(b, tones_for(b, tones), 150e-9, 1.0), 1e-9);
    }
}

TEST(Rabi, FitRecoversProgrammedRate) {
    const QubitSpec q;
    const double t = 50e-9;
    const auto amps = linspace(0.0, 0.2, 101);
    const auto fit = fit_sinusoid(amps, rabi_sweep(q, amps, t));
    ASSERT_TRUE(fit.converged);
    // P = (1 - cos(coupling * a * t)) / 2, so the fitted frequency in 1/amplitude is coupling * t / 2pi.
    const double rate = fit["frequency"] * kTwoPi / t;
    EXPECT_NEAR(rate, q.drive_coupling, 0.01 * q.drive_coupling);
    EXPECT_NEAR(fit["amplitude"], 0.5, 1e-3);
    EXPECT_NEAR(fit["offset"], 0.5, 1e-3);
}

TEST(RabiProperty, DoublingAmplitudeDoublesFrequency) {
    const QubitSpec q;
    const Spectrum s({{q.f_qubit_hz, 0.0, "d"}});
    const auto times = linspace(0.0, 200e-9, 161);
    auto fitted = [&](double scale) {
        std::vector<double> p;
        for (double t : times) p.push_back(drive_response(q, s, t, scale));
        return fit_sinusoid(times, p)["frequency"];
    };
    const double f1 = fitted(0.05), f2 = fitted(0.1);
    EXPECT_NEAR(f2 / f1, 2.0, 2e-3);
}

TEST(Rabi, NearResonantSpurPerturbsBoundedly) {
    const QubitSpec q;
    const auto amps = linspace(0.0, 0.12, 61);
    const Spectrum clean({{q.f_qubit_hz, 0.0, "d"}});
    const Spectrum spurred({{q.f_qubit_hz, 0.0, "d"}, {q.f_qubit_hz + 2e6, -30.0, "spur"}});
    const auto a = rabi_sweep(q, clean, amps), b = rabi_sweep(q, spurred, amps);
    // |dP| <= 2 |d psi| <= Omega_spur * t, with the spur 30 dB below the drive.
    const double bound = std::pow(10.0, -30.0 / 20.0) * q.drive_coupling * amps.back() * 50e-9;
    double worst = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = std::abs(a[i] - b[i]);
        worst = std::max(worst, d);
        EXPECT_LE(d, std::pow(10.0, -30.0 / 20.0) * q.drive_coupling * amps[i] * 50e-9 + 1e-4);
    }
    EXPECT_GT(worst, 1e-3);
    EXPECT_LT(worst, bound);
}

TEST(Ramsey, Basics) {
    QubitSpec q;
    EXPECT_EQ(ramsey_sweep(q, 1e6, {0.0})[0], 1.0);
    const auto waits = linspace(0.0, 5e-6, 201);
    const auto p = ramsey_sweep(q, 1.3e6, waits);
    const auto fit = fit_decaying_cosine(waits, p);
    EXPECT_NEAR(fit["frequency"], 1.3e6, 1.3e6 * 1e-3);
    EXPECT_GT(fit["decay"], 100 * 5e-6);
}

TEST(Ramsey, FitRecoversDetuningAndDecay) {
    QubitSpec q;
    q.t1_s = 40e-6;
    q.t2_star_s = 3e-6;
    const auto waits = linspace(0.0, 6e-6, 241);
    const auto fit = fit_decaying_cosine(waits, ramsey_sweep(q, 2e6, waits));
    ASSERT_TRUE(fit.converged);
    EXPECT_NEAR(fit["frequency"], 2e6, 2e6 * 0.01);
    EXPECT_NEAR(fit["decay"], 3e-6, 3e-6 * 0.01);
}

TEST(Spectroscopy, LorentzianCentredOnQubit) {
    QubitSpec q;
    q.t1_s = 20e-6;
    q.t2_star_s = 10e-6;
    const auto targets = linspace(5.61e9 - 200e3, 5.61e9 + 200e3, 201);
    const auto p = spectroscopy_sweep(q, benchmark_setup(), targets, benchmark_input(), kWeak);
    std::vector<double> x;
    for (double t : targets) x.push_back(t - 5.61e9);
    const auto fit = fit_lorentzian(x, p);
    ASSERT_TRUE(fit.converged);
    EXPECT_LT(std::abs(fit["center"]), fit["width"] / 10.0);
}

TEST(Spectroscopy, FarDetunedIsDark) {
    QubitSpec q;
    q.t1_s = 20e-6;
    q.t2_star_s = 10e-6;
    // Power-broadened HWHM of the desired tone (about 26 kHz here); probe 150 of them away.
    const double omega = q.drive_coupling * kWeak * tone_amplitude_v(-17.0);
    const double hwhm = std::sqrt(1 + omega * omega * q.t1_s * q.t2_star_s) / (kTwoPi * q.t2_star_s);
    const auto p = spectroscopy_sweep(q, benchmark_setup(), {5.61e9 + 150 * hwhm, 5.61e9 - 150 * hwhm},
                                      benchmark_input(), kWeak);
    for (double v : p) EXPECT_LT(v, 1e-3);
}

TEST(Spectroscopy, EqualsPointwiseSteadyState) {
    QubitSpec q;
    q.t1_s = 20e-6;
    q.t2_star_s = 10e-6;
    const auto setup = benchmark_setup();
    const std::vector<double> targets{5.60995e9, 5.61e9, 5.61003e9, 3e9};
    const auto p = spectroscopy_sweep(q, setup, targets, benchmark_input(), kWeak);
    for (std::size_t i = 0; i + 1 < targets.size(); ++i) {
        const auto out = propagate_output(chain_for(setup, plan_for(setup, targets[i])), benchmark_input(), setup.options);
        EXPECT_EQ(p[i], steady_state_population(q, out, kWeak));
    }
    EXPECT_TRUE(std::isnan(p.back()));
}

TEST(Spectroscopy, SteadyStateMatchesLongIntegration) {
    QubitSpec q;
    q.t1_s = 2e-6;
    q.t2_star_s = 1e-6;
    for (double detune : {0.0, 50e3, 200e3}) {
        const Spectrum s({{q.f_qubit_hz + detune, dbm_for_rate(q, kTwoPi * 100e3), "d"}});
        EXPECT_NEAR(drive_response(q, s, 30 * q.t1_s, 1.0), steady_state_population(q, s, 1.0), 1e-4) << detune;
    }
}

TEST(Fit, NoiselessSinusoidExact) {
    const auto x = linspace(0.0, 1.0, 80);
    std::vector<double> y;
    for (double v : x) y.push_back(0.7 * std::cos(kTwoPi * 3.3 * v + 0.4) + 0.2);
    const auto f = fit_sinusoid(x, y);
    EXPECT_TRUE(f.converged);
    EXPECT_NEAR(f["amplitude"], 0.7, 0.7e-8);
    EXPECT_NEAR(f["frequency"], 3.3, 3.3e-8);
    EXPECT_NEAR(f["phase"], 0.4, 0.4e-8);
    EXPECT_NEAR(f["offset"], 0.2, 0.2e-8);
}

TEST(Fit, NoiselessLorentzianAndDecayExact) {
    const auto x = linspace(-5.0, 5.0, 101);
    std::vector<double> y, z;
    for (double v : x) {
        y.push_back(0.8 / (1 + std::pow((v - 0.3) / 0.6, 2)) + 0.05);
        z.push_back(0.5 * std::exp(-(v + 5) / 4.0) * std::cos(kTwoPi * 0.7 * (v + 5) - 1.0) + 0.5);
    }
    const auto l = fit_lorentzian(x, y);
    EXPECT_NEAR(l["center"], 0.3, 0.3e-8);
    EXPECT_NEAR(l["width"], 0.6, 0.6e-8);
    EXPECT_NEAR(l["amplitude"], 0.8, 0.8e-8);
    EXPECT_NEAR(l["offset"], 0.05, 0.05e-8);
    std::vector<double> xs;
    for (double v : x) xs.push_back(v + 5);
    const auto d = fit_decaying_cosine(xs, z);
    EXPECT_NEAR(d["frequency"], 0.7, 0.7e-8);
    EXPECT_NEAR(d["decay"], 4.0, 4.0e-8);
    EXPECT_NEAR(d["amplitude"], 0.5, 0.5e-8);
}

TEST(FitProperty, NoisyLorentzianCentre) {
    const auto x = linspace(-1.0, 1.0, 121);
    int inside = 0;
    for (int seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> noise(0.0, 0.01);
        std::uniform_real_distribution<double> c(-0.3, 0.3);
        const double centre = c(rng), width = 0.1;
        std::vector<double> y;
        for (double v : x) y.push_back(0.5 / (1 + std::pow((v - centre) / width, 2)) + noise(rng));
        const auto f = fit_lorentzian(x, y);
        EXPECT_LT(std::abs(f["center"] - centre), width / 10.0) << "seed " << seed;
        inside += std::abs(f["center"] - centre) < width / 10.0;
    }
    EXPECT_EQ(inside, 100);
}

TEST(FitProperty, ConvergedNeverWorsensResidual) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> a(0.1, 1.0), fr(1.0, 8.0), ph(-3.0, 3.0);
    std::normal_distribution<double> noise(0.0, 0.05);
    const auto x = linspace(0.0, 1.0, 64);
    for (int trial = 0; trial < 50; ++trial) {
        const double A = a(rng), F = fr(rng), P = ph(rng);
        std::vector<double> y;
        for (double v : x) y.push_back(A * std::cos(kTwoPi * F * v + P) + noise(rng));
        const auto f = fit_sinusoid(x, y);
        if (f.converged) EXPECT_LE(f.residual_norm, f.initial_residual_norm);
        EXPECT_GE(f["amplitude"], 0.0);
        EXPECT_GT(f["phase"], -std::numbers::pi - 1e-12);
        EXPECT_LE(f["phase"], std::numbers::pi + 1e-12);
    }
}

TEST(Fit, ConstantDataDoesNotCrash) {
    const auto x = linspace(0.0, 1.0, 40);
    const std::vector<double> y(40, 0.25);
    FitResult f;
    EXPECT_NO_THROW(f = fit_sinusoid(x, y));
    if (f.converged) {
        EXPECT_NEAR(f["amplitude"], 0.0, 1e-9);
        EXPECT_NEAR(f["offset"], 0.25, 1e-9);
    }
}

TEST(Fit, InputChecks) {
    EXPECT_THROW(fit_sinusoid({0, 1, 2}, {0, 1, 0}), std::invalid_argument);
    EXPECT_THROW(fit_sinusoid({0, 1, 1, 2, 3, 4, 5, 6}, std::vector<double>(8, 0.0)), std::invalid_argument);
    std::vector<double> y(8, 0.0);
    y[3] = NAN;
    EXPECT_THROW(fit_sinusoid(linspace(0, 1, 8), y), std::invalid_argument);
}

TEST(Fit, PeriodogramFindsDominantFrequency) {
    const auto x = linspace(0.0, 2.0, 200);
    std::vector<double> y;
    for (double v : x) y.push_back(std::sin(kTwoPi * 6.0 * v) + 0.2 * std::sin(kTwoPi * 15.0 * v));
    EXPECT_NEAR(periodogram_peak(x, y), 6.0, 0.1);
}
