#include "duc/presets.hpp"

#include "duc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace duc {

CalibratedConstants shipped_constants() { return CalibratedConstants{}; }

FilterResponse filter1_surrogate(double floor_db) {
    PrototypeResponse p;
    p.family = FilterFamily::Butterworth;
    p.order = 5;
    p.kind = FilterKind::Bandpass;
    p.f_low_hz = 2.8e9;
    p.f_high_hz = 3.0e9;
    p.insertion_loss_db = 8.0;
    p.stopband_floor_db = floor_db;
    return FilterResponse(p);
}

FilterResponse filter2_surrogate() {
    PrototypeResponse p;
    p.family = FilterFamily::Butterworth;
    p.order = 5;
    p.kind = FilterKind::Bandpass;
    p.f_low_hz = 4.5e9;
    p.f_high_hz = 7.0e9;
    p.insertion_loss_db = 5.0;
    return FilterResponse(p);
}

FilterResponse lowpass_5ghz() {
    PrototypeResponse p;
    p.family = FilterFamily::Butterworth;
    p.order = 7;
    p.kind = FilterKind::Lowpass;
    p.f_high_hz = 5.0e9;
    p.insertion_loss_db = 0.5;
    return FilterResponse(p);
}

MixerSpec default_mixer1(const CalibratedConstants& k) {
    MixerSpec m;
    m.name = "mixer1";
    m.spur_slope_db = k.spur_slope_db;
    m.spur_table[{1, 1}] = 0.0;
    m.lo_range_hz = {1e9, 10e9};
    return m;
}

MixerSpec default_mixer2(const CalibratedConstants& k) {
    MixerSpec m;
    m.name = "mixer2";
    m.spur_slope_db = k.spur_slope_db;
    m.lo_to_rf_isolation_db = k.mixer2_lo_isolation_db;
    m.spur_table[{1, 1}] = 0.0;
    m.lo_range_hz = {4e9, 10e9};
    return m;
}

PlanConstraints benchmark_constraints() {
    PlanConstraints c;
    c.if_range = {kBenchIfHz, kBenchIfHz};
    c.stage1_passband = {2.8e9, 3.0e9};
    c.stage2_passband = {4.5e9, 7.0e9};
    c.mixer1_lo_range = {1e9, 10e9};
    c.mixer2_lo_range = {4e9, 10e9};
    c.stage1_sideband = Sideband::Lower;
    c.stage2_sideband = Sideband::Lower;
    return c;
}

Spectrum benchmark_input() { return Spectrum({Tone{kBenchIfHz, kBenchSourceDbm, "IF"}}); }

DoubleUpconversionTemplate benchmark_setup(const CalibratedConstants& k) {
    DoubleUpconversionTemplate s;
    s.mixer1 = default_mixer1(k);
    s.mixer2 = default_mixer2(k);
    s.filter1 = filter1_surrogate(k.filter1_floor_db);
    s.filter2 = filter2_surrogate();
    s.constraints = benchmark_constraints();
    s.lo1_power_dbm = kBenchSourceDbm;
    s.lo2_power_dbm = kBenchSourceDbm;
    s.leakage = {
        LeakageCoupling{LeakageSource::StageOutput, 1, -45.0},
        LeakageCoupling{LeakageSource::MixerLo, 2, k.lo2_leak_db},
    };
    return s;
}

DoubleUpconversionTemplate shielded_setup(const CalibratedConstants& k) {
    DoubleUpconversionTemplate s = benchmark_setup(k);
    const FilterResponse f1 = filter1_surrogate(k.filter1_floor_db);
    s.filter1 = f1.then(f1).then(lowpass_5ghz()).then(lowpass_5ghz());
    s.leakage.clear();
    return s;
}

double stage1_separation_db(const DoubleUpconversionTemplate& setup, const Spectrum& input) {
    const double lo1 = plan_lo1(setup.constraints);
    const double f_if = setup.constraints.if_range.center();
    Chain stage1({MixerStage{setup.mixer1, Tone{lo1, setup.lo1_power_dbm, "LO1"}},
                  FilterStage{"filter1", setup.filter1}});
    const Spectrum out = propagate_output(stage1, input, setup.options);
    const double wanted = sideband_frequency(lo1, f_if, setup.constraints.stage1_sideband);
    const double image = image_frequency(lo1, f_if, setup.constraints.stage1_sideband);
    return out.at(wanted).power_dbm - out.at(image).power_dbm;
}

double output_separation_db(const DoubleUpconversionTemplate& setup, double target_hz, const Spectrum& input) {
    const Plan p = plan_for(setup, target_hz);
    const Spectrum out = propagate_output(chain_for(setup, p), input, setup.options);
    const Tone& desired = out.at(p.output_hz);
    double strongest = -kUnbounded;
    for (const auto& t : out.tones()) {
        if (&t != &desired) {
            strongest = std::max(strongest, t.power_dbm);
        }
    }
    return desired.power_dbm - strongest;
}

double output_sfdr_db(const DoubleUpconversionTemplate& setup, double target_hz, const Spectrum& input) {
    const Plan p = plan_for(setup, target_hz);
    const Spectrum out = propagate_output(chain_for(setup, p), input, setup.options);
    return sfdr(out, p.output_hz, {1e9, 9e9});
}

double median_benchmark_dbc(const DoubleUpconversionTemplate& setup, const Spectrum& input) {
    std::vector<double> targets;
    for (int i = 0; i <= 50; ++i) {
        targets.push_back(4.5e9 + 50e6 * i);
    }
    std::vector<double> v;
    for (const auto& p : sweep_dbc(setup, targets, input)) {
        if (!p.error) {
            v.push_back(p.dbc_db);
        }
    }
    if (v.empty()) {
        throw PlanningError("no plannable target in the benchmark sweep");
    }
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

namespace {

// Smallest x in [lo, hi] with ok(x), assuming ok is monotone in x.
double smallest_satisfying(double lo, double hi, const std::function<bool(double)>& ok, const char* what) {
    if (!ok(hi)) {
        throw std::runtime_error(std::string("calibration: ") + what + " unreachable within search range");
    }
    if (ok(lo)) {
        return lo;
    }
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? hi : lo) = mid;
    }
    return hi;
}

double round_up_half(double x) { return std::ceil(x * 2.0 - 1e-9) / 2.0; }
double round_half(double x) { return std::round(x * 2.0) / 2.0; }

} // namespace

CalibratedConstants calibrate(const CalibrationTargets& t) {
    const Spectrum input = benchmark_input();
    CalibratedConstants k;

    // 1. Floor: separation grows as the floor drops. Solve for equality.
    {
        auto sep_at = [&](double floor) {
            CalibratedConstants kk = k;
            kk.filter1_floor_db = floor;
            return stage1_separation_db(benchmark_setup(kk), input);
        };
        const double floor = -smallest_satisfying(
            8.0, 150.0, [&](double f) { return sep_at(-f) >= t.stage1_separation_db; }, "stage-1 separation");
        k.filter1_floor_db = round_half(floor);
    }

    // 2. Spurs and LO2 isolation from the shielded SFDR.
    const double need = t.shielded_sfdr_db + t.sfdr_margin_db;
    auto worst_sfdr = [&](const CalibratedConstants& kk) {
        const auto setup = shielded_setup(kk);
        double worst = kUnbounded;
        for (double f : t.shielded_targets_hz) {
            worst = std::min(worst, output_sfdr_db(setup, f, input));
        }
        return worst;
    };
    {
        CalibratedConstants kk = k;
        kk.mixer2_lo_isolation_db = kUnbounded;
        k.spur_slope_db = round_up_half(smallest_satisfying(
            0.0, 100.0,
            [&](double slope) {
                kk.spur_slope_db = slope;
                return worst_sfdr(kk) >= need;
            },
            "spur slope"));
    }
    {
        CalibratedConstants kk = k;
        k.mixer2_lo_isolation_db = round_up_half(smallest_satisfying(
            0.0, 200.0,
            [&](double iso) {
                kk.mixer2_lo_isolation_db = iso;
                return worst_sfdr(kk) >= need;
            },
            "mixer-2 LO isolation"));
    }

    // 3. LO2 coupling: dBc falls as the coupling rises.
    {
        CalibratedConstants kk = k;
        const double neg = smallest_satisfying(
            0.0, 150.0,
            [&](double c) {
                kk.lo2_leak_db = -c;
                return median_benchmark_dbc(benchmark_setup(kk), input) >= t.median_dbc_db;
            },
            "LO2 coupling");
        k.lo2_leak_db = round_half(-neg);
    }
    return k;
}

} // namespace duc
