// duc: command-line front end for the double-upconversion toolkit.

#include "duc/chain.hpp"
#include "duc/config.hpp"
#include "duc/errors.hpp"
#include "duc/fit.hpp"
#include "duc/microstrip.hpp"
#include "duc/planner.hpp"
#include "duc/presets.hpp"
#include "duc/qubit.hpp"
#include "duc/touchstone.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace duc;
namespace fs = std::filesystem;

namespace {

enum Exit : int {
    kOk = 0,
    kUsage = 1,
    kInfeasible = 2,
    kRange = 3,
    kParse = 4,
    kSynthesis = 5,
    kNoPassband = 6,
    kLookup = 7,
    kInternal = 10,
};

double freq(const std::string& s) { return parse_frequency(s); }

std::optional<double> freq_opt(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return freq(s);
}

// Writes to `path`, or stdout when empty.
void emit(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << text;
}

std::vector<double> linspace(double a, double b, int n) {
    if (n < 2) throw ConfigError("need at least 2 points");
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
    return v;
}

std::vector<double> grid(double start, double stop, double step) {
    if (!(step > 0.0) || stop < start) throw ConfigError("bad sweep grid");
    std::vector<double> v;
    const auto n = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
    for (long long i = 0; i <= n; ++i) v.push_back(start + step * static_cast<double>(i));
    return v;
}

// --config FILE or --preset NAME, never both.
struct SetupSource {
    std::string config;
    std::string preset;

    void add(CLI::App* app) {
        auto* c = app->add_option("--config", config, "Chain config JSON");
        auto* p = app->add_option("--preset", preset, "Built-in setup")->check(CLI::IsMember({"bench", "shielded"}));
        c->excludes(p);
    }

    ChainConfig load() const {
        if (!config.empty()) return load_chain_config(config);
        ChainConfig c;
        c.setup = preset == "shielded" ? shielded_setup() : benchmark_setup();
        c.input = benchmark_input();
        return c;
    }
};

// Gaussian noise fixture; seeded and reproducible.
void add_noise(std::vector<double>& y, double sigma, std::uint64_t seed) {
    if (sigma <= 0.0) return;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, sigma);
    for (auto& v : y) v += n(rng);
}

QubitSpec qubit_from(const std::string& f, double t1, double t2, double coupling) {
    QubitSpec q;
    q.f_qubit_hz = freq(f);
    q.t1_s = t1 > 0.0 ? t1 : std::numeric_limits<double>::infinity();
    q.t2_star_s = t2 > 0.0 ? t2 : std::numeric_limits<double>::infinity();
    q.drive_coupling = coupling;
    q.validate();
    return q;
}

std::string csv_xy(const std::vector<double>& x, const std::vector<double>& y) {
    std::ostringstream ss;
    write_xy_csv(ss, x, y);
    return ss.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Double-upconversion chain simulation, planning, filter synthesis and qubit readout"};
    app.require_subcommand(1);
    // Subcommands hand unknown options up, so --seed works anywhere on the line.
    app.fallthrough();
    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "Seed for stochastic fixtures")->default_val(0);

    // plan
    auto* plan_cmd = app.add_subcommand("plan", "Solve LO1/LO2 for a target output frequency");
    std::string p_target, p_if, p_batch, p_config;
    std::string p_s1_lo = "2.8GHz", p_s1_hi = "3.0GHz", p_s2_lo = "4.5GHz", p_s2_hi = "7GHz";
    std::string p_m1_lo = "1GHz", p_m1_hi = "10GHz", p_m2_lo = "4GHz", p_m2_hi = "10GHz";
    std::string p_sb1 = "lower", p_sb2 = "lower";
    plan_cmd->add_option("--target-hz", p_target, "Output frequency");
    plan_cmd->add_option("--batch", p_batch, "File with one target per line");
    plan_cmd->add_option("--if-hz", p_if, "IF frequency");
    plan_cmd->add_option("--config", p_config, "Chain config supplying constraints; flags win");
    plan_cmd->add_option("--stage1-low-hz", p_s1_lo);
    plan_cmd->add_option("--stage1-high-hz", p_s1_hi);
    plan_cmd->add_option("--stage2-low-hz", p_s2_lo);
    plan_cmd->add_option("--stage2-high-hz", p_s2_hi);
    plan_cmd->add_option("--lo1-min-hz", p_m1_lo);
    plan_cmd->add_option("--lo1-max-hz", p_m1_hi);
    plan_cmd->add_option("--lo2-min-hz", p_m2_lo);
    plan_cmd->add_option("--lo2-max-hz", p_m2_hi);
    plan_cmd->add_option("--stage1-sideband", p_sb1)->check(CLI::IsMember({"lower", "upper"}));
    plan_cmd->add_option("--stage2-sideband", p_sb2)->check(CLI::IsMember({"lower", "upper"}));

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "Propagate the input through the chain");
    SetupSource sim_src;
    sim_src.add(sim_cmd);
    std::string sim_target, sim_out_dir, sim_out;
    int sim_stage = 0;
    sim_cmd->add_option("--target-hz", sim_target, "Re-plan LO2 for this output frequency");
    sim_cmd->add_option("--stage", sim_stage, "1: after the first filter, 2: final output")->check(CLI::Range(1, 2));
    sim_cmd->add_option("--out-dir", sim_out_dir, "Write one CSV per chain stage");
    sim_cmd->add_option("--out", sim_out, "Output CSV (default stdout)");

    // sweep-dbc
    auto* sweep_cmd = app.add_subcommand("sweep-dbc", "dBc of LO2 against the drive across targets");
    SetupSource sweep_src;
    sweep_src.add(sweep_cmd);
    std::string sw_start = "4.5GHz", sw_stop = "7GHz", sw_step = "50MHz", sw_out;
    sweep_cmd->add_option("--start-hz", sw_start);
    sweep_cmd->add_option("--stop-hz", sw_stop);
    sweep_cmd->add_option("--step-hz", sw_step);
    sweep_cmd->add_option("--out", sw_out);

    // synth-filter
    auto* synth_cmd = app.add_subcommand("synth-filter", "Parallel-coupled bandpass synthesis");
    std::string sy_family = "butterworth", sy_lo, sy_hi, sy_out, sy_csv, sy_s2p;
    int sy_order = 5, sy_points = 801;
    double sy_ripple = 0.0, sy_z0 = 50.0, sy_eps = 4.35, sy_h = 1.6e-3;
    synth_cmd->add_option("--family", sy_family)->check(CLI::IsMember({"butterworth", "chebyshev"}));
    synth_cmd->add_option("--order", sy_order);
    synth_cmd->add_option("--f-low-hz", sy_lo)->required();
    synth_cmd->add_option("--f-high-hz", sy_hi)->required();
    synth_cmd->add_option("--ripple-db", sy_ripple);
    synth_cmd->add_option("--z0", sy_z0);
    synth_cmd->add_option("--eps-r", sy_eps);
    synth_cmd->add_option("--h-m", sy_h);
    synth_cmd->add_option("--out", sy_out, "Geometry JSON (default stdout)");
    synth_cmd->add_option("--response-csv", sy_csv, "Analyzed S21 CSV, 0.5*f_low to 1.5*f_high");
    synth_cmd->add_option("--s2p", sy_s2p, "Analyzed S21 as Touchstone");
    synth_cmd->add_option("--points", sy_points);

    // analyze-geometry
    auto* geo_cmd = app.add_subcommand("analyze-geometry", "S21 of a parallel-coupled geometry");
    std::string geo_file, geo_start = "1GHz", geo_stop = "12GHz", geo_out, geo_ref;
    int geo_points = 1101;
    geo_cmd->add_option("geometry", geo_file, "Geometry JSON");
    geo_cmd->add_option("--reference", geo_ref, "Built-in geometry instead of a file")
        ->check(CLI::IsMember({"parallel"}));
    geo_cmd->add_option("--start-hz", geo_start);
    geo_cmd->add_option("--stop-hz", geo_stop);
    geo_cmd->add_option("--points", geo_points);
    geo_cmd->add_option("--out", geo_out);

    // analyze-s2p
    auto* s2p_cmd = app.add_subcommand("analyze-s2p", "Passband metrics of a measured S21");
    std::string s2p_file;
    double s2p_drop = 3.0;
    s2p_cmd->add_option("file", s2p_file)->required();
    s2p_cmd->add_option("--edge-drop-db", s2p_drop);

    // qubit
    auto* qubit_cmd = app.add_subcommand("qubit", "Simulated qubit experiments");
    qubit_cmd->require_subcommand(1);
    std::string q_f = "5.61GHz", q_out, q_fit_out;
    double q_t1 = 0.0, q_t2 = 0.0, q_coupling = 2e9, q_noise = 0.0;
    auto add_qubit = [&](CLI::App* c) {
        c->add_option("--f-qubit-hz", q_f);
        c->add_option("--t1-s", q_t1, "0 = no relaxation");
        c->add_option("--t2-s", q_t2, "0 = no dephasing");
        c->add_option("--coupling", q_coupling, "rad/s per volt");
        c->add_option("--noise-sigma", q_noise, "Gaussian readout noise (uses --seed)");
        c->add_option("--out", q_out, "CSV (default stdout)");
        c->add_option("--fit-out", q_fit_out, "Fit report JSON");
    };
    auto* rabi_cmd = qubit_cmd->add_subcommand("rabi", "Population vs drive amplitude");
    add_qubit(rabi_cmd);
    double r_dur_ns = 50.0, r_amp_max = 1.0;
    int r_points = 101;
    rabi_cmd->add_option("--duration-ns", r_dur_ns);
    rabi_cmd->add_option("--amp-max", r_amp_max);
    rabi_cmd->add_option("--points", r_points);

    auto* ramsey_cmd = qubit_cmd->add_subcommand("ramsey", "Population vs free-evolution wait");
    add_qubit(ramsey_cmd);
    std::string ra_det = "2MHz";
    double ra_max_wait = 2e-6;
    int ra_points = 201;
    ramsey_cmd->add_option("--detuning-hz", ra_det);
    ramsey_cmd->add_option("--max-wait-s", ra_max_wait);
    ramsey_cmd->add_option("--points", ra_points);

    auto* spec_cmd = qubit_cmd->add_subcommand("spectroscopy", "Steady-state population vs drive frequency");
    add_qubit(spec_cmd);
    SetupSource spec_src;
    spec_src.add(spec_cmd);
    std::string sp_center, sp_span = "400kHz";
    double sp_scale = 1e-3;
    int sp_points = 201;
    spec_cmd->add_option("--center-hz", sp_center, "Sweep centre (default: qubit frequency)");
    spec_cmd->add_option("--span-hz", sp_span);
    spec_cmd->add_option("--points", sp_points);
    spec_cmd->add_option("--amplitude-scale", sp_scale);

    // calibrate
    auto* cal_cmd = app.add_subcommand("calibrate", "Re-derive the model constants from the benchmark figures");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*plan_cmd) {
            if (p_target.empty() == p_batch.empty()) {
                std::cerr << "plan: exactly one of --target-hz or --batch is required\n";
                return kUsage;
            }
            PlanConstraints c;
            std::optional<double> lo1_fixed;
            if (!p_config.empty()) {
                const auto cfg = load_chain_config(p_config);
                c = cfg.setup.constraints;
                lo1_fixed = cfg.lo1_hz;
            } else {
                if (p_if.empty()) {
                    std::cerr << "plan: --if-hz is required without --config\n";
                    return kUsage;
                }
                c.stage1_passband = {freq(p_s1_lo), freq(p_s1_hi)};
                c.stage2_passband = {freq(p_s2_lo), freq(p_s2_hi)};
                c.mixer1_lo_range = {freq(p_m1_lo), freq(p_m1_hi)};
                c.mixer2_lo_range = {freq(p_m2_lo), freq(p_m2_hi)};
            }
            auto given = [&](const char* flag) { return plan_cmd->count(flag) > 0; };
            if (!p_if.empty()) c.if_range = {freq(p_if), freq(p_if)};
            if (given("--stage1-low-hz")) c.stage1_passband.low_hz = freq(p_s1_lo);
            if (given("--stage1-high-hz")) c.stage1_passband.high_hz = freq(p_s1_hi);
            if (given("--stage2-low-hz")) c.stage2_passband.low_hz = freq(p_s2_lo);
            if (given("--stage2-high-hz")) c.stage2_passband.high_hz = freq(p_s2_hi);
            if (given("--lo1-min-hz")) c.mixer1_lo_range.low_hz = freq(p_m1_lo);
            if (given("--lo1-max-hz")) c.mixer1_lo_range.high_hz = freq(p_m1_hi);
            if (given("--lo2-min-hz")) c.mixer2_lo_range.low_hz = freq(p_m2_lo);
            if (given("--lo2-max-hz")) c.mixer2_lo_range.high_hz = freq(p_m2_hi);
            if (p_config.empty() || given("--stage1-sideband"))
                c.stage1_sideband = p_sb1 == "lower" ? Sideband::Lower : Sideband::Upper;
            if (p_config.empty() || given("--stage2-sideband"))
                c.stage2_sideband = p_sb2 == "lower" ? Sideband::Lower : Sideband::Upper;

            const double lo1 = lo1_fixed ? *lo1_fixed : plan_lo1(c);
            if (!p_target.empty()) {
                std::cout << plan_to_json(plan_lo2(freq(p_target), lo1, c)) << '\n';
                return kOk;
            }
            std::ifstream in(p_batch);
            if (!in) throw ConfigError("cannot open " + p_batch);
            std::string line;
            std::vector<std::string> plans;
            int bad = 0;
            while (std::getline(in, line)) {
                if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
                try {
                    plans.push_back(plan_to_json(plan_lo2(freq(line), lo1, c)));
                } catch (const PlanningError& e) {
                    nlohmann::ordered_json err{{"target", line}, {"error", e.what()}};
                    plans.push_back(err.dump(2));
                    ++bad;
                }
            }
            std::cout << "[\n";
            for (std::size_t i = 0; i < plans.size(); ++i) {
                std::cout << plans[i] << (i + 1 < plans.size() ? ",\n" : "\n");
            }
            std::cout << "]\n";
            return bad > 0 ? kInfeasible : kOk;
        }

        if (*sim_cmd) {
            if (sim_src.config.empty() && sim_src.preset.empty()) {
                std::cerr << "simulate: --config or --preset is required\n";
                return kUsage;
            }
            const auto cfg = sim_src.load();
            const Plan p = sim_src.config.empty() && sim_target.empty()
                               ? plan_for(cfg.setup, 5.026e9)
                               : resolve_plan(cfg, freq_opt(sim_target));
            const Chain chain = chain_for(cfg.setup, p);
            const auto spectra = propagate(chain, cfg.input, cfg.setup.options);
            if (!sim_out_dir.empty()) {
                fs::create_directories(sim_out_dir);
                static const char* names[] = {"mixer1", "filter1", "mixer2", "filter2", "leakage"};
                for (std::size_t i = 0; i < spectra.size(); ++i) {
                    char name[64];
                    std::snprintf(name, sizeof(name), "stage%zu_%s.csv", i + 1, names[std::min<std::size_t>(i, 4)]);
                    emit((fs::path(sim_out_dir) / name).string(), to_csv(spectra[i]));
                }
            }
            const Spectrum& chosen = sim_stage == 1 ? spectra.at(1) : spectra.back();
            if (sim_out_dir.empty() || sim_stage != 0 || !sim_out.empty()) {
                emit(sim_out, to_csv(chosen));
            }
            return kOk;
        }

        if (*sweep_cmd) {
            if (sweep_src.config.empty() && sweep_src.preset.empty()) {
                std::cerr << "sweep-dbc: --config or --preset is required\n";
                return kUsage;
            }
            const auto cfg = sweep_src.load();
            auto setup = cfg.setup;
            if (cfg.lo1_hz) {
                // A fixed LO1 overrides the planner: narrow the constraint to it.
                const double expect = plan_lo1(setup.constraints);
                if (expect != *cfg.lo1_hz) {
                    throw PlanningError("config lo1_hz disagrees with the planned LO1");
                }
            }
            const auto points = sweep_dbc(setup, grid(freq(sw_start), freq(sw_stop), freq(sw_step)), cfg.input);
            std::ostringstream ss;
            write_sweep_csv(ss, points);
            emit(sw_out, ss.str());
            return kOk;
        }

        if (*synth_cmd) {
            ParallelCoupledSpec spec;
            spec.family = sy_family == "chebyshev" ? FilterFamily::Chebyshev : FilterFamily::Butterworth;
            spec.order = sy_order;
            spec.f_low_hz = freq(sy_lo);
            spec.f_high_hz = freq(sy_hi);
            spec.z0_ohm = sy_z0;
            if (synth_cmd->count("--ripple-db") > 0) spec.ripple_db = sy_ripple;
            Substrate sub;
            sub.eps_r = sy_eps;
            sub.height_m = sy_h;
            const auto geo = synthesize_parallel_coupled(spec, sub);
            emit(sy_out, geometry_to_json(geo) + "\n");
            if (!sy_csv.empty() || !sy_s2p.empty()) {
                const auto resp =
                    analyze_parallel_coupled(geo, linspace(0.5 * spec.f_low_hz, 1.5 * spec.f_high_hz, sy_points), sy_z0);
                if (!sy_csv.empty()) {
                    std::ostringstream ss;
                    write_response_csv(ss, resp);
                    emit(sy_csv, ss.str());
                }
                if (!sy_s2p.empty()) emit(sy_s2p, write_touchstone(resp));
            }
            return kOk;
        }

        if (*geo_cmd) {
            ParallelCoupledGeometry geo;
            if (!geo_ref.empty()) {
                geo = reference_parallel_coupled_geometry();
            } else {
                if (geo_file.empty()) {
                    std::cerr << "analyze-geometry: a geometry file or --reference is required\n";
                    return kUsage;
                }
                std::ifstream in(geo_file);
                if (!in) throw ConfigError("cannot open " + geo_file);
                std::stringstream ss;
                ss << in.rdbuf();
                geo = parse_geometry_json(ss.str());
            }
            const auto resp = analyze_parallel_coupled(geo, linspace(freq(geo_start), freq(geo_stop), geo_points));
            std::ostringstream ss;
            write_response_csv(ss, resp);
            emit(geo_out, ss.str());
            return kOk;
        }

        if (*s2p_cmd) {
            const auto resp = load_touchstone(s2p_file);
            std::cout << passband_metrics_to_json(passband_metrics(resp, s2p_drop)) << '\n';
            return kOk;
        }

        if (*qubit_cmd) {
            if (*rabi_cmd) {
                const QubitSpec q = qubit_from(q_f, q_t1, q_t2, q_coupling);
                const auto amps = linspace(0.0, r_amp_max, r_points);
                auto pop = rabi_sweep(q, amps, r_dur_ns * 1e-9);
                add_noise(pop, q_noise, seed);
                emit(q_out, csv_xy(amps, pop));
                if (!q_fit_out.empty()) emit(q_fit_out, fit_to_json(fit_sinusoid(amps, pop)) + "\n");
            } else if (*ramsey_cmd) {
                const QubitSpec q = qubit_from(q_f, q_t1, q_t2, q_coupling);
                const auto waits = linspace(0.0, ra_max_wait, ra_points);
                auto pop = ramsey_sweep(q, freq(ra_det), waits);
                add_noise(pop, q_noise, seed);
                emit(q_out, csv_xy(waits, pop));
                if (!q_fit_out.empty()) emit(q_fit_out, fit_to_json(fit_decaying_cosine(waits, pop)) + "\n");
            } else {
                if (q_t1 <= 0.0) q_t1 = 20e-6;
                if (q_t2 <= 0.0) q_t2 = 10e-6;
                const QubitSpec q = qubit_from(q_f, q_t1, q_t2, q_coupling);
                const auto cfg =
                    spec_src.config.empty() && spec_src.preset.empty() ? SetupSource{"", "bench"}.load() : spec_src.load();
                const double center = sp_center.empty() ? q.f_qubit_hz : freq(sp_center);
                const double half = 0.5 * freq(sp_span);
                const auto targets = linspace(center - half, center + half, sp_points);
                auto pop = spectroscopy_sweep(q, cfg.setup, targets, cfg.input, sp_scale);
                add_noise(pop, q_noise, seed);
                emit(q_out, csv_xy(targets, pop));
                if (!q_fit_out.empty()) emit(q_fit_out, fit_to_json(fit_lorentzian(targets, pop)) + "\n");
            }
            return kOk;
        }

        if (*cal_cmd) {
            const auto k = calibrate();
            const auto s = shipped_constants();
            nlohmann::ordered_json j;
            j["filter1_floor_db"] = {{"calibrated", k.filter1_floor_db}, {"shipped", s.filter1_floor_db}};
            j["spur_slope_db"] = {{"calibrated", k.spur_slope_db}, {"shipped", s.spur_slope_db}};
            j["mixer2_lo_isolation_db"] = {{"calibrated", k.mixer2_lo_isolation_db}, {"shipped", s.mixer2_lo_isolation_db}};
            j["lo2_leak_db"] = {{"calibrated", k.lo2_leak_db}, {"shipped", s.lo2_leak_db}};
            std::cout << j.dump(2) << '\n';
            return kOk;
        }
    } catch (const PlanningError& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kInfeasible;
    } catch (const RangeError& e) {
        std::cerr << "range: " << e.what() << '\n';
        return kRange;
    } catch (const ConfigError& e) {
        std::cerr << "config: " << e.what() << '\n';
        return kUsage;
    } catch (const ParseError& e) {
        std::cerr << "parse: " << e.what() << '\n';
        return kParse;
    } catch (const SynthesisError& e) {
        std::cerr << "synthesis: " << e.what() << '\n';
        return kSynthesis;
    } catch (const NoPassbandError& e) {
        std::cerr << "no passband: " << e.what() << '\n';
        return kNoPassband;
    } catch (const LookupError& e) {
        std::cerr << "lookup: " << e.what() << '\n';
        return kLookup;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInternal;
    }
    return kOk;
}
