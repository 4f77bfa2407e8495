#include "duc/chain.hpp"

#include "duc/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace duc {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

} // namespace

Chain::Chain(std::vector<Stage> stages) : m_stages(std::move(stages)) {
    for (std::size_t i = 0; i < m_stages.size(); ++i) {
        const auto* leak = std::get_if<LeakageStage>(&m_stages[i]);
        if (leak == nullptr) {
            continue;
        }
        for (const auto& c : leak->couplings) {
            if (c.stage_index >= i) {
                throw std::invalid_argument("leakage at stage " + std::to_string(i) +
                                            " references stage " + std::to_string(c.stage_index) +
                                            ", which does not precede it");
            }
            if (c.source == LeakageSource::MixerLo &&
                !std::holds_alternative<MixerStage>(m_stages[c.stage_index])) {
                throw std::invalid_argument("leakage LO source stage " + std::to_string(c.stage_index) +
                                            " is not a mixer");
            }
            if (std::isnan(c.coupling_db) || c.coupling_db == kUnbounded) {
                throw std::invalid_argument("leakage coupling must be finite or -inf");
            }
        }
    }
}

std::size_t Chain::mixer_count() const {
    return static_cast<std::size_t>(std::count_if(m_stages.begin(), m_stages.end(), [](const Stage& s) {
        return std::holds_alternative<MixerStage>(s);
    }));
}

Chain Chain::with_lo(std::size_t stage_index, const Tone& lo) const {
    if (stage_index >= m_stages.size() || !std::holds_alternative<MixerStage>(m_stages[stage_index])) {
        throw std::invalid_argument("stage " + std::to_string(stage_index) + " is not a mixer");
    }
    auto stages = m_stages;
    std::get<MixerStage>(stages[stage_index]).lo = lo;
    return Chain(std::move(stages));
}

Chain build_double_upconversion(const MixerSpec& mixer1, const MixerSpec& mixer2,
                                const FilterResponse& filter1, const FilterResponse& filter2,
                                const Tone& lo1, const Tone& lo2,
                                const std::optional<LeakageStage>& leakage) {
    const std::pair<const MixerSpec*, const Tone*> mixers[] = {{&mixer1, &lo1}, {&mixer2, &lo2}};
    int stage = 1;
    for (const auto& [spec, lo] : mixers) {
        spec->validate();
        lo->validate();
        const auto [lo_min, lo_max] = spec->lo_range_hz;
        if (lo->frequency_hz < lo_min || lo->frequency_hz > lo_max) {
            char buf[160];
            std::snprintf(buf, sizeof(buf), "mixer stage %d (%s): LO %.9g Hz outside range [%.9g, %.9g] Hz",
                          stage, spec->name.c_str(), lo->frequency_hz, lo_min, lo_max);
            throw RangeError(buf);
        }
        ++stage;
    }
    if (filter1.empty() || filter2.empty()) {
        throw std::invalid_argument("double upconversion needs both filters");
    }
    std::vector<Stage> stages{MixerStage{mixer1, lo1}, FilterStage{"filter1", filter1},
                              MixerStage{mixer2, lo2}, FilterStage{"filter2", filter2}};
    if (leakage) {
        stages.emplace_back(*leakage);
    }
    return Chain(std::move(stages));
}

std::vector<Spectrum> propagate(const Chain& chain, const Spectrum& input, const PropagationOptions& options) {
    if (input.empty()) {
        throw std::invalid_argument("propagate needs a non-empty input spectrum");
    }
    const double tol = input.merge_tolerance_hz();
    std::vector<Spectrum> out;
    out.reserve(chain.size());
    const Spectrum* current = &input;
    for (std::size_t i = 0; i < chain.size(); ++i) {
        const Stage& stage = chain.stages()[i];
        Spectrum next = std::visit(
            overloaded{
                [&](const MixerStage& m) { return mix(*current, m.lo, m.spec, options.max_order); },
                [&](const FilterStage& f) { return apply_response(*current, f.response); },
                [&](const AttenuatorStage& a) { return current->offset(-a.attenuation_db); },
                [&](const LeakageStage& l) {
                    std::vector<Tone> tones = current->tones();
                    for (const auto& c : l.couplings) {
                        if (c.coupling_db == -kUnbounded) {
                            continue;
                        }
                        if (c.source == LeakageSource::MixerLo) {
                            Tone t = std::get<MixerStage>(chain.stages()[c.stage_index]).lo;
                            t.power_dbm += c.coupling_db;
                            t.label += " (leak)";
                            tones.push_back(std::move(t));
                        } else {
                            for (Tone t : out[c.stage_index].tones()) {
                                t.power_dbm += c.coupling_db;
                                t.label += " (leak)";
                                tones.push_back(std::move(t));
                            }
                        }
                    }
                    return merge(std::move(tones), tol);
                },
            },
            stage);
        out.push_back(next.pruned(options.power_floor_dbm));
        current = &out.back();
    }
    return out;
}

std::vector<Spectrum> propagate(const Chain& chain, const Spectrum& input, int max_order) {
    PropagationOptions options;
    options.max_order = max_order;
    return propagate(chain, input, options);
}

Spectrum propagate_output(const Chain& chain, const Spectrum& input, const PropagationOptions& options) {
    auto stages = propagate(chain, input, options);
    return stages.empty() ? input : stages.back();
}

Plan plan_for(const DoubleUpconversionTemplate& setup, double target_hz) {
    return plan(target_hz, setup.constraints);
}

Chain chain_for(const DoubleUpconversionTemplate& setup, const Plan& p) {
    std::optional<LeakageStage> leakage;
    if (!setup.leakage.empty()) {
        leakage = LeakageStage{setup.leakage};
    }
    return build_double_upconversion(setup.mixer1, setup.mixer2, setup.filter1, setup.filter2,
                                     Tone{p.f_lo1_hz, setup.lo1_power_dbm, "LO1"},
                                     Tone{p.f_lo2_hz, setup.lo2_power_dbm, "LO2"}, leakage);
}

DbcPoint evaluate_dbc(const DoubleUpconversionTemplate& setup, double target_hz, const Spectrum& input) {
    DbcPoint pt;
    pt.target_hz = target_hz;
    try {
        const Plan p = plan_for(setup, target_hz);
        pt.lo2_hz = p.f_lo2_hz;
        const Spectrum output = propagate_output(chain_for(setup, p), input, setup.options);
        const Tone& desired = output.at(p.output_hz);
        const Tone* lo2 = output.find(p.f_lo2_hz);
        pt.dbc_db = lo2 == nullptr ? kUnbounded : std::abs(lo2->power_dbm - desired.power_dbm);
    } catch (const PlanningError& e) {
        pt.error = e.what();
    } catch (const RangeError& e) {
        pt.error = e.what();
    } catch (const LookupError& e) {
        pt.error = e.what();
    }
    return pt;
}

std::vector<DbcPoint> sweep_dbc(const DoubleUpconversionTemplate& setup, const std::vector<double>& targets_hz,
                                const Spectrum& input) {
    std::vector<DbcPoint> out(targets_hz.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < targets_hz.size(); i = next++) {
            out[i] = evaluate_dbc(setup, targets_hz[i], input);
        }
    };
    const std::size_t n_threads =
        std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), targets_hz.size());
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    return out;
}

void write_sweep_csv(std::ostream& out, const std::vector<DbcPoint>& points) {
    out << "target_hz,dbc_db,lo2_hz\n";
    char buf[96];
    for (const auto& p : points) {
        if (p.error) {
            std::snprintf(buf, sizeof(buf), "%.9g,,\n", p.target_hz);
        } else {
            std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g\n", p.target_hz, p.dbc_db, p.lo2_hz);
        }
        out << buf;
    }
}

double iq_image_rejection(double amplitude_imbalance_db, double phase_error_deg) {
    const double g = std::pow(10.0, amplitude_imbalance_db / 20.0);
    const double c = std::cos(phase_error_deg * std::numbers::pi / 180.0);
    const double num = 1.0 + g * g + 2.0 * g * c;
    const double den = 1.0 + g * g - 2.0 * g * c;
    if (den <= 0.0) {
        return kUnbounded;
    }
    return 10.0 * std::log10(num / den);
}

std::optional<double> iq_phase_error_for_rejection(double amplitude_imbalance_db, double rejection_db) {
    const double g = std::pow(10.0, amplitude_imbalance_db / 20.0);
    const double r = std::pow(10.0, rejection_db / 10.0);
    const double c = (1.0 + g * g) * (r - 1.0) / (2.0 * g * (r + 1.0));
    if (!(c <= 1.0)) {
        return std::nullopt;
    }
    return std::acos(c) * 180.0 / std::numbers::pi;
}

} // namespace duc
