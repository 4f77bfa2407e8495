#include "duc/config.hpp"

#include "duc/errors.hpp"
#include "duc/touchstone.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>

namespace duc {

using json = nlohmann::ordered_json;

namespace {

void allow_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
    if (!j.is_object()) {
        throw ConfigError(where + ": expected an object");
    }
    for (const auto& [k, v] : j.items()) {
        if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; })) {
            throw ConfigError(where + ": unknown key '" + k + "'");
        }
    }
}

const json& required(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) {
        throw ConfigError(where + ": missing '" + key + "'");
    }
    return j.at(key);
}

double number(const json& v, const std::string& where) {
    if (v.is_number()) {
        return v.get<double>();
    }
    // -inf is spelled out since JSON has no infinity.
    if (v.is_string() && (v.get<std::string>() == "-inf" || v.get<std::string>() == "inf")) {
        return v.get<std::string>() == "inf" ? kUnbounded : -kUnbounded;
    }
    throw ConfigError(where + ": expected a number");
}

double frequency(const json& v, const std::string& where) {
    if (v.is_number()) {
        return v.get<double>();
    }
    if (v.is_string()) {
        try {
            return parse_frequency(v.get<std::string>());
        } catch (const ConfigError& e) {
            throw ConfigError(where + ": " + e.what());
        }
    }
    throw ConfigError(where + ": expected a frequency");
}

std::pair<double, double> frequency_pair(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 2) {
        throw ConfigError(where + ": expected [low, high]");
    }
    return {frequency(v[0], where), frequency(v[1], where)};
}

Sideband sideband(const json& v, const std::string& where) {
    const std::string s = v.is_string() ? v.get<std::string>() : "";
    if (s == "lower") return Sideband::Lower;
    if (s == "upper") return Sideband::Upper;
    throw ConfigError(where + ": sideband must be \"lower\" or \"upper\"");
}

MixerSpec parse_mixer(const json& j, const std::string& where) {
    allow_keys(j,
               {"name", "conversion_loss_db", "lo_to_rf_isolation_db", "if_to_rf_isolation_db", "spur_slope_db",
                "spur_table", "lo_range_hz"},
               where);
    MixerSpec m;
    m.spur_table[{1, 1}] = 0.0;
    if (j.contains("name")) m.name = j.at("name").get<std::string>();
    if (j.contains("conversion_loss_db")) m.conversion_loss_db = number(j.at("conversion_loss_db"), where);
    if (j.contains("lo_to_rf_isolation_db")) m.lo_to_rf_isolation_db = number(j.at("lo_to_rf_isolation_db"), where);
    if (j.contains("if_to_rf_isolation_db")) m.if_to_rf_isolation_db = number(j.at("if_to_rf_isolation_db"), where);
    if (j.contains("spur_slope_db")) m.spur_slope_db = number(j.at("spur_slope_db"), where);
    if (j.contains("lo_range_hz")) m.lo_range_hz = frequency_pair(j.at("lo_range_hz"), where + ".lo_range_hz");
    if (j.contains("spur_table")) {
        for (const auto& e : j.at("spur_table")) {
            const std::string w = where + ".spur_table";
            allow_keys(e, {"m", "n", "suppression_db"}, w);
            m.spur_table[{required(e, "m", w).get<int>(), required(e, "n", w).get<int>()}] =
                number(required(e, "suppression_db", w), w);
        }
    }
    try {
        m.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where + ": " + e.what());
    }
    return m;
}

FilterFamily family(const json& v, const std::string& where) {
    const std::string s = v.is_string() ? v.get<std::string>() : "";
    if (s == "butterworth") return FilterFamily::Butterworth;
    if (s == "chebyshev") return FilterFamily::Chebyshev;
    throw ConfigError(where + ": family must be \"butterworth\" or \"chebyshev\"");
}

Extrapolation extrapolation(const json& v, const std::string& where) {
    const std::string s = v.is_string() ? v.get<std::string>() : "";
    if (s == "hold") return Extrapolation::HoldLast;
    if (s == "floor") return Extrapolation::Floor;
    throw ConfigError(where + ": extrapolation must be \"hold\" or \"floor\"");
}

std::vector<ResponseElement> parse_filter_elements(const json& j, const std::string& where,
                                                   const std::filesystem::path& base) {
    const std::string type = required(j, "type", where).is_string() ? j.at("type").get<std::string>() : "";
    if (type == "prototype") {
        allow_keys(j,
                   {"type", "family", "order", "kind", "f_low_hz", "f_high_hz", "ripple_db", "insertion_loss_db",
                    "stopband_floor_db"},
                   where);
        PrototypeResponse p;
        if (j.contains("family")) p.family = family(j.at("family"), where);
        p.order = required(j, "order", where).get<int>();
        const std::string kind = j.value("kind", std::string("bandpass"));
        if (kind == "bandpass") {
            p.kind = FilterKind::Bandpass;
            p.f_low_hz = frequency(required(j, "f_low_hz", where), where);
        } else if (kind == "lowpass") {
            p.kind = FilterKind::Lowpass;
            if (j.contains("f_low_hz")) throw ConfigError(where + ": lowpass takes no f_low_hz");
        } else {
            throw ConfigError(where + ": kind must be \"bandpass\" or \"lowpass\"");
        }
        p.f_high_hz = frequency(required(j, "f_high_hz", where), where);
        if (j.contains("ripple_db")) p.ripple_db = number(j.at("ripple_db"), where);
        if (j.contains("insertion_loss_db")) p.insertion_loss_db = number(j.at("insertion_loss_db"), where);
        if (j.contains("stopband_floor_db")) p.stopband_floor_db = number(j.at("stopband_floor_db"), where);
        try {
            p.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(where + ": " + e.what());
        }
        return {p};
    }
    if (type == "touchstone") {
        allow_keys(j, {"type", "path", "extrapolation"}, where);
        std::filesystem::path path = required(j, "path", where).get<std::string>();
        if (path.is_relative()) path = base / path;
        const Extrapolation ex =
            j.contains("extrapolation") ? extrapolation(j.at("extrapolation"), where) : Extrapolation::HoldLast;
        return {load_touchstone(path.string(), ex)};
    }
    if (type == "cascade") {
        allow_keys(j, {"type", "elements"}, where);
        std::vector<ResponseElement> out;
        const auto& els = required(j, "elements", where);
        for (std::size_t i = 0; i < els.size(); ++i) {
            auto sub = parse_filter_elements(els[i], where + ".elements[" + std::to_string(i) + "]", base);
            out.insert(out.end(), sub.begin(), sub.end());
        }
        if (out.empty()) throw ConfigError(where + ": empty cascade");
        return out;
    }
    throw ConfigError(where + ": filter type must be \"prototype\", \"touchstone\" or \"cascade\"");
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Round-trippable doubles without locale or printf surprises in json dumps.
json num(double v) {
    if (!std::isfinite(v)) return v > 0 ? json("inf") : (v < 0 ? json("-inf") : json(nullptr));
    return json(v);
}

} // namespace

double parse_frequency(std::string_view text) {
    std::string s(text);
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr == s.data()) {
        throw ConfigError("cannot parse frequency '" + std::string(text) + "'");
    }
    std::string unit(ptr, static_cast<const char*>(s.data() + s.size()));
    std::transform(unit.begin(), unit.end(), unit.begin(), [](unsigned char c) { return std::tolower(c); });
    double scale = 0.0;
    if (unit.empty() || unit == "hz") scale = 1.0;
    else if (unit == "khz") scale = 1e3;
    else if (unit == "mhz") scale = 1e6;
    else if (unit == "ghz") scale = 1e9;
    else throw ConfigError("unknown frequency unit in '" + std::string(text) + "'");
    if (!std::isfinite(value)) {
        throw ConfigError("frequency '" + std::string(text) + "' is not finite");
    }
    return value * scale;
}

ChainConfig parse_chain_config(std::string_view text, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    try {
        allow_keys(j,
                   {"input", "mixers", "filters", "lo1_hz", "lo2_hz", "lo1_power_dbm", "lo2_power_dbm", "leakage",
                    "plan", "max_order", "power_floor_dbm", "merge_tolerance_hz"},
                   "config");
        ChainConfig c;
        auto& s = c.setup;
        const double tol = j.contains("merge_tolerance_hz") ? frequency(j.at("merge_tolerance_hz"), "merge_tolerance_hz")
                                                           : kDefaultMergeToleranceHz;

        std::vector<Tone> tones;
        const auto& input = required(j, "input", "config");
        for (std::size_t i = 0; i < input.size(); ++i) {
            const std::string w = "input[" + std::to_string(i) + "]";
            allow_keys(input[i], {"frequency_hz", "power_dbm", "label"}, w);
            Tone t{frequency(required(input[i], "frequency_hz", w), w), number(required(input[i], "power_dbm", w), w),
                   input[i].value("label", std::string("IF"))};
            try {
                t.validate();
            } catch (const std::invalid_argument& e) {
                throw ConfigError(w + ": " + e.what());
            }
            tones.push_back(t);
        }
        if (tones.empty()) throw ConfigError("config: input must list at least one tone");
        c.input = Spectrum(tones, tol);

        const auto& mixers = required(j, "mixers", "config");
        if (!mixers.is_array() || mixers.size() != 2) throw ConfigError("config: exactly two mixers required");
        s.mixer1 = parse_mixer(mixers[0], "mixers[0]");
        s.mixer2 = parse_mixer(mixers[1], "mixers[1]");

        const auto& filters = required(j, "filters", "config");
        if (!filters.is_array() || filters.size() != 2) throw ConfigError("config: exactly two filters required");
        s.filter1 = FilterResponse(parse_filter_elements(filters[0], "filters[0]", base_dir));
        s.filter2 = FilterResponse(parse_filter_elements(filters[1], "filters[1]", base_dir));

        if (j.contains("lo1_hz")) c.lo1_hz = frequency(j.at("lo1_hz"), "lo1_hz");
        if (j.contains("lo2_hz")) c.lo2_hz = frequency(j.at("lo2_hz"), "lo2_hz");
        if (j.contains("lo1_power_dbm")) s.lo1_power_dbm = number(j.at("lo1_power_dbm"), "lo1_power_dbm");
        if (j.contains("lo2_power_dbm")) s.lo2_power_dbm = number(j.at("lo2_power_dbm"), "lo2_power_dbm");
        if (j.contains("max_order")) s.options.max_order = j.at("max_order").get<int>();
        if (j.contains("power_floor_dbm")) s.options.power_floor_dbm = number(j.at("power_floor_dbm"), "power_floor_dbm");

        if (j.contains("leakage")) {
            const auto& leak = j.at("leakage");
            for (std::size_t i = 0; i < leak.size(); ++i) {
                const std::string w = "leakage[" + std::to_string(i) + "]";
                allow_keys(leak[i], {"source", "stage", "coupling_db"}, w);
                LeakageCoupling lc;
                const std::string src = required(leak[i], "source", w).get<std::string>();
                if (src == "stage") lc.source = LeakageSource::StageOutput;
                else if (src == "lo") lc.source = LeakageSource::MixerLo;
                else throw ConfigError(w + ": source must be \"stage\" or \"lo\"");
                lc.stage_index = required(leak[i], "stage", w).get<std::size_t>();
                if (lc.stage_index > 3) throw ConfigError(w + ": stage must be 0..3");
                if (lc.source == LeakageSource::MixerLo && lc.stage_index != 0 && lc.stage_index != 2) {
                    throw ConfigError(w + ": LO leakage must reference mixer stage 0 or 2");
                }
                lc.coupling_db = number(required(leak[i], "coupling_db", w), w);
                if (lc.coupling_db > 0.0 || std::isnan(lc.coupling_db)) throw ConfigError(w + ": coupling_db must be <= 0");
                s.leakage.push_back(lc);
            }
        }

        auto& pc = s.constraints;
        pc.mixer1_lo_range = {s.mixer1.lo_range_hz.first, s.mixer1.lo_range_hz.second};
        pc.mixer2_lo_range = {s.mixer2.lo_range_hz.first, s.mixer2.lo_range_hz.second};
        const double f_if = c.input.tones().front().frequency_hz;
        pc.if_range = {f_if, f_if};
        if (j.contains("plan")) {
            const auto& p = j.at("plan");
            allow_keys(p,
                       {"if_range_hz", "stage1_passband_hz", "stage2_passband_hz", "stage1_sideband", "stage2_sideband",
                        "target_hz"},
                       "plan");
            if (p.contains("if_range_hz")) {
                const auto r = frequency_pair(p.at("if_range_hz"), "plan.if_range_hz");
                pc.if_range = {r.first, r.second};
            }
            if (p.contains("stage1_passband_hz")) {
                const auto r = frequency_pair(p.at("stage1_passband_hz"), "plan.stage1_passband_hz");
                pc.stage1_passband = {r.first, r.second};
            }
            if (p.contains("stage2_passband_hz")) {
                const auto r = frequency_pair(p.at("stage2_passband_hz"), "plan.stage2_passband_hz");
                pc.stage2_passband = {r.first, r.second};
            }
            if (p.contains("stage1_sideband")) pc.stage1_sideband = sideband(p.at("stage1_sideband"), "plan");
            if (p.contains("stage2_sideband")) pc.stage2_sideband = sideband(p.at("stage2_sideband"), "plan");
            if (p.contains("target_hz")) c.target_hz = frequency(p.at("target_hz"), "plan.target_hz");
        }
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

ChainConfig load_chain_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_chain_config(ss.str(), path.parent_path());
}

Plan resolve_plan(const ChainConfig& config, std::optional<double> target_override) {
    const auto& c = config.setup.constraints;
    const double lo1 = config.lo1_hz ? *config.lo1_hz : plan_lo1(c);
    const std::optional<double> target = target_override ? target_override : config.target_hz;
    if (target) {
        return plan_lo2(*target, lo1, c);
    }
    if (!config.lo2_hz) {
        throw PlanningError("no LO2 frequency and no target to plan one for");
    }
    Plan p;
    p.f_if_hz = config.input.tones().front().frequency_hz;
    p.f_lo1_hz = lo1;
    p.f_lo2_hz = *config.lo2_hz;
    p.stage1_sideband = c.stage1_sideband;
    p.stage2_sideband = c.stage2_sideband;
    p.stage1_hz = sideband_frequency(lo1, p.f_if_hz, c.stage1_sideband);
    p.output_hz = sideband_frequency(p.f_lo2_hz, p.stage1_hz, c.stage2_sideband);
    return p;
}

std::string plan_to_json(const Plan& p) {
    auto sb = [](Sideband s) { return s == Sideband::Lower ? "lower" : "upper"; };
    json j;
    j["f_if_hz"] = num(p.f_if_hz);
    j["f_lo1_hz"] = num(p.f_lo1_hz);
    j["f_lo2_hz"] = num(p.f_lo2_hz);
    j["stage1_hz"] = num(p.stage1_hz);
    j["output_hz"] = num(p.output_hz);
    j["stage1_sideband"] = sb(p.stage1_sideband);
    j["stage2_sideband"] = sb(p.stage2_sideband);
    return j.dump(2);
}

std::string geometry_to_json(const ParallelCoupledGeometry& g) {
    json j;
    j["sections"] = json::array();
    for (const auto& s : g.sections) {
        j["sections"].push_back({{"w_m", s.width_m}, {"l_m", s.length_m}, {"s_m", s.gap_m}});
    }
    j["substrate"] = {{"eps_r", g.substrate.eps_r}, {"h_m", g.substrate.height_m}};
    return j.dump(2);
}

ParallelCoupledGeometry parse_geometry_json(std::string_view text) {
    try {
        const json j = json::parse(text);
        allow_keys(j, {"sections", "substrate"}, "geometry");
        ParallelCoupledGeometry g;
        for (const auto& s : required(j, "sections", "geometry")) {
            allow_keys(s, {"w_m", "l_m", "s_m"}, "geometry.sections");
            g.sections.push_back({number(required(s, "w_m", "section"), "w_m"), number(required(s, "l_m", "section"), "l_m"),
                                  number(required(s, "s_m", "section"), "s_m")});
        }
        if (j.contains("substrate")) {
            const auto& sub = j.at("substrate");
            allow_keys(sub, {"eps_r", "h_m"}, "geometry.substrate");
            if (sub.contains("eps_r")) g.substrate.eps_r = number(sub.at("eps_r"), "eps_r");
            if (sub.contains("h_m")) g.substrate.height_m = number(sub.at("h_m"), "h_m");
        }
        try {
            g.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("geometry: ") + e.what());
        }
        return g;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("geometry: ") + e.what());
    }
}

std::string passband_metrics_to_json(const PassbandMetrics& m) {
    json j;
    j["f_low_hz"] = num(m.f_low_edge_hz);
    j["f_high_hz"] = num(m.f_high_edge_hz);
    j["mean_il_db"] = num(m.mean_insertion_loss_db);
    j["min_il_db"] = num(m.min_insertion_loss_db);
    return j.dump(2);
}

std::string fit_to_json(const FitResult& f) {
    json j;
    j["parameters"] = json::object();
    for (const auto& [k, v] : f.parameters) j["parameters"][k] = num(v);
    j["residual_norm"] = num(f.residual_norm);
    j["converged"] = f.converged;
    j["iterations"] = f.iterations;
    return j.dump(2);
}

void write_xy_csv(std::ostream& out, const std::vector<double>& x, const std::vector<double>& population) {
    if (x.size() != population.size()) {
        throw std::invalid_argument("x and population differ in length");
    }
    out << "x,population\n";
    for (std::size_t i = 0; i < x.size(); ++i) {
        out << fmt17(x[i]) << ',' << fmt17(population[i]) << '\n';
    }
}

void write_response_csv(std::ostream& out, const TabulatedResponse& response) {
    out << "frequency_hz,s21_db\n";
    char buf[64];
    for (const auto& [f, db] : response.points) {
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g\n", f, db);
        out << buf;
    }
}

} // namespace duc
