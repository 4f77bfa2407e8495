#include "duc/planner.hpp"

#include "duc/errors.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace duc {

namespace {

std::string hz(double f) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g Hz", f);
    return buf;
}

std::string range(const FrequencyRange& r) { return "[" + hz(r.low_hz) + ", " + hz(r.high_hz) + "]"; }

bool inside_open(const FrequencyRange& r, double f) { return f > r.low_hz && f < r.high_hz; }

} // namespace

void PlanConstraints::validate() const {
    const FrequencyRange* all[] = {&if_range, &stage1_passband, &stage2_passband, &mixer1_lo_range,
                                   &mixer2_lo_range};
    for (const auto* r : all) {
        if (!(r->low_hz <= r->high_hz) || !(r->low_hz >= 0.0)) {
            throw std::invalid_argument("plan constraint range " + range(*r) + " is empty");
        }
    }
}

double sideband_frequency(double lo_hz, double f_hz, Sideband sideband) {
    return sideband == Sideband::Lower ? lo_hz - f_hz : lo_hz + f_hz;
}

double image_frequency(double lo_hz, double f_hz, Sideband sideband) {
    return std::abs(sideband == Sideband::Lower ? lo_hz + f_hz : lo_hz - f_hz);
}

double max_stage2_passband_width(double stage1_hz) { return 2.0 * stage1_hz; }

double plan_lo1(const PlanConstraints& c) {
    c.validate();
    const double f_if = c.if_range.center();
    const double center = c.stage1_passband.center();
    const double lo1 = c.stage1_sideband == Sideband::Lower ? center + f_if : center - f_if;

    if (!(lo1 > 0.0)) {
        throw PlanningError("LO1 " + hz(lo1) + " is not positive for the selected sideband");
    }
    if (!c.mixer1_lo_range.contains(lo1)) {
        throw PlanningError("LO1 " + hz(lo1) + " outside mixer 1 range " + range(c.mixer1_lo_range));
    }
    for (double f : {c.if_range.low_hz, c.if_range.high_hz}) {
        const double wanted = sideband_frequency(lo1, f, c.stage1_sideband);
        if (!c.stage1_passband.contains(wanted)) {
            throw PlanningError("IF " + hz(f) + " maps to " + hz(wanted) + ", outside stage-1 passband " +
                                range(c.stage1_passband));
        }
        const double image = image_frequency(lo1, f, c.stage1_sideband);
        if (c.stage1_passband.contains(image)) {
            throw PlanningError("stage-1 image " + hz(image) + " falls inside stage-1 passband " +
                                range(c.stage1_passband));
        }
    }
    return lo1;
}

Plan plan_lo2(double target_hz, double f_lo1_hz, const PlanConstraints& c) {
    c.validate();
    if (!c.stage2_passband.contains(target_hz)) {
        throw PlanningError("target " + hz(target_hz) + " outside stage-2 passband " +
                            range(c.stage2_passband));
    }
    Plan p;
    p.f_if_hz = c.if_range.center();
    p.f_lo1_hz = f_lo1_hz;
    p.stage1_sideband = c.stage1_sideband;
    p.stage2_sideband = c.stage2_sideband;
    p.stage1_hz = sideband_frequency(f_lo1_hz, p.f_if_hz, c.stage1_sideband);
    p.f_lo2_hz = c.stage2_sideband == Sideband::Lower ? target_hz + p.stage1_hz : target_hz - p.stage1_hz;

    if (!(p.f_lo2_hz > 0.0)) {
        throw PlanningError("LO2 " + hz(p.f_lo2_hz) + " is not positive; outside mixer 2 range " +
                            range(c.mixer2_lo_range));
    }
    if (!c.mixer2_lo_range.contains(p.f_lo2_hz)) {
        throw PlanningError("LO2 " + hz(p.f_lo2_hz) + " outside mixer 2 range " + range(c.mixer2_lo_range));
    }
    const double image = image_frequency(p.f_lo2_hz, p.stage1_hz, c.stage2_sideband);
    if (inside_open(c.stage2_passband, image)) {
        throw PlanningError("stage-2 image " + hz(image) + " falls inside stage-2 passband " +
                            range(c.stage2_passband));
    }
    p.output_hz = sideband_frequency(p.f_lo2_hz, p.stage1_hz, c.stage2_sideband);
    return p;
}

Plan plan(double target_hz, const PlanConstraints& constraints) {
    return plan_lo2(target_hz, plan_lo1(constraints), constraints);
}

std::vector<std::string> plan_violations(const Plan& p, const PlanConstraints& c) {
    std::vector<std::string> out;
    const double s = sideband_frequency(p.f_lo1_hz, p.f_if_hz, p.stage1_sideband);
    const double o = sideband_frequency(p.f_lo2_hz, s, p.stage2_sideband);
    if (s != p.stage1_hz) {
        out.push_back("stage-1 frequency does not match LO1 and IF");
    }
    if (o != p.output_hz) {
        out.push_back("output frequency does not match LO2 and stage-1 frequency");
    }
    if (!c.stage1_passband.contains(p.stage1_hz)) {
        out.push_back("stage-1 frequency outside stage-1 passband");
    }
    if (!c.stage2_passband.contains(p.output_hz)) {
        out.push_back("output frequency outside stage-2 passband");
    }
    if (!c.mixer1_lo_range.contains(p.f_lo1_hz)) {
        out.push_back("LO1 outside mixer 1 range");
    }
    if (!c.mixer2_lo_range.contains(p.f_lo2_hz)) {
        out.push_back("LO2 outside mixer 2 range");
    }
    return out;
}

} // namespace duc
