#pragma once

#include <string>
#include <vector>

namespace duc {

enum class Sideband { Lower, Upper };

struct FrequencyRange {
    double low_hz = 0.0;
    double high_hz = 0.0;

    bool contains(double f_hz) const { return f_hz >= low_hz && f_hz <= high_hz; }
    double center() const { return 0.5 * (low_hz + high_hz); }
    double width() const { return high_hz - low_hz; }
};

struct PlanConstraints {
    FrequencyRange if_range;
    FrequencyRange stage1_passband;
    FrequencyRange stage2_passband;
    FrequencyRange mixer1_lo_range;
    FrequencyRange mixer2_lo_range;
    Sideband stage1_sideband = Sideband::Lower;
    Sideband stage2_sideband = Sideband::Lower;

    /// Throws std::invalid_argument if any range is empty (low > high).
    void validate() const;
};

struct Plan {
    double f_if_hz = 0.0;
    double f_lo1_hz = 0.0;
    double f_lo2_hz = 0.0;
    double stage1_hz = 0.0;
    double output_hz = 0.0;
    Sideband stage1_sideband = Sideband::Lower;
    Sideband stage2_sideband = Sideband::Lower;
};

/// lo - f for the lower sideband, lo + f for the upper.
double sideband_frequency(double lo_hz, double f_hz, Sideband sideband);
/// The product on the other side of the LO: |lo -/+ f|.
double image_frequency(double lo_hz, double f_hz, Sideband sideband);

/// Widest second-stage passband that still rejects the second-stage image
/// for a given first-stage frequency (sideband spacing after mixer 2).
double max_stage2_passband_width(double stage1_hz);

/// LO1 that puts the selected sideband of the mid-range IF at the centre of
/// the first-stage passband. Throws PlanningError naming the violated
/// constraint: LO1 outside mixer range, the IF range not mapping inside the
/// passband, or the image sideband landing inside it.
double plan_lo1(const PlanConstraints& constraints);

/// Completes a plan for `target_hz` given a fixed LO1.
Plan plan_lo2(double target_hz, double f_lo1_hz, const PlanConstraints& constraints);

/// plan_lo2(target, plan_lo1(constraints), constraints).
Plan plan(double target_hz, const PlanConstraints& constraints);

/// Every Plan invariant that does not hold, as human-readable strings.
std::vector<std::string> plan_violations(const Plan& plan, const PlanConstraints& constraints);

} // namespace duc
