#include "duc/microstrip.hpp"

#include "duc/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace duc {

namespace {

constexpr double kC0 = 299792458.0;
constexpr double kEps0 = 8.8541878128e-12;
constexpr double kEta0 = 376.730313668;
constexpr double kPi = std::numbers::pi;

// Per-unit-length capacitances of the even and odd modes.
struct ModeCapacitance {
    double even = 0.0;
    double odd = 0.0;
};

ModeCapacitance garg_bahl_capacitance(double u, double g, double eps_r) {
    Substrate s;
    s.eps_r = eps_r;
    s.height_m = 1.0;
    const LineParameters single = line_parameters(u, s);

    const double cp = kEps0 * eps_r * u;
    const double cf = 0.5 * (std::sqrt(single.eps_eff) / (kC0 * single.z0_ohm) - cp);
    const double a = std::exp(-0.1 * std::exp(2.33 - 2.53 * u));
    const double cf_adj = cf / (1.0 + a / g * std::tanh(8.0 * g)) * std::sqrt(eps_r / single.eps_eff);

    const double k = g / (g + 2.0 * u);
    const double kp = std::sqrt(1.0 - k * k);
    const double cga = kEps0 * std::comp_ellint_1(kp) / std::comp_ellint_1(k);
    const double cgd = kEps0 * eps_r / kPi * std::log(1.0 / std::tanh(kPi * g / 4.0)) +
                       0.65 * cf * (0.02 * std::sqrt(eps_r) / g + 1.0 - 1.0 / (eps_r * eps_r));

    return {cp + cf + cf_adj, cp + cf + cga + cgd};
}

} // namespace

void Substrate::validate() const {
    if (!(eps_r >= 1.0)) {
        throw std::invalid_argument("substrate eps_r must be >= 1");
    }
    if (!(height_m > 0.0)) {
        throw std::invalid_argument("substrate height must be positive");
    }
}

LineParameters line_parameters(double width_m, const Substrate& substrate) {
    substrate.validate();
    if (!(width_m > 0.0)) {
        throw std::invalid_argument("line width must be positive");
    }
    const double u = width_m / substrate.height_m;
    const double er = substrate.eps_r;

    const double u4 = u * u * u * u;
    const double a = 1.0 + std::log((u4 + std::pow(u / 52.0, 2.0)) / (u4 + 0.432)) / 49.0 +
                     std::log(1.0 + std::pow(u / 18.1, 3.0)) / 18.7;
    const double b = 0.564 * std::pow((er - 0.9) / (er + 3.0), 0.053);
    const double eps_eff = (er + 1.0) / 2.0 + (er - 1.0) / 2.0 * std::pow(1.0 + 10.0 / u, -a * b);

    const double f = 6.0 + (2.0 * kPi - 6.0) * std::exp(-std::pow(30.666 / u, 0.7528));
    const double z_air = kEta0 / (2.0 * kPi) * std::log(f / u + std::sqrt(1.0 + 4.0 / (u * u)));
    return {z_air / std::sqrt(eps_eff), eps_eff};
}

double line_width_for_impedance(double z0_ohm, const Substrate& substrate) {
    double lo = 1e-4 * substrate.height_m;
    double hi = 100.0 * substrate.height_m;
    if (z0_ohm > line_parameters(lo, substrate).z0_ohm || z0_ohm < line_parameters(hi, substrate).z0_ohm) {
        throw SynthesisError("line impedance " + std::to_string(z0_ohm) + " ohm not realisable");
    }
    for (int i = 0; i < 200 && hi / lo > 1.0 + 1e-12; ++i) {
        const double mid = std::sqrt(lo * hi);
        if (line_parameters(mid, substrate).z0_ohm > z0_ohm) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return std::sqrt(lo * hi);
}

CoupledLineParameters coupled_line_parameters(double width_m, double gap_m, const Substrate& substrate) {
    substrate.validate();
    if (!(width_m > 0.0) || !(gap_m > 0.0)) {
        throw std::invalid_argument("coupled line width and gap must be positive");
    }
    const double u = width_m / substrate.height_m;
    const double g = gap_m / substrate.height_m;
    const ModeCapacitance c = garg_bahl_capacitance(u, g, substrate.eps_r);
    const ModeCapacitance c_air = garg_bahl_capacitance(u, g, 1.0);

    CoupledLineParameters p;
    p.z0_even_ohm = 1.0 / (kC0 * std::sqrt(c.even * c_air.even));
    p.z0_odd_ohm = 1.0 / (kC0 * std::sqrt(c.odd * c_air.odd));
    p.eps_eff_even = c.even / c_air.even;
    p.eps_eff_odd = c.odd / c_air.odd;
    return p;
}

void ParallelCoupledGeometry::validate() const {
    substrate.validate();
    if (sections.empty()) {
        throw std::invalid_argument("parallel-coupled geometry needs at least one section");
    }
    const std::size_t n = sections.size();
    for (std::size_t k = 0; k < n; ++k) {
        const auto& s = sections[k];
        if (!(s.width_m > 0.0) || !(s.length_m > 0.0) || !(s.gap_m > 0.0)) {
            throw std::invalid_argument("section " + std::to_string(k + 1) + " has a non-positive dimension");
        }
        const auto& m = sections[n - 1 - k];
        if (s.width_m != m.width_m || s.length_m != m.length_m || s.gap_m != m.gap_m) {
            throw std::invalid_argument("parallel-coupled geometry is not symmetric");
        }
    }
}

void InterdigitalGeometry::validate() const {
    const std::array<double, 9> all{feed_width_m, resonator_width_m, resonator_length_m, tap_m,
                                    end_gap_m,    gaps_m[0],         gaps_m[1],          gaps_m[2],
                                    board_thickness_m};
    for (double v : all) {
        if (!(v > 0.0)) {
            throw std::invalid_argument("interdigital geometry has a non-positive dimension");
        }
    }
}

InterdigitalGeometry reference_interdigital_geometry() {
    InterdigitalGeometry g;
    g.feed_width_m = 1.9e-3;
    g.resonator_width_m = 2.995e-3;
    g.resonator_length_m = 11.07e-3;
    g.tap_m = 3.516e-3;
    g.end_gap_m = 0.7986e-3;
    g.gaps_m[0] = 1.752e-3;
    g.gaps_m[1] = 3.019e-3;
    g.gaps_m[2] = 3.019e-3;
    g.board_thickness_m = 1.6e-3;
    return g;
}

ParallelCoupledGeometry reference_parallel_coupled_geometry() {
    const CoupledSection s1{1.321e-3, 6.702e-3, 0.2e-3};
    const CoupledSection s2{1.359e-3, 6.691e-3, 0.2e-3};
    const CoupledSection s3{1.667e-3, 6.611e-3, 0.2e-3};
    ParallelCoupledGeometry g;
    g.sections = {s1, s2, s3, s3, s2, s1};
    return g;
}

std::vector<CoupledLineParameters> required_section_impedances(const ParallelCoupledSpec& spec) {
    if (spec.order < 2) {
        throw std::invalid_argument("parallel-coupled synthesis needs order >= 2");
    }
    if (!(spec.f_low_hz > 0.0) || !(spec.f_high_hz > spec.f_low_hz)) {
        throw std::invalid_argument("parallel-coupled synthesis needs 0 < f_low < f_high");
    }
    if (spec.family == FilterFamily::Chebyshev && spec.order % 2 == 0) {
        throw std::invalid_argument("even-order Chebyshev needs unequal terminations");
    }
    const auto g = prototype_g_values(spec.family, spec.order, spec.ripple_db);
    const int n = spec.order;
    const double f0 = std::sqrt(spec.f_low_hz * spec.f_high_hz);
    const double delta = (spec.f_high_hz - spec.f_low_hz) / f0;
    const double z0 = spec.z0_ohm;

    std::vector<double> jz(n + 1);
    jz[0] = std::sqrt(kPi * delta / (2.0 * g[0]));
    for (int k = 1; k < n; ++k) {
        jz[k] = kPi * delta / (2.0 * std::sqrt(g[k - 1] * g[k]));
    }
    jz[n] = std::sqrt(kPi * delta / (2.0 * g[n - 1] * g[n]));

    std::vector<CoupledLineParameters> out;
    for (double x : jz) {
        CoupledLineParameters p;
        p.z0_even_ohm = z0 * (1.0 + x + x * x);
        p.z0_odd_ohm = z0 * (1.0 - x + x * x);
        out.push_back(p);
    }
    return out;
}

namespace {

struct WidthGap {
    double width_m;
    double gap_m;
};

// Residuals in log-impedance.
std::array<double, 2> impedance_residual(double log_w, double log_s, double target_e, double target_o,
                                         const Substrate& sub) {
    const auto p = coupled_line_parameters(std::exp(log_w), std::exp(log_s), sub);
    return {std::log(p.z0_even_ohm / target_e), std::log(p.z0_odd_ohm / target_o)};
}

bool converged(const std::array<double, 2>& r, double tol) {
    // log ratio ~ relative error for small values
    return std::abs(r[0]) < tol && std::abs(r[1]) < tol;
}

std::optional<WidthGap> newton_solve(double target_e, double target_o, const Substrate& sub,
                                     double tol, double log_min, double log_max) {
    const double h = sub.height_m;
    double lw = std::log(line_width_for_impedance(std::sqrt(target_e * target_o), sub));
    double ls = std::log(0.5 * h);
    auto r = impedance_residual(lw, ls, target_e, target_o, sub);
    for (int it = 0; it < 60; ++it) {
        if (converged(r, tol)) {
            return WidthGap{std::exp(lw), std::exp(ls)};
        }
        const double step = 1e-6;
        const auto rw = impedance_residual(lw + step, ls, target_e, target_o, sub);
        const auto rs = impedance_residual(lw, ls + step, target_e, target_o, sub);
        const double j00 = (rw[0] - r[0]) / step, j01 = (rs[0] - r[0]) / step;
        const double j10 = (rw[1] - r[1]) / step, j11 = (rs[1] - r[1]) / step;
        const double det = j00 * j11 - j01 * j10;
        if (!std::isfinite(det) || std::abs(det) < 1e-14) {
            return std::nullopt;
        }
        const double dw = -(j11 * r[0] - j01 * r[1]) / det;
        const double ds = -(-j10 * r[0] + j00 * r[1]) / det;

        const double norm0 = std::hypot(r[0], r[1]);
        double lambda = 1.0;
        bool accepted = false;
        for (int k = 0; k < 30; ++k, lambda *= 0.5) {
            const double nw = std::clamp(lw + lambda * dw, log_min, log_max);
            const double ns = std::clamp(ls + lambda * ds, log_min, log_max);
            const auto nr = impedance_residual(nw, ns, target_e, target_o, sub);
            if (std::isfinite(nr[0]) && std::isfinite(nr[1]) && std::hypot(nr[0], nr[1]) < norm0) {
                lw = nw;
                ls = ns;
                r = nr;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            return std::nullopt;
        }
    }
    if (converged(r, tol)) {
        return WidthGap{std::exp(lw), std::exp(ls)};
    }
    return std::nullopt;
}

// Nested bisection: for a fixed gap the geometric-mean impedance falls with
// width; for the matching width the even/odd ratio falls as the gap widens.
std::optional<WidthGap> bisection_solve(double target_e, double target_o, const Substrate& sub,
                                        double tol, double log_min, double log_max) {
    const double target_mean = std::log(std::sqrt(target_e * target_o));
    const double target_ratio = std::log(target_e / target_o);

    auto width_for_gap = [&](double ls) -> std::optional<double> {
        auto mean = [&](double lw) {
            const auto p = coupled_line_parameters(std::exp(lw), std::exp(ls), sub);
            return std::log(std::sqrt(p.z0_even_ohm * p.z0_odd_ohm)) - target_mean;
        };
        double a = log_min, b = log_max;
        double fa = mean(a), fb = mean(b);
        if (!(fa > 0.0 && fb < 0.0)) {
            return std::nullopt;
        }
        for (int i = 0; i < 200 && b - a > 1e-13; ++i) {
            const double m = 0.5 * (a + b);
            if (mean(m) > 0.0) {
                a = m;
            } else {
                b = m;
            }
        }
        return 0.5 * (a + b);
    };
    auto ratio_error = [&](double ls) -> std::optional<double> {
        const auto lw = width_for_gap(ls);
        if (!lw) {
            return std::nullopt;
        }
        const auto p = coupled_line_parameters(std::exp(*lw), std::exp(ls), sub);
        return std::log(p.z0_even_ohm / p.z0_odd_ohm) - target_ratio;
    };

    double a = log_min, b = log_max;
    auto fa = ratio_error(a);
    auto fb = ratio_error(b);
    if (!fa || !fb || !(*fa > 0.0 && *fb < 0.0)) {
        return std::nullopt;
    }
    for (int i = 0; i < 200 && b - a > 1e-13; ++i) {
        const double m = 0.5 * (a + b);
        const auto fm = ratio_error(m);
        if (!fm) {
            return std::nullopt;
        }
        if (*fm > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    const double ls = 0.5 * (a + b);
    const auto lw = width_for_gap(ls);
    if (!lw) {
        return std::nullopt;
    }
    const auto r = impedance_residual(*lw, ls, target_e, target_o, sub);
    if (!converged(r, tol)) {
        return std::nullopt;
    }
    return WidthGap{std::exp(*lw), std::exp(ls)};
}

} // namespace

ParallelCoupledGeometry synthesize_parallel_coupled(const ParallelCoupledSpec& spec,
                                                    const Substrate& substrate) {
    substrate.validate();
    const auto required = required_section_impedances(spec);
    const double f0 = std::sqrt(spec.f_low_hz * spec.f_high_hz);
    const double tol = 1e-4;
    const double log_min = std::log(1e-3 * substrate.height_m);
    const double log_max = std::log(20.0 * substrate.height_m);

    const std::size_t count = required.size();
    const std::size_t unique = (count + 1) / 2;
    std::vector<CoupledSection> half;
    for (std::size_t k = 0; k < unique; ++k) {
        const double ze = required[k].z0_even_ohm;
        const double zo = required[k].z0_odd_ohm;
        auto fail = [&](const char* why) {
            char buf[200];
            std::snprintf(buf, sizeof(buf), "section %zu: %s (requested Z0e = %.4g ohm, Z0o = %.4g ohm)",
                          k + 1, why, ze, zo);
            return SynthesisError(buf);
        };
        if (!(ze > spec.z0_ohm && spec.z0_ohm > zo)) {
            throw fail("coupling too strong for a parallel-coupled section, Z0e > Z0 > Z0o violated");
        }
        auto solved = newton_solve(ze, zo, substrate, tol, log_min, log_max);
        if (!solved) {
            solved = bisection_solve(ze, zo, substrate, tol, log_min, log_max);
        }
        if (!solved) {
            throw fail("no width/gap on this substrate brackets the requested impedances");
        }
        const auto p = coupled_line_parameters(solved->width_m, solved->gap_m, substrate);
        const double eps_mean = 0.5 * (p.eps_eff_even + p.eps_eff_odd);
        const double length = kC0 / (4.0 * f0 * std::sqrt(eps_mean));
        half.push_back(CoupledSection{solved->width_m, length, solved->gap_m});
    }

    ParallelCoupledGeometry geometry;
    geometry.substrate = substrate;
    geometry.sections.resize(count);
    for (std::size_t k = 0; k < unique; ++k) {
        geometry.sections[k] = half[k];
        geometry.sections[count - 1 - k] = half[k];
    }
    geometry.validate();
    return geometry;
}

Abcd coupled_section_abcd(const CoupledSection& section, const Substrate& substrate, double f_hz) {
    const auto p = coupled_line_parameters(section.width_m, section.gap_m, substrate);
    auto angle = [&](double eps_eff) {
        double theta = 2.0 * kPi * f_hz * section.length_m * std::sqrt(eps_eff) / kC0;
        // cot/csc are singular at multiples of pi.
        if (std::abs(std::sin(theta)) < 1e-12) {
            theta += 1e-9;
        }
        return theta;
    };
    const double te = angle(p.eps_eff_even);
    const double to = angle(p.eps_eff_odd);
    const complex minus_half_j(0.0, -0.5);
    const complex z11 = minus_half_j * (p.z0_even_ohm / std::tan(te) + p.z0_odd_ohm / std::tan(to));
    const complex z13 = minus_half_j * (p.z0_even_ohm / std::sin(te) - p.z0_odd_ohm / std::sin(to));
    const complex a = z11 / z13;
    return Abcd{a, (z11 * z11 - z13 * z13) / z13, 1.0 / z13, a};
}

TabulatedResponse analyze_parallel_coupled(const ParallelCoupledGeometry& geometry,
                                           const std::vector<double>& grid_hz, double z0_ohm) {
    geometry.validate();
    TabulatedResponse out;
    out.points.reserve(grid_hz.size());
    for (double f : grid_hz) {
        Abcd total;
        for (const auto& s : geometry.sections) {
            total = total * coupled_section_abcd(s, geometry.substrate, f);
        }
        out.points.emplace_back(f, 20.0 * std::log10(std::abs(total.s21(z0_ohm))));
    }
    out.validate();
    return out;
}

std::vector<Violation> manufacturability_check(const ParallelCoupledGeometry& geometry,
                                               double min_feature_m) {
    std::vector<Violation> out;
    for (std::size_t k = 0; k < geometry.sections.size(); ++k) {
        const auto& s = geometry.sections[k];
        const std::string idx = std::to_string(k + 1);
        if (s.width_m < min_feature_m) {
            out.push_back({"W" + idx, s.width_m});
        }
        if (s.gap_m < min_feature_m) {
            out.push_back({"S" + idx, s.gap_m});
        }
    }
    return out;
}

std::vector<Violation> manufacturability_check(const InterdigitalGeometry& geometry,
                                               double min_feature_m) {
    std::vector<Violation> out;
    auto check = [&](const char* name, double v) {
        if (v < min_feature_m) {
            out.push_back({name, v});
        }
    };
    check("W0", geometry.feed_width_m);
    check("W", geometry.resonator_width_m);
    check("e", geometry.end_gap_m);
    check("S1", geometry.gaps_m[0]);
    check("S2", geometry.gaps_m[1]);
    check("S3", geometry.gaps_m[2]);
    return out;
}

} // namespace duc
