#include "duc/fit.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace duc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Evaluates the model and its gradient w.r.t. the parameters at one point.
using ModelFn = std::function<double(double u, const Vec& p, Eigen::Ref<Eigen::RowVectorXd> grad)>;

struct LmOutcome {
    Vec p;
    double cost = 0.0;
    double initial_cost = 0.0;
    bool converged = false;
    int iterations = 0;
};

double cost_of(const Vec& u, const Vec& y, const Vec& p, const ModelFn& f, Vec* r = nullptr, Mat* jac = nullptr) {
    Eigen::RowVectorXd g(p.size());
    double c = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        const double ri = y[i] - f(u[i], p, g);
        c += ri * ri;
        if (r) (*r)[i] = ri;
        if (jac) jac->row(i) = g;
    }
    return c;
}

// Levenberg-Marquardt damped Gauss-Newton.
LmOutcome levenberg_marquardt(const Vec& u, const Vec& y, Vec p, const ModelFn& f, int max_iterations) {
    const Eigen::Index n = u.size(), np = p.size();
    Vec r(n);
    Mat jac(n, np);
    LmOutcome out;
    double cost = cost_of(u, y, p, f, &r, &jac);
    out.initial_cost = cost;
    const double tiny = 1e-30 * std::max(1.0, y.squaredNorm());
    double lambda = 1e-3;

    int it = 0;
    bool done = cost <= tiny;
    bool converged = done;
    while (!done && it < max_iterations) {
        ++it;
        const Mat jtj = jac.transpose() * jac;
        const Vec jtr = jac.transpose() * r;
        const double dmax = std::max(jtj.diagonal().maxCoeff(), 1e-300);
        const double grad_scale = std::sqrt(dmax) * std::sqrt(cost);
        if (jtr.lpNorm<Eigen::Infinity>() <= 1e-13 * grad_scale) {
            converged = true;
            break;
        }
        bool accepted = false;
        while (!accepted) {
            Mat a = jtj;
            for (Eigen::Index k = 0; k < np; ++k) {
                a(k, k) += lambda * std::max(jtj(k, k), 1e-12 * dmax);
            }
            const Vec step = a.ldlt().solve(jtr);
            const Vec trial = p + step;
            Vec r_new(n);
            Mat j_new(n, np);
            const double c_new = step.allFinite() ? cost_of(u, y, trial, f, &r_new, &j_new)
                                                  : std::numeric_limits<double>::infinity();
            if (c_new < cost) {
                const double drop = cost - c_new;
                const bool small_step = step.lpNorm<Eigen::Infinity>() <= 1e-14 * (p.lpNorm<Eigen::Infinity>() + 1e-14);
                p = trial;
                r = r_new;
                jac = j_new;
                cost = c_new;
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                if (cost <= tiny || drop <= 1e-15 * cost || small_step) {
                    converged = true;
                    done = true;
                }
            } else {
                lambda *= 4.0;
                if (lambda > 1e16) {
                    // No downhill step exists at machine precision: a stationary point.
                    converged = jtr.lpNorm<Eigen::Infinity>() <= 1e-6 * std::max(grad_scale, 1e-300);
                    done = true;
                    break;
                }
            }
        }
    }
    out.p = p;
    out.cost = cost;
    out.converged = converged;
    out.iterations = it;
    return out;
}

void check_inputs(const std::vector<double>& x, const std::vector<double>& y, std::size_t n_params) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("fit: x and y differ in length");
    }
    if (x.size() < 2 * n_params) {
        throw std::invalid_argument("fit: need at least " + std::to_string(2 * n_params) + " points");
    }
    for (std::size_t i = 1; i < x.size(); ++i) {
        if (!(x[i] > x[i - 1])) {
            throw std::invalid_argument("fit: x must be strictly increasing");
        }
    }
    for (double v : y) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("fit: y must be finite");
        }
    }
}

// x mapped to [0, 1].
struct Normalized {
    double x0, span;
    Vec u, y;
};

Normalized normalize(const std::vector<double>& x, const std::vector<double>& y) {
    Normalized n{x.front(), x.back() - x.front(), Vec(x.size()), Vec(y.size())};
    for (std::size_t i = 0; i < x.size(); ++i) {
        n.u[i] = (x[i] - n.x0) / n.span;
        n.y[i] = y[i];
    }
    return n;
}

double wrap_phase(double phi) {
    phi = std::remainder(phi, kTwoPi);
    return phi <= -std::numbers::pi ? phi + kTwoPi : phi;
}

// Linear least squares for (a, b, c) in y = e^{-g u}(a cos + b sin)(2 pi F u) + c.
Eigen::Vector3d linear_cosine(const Normalized& n, double freq_u, double gamma_u) {
    Mat m(n.u.size(), 3);
    for (Eigen::Index i = 0; i < n.u.size(); ++i) {
        const double env = std::exp(-gamma_u * n.u[i]);
        m(i, 0) = env * std::cos(kTwoPi * freq_u * n.u[i]);
        m(i, 1) = env * std::sin(kTwoPi * freq_u * n.u[i]);
        m(i, 2) = 1.0;
    }
    return m.colPivHouseholderQr().solve(n.y);
}

FitResult finish(const LmOutcome& lm) {
    FitResult r;
    r.residual_norm = std::sqrt(lm.cost);
    r.initial_residual_norm = std::sqrt(lm.initial_cost);
    r.converged = lm.converged;
    r.iterations = lm.iterations;
    return r;
}

} // namespace

double periodogram_peak(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() < 3 || x.size() != y.size()) {
        throw std::invalid_argument("periodogram needs at least 3 matching points");
    }
    const double span = x.back() - x.front();
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());

    const std::size_t k_max = 4 * (x.size() - 1);
    double best_f = 1.0 / span, best = -1.0;
    for (std::size_t k = 1; k <= k_max; ++k) {
        const double f = static_cast<double>(k) / (8.0 * span);
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t i = 0; i < x.size(); ++i) {
            acc += (y[i] - mean) * std::polar(1.0, -kTwoPi * f * (x[i] - x.front()));
        }
        if (std::abs(acc) > best) {
            best = std::abs(acc);
            best_f = f;
        }
    }
    return best_f;
}

FitResult fit_sinusoid(const std::vector<double>& x, const std::vector<double>& y, const FitOptions& options) {
    check_inputs(x, y, 4);
    const Normalized n = normalize(x, y);
    const double f0 = periodogram_peak(x, y) * n.span;
    const Eigen::Vector3d lin = linear_cosine(n, f0, 0.0);

    // p = (A, F, Phi, c) in normalised units.
    Vec p(4);
    p << std::hypot(lin[0], lin[1]), f0, std::atan2(-lin[1], lin[0]), lin[2];
    const ModelFn model = [](double u, const Vec& q, Eigen::Ref<Eigen::RowVectorXd> g) {
        const double th = kTwoPi * q[1] * u + q[2];
        const double c = std::cos(th), s = std::sin(th);
        g << c, -q[0] * s * kTwoPi * u, -q[0] * s, 1.0;
        return q[0] * c + q[3];
    };
    const LmOutcome lm = levenberg_marquardt(n.u, n.y, p, model, options.max_iterations);

    double amp = lm.p[0], freq = lm.p[1], phase = lm.p[2];
    if (freq < 0.0) {
        freq = -freq;
        phase = -phase;
    }
    if (amp < 0.0) {
        amp = -amp;
        phase += std::numbers::pi;
    }
    FitResult r = finish(lm);
    r.parameters = {{"amplitude", amp},
                    {"frequency", freq / n.span},
                    {"phase", wrap_phase(phase - kTwoPi * freq * n.x0 / n.span)},
                    {"offset", lm.p[3]}};
    return r;
}

FitResult fit_lorentzian(const std::vector<double>& x, const std::vector<double>& y, const FitOptions& options) {
    check_inputs(x, y, 4);
    const Normalized n = normalize(x, y);

    std::vector<double> sorted(y);
    std::sort(sorted.begin(), sorted.end());
    const double offset0 = sorted[sorted.size() / 4];
    const auto peak = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
    const double amp0 = y[peak] - offset0;
    const double half = offset0 + 0.5 * amp0;
    std::size_t lo = peak, hi = peak;
    while (lo > 0 && y[lo] > half) --lo;
    while (hi + 1 < y.size() && y[hi] > half) ++hi;
    double w0 = 0.5 * (n.u[static_cast<Eigen::Index>(hi)] - n.u[static_cast<Eigen::Index>(lo)]);
    if (!(w0 > 0.0)) w0 = 0.05;

    // p = (center, width, A, c) in normalised units.
    Vec p(4);
    p << n.u[static_cast<Eigen::Index>(peak)], w0, amp0, offset0;
    const ModelFn model = [](double u, const Vec& q, Eigen::Ref<Eigen::RowVectorXd> g) {
        const double d = (u - q[0]) / q[1];
        const double den = 1.0 + d * d;
        const double l = 1.0 / den;
        const double dl_dd = -2.0 * d / (den * den);
        g << q[2] * dl_dd * (-1.0 / q[1]), q[2] * dl_dd * (-d / q[1]), l, 1.0;
        return q[2] * l + q[3];
    };
    const LmOutcome lm = levenberg_marquardt(n.u, n.y, p, model, options.max_iterations);

    FitResult r = finish(lm);
    r.parameters = {{"center", n.x0 + lm.p[0] * n.span},
                    {"width", std::abs(lm.p[1]) * n.span},
                    {"amplitude", lm.p[2]},
                    {"offset", lm.p[3]}};
    return r;
}

FitResult fit_decaying_cosine(const std::vector<double>& x, const std::vector<double>& y, const FitOptions& options) {
    check_inputs(x, y, 5);
    const Normalized n = normalize(x, y);
    const double f0 = periodogram_peak(x, y) * n.span;
    const double g0 = 0.5;
    const Eigen::Vector3d lin = linear_cosine(n, f0, g0);

    // p = (A, F, Phi, c, gamma) in normalised units.
    Vec p(5);
    p << std::hypot(lin[0], lin[1]), f0, std::atan2(-lin[1], lin[0]), lin[2], g0;
    const ModelFn model = [](double u, const Vec& q, Eigen::Ref<Eigen::RowVectorXd> g) {
        const double env = std::exp(-q[4] * u);
        const double th = kTwoPi * q[1] * u + q[2];
        const double c = std::cos(th), s = std::sin(th);
        g << env * c, -q[0] * env * s * kTwoPi * u, -q[0] * env * s, 1.0, -u * q[0] * env * c;
        return q[0] * env * c + q[3];
    };
    const LmOutcome lm = levenberg_marquardt(n.u, n.y, p, model, options.max_iterations);

    double amp = lm.p[0], freq = lm.p[1], phase = lm.p[2];
    const double gamma = lm.p[4];
    if (freq < 0.0) {
        freq = -freq;
        phase = -phase;
    }
    if (amp < 0.0) {
        amp = -amp;
        phase += std::numbers::pi;
    }
    FitResult r = finish(lm);
    r.parameters = {{"amplitude", amp * std::exp(gamma * n.x0 / n.span)},
                    {"frequency", freq / n.span},
                    {"phase", wrap_phase(phase - kTwoPi * freq * n.x0 / n.span)},
                    {"offset", lm.p[3]},
                    {"decay", gamma > 0.0 ? n.span / gamma : std::numeric_limits<double>::infinity()}};
    return r;
}

} // namespace duc
