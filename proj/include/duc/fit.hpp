#pragma once

#include <map>
#include <string>
#include <vector>

namespace duc {

struct FitResult {
    std::map<std::string, double> parameters;
    double residual_norm = 0.0;         // ||y - model||
    double initial_residual_norm = 0.0; // at the starting guess
    bool converged = false;
    int iterations = 0;

    double operator[](const std::string& name) const { return parameters.at(name); }
};

struct FitOptions {
    int max_iterations = 200;
};

/// y = amplitude * cos(2 pi frequency x + phase) + offset, amplitude >= 0,
/// phase in (-pi, pi].
FitResult fit_sinusoid(const std::vector<double>& x, const std::vector<double>& y, const FitOptions& options = {});

/// y = amplitude / (1 + ((x - center) / width)^2) + offset, width is the
/// half width at half maximum (> 0).
FitResult fit_lorentzian(const std::vector<double>& x, const std::vector<double>& y, const FitOptions& options = {});

/// y = amplitude * exp(-x / decay) * cos(2 pi frequency x + phase) + offset.
/// A fit with no measurable decay reports decay = +inf.
FitResult fit_decaying_cosine(const std::vector<double>& x, const std::vector<double>& y,
                              const FitOptions& options = {});

/// Frequency of the largest peak in the discrete amplitude spectrum of
/// y - mean(y), on a grid 8x finer than 1 / span(x).
double periodogram_peak(const std::vector<double>& x, const std::vector<double>& y);

} // namespace duc
