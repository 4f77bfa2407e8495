#pragma once

#include <stdexcept>
#include <string>

namespace duc {

/// Local oscillator frequency outside a mixer's specified range.
class RangeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A tone expected at a frequency is not present in a spectrum.
class LookupError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// No frequency plan satisfies the constraints.
class PlanningError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text (Touchstone, JSON config). Carries the 1-based line
/// number when one is meaningful, 0 otherwise.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          m_line(line) {}
    int line() const { return m_line; }

private:
    int m_line;
};

/// Config file or flag value rejected: unknown key, wrong type, bad unit.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Coupled-line section that cannot be realised on the given substrate.
class SynthesisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Passband metrics requested on data without a passband.
class NoPassbandError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace duc
