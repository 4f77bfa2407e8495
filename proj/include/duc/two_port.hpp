#pragma once

#include <complex>

namespace duc {

using complex = std::complex<double>;

/// Transmission (ABCD) matrix of a two-port.
struct Abcd {
    complex a{1.0, 0.0};
    complex b{0.0, 0.0};
    complex c{0.0, 0.0};
    complex d{1.0, 0.0};

    static Abcd identity() { return {}; }

    /// Cascade: this network followed by `next`.
    Abcd operator*(const Abcd& next) const {
        return Abcd{a * next.a + b * next.c, a * next.b + b * next.d,
                    c * next.a + d * next.c, c * next.b + d * next.d};
    }

    complex s21(double z0) const { return 2.0 / (a + b / z0 + c * z0 + d); }
};

} // namespace duc
