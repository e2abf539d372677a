#pragma once

#include <cmath>
#include <complex>

#include "ilro/errors.hpp"

namespace ilro {

inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Normalizes an angle to (-pi, pi].
inline double wrap_angle(double a) {
    if (!std::isfinite(a)) {
        throw validation_error("wrap_angle: non-finite angle");
    }
    double w = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
    if (w <= -kPi) {
        w += 2.0 * kPi;
    }
    return w;
}

/// Wraps `a` onto the branch nearest to `ref` (result within pi of ref).
inline double wrap_near(double a, double ref) {
    return ref + std::remainder(a - ref, 2.0 * kPi);
}

/// Magnitude/angle pair for sinusoidal steady-state quantities. The angle is
/// kept in (-pi, pi] by every constructor and operation.
struct Phasor {
    double magnitude = 0.0;
    double angle = 0.0;

    Phasor() = default;

    Phasor(double mag, double ang) {
        if (!std::isfinite(mag) || mag < 0.0) {
            throw validation_error("Phasor: magnitude must be finite and >= 0");
        }
        magnitude = mag;
        angle = wrap_angle(ang);
    }

    static Phasor from_cartesian(double re, double im) {
        if (!std::isfinite(re) || !std::isfinite(im)) {
            throw validation_error("Phasor: non-finite cartesian components");
        }
        return Phasor(std::hypot(re, im), std::atan2(im, re));
    }

    std::complex<double> to_complex() const {
        return std::polar(magnitude, angle);
    }

    Phasor operator+(const Phasor& other) const {
        const auto s = to_complex() + other.to_complex();
        return from_cartesian(s.real(), s.imag());
    }

    Phasor scaled(double factor) const {
        if (factor < 0.0) {
            return Phasor(magnitude * -factor, angle + kPi);
        }
        return Phasor(magnitude * factor, angle);
    }

    Phasor rotated(double delta) const { return Phasor(magnitude, angle + delta); }
};

}  // namespace ilro
