#ifndef OSEEN_PROFILES_HPP
#define OSEEN_PROFILES_HPP

#include <cmath>

// Closed-form reference profiles of the Lamb-Oseen vortex in self-similar
// variables, and the coefficient functions of the one-dimensional mode
// operators. All functions are pure and deterministic (double precision);
// they seed every operator entry, so bitwise reproducibility matters here.
namespace oseen::profiles {

inline constexpr double pi = 3.14159265358979323846;

/// Gaussian vorticity profile G(r) = e^{-r^2/4} / (4 pi).
inline double gaussian_profile(double r) {
    return std::exp(-0.25 * r * r) / (4.0 * pi);
}

/// g(r) = e^{-r^2/4} / (4 pi), the weight appearing in the Z-metric and in
/// the nonlocal part of the mode coupling. Identical to the Gaussian profile
/// restricted to a ray; kept as its own name to match the operator algebra.
inline double g(double r) { return gaussian_profile(r); }

/// phi(r) = (1 - e^{-r^2/4}) / (2 pi r^2), extended by continuity to
/// phi(0) = 1/(8 pi). The angular velocity profile of the vortex.
///
/// Near r = 0 the subtraction 1 - e^{-s} cancels, so for r^2 < 1e-2 we sum
/// the Taylor series (1 - e^{-s})/s = sum_{k>=0} (-s)^k / (k+1)! with
/// s = r^2/4 until the terms fall below 1e-17 relative; elsewhere the
/// direct formula is evaluated through expm1.
inline double phi(double r) {
    const double s = 0.25 * r * r;
    if (r * r < 1e-2) {
        double sum = 1.0, term = 1.0;
        for (int k = 1; k < 30; ++k) {
            term *= -s / static_cast<double>(k + 1);
            sum += term;
            if (std::abs(term) < 1e-17 * std::abs(sum)) break;
        }
        return sum / (8.0 * pi);
    }
    return -std::expm1(-s) / (2.0 * pi * r * r);
}

/// Series branch of phi exposed for the branch-agreement property test.
inline double phi_series(double r) {
    const double s = 0.25 * r * r;
    double sum = 1.0, term = 1.0;
    for (int k = 1; k < 60; ++k) {
        term *= -s / static_cast<double>(k + 1);
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum / (8.0 * pi);
}

/// Direct branch of phi, for the same test.
inline double phi_direct(double r) {
    return -std::expm1(-0.25 * r * r) / (2.0 * pi * r * r);
}

/// Azimuthal speed of the vortex, |v^G|(r) = r phi(r).
inline double oseen_azimuthal_speed(double r) { return r * phi(r); }

/// Maximiser of r phi(r) and the speed there (golden-section verified).
inline constexpr double azimuthal_speed_argmax = 2.2418128455570680;
inline constexpr double azimuthal_speed_max = 0.050784168788538897;

}  // namespace oseen::profiles

#endif
