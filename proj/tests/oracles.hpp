// oracles.hpp — test-only reference computations kept independent of the
// library implementation paths they check.

#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include "qtherm/bath.hpp"

namespace oracles {

// 16-point Gauss-Legendre nodes/weights on [-1, 1]
inline constexpr double kGlNodes[8] = {0.0950125098376374, 0.2816035507792589,
                                       0.4580167776572274, 0.6178762444026438,
                                       0.7554044083550030, 0.8656312023878318,
                                       0.9445750230732326, 0.9894009349916499};
inline constexpr double kGlWeights[8] = {0.1894506104550685, 0.1826034150449236,
                                         0.1691565193950025, 0.1495959888165767,
                                         0.1246289712555339, 0.0951585116824928,
                                         0.0622535239386479, 0.0271524594117541};

template <typename F>
double gauss_legendre(const F& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double acc = 0.0;
    for (int i = 0; i < 8; ++i) {
        acc += kGlWeights[i] * (f(c + h * kGlNodes[i]) + f(c - h * kGlNodes[i]));
    }
    return acc * h;
}

template <typename F>
double composite_gl(const F& f, double a, double b, double panel_width) {
    const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / panel_width)));
    const double w = (b - a) / panels;
    double acc = 0.0;
    for (int p = 0; p < panels; ++p) {
        acc += gauss_legendre(f, a + p * w, a + (p + 1) * w);
    }
    return acc;
}

// Cosine integral Ci(x) for large x via the asymptotic expansion.
inline double cosint_asymptotic(double x) {
    const double x2 = x * x;
    const double p = 1.0 - 2.0 / x2 + 24.0 / (x2 * x2);
    const double q = 1.0 - 6.0 / x2 + 120.0 / (x2 * x2);
    return std::sin(x) / x * p - std::cos(x) / x2 * q;
}

// Frequency-domain reference for the bath correlation function,
//   C(t) = (1/π) ∫_0^∞ dω J(ω) [coth(ω/2T) cos(ωt) − i sin(ωt)],
// evaluated by composite quadrature plus an asymptotic tail for the
// slowly-decaying 2λω_c/ω part of the real integrand. Valid for t > 0.
inline std::complex<double> correlation_oracle(const qtherm::bath::SpectralDensity& sd,
                                               double temperature, double t) {
    using std::numbers::pi;
    const double a = 2.0 * sd.lambda * sd.omega_c;  // large-ω amplitude of J·coth

    auto integrand_re = [&](double w) {
        if (w < 1e-14) return 2.0 * sd.lambda * temperature / sd.omega_c * 2.0;
        return qtherm::bath::spectral_density(sd, w) / std::tanh(0.5 * w / temperature) *
               std::cos(w * t);
    };

    double omega_max = std::max({40.0 * temperature + 10.0, 60.0 * sd.omega_c, 40.0});
    omega_max = std::max(omega_max, 60.0 / t);
    const double panel = std::min(0.5, pi / (2.0 * (t + 1.0)));

    double re = composite_gl(integrand_re, 0.0, omega_max, panel);
    re += a * (-cosint_asymptotic(omega_max * t));  // ∫_Ω^∞ (a/ω) cos(ωt) dω
    re /= pi;

    // imaginary part: −(1/π) ∫ J sin(ωt) dω = −λ ω_c e^{−ω_c t}
    const double im = -sd.lambda * sd.omega_c * std::exp(-sd.omega_c * t);
    return {re, im};
}

}  // namespace oracles
