// bath.hpp — Drude-Lorentz spectral density and its finite-temperature
// Matsubara exponential expansion of the bath correlation function.

#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "qtherm/core.hpp"

namespace qtherm::bath {

// J(ω) = 2 λ ω_c ω / (ω² + ω_c²), odd in ω, peak value λ at |ω| = ω_c
struct SpectralDensity {
    double lambda{0.0};   // dissipation strength
    double omega_c{1.0};  // cutoff frequency (inverse memory time)

    SpectralDensity() = default;
    SpectralDensity(double lambda_, double omega_c_) : lambda(lambda_), omega_c(omega_c_) {
        if (lambda < 0.0) {
            throw std::invalid_argument("SpectralDensity: lambda must be >= 0");
        }
        if (omega_c <= 0.0) {
            throw std::invalid_argument("SpectralDensity: omega_c must be > 0");
        }
    }
};

inline double spectral_density(const SpectralDensity& sd, double omega) {
    return 2.0 * sd.lambda * sd.omega_c * omega / (omega * omega + sd.omega_c * sd.omega_c);
}

// Bose-Einstein occupation n(ω) = (e^{ω/T} − 1)^{−1}
inline double thermal_occupation(double omega, double temperature) {
    if (omega <= 0.0) {
        throw std::domain_error("thermal_occupation: omega must be > 0");
    }
    if (temperature <= 0.0) {
        throw std::domain_error("thermal_occupation: temperature must be > 0");
    }
    return 1.0 / std::expm1(omega / temperature);
}

// Exponential decomposition C(t) = Σ_k c_k e^{−ν_k t} plus a residual
// delta-strength Δ = Σ_{k>N} c_k/ν_k absorbed by the hierarchy terminator.
struct BathExpansion {
    std::vector<std::complex<double>> coefficients;  // c_k
    std::vector<double> rates;                       // ν_k > 0
    double terminator_strength{0.0};                 // Δ ≥ 0
    double temperature{0.0};
    int n_matsubara{0};

    std::size_t size() const { return rates.size(); }
};

// Pole decomposition of the Drude-Lorentz correlation function:
//   ν_0 = ω_c,   c_0 = λ ω_c (cot(ω_c / 2T) − i)
//   ν_k = 2πkT,  c_k = 4 λ ω_c ν_k T / (ν_k² − ω_c²),  k ≥ 1
// The full series obeys Σ_k Re(c_k)/ν_k = 2λT/ω_c, which pins the truncation
// remainder Δ exactly.
inline BathExpansion matsubara_expansion(const SpectralDensity& sd, double temperature,
                                         int n_matsubara) {
    if (temperature <= 0.0) {
        throw std::invalid_argument("matsubara_expansion: temperature must be > 0");
    }
    if (n_matsubara < 0) {
        throw std::invalid_argument("matsubara_expansion: n_matsubara must be >= 0");
    }

    BathExpansion exp;
    exp.temperature = temperature;
    exp.n_matsubara = n_matsubara;
    exp.coefficients.reserve(static_cast<std::size_t>(n_matsubara) + 1);
    exp.rates.reserve(static_cast<std::size_t>(n_matsubara) + 1);

    const double x = sd.omega_c / (2.0 * temperature);
    exp.rates.push_back(sd.omega_c);
    exp.coefficients.emplace_back(sd.lambda * sd.omega_c / std::tan(x),
                                  -sd.lambda * sd.omega_c);

    double matsubara_sum = 0.0;  // Σ_{k=1..N} c_k/ν_k
    for (int k = 1; k <= n_matsubara; ++k) {
        const double nu = 2.0 * std::numbers::pi * k * temperature;
        const double denom = nu * nu - sd.omega_c * sd.omega_c;
        if (std::abs(denom) < 1e-12 * nu * nu) {
            throw std::invalid_argument(
                "matsubara_expansion: Matsubara frequency 2*pi*" + std::to_string(k) +
                "*T coincides with omega_c (degenerate pole); perturb the temperature or "
                "change n_matsubara");
        }
        const double c = 4.0 * sd.lambda * sd.omega_c * nu * temperature / denom;
        exp.rates.push_back(nu);
        exp.coefficients.emplace_back(c, 0.0);
        matsubara_sum += c / nu;
    }

    const double total = 2.0 * sd.lambda * temperature / sd.omega_c;
    const double c0_part = exp.coefficients[0].real() / exp.rates[0];
    exp.terminator_strength = total - c0_part - matsubara_sum;
    if (sd.lambda == 0.0) {
        exp.terminator_strength = 0.0;
    }
    return exp;
}

// Truncated series C(t); the delta remainder lives in terminator_strength.
inline std::complex<double> correlation_function(const BathExpansion& exp, double t) {
    if (t < 0.0) {
        throw std::invalid_argument("correlation_function: t must be >= 0");
    }
    std::complex<double> c{0.0, 0.0};
    for (std::size_t k = 0; k < exp.size(); ++k) {
        c += exp.coefficients[k] * std::exp(-exp.rates[k] * t);
    }
    return c;
}

// Smallest N_k with Δ < 0.01 · (2λT/ω_c), capped at 10.
inline int default_n_matsubara(const SpectralDensity& sd, double temperature, int cap = 10) {
    if (sd.lambda == 0.0) {
        return 0;
    }
    const double threshold = 0.01 * 2.0 * sd.lambda * temperature / sd.omega_c;
    for (int n = 0; n < cap; ++n) {
        if (matsubara_expansion(sd, temperature, n).terminator_strength < threshold) {
            return n;
        }
    }
    return cap;
}

}  // namespace qtherm::bath
