#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>

#include "qtherm/bath.hpp"
#include "oracles.hpp"

using namespace qtherm;
using Catch::Approx;

TEST_CASE("spectral density shape", "[bath]") {
    bath::SpectralDensity sd(0.1, 0.1);
    CHECK(bath::spectral_density(sd, 0.0) == 0.0);
    CHECK(bath::spectral_density(sd, 0.1) == Approx(0.1));  // J(omega_c) = lambda
    CHECK(bath::spectral_density(bath::SpectralDensity(0.05, 0.5), 0.5) == Approx(0.05));

    // odd under omega -> -omega
    for (double w : {0.03, 0.2, 1.7}) {
        CHECK(bath::spectral_density(sd, -w) == Approx(-bath::spectral_density(sd, w)));
    }
    // peak sits at |omega| = omega_c
    const double peak = bath::spectral_density(sd, sd.omega_c);
    for (double w : {0.05, 0.08, 0.12, 0.3}) {
        CHECK(bath::spectral_density(sd, w) < peak + 1e-15);
    }
}

TEST_CASE("spectral density rejects bad parameters", "[bath]") {
    CHECK_THROWS_AS(bath::SpectralDensity(-0.1, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(bath::SpectralDensity(0.1, 0.0), std::invalid_argument);
}

TEST_CASE("matsubara coefficients", "[bath]") {
    SECTION("zero coupling gives an empty decomposition") {
        auto exp = bath::matsubara_expansion(bath::SpectralDensity(0.0, 0.3), 0.7, 2);
        for (auto c : exp.coefficients) {
            CHECK(std::abs(c) == 0.0);
        }
        CHECK(exp.terminator_strength == 0.0);
        CHECK(bath::correlation_function(exp, 0.0) == std::complex<double>{0.0, 0.0});
    }

    SECTION("resonant term carries nu_0 = omega_c and Im c_0 = -lambda omega_c") {
        auto exp = bath::matsubara_expansion(bath::SpectralDensity(0.1, 0.1), 0.2, 0);
        REQUIRE(exp.size() == 1);
        CHECK(exp.rates[0] == Approx(0.1));
        CHECK(exp.coefficients[0].imag() == Approx(-0.01));
        CHECK(exp.coefficients[0].real() == Approx(0.1 * 0.1 / std::tan(0.25)));
    }

    SECTION("matsubara rates are 2 pi k T, strictly increasing") {
        auto exp = bath::matsubara_expansion(bath::SpectralDensity(0.1, 0.1), 0.2, 4);
        for (int k = 1; k <= 4; ++k) {
            CHECK(exp.rates[static_cast<std::size_t>(k)] ==
                  Approx(2.0 * std::numbers::pi * k * 0.2));
            CHECK(exp.rates[static_cast<std::size_t>(k)] >
                  exp.rates[static_cast<std::size_t>(k - 1)] * (k > 1 ? 1.0 : 0.0));
            CHECK(exp.coefficients[static_cast<std::size_t>(k)].imag() == 0.0);
        }
    }

    SECTION("degenerate pole 2 pi k T = omega_c is rejected with guidance") {
        const double omega_c = 0.1;
        const double t_res = omega_c / (2.0 * std::numbers::pi);
        CHECK_THROWS_WITH(bath::matsubara_expansion(bath::SpectralDensity(0.1, omega_c), t_res, 1),
                          Catch::Matchers::ContainsSubstring("degenerate pole"));
        CHECK_NOTHROW(bath::matsubara_expansion(bath::SpectralDensity(0.1, omega_c), t_res, 0));
    }
}

TEST_CASE("correlation function decays and reconstructs the oracle", "[bath]") {
    bath::SpectralDensity sd(0.1, 0.1);
    const double temperature = 0.2;

    SECTION("pure exponential decay at long times") {
        auto exp = bath::matsubara_expansion(sd, temperature, 3);
        double nu_min = exp.rates[0];
        for (double nu : exp.rates) nu_min = std::min(nu_min, nu);
        CHECK(std::abs(bath::correlation_function(exp, 51.0 / nu_min)) < 1e-12);
    }

    SECTION("reconstruction against the frequency-domain oracle") {
        // truncated-series error at t = 1 is set by the first dropped pole:
        // c_4 e^{-nu_4} ~ 1e-5 at N_k = 3, and drops below 1e-6 from N_k = 5
        const auto ref = oracles::correlation_oracle(sd, temperature, 1.0);
        const auto c3 = bath::correlation_function(bath::matsubara_expansion(sd, temperature, 3), 1.0);
        CHECK(std::abs(c3 - ref) < 2e-5);
        CHECK(std::abs(c3 - ref) > 1e-6);
        const auto c5 = bath::correlation_function(bath::matsubara_expansion(sd, temperature, 5), 1.0);
        CHECK(std::abs(c5 - ref) < 1e-6);
        const auto c9 = bath::correlation_function(bath::matsubara_expansion(sd, temperature, 9), 1.0);
        CHECK(std::abs(c9 - ref) < 1e-8);
    }

    SECTION("reconstruction error shrinks monotonically with N_k") {
        for (double t : {0.1, 0.5, 1.0, 3.0, 10.0}) {
            const auto ref = oracles::correlation_oracle(sd, temperature, t);
            double previous = std::numeric_limits<double>::infinity();
            for (int n = 0; n <= 8; ++n) {
                const auto c =
                    bath::correlation_function(bath::matsubara_expansion(sd, temperature, n), t);
                const double err = std::abs(c - ref);
                CHECK(err <= previous + 1e-7);  // slack for the oracle noise floor
                previous = err;
            }
            CHECK(previous < 2e-3);
        }
    }

    SECTION("imaginary part is temperature independent") {
        for (double t : {0.0, 0.3, 2.0}) {
            const auto a = bath::correlation_function(bath::matsubara_expansion(sd, 0.1, 3), t);
            const auto b = bath::correlation_function(bath::matsubara_expansion(sd, 0.2, 3), t);
            const auto c = bath::correlation_function(bath::matsubara_expansion(sd, 1.0, 3), t);
            CHECK(std::abs(a.imag() - b.imag()) < 1e-10);
            CHECK(std::abs(b.imag() - c.imag()) < 1e-10);
            // and equals the analytic sine transform of J
            CHECK(a.imag() == Approx(-sd.lambda * sd.omega_c * std::exp(-sd.omega_c * t)));
        }
    }

    SECTION("negative times are rejected") {
        auto exp = bath::matsubara_expansion(sd, temperature, 1);
        CHECK_THROWS_AS(bath::correlation_function(exp, -0.1), std::invalid_argument);
    }
}

TEST_CASE("terminator strength", "[bath]") {
    bath::SpectralDensity sd(0.1, 0.1);
    const double temperature = 0.2;

    SECTION("non-negative and monotone decreasing in N_k") {
        double previous = std::numeric_limits<double>::infinity();
        for (int n = 0; n <= 12; ++n) {
            const double delta =
                bath::matsubara_expansion(sd, temperature, n).terminator_strength;
            CHECK(delta >= 0.0);
            CHECK(delta <= previous);
            previous = delta;
        }
    }

    SECTION("full series sums to 2 lambda T / omega_c") {
        // a large-N truncation should leave almost nothing to the terminator
        const double delta = bath::matsubara_expansion(sd, temperature, 4000).terminator_strength;
        CHECK(delta < 1e-5 * 2.0 * sd.lambda * temperature / sd.omega_c);
    }

    SECTION("automatic N_k picks the remainder rule, capped") {
        const int n = bath::default_n_matsubara(sd, temperature);
        REQUIRE(n >= 0);
        REQUIRE(n <= 10);
        const double threshold = 0.01 * 2.0 * sd.lambda * temperature / sd.omega_c;
        CHECK(bath::matsubara_expansion(sd, temperature, n).terminator_strength < threshold);
        if (n > 0) {
            CHECK(bath::matsubara_expansion(sd, temperature, n - 1).terminator_strength >=
                  threshold);
        }
        // low temperature, strong coupling runs into the cap
        CHECK(bath::default_n_matsubara(bath::SpectralDensity(0.2, 0.1), 0.05) == 10);
        CHECK(bath::default_n_matsubara(bath::SpectralDensity(0.0, 0.1), 0.05) == 0);
    }
}

TEST_CASE("thermal occupation", "[bath]") {
    CHECK(bath::thermal_occupation(1.0, 0.01) < 1e-12);
    CHECK(bath::thermal_occupation(0.2, 0.2) == Approx(1.0 / std::expm1(1.0)));
    CHECK(bath::thermal_occupation(1.0, 1.0) == Approx(0.5819767069).epsilon(1e-6));
    // omega -> 0 limit approaches T / omega
    CHECK(bath::thermal_occupation(1e-8, 0.3) == Approx(0.3 / 1e-8).epsilon(1e-6));
    CHECK_THROWS_AS(bath::thermal_occupation(0.0, 0.2), std::domain_error);
    CHECK_THROWS_AS(bath::thermal_occupation(-1.0, 0.2), std::domain_error);
}
