#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "qtherm/integrate.hpp"

using namespace qtherm;
using Catch::Approx;

namespace {

// y' = i w y, solution e^{i w t}
ode::Rhs oscillator(double w) {
    return [w](double, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
        dy = std::complex<double>{0.0, w} * y;
    };
}

}  // namespace

TEST_CASE("fixed RK4 reproduces a rotation", "[ode]") {
    Eigen::VectorXcd y(1);
    y[0] = 1.0;
    ode::advance_rk4(oscillator(1.0), 0.0, M_PI, y, 1e-3);
    CHECK(y[0].real() == Approx(-1.0).margin(1e-9));
    CHECK(y[0].imag() == Approx(0.0).margin(1e-9));
}

TEST_CASE("adaptive stepper meets tolerance over long spans", "[ode]") {
    Eigen::VectorXcd y(1);
    y[0] = 1.0;
    ode::IntegratorOptions opts;
    opts.rtol = 1e-9;
    opts.atol = 1e-12;
    ode::DormandPrince stepper(oscillator(2.0), opts);
    double t = 0.0;
    for (int leg = 0; leg < 10; ++leg) {
        stepper.advance(t, t + 5.0, y);
        t += 5.0;
    }
    const std::complex<double> exact = std::exp(std::complex<double>{0.0, 2.0 * t});
    CHECK(std::abs(y[0] - exact) < 1e-6);
}

TEST_CASE("adaptive stepper honors decaying systems", "[ode]") {
    // y' = -100 y + i y, moderately stiff decay
    ode::Rhs rhs = [](double, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
        dy = (std::complex<double>{-100.0, 1.0}) * y;
    };
    Eigen::VectorXcd y(1);
    y[0] = 1.0;
    ode::advance(rhs, 0.0, 1.0, y, ode::IntegratorOptions{});
    CHECK(std::abs(y[0]) < 1e-9);  // atol floor, not the true e^{-100}
}

TEST_CASE("advance splits at interior breakpoints", "[ode]") {
    // piecewise frequency: w = 0 before t = 1, w = pi after
    ode::Rhs rhs = [](double t, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
        const double w = t < 1.0 ? 0.0 : M_PI;
        dy = std::complex<double>{0.0, w} * y;
    };
    Eigen::VectorXcd y(1);
    y[0] = 1.0;
    ode::advance(rhs, 0.0, 2.0, y, ode::IntegratorOptions{}, {1.0});
    CHECK(y[0].real() == Approx(-1.0).margin(1e-6));
}
