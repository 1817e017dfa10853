#include <catch2/catch_amalgamated.hpp>

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>

#include "qtherm/core.hpp"
#include "qtherm/heom.hpp"
#include "qtherm/system.hpp"

using namespace qtherm;
using Catch::Approx;

namespace {

Eigen::VectorXd linspace(double t_max, int n) {
    Eigen::VectorXd t(n + 1);
    for (int i = 0; i <= n; ++i) t[i] = t_max * i / n;
    return t;
}

Eigen::MatrixXcd plus_state() {
    Eigen::Vector2cd v;
    v << 1.0, 1.0;
    return pure_state(v);
}

}  // namespace

TEST_CASE("single-qubit builder", "[heom]") {
    const auto model = build_single_qubit(1.0, plus_state());
    CHECK(model.dim == 2);
    CHECK((model.h_base - 0.5 * pauli_z()).norm() == Approx(0.0).margin(1e-15));
    CHECK((model.coupling_op - pauli_x()).norm() == Approx(0.0).margin(1e-15));
    CHECK((pauli_x() * model.initial_state).trace().real() == Approx(1.0));

    Eigen::Vector2cd zero;
    zero << 1.0, 0.0;
    const auto up = build_single_qubit(1.0, pure_state(zero));
    CHECK((pauli_z() * up.initial_state).trace().real() == Approx(1.0));

    const auto mixed = build_single_qubit(1.0, Eigen::MatrixXcd::Identity(2, 2) / 2.0);
    CHECK((pauli_z() * mixed.initial_state).trace().real() == Approx(0.0).margin(1e-15));

    Eigen::MatrixXcd junk = Eigen::MatrixXcd::Identity(2, 2);  // trace 2
    CHECK_THROWS_AS(build_single_qubit(1.0, junk), std::invalid_argument);
}

TEST_CASE("two-qubit builder", "[heom]") {
    const Eigen::MatrixXcd mixed4 = Eigen::MatrixXcd::Identity(4, 4) / 4.0;

    SECTION("non-interacting spectrum") {
        const auto model = build_two_qubit(1.0, 0.0, mixed4);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(model.h_base);
        const auto e = solver.eigenvalues();
        CHECK(e[0] == Approx(-1.0));
        CHECK(e[1] == Approx(0.0).margin(1e-12));
        CHECK(e[2] == Approx(0.0).margin(1e-12));
        CHECK(e[3] == Approx(1.0));
    }

    SECTION("exchange block splits by the qubit-qubit coupling") {
        const double g = 0.2;
        const auto model = build_two_qubit(1.0, g, mixed4);
        // single-excitation block spanned by |01>, |10>
        Eigen::Matrix2cd block;
        block << model.h_base(1, 1), model.h_base(1, 2), model.h_base(2, 1), model.h_base(2, 2);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> solver(block);
        CHECK(solver.eigenvalues()[0] == Approx(-g));
        CHECK(solver.eigenvalues()[1] == Approx(g));
    }

    SECTION("product plus state has unit x-polarization on both qubits") {
        Eigen::Vector4cd psi;
        psi << 0.5, 0.5, 0.5, 0.5;
        const auto model = build_two_qubit(1.0, 0.001, pure_state(psi));
        const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
        const Eigen::MatrixXcd x1 = kron(pauli_x(), id);
        const Eigen::MatrixXcd x2 = kron(id, pauli_x());
        CHECK((x1 * model.initial_state).trace().real() == Approx(1.0));
        CHECK((x2 * model.initial_state).trace().real() == Approx(1.0));
    }

    SECTION("dimension mismatch is rejected") {
        CHECK_THROWS_AS(build_two_qubit(1.0, 0.1, Eigen::MatrixXcd::Identity(2, 2) / 2.0),
                        std::invalid_argument);
    }
}

TEST_CASE("generator matches a hand-assembled superoperator", "[heom]") {
    // single exponential, depth 1, dim 2: two ADOs, an 8x8 linear map
    const cxd c{0.03, 0.01};
    const double nu = 0.4;
    bath::BathExpansion expansion;
    expansion.coefficients = {c};
    expansion.rates = {nu};
    expansion.terminator_strength = 0.0;
    expansion.temperature = 0.2;
    expansion.n_matsubara = 0;

    heom::HeomParams params;
    params.depth = 1;
    params.scaled_ados = false;
    params.use_terminator = false;

    const auto model = build_single_qubit(1.0, plus_state());
    heom::HeomGenerator gen(model, expansion, params);
    REQUIRE(gen.table().size() == 2);
    REQUIRE(gen.state_size() == 8);

    // column-major vec: vec(A rho B) = (B^T kron A) vec(rho)
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(2, 2);
    const Eigen::MatrixXcd h = model.h_base;
    const Eigen::MatrixXcd s = model.coupling_op;
    auto left = [&](const Eigen::MatrixXcd& a) { return kron(id, a); };
    auto right = [&](const Eigen::MatrixXcd& b) { return kron(b.transpose(), id); };

    const Eigen::MatrixXcd liouville = -ci * (left(h) - right(h));
    const Eigen::MatrixXcd phi = -ci * (left(s) - right(s));
    const Eigen::MatrixXcd theta = -ci * (c * left(s) - std::conj(c) * right(s));

    Eigen::MatrixXcd oracle = Eigen::MatrixXcd::Zero(8, 8);
    oracle.block(0, 0, 4, 4) = liouville;
    oracle.block(0, 4, 4, 4) = phi;                              // from the level-1 ADO
    oracle.block(4, 0, 4, 4) = theta;                            // n_k = 1 drops to level 0
    oracle.block(4, 4, 4, 4) = liouville - nu * Eigen::MatrixXcd::Identity(4, 4);

    Eigen::VectorXcd basis = Eigen::VectorXcd::Zero(8), out(8);
    for (int col = 0; col < 8; ++col) {
        basis.setZero();
        basis[col] = 1.0;
        gen.apply(0.0, basis, out);
        for (int row = 0; row < 8; ++row) {
            CHECK(std::abs(out[row] - oracle(row, col)) < 1e-14);
        }
    }
}

TEST_CASE("free evolution at zero coupling", "[heom]") {
    const auto model = build_single_qubit(1.0, plus_state());
    const auto expansion = bath::matsubara_expansion(bath::SpectralDensity(0.0, 0.1), 0.2, 2);
    heom::HeomParams params;
    params.depth = 3;

    const auto grid = linspace(M_PI, 64);
    const auto traj = heom::propagate(model, expansion, params, grid);

    SECTION("pi rotation flips the transverse Bloch components") {
        const auto& rho = traj.states.back();
        CHECK((pauli_x() * rho).trace().real() == Approx(-1.0).margin(1e-8));
        CHECK((pauli_y() * rho).trace().real() == Approx(0.0).margin(1e-8));
        CHECK((pauli_z() * rho).trace().real() == Approx(0.0).margin(1e-8));
    }

    SECTION("matches the closed-system propagator at every sample") {
        for (std::size_t i = 0; i < traj.states.size(); ++i) {
            const double t = traj.times[static_cast<Eigen::Index>(i)];
            const Eigen::MatrixXcd u =
                (Eigen::MatrixXcd(-ci * t * model.h_base)).exp();
            const Eigen::MatrixXcd exact = u * model.initial_state * u.adjoint();
            CHECK(trace_distance(traj.states[i], exact) < 1e-6);
        }
    }
}

TEST_CASE("propagation preserves the state structure", "[heom]") {
    const auto model = build_single_qubit(1.0, plus_state());
    const auto expansion = bath::matsubara_expansion(bath::SpectralDensity(0.1, 0.1), 0.2, 2);
    heom::HeomParams params;
    params.depth = 5;

    const auto traj = heom::propagate(model, expansion, params, linspace(30.0, 150));
    for (const auto& rho : traj.states) {
        CHECK(std::abs(rho.trace().real() - 1.0) < 1e-8);
        CHECK(std::abs(rho.trace().imag()) < 1e-10);
        CHECK((rho - rho.adjoint()).cwiseAbs().maxCoeff() < 1e-8);
        CHECK(min_eigenvalue(rho) > -1e-6);
    }
}

TEST_CASE("scaled and unscaled hierarchies agree on the physical state", "[heom]") {
    const auto model = build_single_qubit(1.0, plus_state());
    const auto expansion = bath::matsubara_expansion(bath::SpectralDensity(0.05, 0.2), 0.2, 2);
    const auto grid = linspace(20.0, 50);

    heom::HeomParams scaled;
    scaled.depth = 5;
    scaled.rtol = 1e-10;
    scaled.atol = 1e-12;
    heom::HeomParams plain = scaled;
    plain.scaled_ados = false;

    const auto a = heom::propagate(model, expansion, scaled, grid);
    const auto b = heom::propagate(model, expansion, plain, grid);
    for (std::size_t i = 0; i < a.states.size(); ++i) {
        CHECK(trace_distance(a.states[i], b.states[i]) < 1e-8);
    }
}

TEST_CASE("weak coupling thermalizes to the Gibbs state", "[heom][slow]") {
    const double temperature = 0.2;
    const Eigen::MatrixXcd h = 0.5 * pauli_z();
    const auto model = build_single_qubit(1.0, gibbs_state(h, temperature));
    // N_k matters here: the Matsubara tail competes with the tiny thermal
    // excitation rate, so the flat terminator alone (N_k <= 1) skews the
    // population ratio by ~2%
    const auto expansion =
        bath::matsubara_expansion(bath::SpectralDensity(1e-3, 0.1), temperature, 3);
    heom::HeomParams params;
    params.depth = 2;

    heom::SteadyOptions opts;
    opts.epsilon = 1e-6;
    opts.t_max = 3e4;
    const auto steady = heom::steady_state(model, expansion, params, opts);

    const double sz = (pauli_z() * steady.rho).trace().real();
    CHECK(sz == Approx(-std::tanh(2.5)).margin(0.01));
    CHECK(trace_distance(steady.rho, gibbs_state(h, temperature)) < 0.01);
}

TEST_CASE("strong coupling leaves the Gibbs state", "[heom]") {
    const double temperature = 0.2;
    const Eigen::MatrixXcd h = 0.5 * pauli_z();
    const auto model = build_single_qubit(1.0, gibbs_state(h, temperature));
    const auto expansion =
        bath::matsubara_expansion(bath::SpectralDensity(0.1, 0.1), temperature, 2);
    heom::HeomParams params;
    params.depth = 6;

    heom::SteadyOptions opts;
    opts.epsilon = 1e-7;
    opts.t_max = 2e3;
    const auto steady = heom::steady_state(model, expansion, params, opts);
    const double sz = (pauli_z() * steady.rho).trace().real();
    CHECK(std::abs(sz - (-std::tanh(2.5))) > 0.01);
}

TEST_CASE("steady state detection error paths", "[heom]") {
    const auto model = build_single_qubit(1.0, plus_state());
    const auto expansion = bath::matsubara_expansion(bath::SpectralDensity(0.0, 0.1), 0.2, 1);
    heom::HeomParams params;
    params.depth = 1;

    SECTION("precessing coherences never converge") {
        heom::SteadyOptions opts;
        opts.t_max = 200.0;
        try {
            heom::steady_state(model, expansion, params, opts);
            FAIL("expected SteadyStateError");
        } catch (const heom::SteadyStateError& e) {
            CHECK(e.residual() > 0.1);  // a pi-rotation-scale swing per probe window
        }
    }

    SECTION("control sequences are rejected") {
        auto driven = model;
        driven.drive = control::ControlSequence(2, Eigen::MatrixXd::Zero(2, 3), 10.0);
        CHECK_THROWS_AS(heom::steady_state(driven, expansion, params), std::invalid_argument);
    }
}

TEST_CASE("convergence sweep refines monotonically", "[heom]") {
    const auto model = build_single_qubit(1.0, plus_state());
    const auto grid = linspace(20.0, 100);
    heom::HeomParams params;

    SECTION("zero coupling: every refinement is exact") {
        const auto report = heom::convergence_sweep(model, bath::SpectralDensity(0.0, 0.1), 0.2,
                                                    params, {2, 3}, {1, 2}, grid, pauli_z());
        for (const auto& row : report.rows) {
            CHECK(row.max_deviation < 1e-12);
            CHECK(row.converged);
        }
    }

    SECTION("weak coupling: deviations fall with depth") {
        const auto report = heom::convergence_sweep(model, bath::SpectralDensity(0.01, 0.1), 0.2,
                                                    params, {1, 2, 3}, {2}, grid, pauli_z());
        REQUIRE(report.rows.size() == 2);
        CHECK(report.rows[1].max_deviation < report.rows[0].max_deviation);
    }

    SECTION("moderate coupling converges within depth 8") {
        const auto report = heom::convergence_sweep(model, bath::SpectralDensity(0.1, 0.05), 0.2,
                                                    params, {4, 6, 8}, {1}, grid, pauli_z());
        CHECK(report.any_converged());
    }

    SECTION("empty lists are rejected") {
        CHECK_THROWS_AS(heom::convergence_sweep(model, bath::SpectralDensity(0.1, 0.1), 0.2,
                                                params, {}, {1}, grid, pauli_z()),
                        std::invalid_argument);
    }
}
