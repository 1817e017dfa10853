// metrology.hpp — temperature-estimation figures of merit: Bloch vectors,
// quantum Fisher information (Bloch-form and spectral-form), the QSNR, the
// closed-form thermal benchmark, and temperature derivatives from paired
// propagations.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <future>
#include <stdexcept>
#include <vector>

#include "qtherm/core.hpp"
#include "qtherm/heom.hpp"

namespace qtherm::metrology {

struct BlochVector {
    double sx{0.0}, sy{0.0}, sz{0.0};

    double norm() const { return std::sqrt(sx * sx + sy * sy + sz * sz); }
    double dot(const BlochVector& o) const { return sx * o.sx + sy * o.sy + sz * o.sz; }
};

inline BlochVector bloch_vector(const Eigen::MatrixXcd& rho) {
    if (rho.rows() != 2 || rho.cols() != 2) {
        throw std::invalid_argument("bloch_vector: state must be 2x2");
    }
    BlochVector s;
    s.sx = 2.0 * rho(1, 0).real();
    s.sy = 2.0 * rho(1, 0).imag();
    s.sz = (rho(0, 0) - rho(1, 1)).real();
    return s;
}

class SingularPurityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// F_T = |∂_T S|² + (S·∂_T S)² / (1 − |S|²); on the Bloch sphere surface the
// radial term is a genuine pole, so a radial derivative there is an error
// rather than a regularized value.
inline double qfi_bloch(const BlochVector& s, const BlochVector& ds,
                        double purity_epsilon = 1e-9) {
    const double norm = s.norm();
    if (norm > 1.0 + 1e-9) {
        throw std::invalid_argument("qfi_bloch: Bloch vector longer than 1");
    }
    const double ds2 = ds.dot(ds);
    if (norm >= 1.0 - purity_epsilon) {
        if (std::abs(s.dot(ds)) < 1e-9) {
            return ds2;  // pure state: F = |∂_T S|²
        }
        throw SingularPurityError("qfi_bloch: radial derivative at the Bloch sphere surface");
    }
    const double radial = s.dot(ds);
    return ds2 + radial * radial / (1.0 - norm * norm);
}

// Spectral form 2 Σ_{ij} |<i|∂ρ|j>|² / (p_i + p_j) over eigenpairs of ρ,
// skipping rank-deficient pairs.
inline double qfi_mixed(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& drho,
                        double rank_epsilon = 1e-12) {
    if (rho.rows() != rho.cols() || drho.rows() != drho.cols() || rho.rows() != drho.rows()) {
        throw std::invalid_argument("qfi_mixed: dimension mismatch");
    }
    if (!is_hermitian(drho, 1e-8 * std::max(1.0, drho.cwiseAbs().maxCoeff()))) {
        throw std::invalid_argument("qfi_mixed: derivative matrix must be Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho);
    const Eigen::VectorXd p = solver.eigenvalues();
    const Eigen::MatrixXcd d_eig = solver.eigenvectors().adjoint() * drho * solver.eigenvectors();
    double f = 0.0;
    const int d = static_cast<int>(p.size());
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            const double w = p[i] + p[j];
            if (w <= rank_epsilon) continue;
            f += 2.0 * std::norm(d_eig(i, j)) / w;
        }
    }
    return f;
}

inline double qsnr(double temperature, double qfi) {
    if (temperature <= 0.0) {
        throw std::invalid_argument("qsnr: temperature must be > 0");
    }
    if (qfi < 0.0) {
        throw std::invalid_argument("qsnr: QFI must be >= 0");
    }
    return temperature * temperature * qfi;
}

// Equilibrium QSNR of a thermal qubit, (ω0/2T)² sech²(ω0/2T); proportional to
// the probe heat capacity.
inline double thermal_benchmark(double temperature, double omega0) {
    if (temperature <= 0.0) {
        throw std::invalid_argument("thermal_benchmark: temperature must be > 0");
    }
    const double x = 0.5 * omega0 / temperature;
    const double sech = 2.0 * std::exp(-x) / (1.0 + std::exp(-2.0 * x));
    return x * x * sech * sech;
}

// ---------------------------- paired propagations ----------------------------

// A temperature-parametrized propagation; the bath expansion (and with it the
// whole hierarchy) is rebuilt inside at the requested temperature.
using TrajectoryFn = std::function<heom::Trajectory(double temperature)>;

struct DerivativeOptions {
    double delta_rel{1e-3};  // δ = delta_rel · T
    bool richardson{false};
    double noise_floor{1e-9};
    bool parallel{true};  // run the T ± δ pair concurrently
};

struct DerivativeResult {
    std::vector<Eigen::MatrixXcd> drho;  // ∂_T ρ(t) per sample
    bool noise_warning{false};
};

namespace detail {

inline std::vector<Eigen::MatrixXcd> central_difference(const heom::Trajectory& plus,
                                                        const heom::Trajectory& minus,
                                                        double delta) {
    if (plus.states.size() != minus.states.size()) {
        throw std::invalid_argument("temperature_derivative: trajectory grids differ");
    }
    std::vector<Eigen::MatrixXcd> d;
    d.reserve(plus.states.size());
    for (std::size_t i = 0; i < plus.states.size(); ++i) {
        d.push_back((plus.states[i] - minus.states[i]) / (2.0 * delta));
    }
    return d;
}

}  // namespace detail

// ∂_T ρ(t) by central differences over two full propagations at T ± δ with
// identical grids and truncation settings.
inline DerivativeResult temperature_derivative(const TrajectoryFn& propagate, double temperature,
                                               const DerivativeOptions& opts = {}) {
    if (temperature <= 0.0) {
        throw std::invalid_argument("temperature_derivative: temperature must be > 0");
    }
    const double delta = opts.delta_rel * temperature;
    auto run_pair = [&](double d) {
        if (opts.parallel) {
            auto plus = std::async(std::launch::async, propagate, temperature + d);
            heom::Trajectory minus = propagate(temperature - d);
            return detail::central_difference(plus.get(), minus, d);
        }
        heom::Trajectory plus = propagate(temperature + d);
        heom::Trajectory minus = propagate(temperature - d);
        return detail::central_difference(plus, minus, d);
    };

    DerivativeResult result;
    result.drho = run_pair(delta);
    if (opts.richardson) {
        const std::vector<Eigen::MatrixXcd> half = run_pair(0.5 * delta);
        for (std::size_t i = 0; i < result.drho.size(); ++i) {
            result.drho[i] = (4.0 * half[i] - result.drho[i]) / 3.0;
        }
    }

    double max_move = 0.0;
    for (const auto& d : result.drho) {
        max_move = std::max(max_move, d.cwiseAbs().maxCoeff() * 2.0 * delta);
    }
    result.noise_warning = max_move > 0.0 && max_move < opts.noise_floor;
    return result;
}

// ------------------------------ QSNR trajectory ------------------------------

struct MetrologyPoint {
    double time{0.0};
    double qfi{0.0};
    double qsnr{0.0};
    BlochVector bloch;
    BlochVector dbloch_dT;
};

struct QsnrTrajectory {
    std::vector<MetrologyPoint> points;

    const MetrologyPoint& max_point() const {
        std::size_t best = 0;
        for (std::size_t i = 1; i < points.size(); ++i) {
            if (points[i].qsnr > points[best].qsnr) best = i;
        }
        return points[best];
    }
    const MetrologyPoint& final_point() const { return points.back(); }
};

// Compose propagation, the temperature derivative, and the QFI route matched
// to the dimension (Bloch form for qubits, spectral form above).
inline QsnrTrajectory qsnr_trajectory(const TrajectoryFn& propagate, double temperature,
                                      const DerivativeOptions& opts = {}) {
    heom::Trajectory center;
    DerivativeResult deriv;
    if (opts.parallel) {
        auto center_future = std::async(std::launch::async, propagate, temperature);
        deriv = temperature_derivative(propagate, temperature, opts);
        center = center_future.get();
    } else {
        center = propagate(temperature);
        deriv = temperature_derivative(propagate, temperature, opts);
    }
    if (center.states.size() != deriv.drho.size()) {
        throw std::invalid_argument("qsnr_trajectory: derivative grid mismatch");
    }

    QsnrTrajectory out;
    out.points.reserve(center.states.size());
    const bool qubit = center.states.empty() ? true : center.states[0].rows() == 2;
    for (std::size_t i = 0; i < center.states.size(); ++i) {
        MetrologyPoint p;
        p.time = center.times[static_cast<Eigen::Index>(i)];
        if (qubit) {
            p.bloch = bloch_vector(center.states[i]);
            p.dbloch_dT.sx = 2.0 * deriv.drho[i](1, 0).real();
            p.dbloch_dT.sy = 2.0 * deriv.drho[i](1, 0).imag();
            p.dbloch_dT.sz = (deriv.drho[i](0, 0) - deriv.drho[i](1, 1)).real();
            p.qfi = qfi_bloch(p.bloch, p.dbloch_dT);
        } else {
            p.qfi = qfi_mixed(center.states[i], deriv.drho[i]);
        }
        p.qsnr = qsnr(temperature, p.qfi);
        out.points.push_back(p);
    }
    return out;
}

}  // namespace qtherm::metrology
