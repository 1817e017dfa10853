// integrate.hpp — fixed-step RK4 and adaptive Dormand-Prince 5(4) for
// complex-valued linear ODE systems.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace qtherm::ode {

using Rhs = std::function<void(double t, const Eigen::VectorXcd& y, Eigen::VectorXcd& dydt)>;

struct IntegratorOptions {
    bool adaptive{true};
    double dt{0.01};       // fixed-step size (adaptive ignores)
    double rtol{1e-8};
    double atol{1e-10};
    double max_step{0.0};  // 0 = unbounded
};

namespace detail {

// weighted rms error norm against atol + rtol * max(|y0|, |y1|)
inline double error_norm(const Eigen::VectorXcd& err, const Eigen::VectorXcd& y0,
                         const Eigen::VectorXcd& y1, double atol, double rtol) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double scale = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double r = std::abs(err[i]) / scale;
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(err.size()));
}

}  // namespace detail

// Classic RK4 with a step count chosen so the grid interval divides evenly.
inline void advance_rk4(const Rhs& rhs, double t0, double t1, Eigen::VectorXcd& y, double dt) {
    const double span = t1 - t0;
    if (span <= 0.0) return;
    const int steps = std::max(1, static_cast<int>(std::ceil(span / dt - 1e-12)));
    const double h = span / steps;
    Eigen::VectorXcd k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()), tmp(y.size());
    for (int s = 0; s < steps; ++s) {
        const double t = t0 + s * h;
        rhs(t, y, k1);
        tmp = y + 0.5 * h * k1;
        rhs(t + 0.5 * h, tmp, k2);
        tmp = y + 0.5 * h * k2;
        rhs(t + 0.5 * h, tmp, k3);
        tmp = y + h * k3;
        rhs(t + h, tmp, k4);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
}

// Dormand-Prince 5(4) embedded pair with PI-free standard step control.
class DormandPrince {
public:
    DormandPrince(Rhs rhs, IntegratorOptions opts) : rhs_(std::move(rhs)), opts_(opts) {}

    // Advance y from t0 to t1, adapting the step size; FSAL stage reused.
    void advance(double t0, double t1, Eigen::VectorXcd& y) {
        if (t1 <= t0) return;
        const Eigen::Index n = y.size();
        if (k_[0].size() != n) {
            for (auto& k : k_) k.resize(n);
            y_new_.resize(n);
            err_.resize(n);
            have_first_stage_ = false;
        }
        double t = t0;
        if (h_ <= 0.0) h_ = initial_step(t0, t1, y);
        if (!have_first_stage_) {
            rhs_(t, y, k_[0]);
            have_first_stage_ = true;
        }

        while (t < t1) {
            double h = std::min(h_, t1 - t);
            if (opts_.max_step > 0.0) h = std::min(h, opts_.max_step);
            bool accepted = false;
            for (int attempt = 0; attempt < 64 && !accepted; ++attempt) {
                step(t, h, y);
                const double err = detail::error_norm(err_, y, y_new_, opts_.atol, opts_.rtol);
                if (err <= 1.0) {
                    t += h;
                    y.swap(y_new_);
                    k_[0].swap(k_[6]);  // FSAL
                    const double grow = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
                    h_ = h * std::clamp(grow, 0.2, 5.0);
                    accepted = true;
                } else {
                    h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
                    if (h < 1e-14 * std::max(1.0, std::abs(t))) {
                        throw std::runtime_error(
                            "DormandPrince: step size underflow at t = " + std::to_string(t) +
                            " (system too stiff for requested tolerance; hierarchy depth or "
                            "n_matsubara may be too small for this coupling)");
                    }
                }
            }
            if (!accepted) {
                throw std::runtime_error("DormandPrince: repeated step rejection at t = " +
                                         std::to_string(t));
            }
        }
    }

    // Invalidate the cached derivative (call when the RHS changes discontinuously).
    void reset() {
        have_first_stage_ = false;
        h_ = 0.0;
    }

private:
    double initial_step(double t0, double t1, const Eigen::VectorXcd& y) {
        Eigen::VectorXcd dy(y.size());
        rhs_(t0, y, dy);
        const double ynorm = y.norm();
        const double dnorm = dy.norm();
        double h = (dnorm > 1e-300) ? 0.01 * std::max(ynorm, opts_.atol) / dnorm : 1e-3;
        return std::min(h, (t1 - t0));
    }

    void step(double t, double h, const Eigen::VectorXcd& y) {
        // Butcher tableau (Dormand & Prince 1980)
        static constexpr double a21 = 1.0 / 5.0;
        static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
        static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
        static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                                a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
        static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                                a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                                a65 = -5103.0 / 18656.0;
        static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                                b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
        static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                                e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

        y_new_ = y + h * (a21 * k_[0]);
        rhs_(t + h / 5.0, y_new_, k_[1]);
        y_new_ = y + h * (a31 * k_[0] + a32 * k_[1]);
        rhs_(t + 3.0 * h / 10.0, y_new_, k_[2]);
        y_new_ = y + h * (a41 * k_[0] + a42 * k_[1] + a43 * k_[2]);
        rhs_(t + 4.0 * h / 5.0, y_new_, k_[3]);
        y_new_ = y + h * (a51 * k_[0] + a52 * k_[1] + a53 * k_[2] + a54 * k_[3]);
        rhs_(t + 8.0 * h / 9.0, y_new_, k_[4]);
        y_new_ = y + h * (a61 * k_[0] + a62 * k_[1] + a63 * k_[2] + a64 * k_[3] + a65 * k_[4]);
        rhs_(t + h, y_new_, k_[5]);
        y_new_ = y + h * (b1 * k_[0] + b3 * k_[2] + b4 * k_[3] + b5 * k_[4] + b6 * k_[5]);
        rhs_(t + h, y_new_, k_[6]);
        err_ = h * (e1 * k_[0] + e3 * k_[2] + e4 * k_[3] + e5 * k_[4] + e6 * k_[5] + e7 * k_[6]);
    }

    Rhs rhs_;
    IntegratorOptions opts_;
    Eigen::VectorXcd k_[7], y_new_, err_;
    double h_{0.0};
    bool have_first_stage_{false};
};

// Integrate across [t0, t1] honoring the options; `breaks` lists interior times
// where the RHS is discontinuous (control-segment boundaries).
inline void advance(const Rhs& rhs, double t0, double t1, Eigen::VectorXcd& y,
                    const IntegratorOptions& opts, const std::vector<double>& breaks = {}) {
    double t = t0;
    auto advance_smooth = [&](double a, double b) {
        if (b <= a) return;
        if (opts.adaptive) {
            DormandPrince stepper(rhs, opts);
            stepper.advance(a, b, y);
        } else {
            advance_rk4(rhs, a, b, y, opts.dt);
        }
    };
    for (double brk : breaks) {
        if (brk > t && brk < t1) {
            advance_smooth(t, brk);
            t = brk;
        }
    }
    advance_smooth(t, t1);
}

}  // namespace qtherm::ode
