// redfield.hpp — non-secular Bloch-Redfield master equation for one coupling
// channel: Bohr-frequency decomposition, half-Fourier bath rates, and a dense
// superoperator propagated on the same integrators as the hierarchy.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "qtherm/bath.hpp"
#include "qtherm/core.hpp"
#include "qtherm/heom.hpp"
#include "qtherm/integrate.hpp"
#include "qtherm/system.hpp"

namespace qtherm::redfield {

// ---------------------------- Bohr decomposition -----------------------------

// S = Σ_ω S(ω) with S(ω) collecting matrix elements between eigenstates whose
// energy difference is ω; S(−ω) = S(ω)†.
struct BohrDecomposition {
    std::vector<double> frequencies;
    std::vector<Eigen::MatrixXcd> jump_ops;  // in the computational basis

    std::size_t size() const { return frequencies.size(); }
};

inline BohrDecomposition bohr_decompose(const SystemModel& model, double freq_tol = 1e-10) {
    if (model.time_dependent()) {
        throw std::invalid_argument("bohr_decompose: requires a time-independent Hamiltonian");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(model.h_base);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("bohr_decompose: eigendecomposition failed");
    }
    const Eigen::VectorXd eps = solver.eigenvalues();
    const Eigen::MatrixXcd u = solver.eigenvectors();
    const Eigen::MatrixXcd s_eig = u.adjoint() * model.coupling_op * u;
    const int d = model.dim;

    BohrDecomposition out;
    for (int m = 0; m < d; ++m) {
        for (int n = 0; n < d; ++n) {
            const double omega = eps[m] - eps[n];
            std::size_t bucket = out.size();
            for (std::size_t b = 0; b < out.size(); ++b) {
                if (std::abs(out.frequencies[b] - omega) <= freq_tol) {
                    bucket = b;
                    break;
                }
            }
            if (bucket == out.size()) {
                out.frequencies.push_back(omega);
                out.jump_ops.emplace_back(Eigen::MatrixXcd::Zero(d, d));
            }
            // |m><m| S |n><n| back-transformed to the computational basis
            out.jump_ops[bucket].noalias() += s_eig(m, n) * u.col(m) * u.col(n).adjoint();
        }
    }
    return out;
}

// ------------------------------- bath rates ----------------------------------

// Γ(ω) = ∫_0^∞ dτ e^{iωτ} C(τ) for the correlation function whose exponential
// expansion drives the hierarchy, so both solvers share one bath convention:
//   Re Γ(ω) = J(ω)(1 + n(ω))  (ω > 0)
//   Re Γ(ω) = J(|ω|) n(|ω|)   (ω < 0)
//   Re Γ(0) = 2λT/ω_c         (analytic limit)
// The imaginary part (Lamb shift) is the principal-value transform of the same
// kernel, evaluated by quadrature only on request.
inline double halffourier_rate_real(const bath::SpectralDensity& sd, double temperature,
                                    double omega) {
    if (temperature <= 0.0) {
        throw std::invalid_argument("halffourier_rate: temperature must be > 0");
    }
    if (sd.lambda == 0.0) return 0.0;
    if (omega == 0.0) {
        return 2.0 * sd.lambda * temperature / sd.omega_c;
    }
    const double j = bath::spectral_density(sd, std::abs(omega));
    const double n = bath::thermal_occupation(std::abs(omega), temperature);
    return omega > 0.0 ? j * (1.0 + n) : j * n;
}

namespace detail {

// spectral function J(ω)(1 + n(ω)) extended to all real ω (continuous at 0)
inline double thermal_kernel(const bath::SpectralDensity& sd, double temperature, double omega) {
    if (std::abs(omega) < 1e-12) {
        return 2.0 * sd.lambda * temperature / sd.omega_c;
    }
    return omega > 0.0
               ? bath::spectral_density(sd, omega) *
                     (1.0 + bath::thermal_occupation(omega, temperature))
               : bath::spectral_density(sd, -omega) * bath::thermal_occupation(-omega, temperature);
}

// adaptive Simpson on [a, b]
template <typename F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm, double fb,
                        double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol) {
        return left + right + (left + right - whole) / 15.0;
    }
    return adaptive_simpson(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1);
}

template <typename F>
double integrate(const F& f, double a, double b, double tol) {
    const double m = 0.5 * (a + b);
    return adaptive_simpson(f, a, b, f(a), f(m), f(b), tol, 48);
}

}  // namespace detail

// Im Γ(ω) = (1/2π) P∫ dω' S(ω') / (ω − ω') with S(ω') = 2·thermal_kernel(ω').
// The singularity is removed by symmetrizing around ω' = ω.
inline double halffourier_rate_imag(const bath::SpectralDensity& sd, double temperature,
                                    double omega, double rel_tol = 1e-8) {
    if (sd.lambda == 0.0) return 0.0;
    auto kernel = [&](double w) { return detail::thermal_kernel(sd, temperature, w); };
    // P∫ S(ω')/(ω−ω') dω' = ∫_0^∞ [S(ω−u) − S(ω+u)]/u du
    auto sym = [&](double u) {
        if (u < 1e-14) {
            const double h = 1e-7 * std::max(1.0, std::abs(omega));
            return (kernel(omega - h) - kernel(omega + h)) / h;  // −2 S'(ω) limit
        }
        return (kernel(omega - u) - kernel(omega + u)) / u;
    };
    const double scale = std::max({std::abs(omega), sd.omega_c, temperature, 1.0});
    const double tol = rel_tol * sd.lambda;
    double total = detail::integrate(sym, 0.0, 10.0 * scale, tol);
    // far tail: S decays like 2λω_c/ω' on the positive side
    double a = 10.0 * scale;
    for (int block = 0; block < 24; ++block) {
        const double b = 2.0 * a;
        const double piece = detail::integrate(sym, a, b, tol);
        total += piece;
        a = b;
        if (std::abs(piece) < tol) break;
    }
    return total / (2.0 * std::numbers::pi);
}

inline cxd halffourier_rate(const bath::SpectralDensity& sd, double temperature, double omega,
                            bool include_lamb_shift = false, double rel_tol = 1e-8) {
    const double re = halffourier_rate_real(sd, temperature, omega);
    const double im =
        include_lamb_shift ? halffourier_rate_imag(sd, temperature, omega, rel_tol) : 0.0;
    return {re, im};
}

struct RateOptions {
    bool include_lamb_shift{false};
    double lamb_shift_rel_tol{1e-8};
};

struct RedfieldRates {
    std::map<double, cxd> gamma;  // frequency → Γ(frequency)
    bool include_lamb_shift{false};
};

inline RedfieldRates build_rates(const BohrDecomposition& bohr, const bath::SpectralDensity& sd,
                                 double temperature, const RateOptions& options = {}) {
    RedfieldRates rates;
    rates.include_lamb_shift = options.include_lamb_shift;
    for (double omega : bohr.frequencies) {
        rates.gamma[omega] = halffourier_rate(sd, temperature, omega, options.include_lamb_shift,
                                              options.lamb_shift_rel_tol);
    }
    return rates;
}

// ------------------------------- superoperator -------------------------------

// Non-secular Redfield generator. With the raising-type decomposition above,
// the rate attached to the jump operator acting from the left of ρ is the
// half-Fourier transform at the opposite frequency, κ(ω) = Γ(−ω); this is the
// assignment under which the bath honors detailed balance, making the Gibbs
// state stationary.
//   dρ/dt = −i[H_S + H_LS, ρ]
//           + Σ_{ω,ω'} κ(ω') ( S(ω') ρ S†(ω) − S†(ω) S(ω') ρ ) + h.c.
//   H_LS = Σ_ω Im κ(ω) S†(ω) S(ω)
class RedfieldGenerator {
public:
    RedfieldGenerator(const SystemModel& model, const bath::SpectralDensity& sd,
                      double temperature, const RateOptions& options = {})
        : dim_(model.dim) {
        const BohrDecomposition bohr = bohr_decompose(model);
        const std::size_t nf = bohr.size();
        std::vector<cxd> kappa(nf);
        for (std::size_t i = 0; i < nf; ++i) {
            kappa[i] = halffourier_rate(sd, temperature, -bohr.frequencies[i],
                                        options.include_lamb_shift, options.lamb_shift_rel_tol);
        }

        Eigen::MatrixXcd h_total = model.h_base;
        if (options.include_lamb_shift) {
            for (std::size_t i = 0; i < nf; ++i) {
                h_total += kappa[i].imag() * bohr.jump_ops[i].adjoint() * bohr.jump_ops[i];
            }
        }

        // assemble the dense superoperator column by column
        const int dd = dim_ * dim_;
        superop_.resize(dd, dd);
        Eigen::MatrixXcd basis = Eigen::MatrixXcd::Zero(dim_, dim_);
        for (int col = 0; col < dd; ++col) {
            basis(col % dim_, col / dim_) = 1.0;  // column-major unit matrix
            Eigen::MatrixXcd x = -ci * (h_total * basis - basis * h_total);
            for (std::size_t wp = 0; wp < nf; ++wp) {
                const Eigen::MatrixXcd& sp = bohr.jump_ops[wp];
                for (std::size_t w = 0; w < nf; ++w) {
                    const Eigen::MatrixXcd sd_dag = bohr.jump_ops[w].adjoint();
                    const Eigen::MatrixXcd term =
                        kappa[wp] * (sp * basis * sd_dag - sd_dag * sp * basis);
                    x += term + term.adjoint();
                }
            }
            superop_.col(col) = Eigen::Map<const Eigen::VectorXcd>(x.data(), dd);
            basis(col % dim_, col / dim_) = 0.0;
        }
    }

    int dim() const { return dim_; }
    const Eigen::MatrixXcd& matrix() const { return superop_; }

    void apply(const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) const {
        dy.noalias() = superop_ * y;
    }

private:
    int dim_;
    Eigen::MatrixXcd superop_;
};

// ------------------------------- propagation ---------------------------------

struct BrmeParams {
    bool adaptive{true};
    double dt{0.02};
    double rtol{1e-8};
    double atol{1e-10};
    RateOptions rates{};
};

inline heom::Trajectory brme_propagate(const SystemModel& model, const bath::SpectralDensity& sd,
                                       double temperature, const BrmeParams& params,
                                       const Eigen::VectorXd& t_grid) {
    heom::detail::validate_grid(t_grid);
    if (model.time_dependent()) {
        throw std::invalid_argument("brme_propagate: requires a time-independent Hamiltonian");
    }
    auto gen = std::make_shared<RedfieldGenerator>(model, sd, temperature, params.rates);
    ode::Rhs rhs = [gen](double, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
        gen->apply(y, dy);
    };
    ode::IntegratorOptions opts{params.adaptive, params.dt, params.rtol, params.atol, 0.0};

    const int d = model.dim;
    Eigen::VectorXcd y = Eigen::Map<const Eigen::VectorXcd>(model.initial_state.data(), d * d);
    heom::Trajectory traj;
    traj.times = t_grid;
    traj.states.reserve(static_cast<std::size_t>(t_grid.size()));
    traj.states.push_back(model.initial_state);
    ode::DormandPrince stepper(rhs, opts);
    for (Eigen::Index i = 1; i < t_grid.size(); ++i) {
        if (opts.adaptive) {
            stepper.advance(t_grid[i - 1], t_grid[i], y);
        } else {
            ode::advance_rk4(rhs, t_grid[i - 1], t_grid[i], y, opts.dt);
        }
        traj.states.push_back(Eigen::Map<const Eigen::MatrixXcd>(y.data(), d, d));
    }
    return traj;
}

// Steady state by the same probe-window residual used for the hierarchy.
inline heom::SteadyResult brme_steady_state(const SystemModel& model,
                                            const bath::SpectralDensity& sd, double temperature,
                                            const BrmeParams& params,
                                            const heom::SteadyOptions& opts = {}) {
    auto gen = std::make_shared<RedfieldGenerator>(model, sd, temperature, params.rates);
    ode::Rhs rhs = [gen](double, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
        gen->apply(y, dy);
    };
    ode::IntegratorOptions int_opts{params.adaptive, params.dt, params.rtol, params.atol, 0.0};

    const int d = model.dim;
    Eigen::VectorXcd y = Eigen::Map<const Eigen::VectorXcd>(model.initial_state.data(), d * d);
    Eigen::MatrixXcd previous = model.initial_state;
    double t = 0.0;
    double residual = std::numeric_limits<double>::infinity();
    ode::DormandPrince stepper(rhs, int_opts);
    while (t < opts.t_max) {
        const double t_next = t + opts.probe_window;
        if (int_opts.adaptive) {
            stepper.advance(t, t_next, y);
        } else {
            ode::advance_rk4(rhs, t, t_next, y, int_opts.dt);
        }
        t = t_next;
        Eigen::MatrixXcd current = Eigen::Map<const Eigen::MatrixXcd>(y.data(), d, d);
        residual = trace_norm_hermitian(current - previous);
        if (residual < opts.epsilon) {
            heom::SteadyResult result;
            result.rho = current;
            result.convergence_time = t;
            result.state.data = std::move(y);
            result.state.time = t;
            result.state.dim = d;
            result.state.n_ados = 1;
            return result;
        }
        previous = std::move(current);
    }
    throw heom::SteadyStateError(
        "brme_steady_state: no convergence by t = " + std::to_string(opts.t_max) +
            " (last residual " + std::to_string(residual) + ")",
        residual);
}

}  // namespace qtherm::redfield
