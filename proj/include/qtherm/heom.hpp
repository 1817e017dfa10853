// heom.hpp — hierarchical-equations-of-motion propagation: an exact,
// non-perturbative solver for a system linearly coupled to one bosonic bath
// described by an exponential correlation expansion.
//
// Hierarchy generator (unscaled convention):
//   dρ_n/dt = −i[H_S(t), ρ_n] − (Σ_k n_k ν_k) ρ_n
//             − i Σ_k [S, ρ_{n+e_k}]
//             − i Σ_k n_k (c_k S ρ_{n−e_k} − c_k* ρ_{n−e_k} S)
//             − Δ [S, [S, ρ_n]]                  (truncation terminator)
// The scaled convention divides each ADO by sqrt(Π_k n_k! |c_k|^{n_k}),
// which symmetrizes the couplings and conditions deep hierarchies; level-0
// dynamics is identical.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "qtherm/bath.hpp"
#include "qtherm/core.hpp"
#include "qtherm/hierarchy.hpp"
#include "qtherm/integrate.hpp"
#include "qtherm/system.hpp"

namespace qtherm::heom {

struct HeomParams {
    int depth{6};               // hierarchy truncation L
    bool use_terminator{true};  // absorb the delta remainder as a double commutator
    bool scaled_ados{true};
    bool adaptive{true};  // Dormand-Prince 5(4); false = fixed-step RK4
    double dt{0.02};
    double rtol{1e-8};
    double atol{1e-10};
    std::uint64_t max_ados{200000};
};

// Flat stack of auxiliary density operators; block 0 is the physical state.
struct HeomState {
    Eigen::VectorXcd data;
    double time{0.0};
    int dim{0};
    int n_ados{0};

    Eigen::MatrixXcd level0() const {
        Eigen::Map<const Eigen::MatrixXcd> rho(data.data(), dim, dim);
        return rho;
    }
};

struct Trajectory {
    Eigen::VectorXd times;
    std::vector<Eigen::MatrixXcd> states;

    std::vector<double> expectation(const Eigen::MatrixXcd& op) const {
        std::vector<double> values;
        values.reserve(states.size());
        for (const auto& rho : states) {
            values.push_back((op * rho).trace().real());
        }
        return values;
    }
};

class HeomGenerator {
public:
    HeomGenerator(SystemModel model, bath::BathExpansion expansion, HeomParams params)
        : model_(std::move(model)), bath_(std::move(expansion)), params_(std::move(params)) {
        if (params_.depth < 1) {
            throw std::invalid_argument("HeomGenerator: depth must be >= 1");
        }
        const int m = static_cast<int>(bath_.size());
        table_ = HierarchyTable(m, params_.depth, params_.max_ados);
        dim_ = model_.dim;

        coupling_ = model_.coupling_op;
        coupling_sq_ = coupling_ * coupling_;
        delta_ = params_.use_terminator ? bath_.terminator_strength : 0.0;

        const std::size_t n = table_.size();
        decay_.resize(n);
        up_coef_.assign(n * static_cast<std::size_t>(m), 0.0);
        down_coef_.assign(n * static_cast<std::size_t>(m), cxd{0.0, 0.0});
        for (std::size_t i = 0; i < n; ++i) {
            const auto& counts = table_.indices[i].counts;
            double gamma = 0.0;
            for (int k = 0; k < m; ++k) {
                const auto ku = static_cast<std::size_t>(k);
                const double nu = bath_.rates[ku];
                const cxd c = bath_.coefficients[ku];
                const double cabs = std::abs(c);
                const int nk = counts[ku];
                gamma += nk * nu;
                if (params_.scaled_ados) {
                    up_coef_[i * m + ku] = cabs > 0.0 ? std::sqrt((nk + 1) * cabs) : 0.0;
                    down_coef_[i * m + ku] =
                        cabs > 0.0 ? std::sqrt(static_cast<double>(nk) / cabs) * c : cxd{0.0, 0.0};
                } else {
                    up_coef_[i * m + ku] = 1.0;
                    down_coef_[i * m + ku] = static_cast<double>(nk) * c;
                }
            }
            decay_[i] = gamma;
        }

        h_static_ = model_.h_base;
        hr_.resize(dim_, dim_);
        rh_.resize(dim_, dim_);
        sr_.resize(dim_, dim_);
        rs_.resize(dim_, dim_);
        srs_.resize(dim_, dim_);
    }

    const SystemModel& model() const { return model_; }
    const bath::BathExpansion& expansion() const { return bath_; }
    const HierarchyTable& table() const { return table_; }
    const HeomParams& params() const { return params_; }
    int dim() const { return dim_; }
    std::size_t state_size() const { return table_.size() * static_cast<std::size_t>(dim_ * dim_); }

    HeomState initial_state() const {
        HeomState s;
        s.dim = dim_;
        s.n_ados = static_cast<int>(table_.size());
        s.time = 0.0;
        s.data = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(state_size()));
        Eigen::Map<Eigen::MatrixXcd>(s.data.data(), dim_, dim_) = model_.initial_state;
        return s;
    }

    void apply(double t, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
        const int d = dim_;
        const int dd = d * d;
        const int m = static_cast<int>(bath_.size());
        const Eigen::MatrixXcd& h = model_.time_dependent() ? (h_time_ = model_.hamiltonian(t))
                                                            : h_static_;
        if (dy.size() != y.size()) dy.resize(y.size());

        for (std::size_t i = 0; i < table_.size(); ++i) {
            Eigen::Map<const Eigen::MatrixXcd> rho(y.data() + i * dd, d, d);
            Eigen::Map<Eigen::MatrixXcd> out(dy.data() + i * dd, d, d);

            hr_.noalias() = h * rho;
            rh_.noalias() = rho * h;
            out = -ci * (hr_ - rh_) - decay_[i] * rho;

            if (delta_ > 0.0) {
                hr_.noalias() = coupling_sq_ * rho;
                rh_.noalias() = rho * coupling_sq_;
                sr_.noalias() = coupling_ * rho;
                srs_.noalias() = sr_ * coupling_;
                out -= delta_ * (hr_ + rh_ - 2.0 * srs_);
            }

            for (int k = 0; k < m; ++k) {
                const auto ku = static_cast<std::size_t>(k);
                const int up = table_.raise_index[i][ku];
                if (up >= 0) {
                    const double coef = up_coef_[i * m + ku];
                    if (coef != 0.0) {
                        Eigen::Map<const Eigen::MatrixXcd> nb(y.data() + up * dd, d, d);
                        sr_.noalias() = coupling_ * nb;
                        rs_.noalias() = nb * coupling_;
                        out += (-ci * coef) * (sr_ - rs_);
                    }
                }
                const int dn = table_.lower_index[i][ku];
                if (dn >= 0) {
                    const cxd a = down_coef_[i * m + ku];
                    if (a != cxd{0.0, 0.0}) {
                        Eigen::Map<const Eigen::MatrixXcd> nb(y.data() + dn * dd, d, d);
                        sr_.noalias() = coupling_ * nb;
                        rs_.noalias() = nb * coupling_;
                        out += -ci * (a * sr_ - std::conj(a) * rs_);
                    }
                }
            }
        }
    }

private:
    SystemModel model_;
    bath::BathExpansion bath_;
    HeomParams params_;
    HierarchyTable table_;
    int dim_{0};

    Eigen::MatrixXcd coupling_, coupling_sq_, h_static_, h_time_;
    double delta_{0.0};
    std::vector<double> decay_;
    std::vector<double> up_coef_;    // [ado * m + k]
    std::vector<cxd> down_coef_;     // [ado * m + k], right factor is the conjugate

    Eigen::MatrixXcd hr_, rh_, sr_, rs_, srs_;
};

namespace detail {

inline void validate_grid(const Eigen::VectorXd& t_grid) {
    if (t_grid.size() < 1 || t_grid[0] != 0.0) {
        throw std::invalid_argument("propagate: time grid must start at 0");
    }
    for (Eigen::Index i = 1; i < t_grid.size(); ++i) {
        if (t_grid[i] <= t_grid[i - 1]) {
            throw std::invalid_argument("propagate: time grid must be strictly increasing");
        }
    }
}

}  // namespace detail

// Propagate the hierarchy and sample the physical state on t_grid.
inline Trajectory propagate(const SystemModel& model, const bath::BathExpansion& expansion,
                            const HeomParams& params, const Eigen::VectorXd& t_grid) {
    detail::validate_grid(t_grid);
    auto gen = std::make_shared<HeomGenerator>(model, expansion, params);
    ode::Rhs rhs = [gen](double t, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
        gen->apply(t, y, dy);
    };
    ode::IntegratorOptions opts{params.adaptive, params.dt, params.rtol, params.atol, 0.0};

    std::vector<double> breaks;
    if (model.drive) {
        breaks = model.drive->boundaries();
        if (t_grid[t_grid.size() - 1] > model.drive->t_max + 1e-12) {
            throw std::invalid_argument("propagate: time grid extends beyond the control window");
        }
    }

    HeomState state = gen->initial_state();
    Eigen::VectorXcd y = state.data;
    Trajectory traj;
    traj.times = t_grid;
    traj.states.reserve(static_cast<std::size_t>(t_grid.size()));
    traj.states.push_back(Eigen::Map<const Eigen::MatrixXcd>(y.data(), model.dim, model.dim));

    ode::DormandPrince stepper(rhs, opts);
    auto advance_to = [&](double a, double b) {
        double t = a;
        for (double brk : breaks) {
            if (brk > t + 1e-15 && brk < b - 1e-15) {
                if (opts.adaptive) {
                    stepper.advance(t, brk, y);
                    stepper.reset();
                } else {
                    ode::advance_rk4(rhs, t, brk, y, opts.dt);
                }
                t = brk;
            }
        }
        if (opts.adaptive) {
            stepper.advance(t, b, y);
        } else {
            ode::advance_rk4(rhs, t, b, y, opts.dt);
        }
    };

    for (Eigen::Index i = 1; i < t_grid.size(); ++i) {
        advance_to(t_grid[i - 1], t_grid[i]);
        traj.states.push_back(Eigen::Map<const Eigen::MatrixXcd>(y.data(), model.dim, model.dim));
    }
    return traj;
}

// ------------------------------- steady state --------------------------------

struct SteadyOptions {
    double epsilon{1e-7};       // trace-norm residual over one probe window
    double probe_window{20.0};
    double t_max{1e4};
};

class SteadyStateError : public std::runtime_error {
public:
    SteadyStateError(const std::string& msg, double residual)
        : std::runtime_error(msg), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_{0.0};
};

struct SteadyResult {
    Eigen::MatrixXcd rho;
    double convergence_time{0.0};
    HeomState state;  // full hierarchy at convergence, reusable as a warm start
};

// Propagate until the physical state stops moving over a probe window.
// `warm_start` may carry the converged hierarchy of a nearby parameter point.
inline SteadyResult steady_state(const SystemModel& model, const bath::BathExpansion& expansion,
                                 const HeomParams& params, const SteadyOptions& opts = {},
                                 const HeomState* warm_start = nullptr) {
    if (model.time_dependent()) {
        throw std::invalid_argument("steady_state: requires a time-independent Hamiltonian");
    }
    auto gen = std::make_shared<HeomGenerator>(model, expansion, params);
    ode::Rhs rhs = [gen](double t, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
        gen->apply(t, y, dy);
    };
    ode::IntegratorOptions int_opts{params.adaptive, params.dt, params.rtol, params.atol, 0.0};

    Eigen::VectorXcd y;
    if (warm_start) {
        if (warm_start->data.size() != static_cast<Eigen::Index>(gen->state_size())) {
            throw std::invalid_argument("steady_state: warm start has incompatible layout");
        }
        y = warm_start->data;
    } else {
        y = gen->initial_state().data;
    }

    Eigen::MatrixXcd previous = Eigen::Map<const Eigen::MatrixXcd>(y.data(), model.dim, model.dim);
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
        Eigen::MatrixXcd current =
            Eigen::Map<const Eigen::MatrixXcd>(y.data(), model.dim, model.dim);
        residual = trace_norm_hermitian(current - previous);
        if (residual < opts.epsilon) {
            SteadyResult result;
            result.rho = current;
            result.convergence_time = t;
            result.state.data = std::move(y);
            result.state.time = t;
            result.state.dim = model.dim;
            result.state.n_ados = static_cast<int>(gen->table().size());
            return result;
        }
        previous = std::move(current);
    }
    throw SteadyStateError("steady_state: no convergence by t = " + std::to_string(opts.t_max) +
                               " (last residual " + std::to_string(residual) + ")",
                           residual);
}

// ----------------------------- convergence sweep -----------------------------

struct ConvergenceReport {
    struct Row {
        int depth_a, depth_b;
        int n_matsubara_a, n_matsubara_b;
        double max_deviation;  // max over the grid of |<σ_z>_a − <σ_z>_b|
        bool converged;
    };
    std::vector<Row> rows;
    double threshold{1e-3};

    bool any_converged() const {
        for (const auto& r : rows) {
            if (r.converged) return true;
        }
        return false;
    }
};

// Max-over-time deviation of a probe observable between successive truncation
// settings; first along the depth list, then along the Matsubara list.
inline ConvergenceReport convergence_sweep(const SystemModel& model,
                                           const bath::SpectralDensity& sd, double temperature,
                                           const HeomParams& base_params,
                                           const std::vector<int>& depths,
                                           const std::vector<int>& n_matsubaras,
                                           const Eigen::VectorXd& t_grid,
                                           const Eigen::MatrixXcd& observable,
                                           double threshold = 1e-3) {
    if (depths.empty() || n_matsubaras.empty()) {
        throw std::invalid_argument("convergence_sweep: depth and Matsubara lists must be non-empty");
    }
    ConvergenceReport report;
    report.threshold = threshold;

    auto observe = [&](int depth, int n_mats) {
        HeomParams p = base_params;
        p.depth = depth;
        auto expansion = bath::matsubara_expansion(sd, temperature, n_mats);
        return propagate(model, expansion, p, t_grid).expectation(observable);
    };
    auto max_dev = [](const std::vector<double>& a, const std::vector<double>& b) {
        double dev = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            dev = std::max(dev, std::abs(a[i] - b[i]));
        }
        return dev;
    };

    const int nm_ref = n_matsubaras.back();
    std::vector<double> prev = observe(depths.front(), nm_ref);
    for (std::size_t i = 1; i < depths.size(); ++i) {
        std::vector<double> cur = observe(depths[i], nm_ref);
        const double dev = max_dev(prev, cur);
        report.rows.push_back({depths[i - 1], depths[i], nm_ref, nm_ref, dev, dev < threshold});
        prev = std::move(cur);
    }
    const int depth_ref = depths.back();
    prev = observe(depth_ref, n_matsubaras.front());
    for (std::size_t i = 1; i < n_matsubaras.size(); ++i) {
        std::vector<double> cur = observe(depth_ref, n_matsubaras[i]);
        const double dev = max_dev(prev, cur);
        report.rows.push_back(
            {depth_ref, depth_ref, n_matsubaras[i - 1], n_matsubaras[i], dev, dev < threshold});
        prev = std::move(cur);
    }
    return report;
}

}  // namespace qtherm::heom
