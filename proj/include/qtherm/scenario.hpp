// scenario.hpp — declarative run descriptions: JSON schema parsing with
// field-path diagnostics, and the factories that wire systems, baths and
// solvers into the metrology pipelines.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qtherm/bath.hpp"
#include "qtherm/control.hpp"
#include "qtherm/core.hpp"
#include "qtherm/heom.hpp"
#include "qtherm/metrology.hpp"
#include "qtherm/nonmarkov.hpp"
#include "qtherm/redfield.hpp"
#include "qtherm/system.hpp"

namespace qtherm::scenario {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ------------------------------ JSON accessors -------------------------------

namespace detail {

using nlohmann::json;

inline const json& child(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) {
        throw ConfigError(path + ": missing required field");
    }
    return j.at(key);
}

inline double number(const json& j, const std::string& key, const std::string& path) {
    const json& v = child(j, key, path);
    if (!v.is_number()) {
        throw ConfigError(path + ": expected a number");
    }
    return v.get<double>();
}

inline double number_or(const json& j, const std::string& key, const std::string& path,
                        double fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    return number(j, key, path);
}

inline int integer_or(const json& j, const std::string& key, const std::string& path,
                      int fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number_integer()) {
        throw ConfigError(path + ": expected an integer");
    }
    return v.get<int>();
}

inline bool boolean_or(const json& j, const std::string& key, const std::string& path,
                       bool fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_boolean()) {
        throw ConfigError(path + ": expected a boolean");
    }
    return v.get<bool>();
}

inline std::string string_or(const json& j, const std::string& key, const std::string& path,
                             const std::string& fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_string()) {
        throw ConfigError(path + ": expected a string");
    }
    return v.get<std::string>();
}

inline void require_positive(double v, const std::string& path) {
    if (!(v > 0.0)) {
        throw ConfigError(path + ": must be > 0");
    }
}

// axis: explicit list [a, b, ...] or {"start": a, "stop": b, "count": n}
inline std::vector<double> axis(const json& j, const std::string& path) {
    std::vector<double> values;
    if (j.is_array()) {
        for (const auto& v : j) {
            if (!v.is_number()) {
                throw ConfigError(path + ": expected numeric entries");
            }
            values.push_back(v.get<double>());
        }
    } else if (j.is_object()) {
        const double start = number(j, "start", path + ".start");
        const double stop = number(j, "stop", path + ".stop");
        const int count = integer_or(j, "count", path + ".count", -1);
        if (count < 1) {
            throw ConfigError(path + ".count: must be >= 1");
        }
        for (int i = 0; i < count; ++i) {
            values.push_back(count == 1 ? start : start + (stop - start) * i / (count - 1));
        }
    } else {
        throw ConfigError(path + ": expected a list or a start/stop/count range");
    }
    if (values.empty()) {
        throw ConfigError(path + ": axis must be non-empty");
    }
    return values;
}

}  // namespace detail

// --------------------------------- config types -------------------------------

struct SystemConfig {
    bool two_qubit{false};
    double g{0.0};
    double omega0{1.0};
};

struct InitialStateConfig {
    std::string preset{"plus"};  // plus | zero | one | mixed | gibbs | (explicit)
    std::optional<Eigen::MatrixXcd> matrix;
};

struct SolverConfig {
    bool brme{false};
    heom::HeomParams heom{};
    int n_matsubara{-1};  // -1 = automatic remainder rule
    bool lamb_shift{false};
};

struct GridConfig {
    double t_max{100.0};
    int n_samples{500};

    Eigen::VectorXd times() const {
        Eigen::VectorXd t(n_samples + 1);
        for (int i = 0; i <= n_samples; ++i) {
            t[i] = t_max * i / n_samples;
        }
        return t;
    }
};

struct SweepConfig {
    std::vector<double> lambdas;
    std::vector<double> omega_cs;
    std::vector<double> temperatures;
    bool with_blp{false};
};

struct OptimizeConfig {
    control::OptimizeParams params{};
    int n_segments{8};
    double t_max{320.0};
    int n_time_samples{64};
};

struct ScenarioConfig {
    SystemConfig system;
    InitialStateConfig initial;
    bath::SpectralDensity sd{0.0, 1.0};
    double temperature{0.2};
    SolverConfig solver;
    GridConfig grid;
    metrology::DerivativeOptions derivative;
    heom::SteadyOptions steady;
    std::optional<control::ControlSequence> drive;
    std::optional<SweepConfig> sweep;
    std::optional<OptimizeConfig> optimize;
    nlohmann::json raw;  // verbatim snapshot for the manifest
};

// ---------------------------------- parsing ----------------------------------

inline Eigen::MatrixXcd parse_matrix(const nlohmann::json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) {
        throw ConfigError(path + ": expected a matrix as a list of rows");
    }
    const auto n = j.size();
    Eigen::MatrixXcd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        if (!j.at(r).is_array() || j.at(r).size() != n) {
            throw ConfigError(path + ": matrix must be square");
        }
        for (std::size_t c = 0; c < n; ++c) {
            const auto& cell = j.at(r).at(c);
            if (cell.is_number()) {
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = cell.get<double>();
            } else if (cell.is_array() && cell.size() == 2) {
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                    cxd{cell.at(0).get<double>(), cell.at(1).get<double>()};
            } else {
                throw ConfigError(path + ": matrix entries must be numbers or [re, im] pairs");
            }
        }
    }
    return m;
}

inline ScenarioConfig parse_scenario(const nlohmann::json& j) {
    using detail::boolean_or;
    using detail::child;
    using detail::integer_or;
    using detail::number;
    using detail::number_or;
    using detail::string_or;

    ScenarioConfig cfg;
    cfg.raw = j;

    const auto& system = child(j, "system", "system");
    const std::string type = string_or(system, "type", "system.type", "single_qubit");
    if (type == "single_qubit") {
        cfg.system.two_qubit = false;
    } else if (type == "two_qubit") {
        cfg.system.two_qubit = true;
        cfg.system.g = number_or(system, "g", "system.g", 0.0);
    } else {
        throw ConfigError("system.type: must be single_qubit or two_qubit");
    }
    cfg.system.omega0 = number_or(system, "omega0", "system.omega0", 1.0);
    detail::require_positive(cfg.system.omega0, "system.omega0");

    if (j.contains("initial_state")) {
        const auto& init = j.at("initial_state");
        if (init.is_string()) {
            cfg.initial.preset = init.get<std::string>();
            static const std::vector<std::string> presets{"plus", "zero", "one", "mixed", "gibbs"};
            bool ok = false;
            for (const auto& p : presets) ok = ok || p == cfg.initial.preset;
            if (!ok) {
                throw ConfigError("initial_state: unknown preset '" + cfg.initial.preset + "'");
            }
        } else if (init.is_object() && init.contains("matrix")) {
            cfg.initial.matrix = parse_matrix(init.at("matrix"), "initial_state.matrix");
        } else {
            throw ConfigError("initial_state: expected a preset name or {\"matrix\": ...}");
        }
    }

    const auto& bath_j = child(j, "bath", "bath");
    const double lambda = number(bath_j, "lambda", "bath.lambda");
    const double omega_c = number(bath_j, "omega_c", "bath.omega_c");
    if (lambda < 0.0) {
        throw ConfigError("bath.lambda: must be >= 0");
    }
    detail::require_positive(omega_c, "bath.omega_c");
    cfg.sd = bath::SpectralDensity(lambda, omega_c);

    cfg.temperature = number(j, "temperature", "temperature");
    detail::require_positive(cfg.temperature, "temperature");

    if (j.contains("solver")) {
        const auto& solver = j.at("solver");
        const std::string kind = string_or(solver, "type", "solver.type", "heom");
        if (kind == "brme") {
            cfg.solver.brme = true;
        } else if (kind != "heom") {
            throw ConfigError("solver.type: must be heom or brme");
        }
        cfg.solver.heom.depth = integer_or(solver, "depth", "solver.depth", cfg.solver.heom.depth);
        if (cfg.solver.heom.depth < 1) {
            throw ConfigError("solver.depth: must be >= 1");
        }
        cfg.solver.n_matsubara =
            integer_or(solver, "n_matsubara", "solver.n_matsubara", cfg.solver.n_matsubara);
        cfg.solver.heom.use_terminator =
            boolean_or(solver, "terminator", "solver.terminator", true);
        cfg.solver.heom.scaled_ados =
            boolean_or(solver, "scaled_ados", "solver.scaled_ados", true);
        const std::string integ =
            string_or(solver, "integrator", "solver.integrator", "adaptive_rk45");
        if (integ == "fixed_rk4") {
            cfg.solver.heom.adaptive = false;
        } else if (integ != "adaptive_rk45") {
            throw ConfigError("solver.integrator: must be adaptive_rk45 or fixed_rk4");
        }
        cfg.solver.heom.dt = number_or(solver, "dt", "solver.dt", cfg.solver.heom.dt);
        detail::require_positive(cfg.solver.heom.dt, "solver.dt");
        cfg.solver.heom.rtol = number_or(solver, "rtol", "solver.rtol", cfg.solver.heom.rtol);
        detail::require_positive(cfg.solver.heom.rtol, "solver.rtol");
        cfg.solver.heom.atol = number_or(solver, "atol", "solver.atol", cfg.solver.heom.atol);
        detail::require_positive(cfg.solver.heom.atol, "solver.atol");
        cfg.solver.lamb_shift = boolean_or(solver, "lamb_shift", "solver.lamb_shift", false);
    }

    if (j.contains("grid")) {
        const auto& grid = j.at("grid");
        cfg.grid.t_max = number(grid, "t_max", "grid.t_max");
        detail::require_positive(cfg.grid.t_max, "grid.t_max");
        cfg.grid.n_samples = integer_or(grid, "n_samples", "grid.n_samples", cfg.grid.n_samples);
        if (cfg.grid.n_samples < 1) {
            throw ConfigError("grid.n_samples: must be >= 1");
        }
    }

    if (j.contains("derivative")) {
        const auto& d = j.at("derivative");
        cfg.derivative.delta_rel =
            number_or(d, "delta_rel", "derivative.delta_rel", cfg.derivative.delta_rel);
        detail::require_positive(cfg.derivative.delta_rel, "derivative.delta_rel");
        cfg.derivative.richardson =
            boolean_or(d, "richardson", "derivative.richardson", cfg.derivative.richardson);
    }

    if (j.contains("steady")) {
        const auto& s = j.at("steady");
        cfg.steady.epsilon = number_or(s, "epsilon", "steady.epsilon", cfg.steady.epsilon);
        detail::require_positive(cfg.steady.epsilon, "steady.epsilon");
        cfg.steady.probe_window =
            number_or(s, "probe_window", "steady.probe_window", cfg.steady.probe_window);
        detail::require_positive(cfg.steady.probe_window, "steady.probe_window");
        cfg.steady.t_max = number_or(s, "t_max", "steady.t_max", cfg.steady.t_max);
        detail::require_positive(cfg.steady.t_max, "steady.t_max");
    }

    if (j.contains("control")) {
        const auto& c = j.at("control");
        const double t_max = number(c, "t_max", "control.t_max");
        detail::require_positive(t_max, "control.t_max");
        const auto& amps_j = child(c, "amplitudes", "control.amplitudes");
        if (!amps_j.is_array() || amps_j.empty()) {
            throw ConfigError("control.amplitudes: expected a list of [Dx, Dy, Dz] rows");
        }
        Eigen::MatrixXd amps(static_cast<Eigen::Index>(amps_j.size()), 3);
        for (std::size_t r = 0; r < amps_j.size(); ++r) {
            if (!amps_j.at(r).is_array() || amps_j.at(r).size() != 3) {
                throw ConfigError("control.amplitudes: each row must have 3 entries");
            }
            for (int c2 = 0; c2 < 3; ++c2) {
                amps(static_cast<Eigen::Index>(r), c2) = amps_j.at(r).at(c2).get<double>();
            }
        }
        cfg.drive = control::ControlSequence(static_cast<int>(amps_j.size()), amps, t_max);
    }

    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        SweepConfig sweep;
        sweep.lambdas = s.contains("lambda") ? detail::axis(s.at("lambda"), "sweep.lambda")
                                             : std::vector<double>{cfg.sd.lambda};
        sweep.omega_cs = s.contains("omega_c") ? detail::axis(s.at("omega_c"), "sweep.omega_c")
                                               : std::vector<double>{cfg.sd.omega_c};
        sweep.temperatures = s.contains("temperature")
                                 ? detail::axis(s.at("temperature"), "sweep.temperature")
                                 : std::vector<double>{cfg.temperature};
        for (double l : sweep.lambdas) {
            if (l < 0.0) throw ConfigError("sweep.lambda: must be >= 0");
        }
        for (double w : sweep.omega_cs) detail::require_positive(w, "sweep.omega_c");
        for (double t : sweep.temperatures) detail::require_positive(t, "sweep.temperature");
        sweep.with_blp = boolean_or(s, "blp", "sweep.blp", false);
        cfg.sweep = sweep;
    }

    if (j.contains("optimize")) {
        const auto& o = j.at("optimize");
        OptimizeConfig oc;
        const std::string alg = string_or(o, "algorithm", "optimize.algorithm", "qpso");
        if (alg == "pso") {
            oc.params.algorithm = control::OptimizeParams::Algorithm::pso;
        } else if (alg == "qpso") {
            oc.params.algorithm = control::OptimizeParams::Algorithm::qpso;
        } else {
            throw ConfigError("optimize.algorithm: must be pso or qpso");
        }
        oc.params.particles = integer_or(o, "particles", "optimize.particles", 20);
        oc.params.iterations = integer_or(o, "iterations", "optimize.iterations", 150);
        oc.n_segments = integer_or(o, "segments", "optimize.segments", 8);
        if (oc.params.particles < 1) throw ConfigError("optimize.particles: must be >= 1");
        if (oc.params.iterations < 1) throw ConfigError("optimize.iterations: must be >= 1");
        if (oc.n_segments < 1) throw ConfigError("optimize.segments: must be >= 1");
        oc.t_max = number_or(o, "t_max", "optimize.t_max", 320.0);
        detail::require_positive(oc.t_max, "optimize.t_max");
        oc.params.bound = number_or(o, "bound", "optimize.bound", 1.0);
        detail::require_positive(oc.params.bound, "optimize.bound");
        oc.params.seed = static_cast<std::uint64_t>(integer_or(o, "seed", "optimize.seed", 0));
        oc.n_time_samples = integer_or(o, "n_time_samples", "optimize.n_time_samples", 64);
        if (oc.n_time_samples < 1) throw ConfigError("optimize.n_time_samples: must be >= 1");
        oc.params.dimension = 3 * oc.n_segments;
        oc.params.pso.inertia = number_or(o, "inertia", "optimize.inertia", 0.7);
        oc.params.pso.cognitive = number_or(o, "cognitive", "optimize.cognitive", 1.5);
        oc.params.pso.social = number_or(o, "social", "optimize.social", 1.5);
        oc.params.qpso.alpha_start = number_or(o, "alpha_start", "optimize.alpha_start", 1.0);
        oc.params.qpso.alpha_end = number_or(o, "alpha_end", "optimize.alpha_end", 0.5);
        cfg.optimize = oc;
    }

    return cfg;
}

inline ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config: cannot open " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config: invalid JSON: " + std::string(e.what()));
    }
    return parse_scenario(j);
}

// --------------------------------- factories ----------------------------------

inline Eigen::MatrixXcd resolve_initial_state(const ScenarioConfig& cfg,
                                              const Eigen::MatrixXcd& h_base) {
    if (cfg.initial.matrix) {
        return *cfg.initial.matrix;
    }
    const auto& preset = cfg.initial.preset;
    if (preset == "gibbs") {
        return gibbs_state(h_base, cfg.temperature);
    }
    const int d = cfg.system.two_qubit ? 4 : 2;
    if (preset == "mixed") {
        return Eigen::MatrixXcd::Identity(d, d) / static_cast<double>(d);
    }
    Eigen::Vector2cd single;
    if (preset == "plus") {
        single << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    } else if (preset == "zero") {
        single << 1.0, 0.0;
    } else if (preset == "one") {
        single << 0.0, 1.0;
    } else {
        throw ConfigError("initial_state: unknown preset '" + preset + "'");
    }
    if (!cfg.system.two_qubit) {
        return pure_state(single);
    }
    Eigen::Vector4cd both;
    both << single[0] * single[0], single[0] * single[1], single[1] * single[0],
        single[1] * single[1];
    return pure_state(both);
}

// The initial state is resolved once at the scenario temperature so paired
// T ± δ propagations share it; only the bath carries the T-dependence.
inline SystemModel make_model(const ScenarioConfig& cfg,
                              std::optional<control::ControlSequence> drive = std::nullopt) {
    SystemModel model =
        cfg.system.two_qubit
            ? build_two_qubit(cfg.system.omega0, cfg.system.g,
                              resolve_initial_state(
                                  cfg, build_two_qubit(cfg.system.omega0, cfg.system.g,
                                                       Eigen::MatrixXcd::Identity(4, 4) / 4.0)
                                           .h_base))
            : build_single_qubit(cfg.system.omega0,
                                 resolve_initial_state(
                                     cfg, 0.5 * cfg.system.omega0 * pauli_z()));
    if (drive) {
        model.drive = drive;
    } else if (cfg.drive) {
        model.drive = cfg.drive;
    }
    return model;
}

inline int resolve_n_matsubara(const ScenarioConfig& cfg) {
    if (cfg.solver.n_matsubara >= 0) return cfg.solver.n_matsubara;
    return bath::default_n_matsubara(cfg.sd, cfg.temperature);
}

inline redfield::BrmeParams brme_params(const ScenarioConfig& cfg) {
    redfield::BrmeParams p;
    p.adaptive = cfg.solver.heom.adaptive;
    p.dt = cfg.solver.heom.dt;
    p.rtol = cfg.solver.heom.rtol;
    p.atol = cfg.solver.heom.atol;
    p.rates.include_lamb_shift = cfg.solver.lamb_shift;
    return p;
}

// Temperature-parametrized propagation on a fixed grid; truncation settings
// are pinned at the scenario temperature so T ± δ runs are strictly paired.
inline metrology::TrajectoryFn make_trajectory_fn(
    const ScenarioConfig& cfg, const Eigen::VectorXd& times,
    std::optional<control::ControlSequence> drive = std::nullopt) {
    const SystemModel model = make_model(cfg, std::move(drive));
    if (cfg.solver.brme) {
        if (model.time_dependent()) {
            throw ConfigError("solver.type: brme does not support control sequences");
        }
        const auto params = brme_params(cfg);
        const auto sd = cfg.sd;
        return [model, sd, params, times](double temperature) {
            return redfield::brme_propagate(model, sd, temperature, params, times);
        };
    }
    const int n_mats = resolve_n_matsubara(cfg);
    const auto params = cfg.solver.heom;
    const auto sd = cfg.sd;
    return [model, sd, params, times, n_mats](double temperature) {
        const auto expansion = bath::matsubara_expansion(sd, temperature, n_mats);
        return heom::propagate(model, expansion, params, times);
    };
}

// Propagation from an arbitrary initial state (all other settings fixed).
inline nonmarkov::PairPropagator make_pair_propagator(const ScenarioConfig& cfg,
                                                      const Eigen::VectorXd& times) {
    const SystemModel base = make_model(cfg);
    if (cfg.solver.brme) {
        const auto params = brme_params(cfg);
        const auto sd = cfg.sd;
        const double T = cfg.temperature;
        return [base, sd, params, times, T](const Eigen::MatrixXcd& initial) {
            SystemModel model(base.h_base, base.coupling_op, initial, base.omega0);
            return redfield::brme_propagate(model, sd, T, params, times);
        };
    }
    const int n_mats = resolve_n_matsubara(cfg);
    const auto expansion = bath::matsubara_expansion(cfg.sd, cfg.temperature, n_mats);
    const auto params = cfg.solver.heom;
    return [base, expansion, params, times](const Eigen::MatrixXcd& initial) {
        SystemModel model(base.h_base, base.coupling_op, initial, base.omega0);
        return heom::propagate(model, expansion, params, times);
    };
}

// ------------------------------ QSNR pipelines --------------------------------

inline metrology::QsnrTrajectory qsnr_dynamics(const ScenarioConfig& cfg) {
    const auto fn = make_trajectory_fn(cfg, cfg.grid.times());
    return metrology::qsnr_trajectory(fn, cfg.temperature, cfg.derivative);
}

struct SteadyQsnr {
    double qsnr{0.0};
    double qfi{0.0};
    double convergence_time{0.0};
    Eigen::MatrixXcd rho;
};

// Steady-state QSNR: converge at T, then warm-start the T ± δ solves from the
// converged hierarchy and differentiate the fixed points.
inline SteadyQsnr steady_qsnr(const ScenarioConfig& cfg) {
    const SystemModel model = make_model(cfg);
    if (model.time_dependent()) {
        throw ConfigError("steady runs do not accept a control block");
    }
    const double T = cfg.temperature;
    const double delta = cfg.derivative.delta_rel * T;

    SteadyQsnr out;
    Eigen::MatrixXcd rho_plus, rho_minus;
    if (cfg.solver.brme) {
        const auto params = brme_params(cfg);
        const auto center = redfield::brme_steady_state(model, cfg.sd, T, params, cfg.steady);
        out.rho = center.rho;
        out.convergence_time = center.convergence_time;
        rho_plus = redfield::brme_steady_state(model, cfg.sd, T + delta, params, cfg.steady).rho;
        rho_minus = redfield::brme_steady_state(model, cfg.sd, T - delta, params, cfg.steady).rho;
    } else {
        const int n_mats = resolve_n_matsubara(cfg);
        const auto params = cfg.solver.heom;
        const auto center = heom::steady_state(
            model, bath::matsubara_expansion(cfg.sd, T, n_mats), params, cfg.steady);
        out.rho = center.rho;
        out.convergence_time = center.convergence_time;
        rho_plus = heom::steady_state(model, bath::matsubara_expansion(cfg.sd, T + delta, n_mats),
                                      params, cfg.steady, &center.state)
                       .rho;
        rho_minus = heom::steady_state(model, bath::matsubara_expansion(cfg.sd, T - delta, n_mats),
                                       params, cfg.steady, &center.state)
                        .rho;
    }

    const Eigen::MatrixXcd drho = (rho_plus - rho_minus) / (2.0 * delta);
    if (model.dim == 2) {
        using metrology::BlochVector;
        const BlochVector s = metrology::bloch_vector(out.rho);
        BlochVector ds;
        ds.sx = 2.0 * drho(1, 0).real();
        ds.sy = 2.0 * drho(1, 0).imag();
        ds.sz = (drho(0, 0) - drho(1, 1)).real();
        out.qfi = metrology::qfi_bloch(s, ds);
    } else {
        out.qfi = metrology::qfi_mixed(out.rho, drho);
    }
    out.qsnr = metrology::qsnr(T, out.qfi);
    return out;
}

// ------------------------------ control fitness -------------------------------

// Decode a particle into a drive sequence and score it by the time-weighted
// QSNR under the scenario's solver. Serial inside: callers parallelize over
// particles.
inline control::FitnessFn make_control_fitness(const ScenarioConfig& cfg, double t_max,
                                               int n_time_samples) {
    Eigen::VectorXd times(n_time_samples + 1);
    times[0] = 0.0;
    for (int i = 1; i <= n_time_samples; ++i) {
        times[i] = t_max * i / n_time_samples;
    }
    metrology::DerivativeOptions deriv = cfg.derivative;
    deriv.parallel = false;
    const double T = cfg.temperature;
    return [cfg, times, t_max, deriv, T](const Eigen::VectorXd& x) {
        const auto drive = control::decode_control(x, t_max);
        const auto fn = make_trajectory_fn(cfg, times, drive);
        const auto traj = metrology::qsnr_trajectory(fn, T, deriv);
        std::vector<double> q;
        q.reserve(traj.points.size() - 1);
        for (std::size_t i = 1; i < traj.points.size(); ++i) {
            q.push_back(traj.points[i].qsnr);  // drop the t = 0 sample
        }
        return control::weighted_fitness(q, control::FitnessSpec{static_cast<int>(q.size())});
    };
}

}  // namespace qtherm::scenario
