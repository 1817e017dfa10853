// control.hpp — piecewise-constant drive sequences, the time-weighted QSNR
// fitness, and swarm optimizers (classical and quantum-behaved PSO) with
// resumable checkpoints.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qtherm/core.hpp"

namespace qtherm::control {

// ------------------------------ control sequence -----------------------------

// N segments of equal length t_max/N, three drive amplitudes (x, y, z) each.
// Segments are left-closed: the boundary time t_max/N belongs to segment 2.
struct ControlSequence {
    int n_segments{1};
    Eigen::MatrixXd amplitudes;  // N × 3, columns (D_x, D_y, D_z)
    double t_max{1.0};

    ControlSequence() = default;
    ControlSequence(int n, Eigen::MatrixXd amps, double t_max_)
        : n_segments(n), amplitudes(std::move(amps)), t_max(t_max_) {
        if (n_segments < 1) {
            throw std::invalid_argument("ControlSequence: need at least one segment");
        }
        if (t_max <= 0.0) {
            throw std::invalid_argument("ControlSequence: t_max must be > 0");
        }
        if (amplitudes.rows() != n_segments || amplitudes.cols() != 3) {
            throw std::invalid_argument("ControlSequence: amplitudes must be n_segments x 3");
        }
    }

    int segment_of(double t) const {
        return std::min(static_cast<int>(std::floor(t * n_segments / t_max)), n_segments - 1);
    }

    std::vector<double> boundaries() const {
        std::vector<double> b;
        for (int k = 1; k < n_segments; ++k) {
            b.push_back(t_max * k / n_segments);
        }
        return b;
    }
};

inline Eigen::Matrix2cd controlled_hamiltonian(double omega0, const ControlSequence& cs,
                                               double t) {
    if (t < 0.0 || t > cs.t_max) {
        throw std::invalid_argument("controlled_hamiltonian: t outside control window");
    }
    const int k = cs.segment_of(t);
    Eigen::Matrix2cd h = 0.5 * omega0 * pauli_z();
    h += 0.5 * cs.amplitudes(k, 0) * pauli_x();
    h += 0.5 * cs.amplitudes(k, 1) * pauli_y();
    h += 0.5 * cs.amplitudes(k, 2) * pauli_z();
    return h;
}

// Flat parameter vector (D_x^1, D_y^1, D_z^1, ..., D_x^N, D_y^N, D_z^N).
inline ControlSequence decode_control(const Eigen::VectorXd& x, double t_max) {
    if (x.size() % 3 != 0 || x.size() == 0) {
        throw std::invalid_argument("decode_control: parameter count must be 3 x segments");
    }
    const int n = static_cast<int>(x.size() / 3);
    Eigen::MatrixXd amps(n, 3);
    for (int k = 0; k < n; ++k) {
        amps(k, 0) = x[3 * k];
        amps(k, 1) = x[3 * k + 1];
        amps(k, 2) = x[3 * k + 2];
    }
    return ControlSequence(n, std::move(amps), t_max);
}

// ------------------------------- fitness weights ------------------------------

// Linear weights w_j = (j+1)/N_t; the late samples count most.
struct FitnessSpec {
    int n_time_samples{64};

    std::vector<double> weights() const {
        std::vector<double> w(static_cast<std::size_t>(n_time_samples));
        for (int j = 0; j < n_time_samples; ++j) {
            w[static_cast<std::size_t>(j)] = static_cast<double>(j + 1) / n_time_samples;
        }
        return w;
    }
};

inline double weighted_fitness(const std::vector<double>& qsnr_samples, const FitnessSpec& spec) {
    if (static_cast<int>(qsnr_samples.size()) != spec.n_time_samples) {
        throw std::invalid_argument("weighted_fitness: sample count does not match spec");
    }
    double acc = 0.0;
    for (int j = 0; j < spec.n_time_samples; ++j) {
        acc += (static_cast<double>(j + 1) / spec.n_time_samples) *
               qsnr_samples[static_cast<std::size_t>(j)];
    }
    return acc / spec.n_time_samples;
}

// ------------------------------- counter-based RNG ----------------------------

// splitmix64 stream keyed by (seed, iteration, particle); reproducible
// regardless of evaluation order.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t iteration, std::uint64_t particle) {
        state_ = mix(mix(mix(0x9e3779b97f4a7c15ULL ^ seed) + iteration) + particle);
    }

    // uniform in (0, 1]
    double next_unit() {
        state_ += 0x9e3779b97f4a7c15ULL;
        const std::uint64_t z = mix(state_);
        return (static_cast<double>(z >> 11) + 1.0) * 0x1.0p-53;
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

// ---------------------------------- swarm state -------------------------------

struct PsoParams {
    double inertia{0.7};
    double cognitive{1.5};
    double social{1.5};
};

struct QpsoParams {
    double alpha_start{1.0};
    double alpha_end{0.5};
};

struct Swarm {
    Eigen::MatrixXd positions;   // M × D
    Eigen::MatrixXd velocities;  // M × D, used by PSO only
    Eigen::MatrixXd personal_best;
    Eigen::VectorXd personal_best_fitness;
    Eigen::VectorXd global_best;
    double global_best_fitness{0.0};
    std::uint64_t seed{0};
    int iteration{0};

    int size() const { return static_cast<int>(positions.rows()); }
    int dimension() const { return static_cast<int>(positions.cols()); }

    Eigen::VectorXd mean_best() const {
        return personal_best.colwise().mean().transpose();
    }
};

using FitnessFn = std::function<double(const Eigen::VectorXd&)>;
// Evaluates fitness for a batch of positions (rows); hook for parallel fitness.
using BatchEval = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

inline BatchEval serial_batch(FitnessFn fitness) {
    return [fitness = std::move(fitness)](const Eigen::MatrixXd& positions) {
        Eigen::VectorXd values(positions.rows());
        for (Eigen::Index i = 0; i < positions.rows(); ++i) {
            values[i] = fitness(positions.row(i).transpose());
        }
        return values;
    };
}

inline Swarm init_swarm(int particles, int dimension, double bound, std::uint64_t seed,
                        const BatchEval& evaluate) {
    if (particles < 1 || dimension < 1) {
        throw std::invalid_argument("init_swarm: need at least one particle and one dimension");
    }
    Swarm s;
    s.seed = seed;
    s.positions.resize(particles, dimension);
    s.velocities = Eigen::MatrixXd::Zero(particles, dimension);
    for (int i = 0; i < particles; ++i) {
        CounterRng rng(seed, 0, static_cast<std::uint64_t>(i));
        for (int d = 0; d < dimension; ++d) {
            s.positions(i, d) = bound * (2.0 * rng.next_unit() - 1.0);
        }
    }
    s.personal_best = s.positions;
    s.personal_best_fitness = evaluate(s.positions);
    Eigen::Index best;
    s.global_best_fitness = s.personal_best_fitness.maxCoeff(&best);
    s.global_best = s.personal_best.row(best).transpose();
    s.iteration = 1;  // init draws used stream 0
    return s;
}

// ------------------------------- update kernels -------------------------------
// Single-particle updates with the random draws passed in; the step drivers
// feed them from CounterRng, tests can inject deterministic values.

inline void pso_update(Eigen::Ref<Eigen::VectorXd> position, Eigen::Ref<Eigen::VectorXd> velocity,
                       const Eigen::VectorXd& personal, const Eigen::VectorXd& global,
                       const PsoParams& p, const Eigen::VectorXd& r1, const Eigen::VectorXd& r2,
                       double bound) {
    velocity = p.inertia * velocity +
               p.cognitive * r1.cwiseProduct(personal - position) +
               p.social * r2.cwiseProduct(global - position);
    position += velocity;
    position = position.cwiseMax(-bound).cwiseMin(bound);
}

inline void qpso_update(Eigen::Ref<Eigen::VectorXd> position, const Eigen::VectorXd& personal,
                        const Eigen::VectorXd& mbest, double alpha, const Eigen::VectorXd& u,
                        const Eigen::VectorXd& sign, double bound) {
    for (Eigen::Index d = 0; d < position.size(); ++d) {
        const double spread = alpha * std::abs(mbest[d] - position[d]) * std::log(1.0 / u[d]);
        position[d] = personal[d] + sign[d] * spread;
    }
    position = position.cwiseMax(-bound).cwiseMin(bound);
}

inline void refresh_bests(Swarm& s, const Eigen::VectorXd& fitness) {
    for (int i = 0; i < s.size(); ++i) {
        if (fitness[i] > s.personal_best_fitness[i]) {
            s.personal_best_fitness[i] = fitness[i];
            s.personal_best.row(i) = s.positions.row(i);
        }
    }
    Eigen::Index best;
    const double f = s.personal_best_fitness.maxCoeff(&best);
    if (f > s.global_best_fitness) {
        s.global_best_fitness = f;
        s.global_best = s.personal_best.row(best).transpose();
    }
}

inline void pso_step(Swarm& s, const BatchEval& evaluate, double bound, const PsoParams& params) {
    const int dim = s.dimension();
    Eigen::VectorXd r1(dim), r2(dim), pos(dim), vel(dim);
    for (int i = 0; i < s.size(); ++i) {
        CounterRng rng(s.seed, static_cast<std::uint64_t>(s.iteration),
                       static_cast<std::uint64_t>(i));
        for (int d = 0; d < dim; ++d) r1[d] = rng.next_unit();
        for (int d = 0; d < dim; ++d) r2[d] = rng.next_unit();
        pos = s.positions.row(i).transpose();
        vel = s.velocities.row(i).transpose();
        pso_update(pos, vel, s.personal_best.row(i).transpose(), s.global_best, params, r1, r2,
                   bound);
        s.positions.row(i) = pos.transpose();
        s.velocities.row(i) = vel.transpose();
    }
    refresh_bests(s, evaluate(s.positions));
    ++s.iteration;
}

inline void qpso_step(Swarm& s, const BatchEval& evaluate, double bound, double alpha) {
    if (alpha < 0.0 || alpha > 1.0) {
        throw std::invalid_argument("qpso_step: alpha must lie in [0, 1]");
    }
    const int dim = s.dimension();
    const Eigen::VectorXd mbest = s.mean_best();
    Eigen::VectorXd u(dim), sign(dim), pos(dim);
    for (int i = 0; i < s.size(); ++i) {
        CounterRng rng(s.seed, static_cast<std::uint64_t>(s.iteration),
                       static_cast<std::uint64_t>(i));
        for (int d = 0; d < dim; ++d) u[d] = rng.next_unit();
        for (int d = 0; d < dim; ++d) sign[d] = rng.next_unit() <= 0.5 ? -1.0 : 1.0;
        pos = s.positions.row(i).transpose();
        qpso_update(pos, s.personal_best.row(i).transpose(), mbest, alpha, u, sign, bound);
        s.positions.row(i) = pos.transpose();
    }
    refresh_bests(s, evaluate(s.positions));
    ++s.iteration;
}

// --------------------------------- optimization -------------------------------

struct OptimizeParams {
    enum class Algorithm { pso, qpso };

    Algorithm algorithm{Algorithm::qpso};
    int particles{20};
    int iterations{150};
    int dimension{3};
    double bound{1.0};
    std::uint64_t seed{0};
    PsoParams pso{};
    QpsoParams qpso{};
    std::string checkpoint_path{};  // empty disables checkpointing

    double alpha_at(int iteration) const {
        if (iterations <= 1) return qpso.alpha_end;
        const double f = static_cast<double>(iteration) / (iterations - 1);
        return qpso.alpha_start + f * (qpso.alpha_end - qpso.alpha_start);
    }

    nlohmann::json fingerprint() const {
        return nlohmann::json{{"algorithm", algorithm == Algorithm::pso ? "pso" : "qpso"},
                              {"particles", particles},
                              {"iterations", iterations},
                              {"dimension", dimension},
                              {"bound", bound},
                              {"seed", seed},
                              {"inertia", pso.inertia},
                              {"cognitive", pso.cognitive},
                              {"social", pso.social},
                              {"alpha_start", qpso.alpha_start},
                              {"alpha_end", qpso.alpha_end}};
    }
};

struct OptimizeResult {
    Eigen::VectorXd best;
    double best_fitness{0.0};
    std::vector<double> history;  // global-best fitness after init and each iteration
    Swarm swarm;
};

namespace detail {

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    const auto rows = j.size();
    const auto cols = rows ? j.at(0).size() : 0;
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t k = 0; k < cols; ++k) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j.at(i).at(k);
        }
    }
    return m;
}

inline nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j.at(i);
    return v;
}

}  // namespace detail

inline void write_checkpoint(const std::string& path, const OptimizeParams& params,
                             const Swarm& s, const std::vector<double>& history) {
    nlohmann::json j{{"format", "qtherm-swarm-checkpoint"},
                     {"version", 1},
                     {"params", params.fingerprint()},
                     {"iteration", s.iteration},
                     {"positions", detail::matrix_to_json(s.positions)},
                     {"velocities", detail::matrix_to_json(s.velocities)},
                     {"personal_best", detail::matrix_to_json(s.personal_best)},
                     {"personal_best_fitness", detail::vector_to_json(s.personal_best_fitness)},
                     {"global_best", detail::vector_to_json(s.global_best)},
                     {"global_best_fitness", s.global_best_fitness},
                     {"history", history}};
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) {
            throw std::runtime_error("write_checkpoint: cannot open " + tmp);
        }
        out << j.dump(2) << '\n';
    }
    std::rename(tmp.c_str(), path.c_str());
}

struct Checkpoint {
    Swarm swarm;
    std::vector<double> history;
};

inline Checkpoint read_checkpoint(const std::string& path, const OptimizeParams& params) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("read_checkpoint: cannot open " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("read_checkpoint: corrupt checkpoint: " + std::string(e.what()));
    }
    if (j.value("format", "") != "qtherm-swarm-checkpoint") {
        throw std::runtime_error("read_checkpoint: not a swarm checkpoint file");
    }
    if (j.at("params") != params.fingerprint()) {
        throw std::runtime_error(
            "read_checkpoint: checkpoint was produced with a different configuration");
    }
    Checkpoint cp;
    cp.swarm.positions = detail::matrix_from_json(j.at("positions"));
    cp.swarm.velocities = detail::matrix_from_json(j.at("velocities"));
    cp.swarm.personal_best = detail::matrix_from_json(j.at("personal_best"));
    cp.swarm.personal_best_fitness = detail::vector_from_json(j.at("personal_best_fitness"));
    cp.swarm.global_best = detail::vector_from_json(j.at("global_best"));
    cp.swarm.global_best_fitness = j.at("global_best_fitness");
    cp.swarm.iteration = j.at("iteration");
    cp.swarm.seed = params.seed;
    cp.history = j.at("history").get<std::vector<double>>();
    return cp;
}

// Run (or resume) a swarm optimization of `evaluate`, maximizing fitness.
inline OptimizeResult optimize(const BatchEval& evaluate, const OptimizeParams& params,
                               const Checkpoint* resume = nullptr) {
    OptimizeResult result;
    Swarm s;
    if (resume) {
        s = resume->swarm;
        result.history = resume->history;
    } else {
        s = init_swarm(params.particles, params.dimension, params.bound, params.seed, evaluate);
        result.history.push_back(s.global_best_fitness);
        if (!params.checkpoint_path.empty()) {
            write_checkpoint(params.checkpoint_path, params, s, result.history);
        }
    }

    while (s.iteration <= params.iterations) {
        if (params.algorithm == OptimizeParams::Algorithm::pso) {
            pso_step(s, evaluate, params.bound, params.pso);
        } else {
            qpso_step(s, evaluate, params.bound, params.alpha_at(s.iteration - 1));
        }
        result.history.push_back(s.global_best_fitness);
        if (!params.checkpoint_path.empty()) {
            write_checkpoint(params.checkpoint_path, params, s, result.history);
        }
    }

    result.best = s.global_best;
    result.best_fitness = s.global_best_fitness;
    result.swarm = std::move(s);
    return result;
}

}  // namespace qtherm::control
