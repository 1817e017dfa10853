// system.hpp — finite-dimensional open-system model: base Hamiltonian,
// bath-coupling operator, initial state, optional piecewise drive.

#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <utility>

#include "qtherm/control.hpp"
#include "qtherm/core.hpp"

namespace qtherm {

struct SystemModel {
    int dim{2};
    Eigen::MatrixXcd h_base;       // time-independent part of H_S
    Eigen::MatrixXcd coupling_op;  // S in H_I = S ⊗ B
    Eigen::MatrixXcd initial_state;
    std::optional<control::ControlSequence> drive;
    double omega0{1.0};

    SystemModel() = default;

    SystemModel(Eigen::MatrixXcd h, Eigen::MatrixXcd coupling, Eigen::MatrixXcd initial,
                double omega0_ = 1.0)
        : h_base(std::move(h)),
          coupling_op(std::move(coupling)),
          initial_state(std::move(initial)),
          omega0(omega0_) {
        require_hermitian(h_base, "SystemModel h_base");
        require_hermitian(coupling_op, "SystemModel coupling_op");
        require_density_matrix(initial_state, "SystemModel initial_state");
        dim = static_cast<int>(h_base.rows());
        if (coupling_op.rows() != dim || initial_state.rows() != dim) {
            throw std::invalid_argument("SystemModel: dimension mismatch");
        }
        if (omega0 <= 0.0) {
            throw std::invalid_argument("SystemModel: omega0 must be > 0");
        }
    }

    bool time_dependent() const { return drive.has_value(); }

    // H_S(t); with a drive present, t must lie inside the control window.
    Eigen::MatrixXcd hamiltonian(double t) const {
        if (!drive) return h_base;
        return control::controlled_hamiltonian(omega0, *drive, t);
    }
};

// H_S = ω0/2 σ_z, S = σ_x
inline SystemModel build_single_qubit(double omega0, const Eigen::MatrixXcd& initial) {
    if (initial.rows() != 2 || initial.cols() != 2) {
        throw std::invalid_argument("build_single_qubit: initial state must be 2x2");
    }
    return SystemModel(0.5 * omega0 * pauli_z(), pauli_x(), initial, omega0);
}

// H_S = ω0/2 (σ_z ⊗ 1 + 1 ⊗ σ_z) + g/2 (σ_x ⊗ σ_x + σ_y ⊗ σ_y), S = σ_x ⊗ 1 + 1 ⊗ σ_x
inline SystemModel build_two_qubit(double omega0, double g, const Eigen::MatrixXcd& initial) {
    if (initial.rows() != 4 || initial.cols() != 4) {
        throw std::invalid_argument("build_two_qubit: initial state must be 4x4");
    }
    const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
    Eigen::MatrixXcd h = 0.5 * omega0 * (kron(pauli_z(), id) + kron(id, pauli_z()));
    h += 0.5 * g * (kron(pauli_x(), pauli_x()) + kron(pauli_y(), pauli_y()));
    Eigen::MatrixXcd coupling = kron(pauli_x(), id) + kron(id, pauli_x());
    return SystemModel(std::move(h), std::move(coupling), initial, omega0);
}

}  // namespace qtherm
