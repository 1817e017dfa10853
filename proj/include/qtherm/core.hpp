// core.hpp — shared linear-algebra helpers: Pauli operators, state checks,
// Gibbs states, trace norms.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace qtherm {

using cxd = std::complex<double>;

inline constexpr cxd ci{0.0, 1.0};

// --------------------------------- operators ---------------------------------

inline Eigen::Matrix2cd pauli_x() {
    Eigen::Matrix2cd m;
    m << 0, 1, 1, 0;
    return m;
}

inline Eigen::Matrix2cd pauli_y() {
    Eigen::Matrix2cd m;
    m << 0, -ci, ci, 0;
    return m;
}

inline Eigen::Matrix2cd pauli_z() {
    Eigen::Matrix2cd m;
    m << 1, 0, 0, -1;
    return m;
}

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

inline Eigen::MatrixXcd commutator(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    return a * b - b * a;
}

inline Eigen::MatrixXcd anticommutator(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    return a * b + b * a;
}

// ----------------------------------- checks ----------------------------------

inline bool is_hermitian(const Eigen::MatrixXcd& m, double tol = 1e-12) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

inline void require_square(const Eigen::MatrixXcd& m, const std::string& what) {
    if (m.rows() != m.cols()) {
        throw std::invalid_argument(what + ": matrix must be square");
    }
}

inline void require_hermitian(const Eigen::MatrixXcd& m, const std::string& what,
                              double tol = 1e-12) {
    require_square(m, what);
    if (!is_hermitian(m, tol)) {
        throw std::invalid_argument(what + ": matrix must be Hermitian");
    }
}

// Hermitian, positive semidefinite, unit trace
inline void require_density_matrix(const Eigen::MatrixXcd& rho, const std::string& what,
                                   double tol = 1e-12) {
    require_hermitian(rho, what, tol);
    if (std::abs(rho.trace() - cxd{1.0, 0.0}) > std::max(tol, 1e-10)) {
        throw std::invalid_argument(what + ": density matrix must have unit trace");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -std::max(tol, 1e-10)) {
        throw std::invalid_argument(what + ": density matrix must be positive semidefinite");
    }
}

// ----------------------------------- states ----------------------------------

inline Eigen::MatrixXcd pure_state(const Eigen::VectorXcd& psi) {
    const double n2 = psi.squaredNorm();
    if (n2 <= 0.0) {
        throw std::invalid_argument("pure_state: zero vector");
    }
    return psi * psi.adjoint() / n2;
}

inline Eigen::MatrixXcd gibbs_state(const Eigen::MatrixXcd& hamiltonian, double temperature) {
    require_hermitian(hamiltonian, "gibbs_state");
    if (temperature <= 0.0) {
        throw std::invalid_argument("gibbs_state: temperature must be positive");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(hamiltonian);
    const Eigen::VectorXd eps = solver.eigenvalues();
    // subtract the ground energy before exponentiating
    const Eigen::VectorXd w = (-(eps.array() - eps.minCoeff()) / temperature).exp();
    const Eigen::VectorXd p = w / w.sum();
    return solver.eigenvectors() * p.asDiagonal() * solver.eigenvectors().adjoint();
}

// ----------------------------------- norms -----------------------------------

// Trace norm of a Hermitian matrix: sum of absolute eigenvalues
inline double trace_norm_hermitian(const Eigen::MatrixXcd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().sum();
}

// D(a, b) = ½ Tr|a − b|
inline double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument("trace_distance: dimension mismatch");
    }
    return 0.5 * trace_norm_hermitian(a - b);
}

inline double min_eigenvalue(const Eigen::MatrixXcd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

}  // namespace qtherm
