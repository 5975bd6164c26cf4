// Shift-invert Lanczos for the top of a sparse symmetric spectrum

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <optional>

namespace wga {

struct LanczosOptions {
    int n_eigs{1};
    int max_dim{240};        // Krylov basis cap
    int check_every{4};
    double tol{1e-12};       // relative Ritz residual in the inverted spectrum
    std::uint64_t seed{0x5eed2025u};
    // Eigenvalues at or below floor are not wanted. Iteration stops once the
    // Ritz pairs above it have converged and the next one down has too.
    std::optional<double> floor{};
};

struct LanczosResult {
    Eigen::VectorXd values;   // descending; fewer than n_eigs when a floor cuts them
    Eigen::MatrixXd vectors;  // orthonormal columns (Euclidean)
    int krylov_dim{0};
    double max_residual{0.0};  // max ||A v - lambda v|| / |lambda|
};

// n_eigs largest eigenpairs of symmetric A. The shift must lie above the
// largest eigenvalue: sigma*I - A is factorised once (sparse LDL^T) and the
// Lanczos recurrence runs on its inverse with full reorthogonalisation,
// starting from a fixed-seed pseudo-random vector. Throws SolverError when
// the factorisation is not positive definite or the basis cap is reached
// before convergence.
LanczosResult largest_eigenpairs(const Eigen::SparseMatrix<double>& A, double sigma,
                                 const LanczosOptions& opts);

}  // namespace wga
