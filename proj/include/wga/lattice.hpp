// Boundary-defect tight-binding chain: Hamiltonian, exact
// propagation by eigendecomposition, site probabilities and decay rates.
//
// Conventions: a chain has sites 0..n-1, uniform on-site term alpha and
// hopping [delta*beta, beta, beta, ...]. Dynamics are usually run in the
// dimensionless frame tau = beta*z (beta = 1); LatticeSpec::normalized()
// produces that frame from a spec carrying physical units (1/cm).

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

namespace wga {

using StateVector = Eigen::VectorXcd;

struct LatticeSpec {
    std::size_t n_sites{2};
    double beta{1.0};   // bulk coupling (1/cm, or 1 in the dimensionless frame)
    double delta{1.0};  // defect ratio beta0 / beta
    double alpha{0.0};  // uniform on-site term

    double beta0() const noexcept { return delta * beta; }

    // Throws InvalidSpec unless n_sites >= 2, beta > 0, delta > 0.
    void validate() const;

    // Same chain measured in units of beta: beta -> 1, alpha -> alpha/beta.
    LatticeSpec normalized() const;
};

// Strictly increasing sample times, tau >= 0. When a coupling is attached the
// matching propagation distances z = tau / beta (cm) are available.
class TimeGrid {
public:
    explicit TimeGrid(std::vector<double> tau, std::optional<double> beta = std::nullopt);

    // n_points samples evenly spaced on [tau_min, tau_max] (both included).
    static TimeGrid uniform(double tau_min, double tau_max, std::size_t n_points);

    const std::vector<double>& tau() const noexcept { return tau_; }
    std::size_t size() const noexcept { return tau_.size(); }
    double operator[](std::size_t i) const { return tau_[i]; }
    double front() const { return tau_.front(); }
    double back() const { return tau_.back(); }

    std::optional<double> beta() const noexcept { return beta_; }
    TimeGrid with_beta(double beta) const;
    // Propagation distances in cm; throws InvalidParameter without a beta.
    std::vector<double> z() const;

private:
    std::vector<double> tau_;
    std::optional<double> beta_;
};

struct TridiagonalOperator {
    std::vector<double> diagonal;
    std::vector<double> off_diagonal;

    std::size_t size() const noexcept { return diagonal.size(); }
    Eigen::MatrixXd dense() const;
};

struct AmplitudeTrace {
    TimeGrid grid;
    Eigen::MatrixXcd amplitudes;  // rows: time, cols: site
};

TridiagonalOperator build_hamiltonian(const LatticeSpec& spec);

StateVector initial_state(std::size_t n_sites);

// Eigenvalues of the operator in ascending order.
Eigen::VectorXd spectrum(const TridiagonalOperator& op);

// Exact evolution exp(-i H t) of a fixed initial state, from one full
// eigendecomposition. Times are in the reciprocal units of the operator.
class Propagator {
public:
    Propagator(const TridiagonalOperator& op, const StateVector& state0);

    std::size_t size() const noexcept { return static_cast<std::size_t>(energies_.size()); }
    const Eigen::VectorXd& energies() const noexcept { return energies_; }

    StateVector state_at(double t) const;
    std::complex<double> amplitude_at(std::size_t site, double t) const;
    AmplitudeTrace trace(const TimeGrid& grid) const;

private:
    Eigen::VectorXd energies_;
    Eigen::MatrixXd modes_;           // columns are eigenvectors
    Eigen::VectorXcd weights_;        // modes^T * state0
    StateVector state0_;
};

AmplitudeTrace propagate(const TridiagonalOperator& op, const StateVector& state0,
                         const TimeGrid& grid);

Eigen::MatrixXd site_probabilities(const AmplitudeTrace& trace);

// gamma_eff(tau) = -ln(p0)/tau. Missing where tau == 0 or p0 <= 1e-30.
std::vector<std::optional<double>> effective_decay_rate(const std::vector<double>& prob0,
                                                        const TimeGrid& grid);

}  // namespace wga
