#include "wga/lattice.hpp"

#include "wga/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace wga {

void LatticeSpec::validate() const {
    if (n_sites < 2) {
        throw InvalidSpec("lattice needs at least 2 sites, got " + std::to_string(n_sites));
    }
    if (!(beta > 0.0) || !std::isfinite(beta)) {
        throw InvalidSpec("coupling beta must be positive and finite");
    }
    if (!(delta > 0.0) || !std::isfinite(delta)) {
        throw InvalidSpec("defect ratio delta must be positive and finite");
    }
    if (!std::isfinite(alpha)) {
        throw InvalidSpec("on-site term alpha must be finite");
    }
}

LatticeSpec LatticeSpec::normalized() const {
    validate();
    return LatticeSpec{n_sites, 1.0, delta, alpha / beta};
}

TimeGrid::TimeGrid(std::vector<double> tau, std::optional<double> beta)
    : tau_(std::move(tau)), beta_(beta) {
    if (tau_.empty()) {
        throw InvalidParameter("time grid must contain at least one point");
    }
    if (!(tau_.front() >= 0.0)) {
        throw InvalidParameter("time grid must start at tau >= 0");
    }
    for (std::size_t i = 0; i < tau_.size(); ++i) {
        if (!std::isfinite(tau_[i])) {
            throw InvalidParameter("time grid contains a non-finite value");
        }
        if (i > 0 && !(tau_[i] > tau_[i - 1])) {
            throw InvalidParameter("time grid must be strictly increasing");
        }
    }
    if (beta_ && !(*beta_ > 0.0)) {
        throw InvalidParameter("attached coupling beta must be positive");
    }
}

TimeGrid TimeGrid::uniform(double tau_min, double tau_max, std::size_t n_points) {
    if (n_points == 0) {
        throw InvalidParameter("uniform grid needs at least one point");
    }
    if (n_points == 1) {
        return TimeGrid({tau_min});
    }
    if (!(tau_max > tau_min)) {
        throw InvalidParameter("uniform grid needs tau_max > tau_min");
    }
    std::vector<double> tau(n_points);
    const double step = (tau_max - tau_min) / static_cast<double>(n_points - 1);
    for (std::size_t i = 0; i < n_points; ++i) {
        tau[i] = tau_min + step * static_cast<double>(i);
    }
    tau.back() = tau_max;
    return TimeGrid(std::move(tau));
}

TimeGrid TimeGrid::with_beta(double beta) const { return TimeGrid(tau_, beta); }

std::vector<double> TimeGrid::z() const {
    if (!beta_) {
        throw InvalidParameter("time grid has no coupling attached; z is undefined");
    }
    std::vector<double> out(tau_.size());
    for (std::size_t i = 0; i < tau_.size(); ++i) {
        out[i] = tau_[i] / *beta_;
    }
    return out;
}

Eigen::MatrixXd TridiagonalOperator::dense() const {
    const auto n = static_cast<Eigen::Index>(diagonal.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        m(i, i) = diagonal[static_cast<std::size_t>(i)];
    }
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        m(i, i + 1) = m(i + 1, i) = off_diagonal[static_cast<std::size_t>(i)];
    }
    return m;
}

TridiagonalOperator build_hamiltonian(const LatticeSpec& spec) {
    spec.validate();
    TridiagonalOperator op;
    op.diagonal.assign(spec.n_sites, spec.alpha);
    op.off_diagonal.assign(spec.n_sites - 1, spec.beta);
    op.off_diagonal.front() = spec.beta0();
    return op;
}

StateVector initial_state(std::size_t n_sites) {
    if (n_sites < 1) {
        throw InvalidSpec("initial state needs at least one site");
    }
    StateVector psi = StateVector::Zero(static_cast<Eigen::Index>(n_sites));
    psi(0) = 1.0;
    return psi;
}

namespace {

void check_operator(const TridiagonalOperator& op) {
    if (op.diagonal.empty()) {
        throw InvalidSpec("operator is empty");
    }
    if (op.off_diagonal.size() + 1 != op.diagonal.size()) {
        throw InvalidSpec("off-diagonal length must be n_sites - 1");
    }
}

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> decompose(const TridiagonalOperator& op,
                                                         int options) {
    check_operator(op);
    const auto n = static_cast<Eigen::Index>(op.size());
    Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(op.diagonal.data(), n);
    Eigen::VectorXd sub(std::max<Eigen::Index>(n - 1, 0));
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        sub(i) = op.off_diagonal[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    if (n == 1) {
        solver.compute(diag.asDiagonal().toDenseMatrix(), options);
    } else {
        solver.computeFromTridiagonal(diag, sub, options);
    }
    if (solver.info() != Eigen::Success) {
        throw NumericalError("tridiagonal eigensolver did not converge", static_cast<long>(n));
    }
    return solver;
}

}  // namespace

Eigen::VectorXd spectrum(const TridiagonalOperator& op) {
    return decompose(op, Eigen::EigenvaluesOnly).eigenvalues();
}

Propagator::Propagator(const TridiagonalOperator& op, const StateVector& state0) {
    if (state0.size() != static_cast<Eigen::Index>(op.size())) {
        throw InvalidSpec("state dimension " + std::to_string(state0.size()) +
                          " does not match operator size " + std::to_string(op.size()));
    }
    auto solver = decompose(op, Eigen::ComputeEigenvectors);
    energies_ = solver.eigenvalues();
    modes_ = solver.eigenvectors();
    weights_ = modes_.transpose() * state0;
    state0_ = state0;
}

StateVector Propagator::state_at(double t) const {
    if (t == 0.0) {
        return state0_;
    }
    Eigen::VectorXcd phased(weights_.size());
    for (Eigen::Index k = 0; k < weights_.size(); ++k) {
        phased(k) = weights_(k) * std::polar(1.0, -energies_(k) * t);
    }
    return modes_ * phased;
}

std::complex<double> Propagator::amplitude_at(std::size_t site, double t) const {
    if (t == 0.0) {
        return state0_(static_cast<Eigen::Index>(site));
    }
    const auto row = modes_.row(static_cast<Eigen::Index>(site));
    std::complex<double> acc{0.0, 0.0};
    for (Eigen::Index k = 0; k < weights_.size(); ++k) {
        acc += row(k) * weights_(k) * std::polar(1.0, -energies_(k) * t);
    }
    return acc;
}

AmplitudeTrace Propagator::trace(const TimeGrid& grid) const {
    AmplitudeTrace out{grid, Eigen::MatrixXcd(static_cast<Eigen::Index>(grid.size()),
                                              static_cast<Eigen::Index>(size()))};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out.amplitudes.row(static_cast<Eigen::Index>(i)) = state_at(grid[i]).transpose();
    }
    return out;
}

AmplitudeTrace propagate(const TridiagonalOperator& op, const StateVector& state0,
                         const TimeGrid& grid) {
    return Propagator(op, state0).trace(grid);
}

Eigen::MatrixXd site_probabilities(const AmplitudeTrace& trace) {
    return trace.amplitudes.cwiseAbs2();
}

std::vector<std::optional<double>> effective_decay_rate(const std::vector<double>& prob0,
                                                        const TimeGrid& grid) {
    if (prob0.size() != grid.size()) {
        throw InvalidParameter("probability series and time grid differ in length");
    }
    std::vector<std::optional<double>> out(prob0.size());
    for (std::size_t i = 0; i < prob0.size(); ++i) {
        const double tau = grid[i];
        const double p = prob0[i];
        if (tau == 0.0 || !(p > 1e-30) || !std::isfinite(p)) {
            continue;
        }
        out[i] = -std::log(p) / tau;
    }
    return out;
}

}  // namespace wga
