#include "wga/lanczos.hpp"

#include "wga/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace wga {

namespace {

Eigen::VectorXd seeded_vector(Eigen::Index n, std::mt19937_64& rng) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        // 53 random bits mapped to [-1, 1); independent of the std distributions.
        v(i) = static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
    }
    return v;
}

// Two passes of classical Gram-Schmidt against the first k columns.
void reorthogonalize(const Eigen::MatrixXd& Q, Eigen::Index k, Eigen::VectorXd& w) {
    for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXd h = Q.leftCols(k).transpose() * w;
        w.noalias() -= Q.leftCols(k) * h;
    }
}

}  // namespace

LanczosResult largest_eigenpairs(const Eigen::SparseMatrix<double>& A, double sigma,
                                 const LanczosOptions& opts) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n || n == 0) {
        throw InvalidParameter("lanczos needs a non-empty square matrix");
    }
    if (opts.n_eigs < 1 || opts.n_eigs > n) {
        throw InvalidParameter("lanczos n_eigs out of range");
    }
    const Eigen::Index max_dim = std::min<Eigen::Index>(std::max(opts.max_dim, opts.n_eigs + 2), n);

    // sigma*I - A, positive definite when sigma exceeds the spectrum.
    // setShift would scale only the diagonal, so the shifted matrix is formed explicitly.
    Eigen::SparseMatrix<double> shifted = -A;
    for (Eigen::Index i = 0; i < n; ++i) {
        shifted.coeffRef(i, i) += sigma;
    }
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    ldlt.compute(shifted);
    if (ldlt.info() != Eigen::Success) {
        throw SolverError("shift-invert factorisation failed", 0.0);
    }
    if ((ldlt.vectorD().array() <= 0.0).any()) {
        throw SolverError("shift lies inside the spectrum; shifted operator is not definite",
                          ldlt.vectorD().minCoeff());
    }

    std::mt19937_64 rng(opts.seed);
    Eigen::MatrixXd Q(n, max_dim);
    std::vector<double> alpha;
    std::vector<double> beta;  // beta[j] couples q_j and q_{j+1}

    Eigen::VectorXd q = seeded_vector(n, rng);
    q.normalize();
    Q.col(0) = q;

    // Ritz values above this are wanted; the inverted spectrum is 1/(sigma - lambda).
    const double theta_floor = opts.floor ? 1.0 / (sigma - *opts.floor) : -1.0;

    Eigen::VectorXd ritz;
    Eigen::MatrixXd ritz_vecs;
    double worst = 0.0;
    for (Eigen::Index j = 0; j < max_dim; ++j) {
        Eigen::VectorXd w = ldlt.solve(Q.col(j));
        const double a = Q.col(j).dot(w);
        alpha.push_back(a);
        reorthogonalize(Q, j + 1, w);
        double b = w.norm();

        const Eigen::Index m = j + 1;
        const bool last = (m == max_dim);
        const bool check = m >= opts.n_eigs && (m % opts.check_every == 0 || last || b == 0.0);
        if (check) {
            Eigen::VectorXd d = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
            Eigen::VectorXd e(std::max<Eigen::Index>(m - 1, 0));
            for (Eigen::Index k = 0; k + 1 < m; ++k) {
                e(k) = beta[static_cast<std::size_t>(k)];
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
            if (m == 1) {
                tri.compute(d.asDiagonal().toDenseMatrix());
            } else {
                tri.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
            }
            // Ritz values ascending; the wanted ones are the last n_eigs.
            auto rel_res = [&](Eigen::Index idx) {
                return std::abs(b * tri.eigenvectors()(m - 1, idx)) /
                       std::abs(tri.eigenvalues()(idx));
            };
            int wanted = 0;
            while (wanted < opts.n_eigs && tri.eigenvalues()(m - 1 - wanted) > theta_floor) {
                ++wanted;
            }
            worst = 0.0;
            for (int k = 0; k < wanted; ++k) {
                worst = std::max(worst, rel_res(m - 1 - k));
            }
            bool done = worst <= opts.tol;
            if (done && wanted < opts.n_eigs && m > wanted) {
                // The first pair below the floor must be settled too.
                done = rel_res(m - 1 - wanted) <= std::sqrt(opts.tol);
            }
            done = done || b == 0.0 || (last && worst <= opts.tol && opts.floor.has_value());
            if (done && wanted > 0) {
                ritz.resize(wanted);
                ritz_vecs.resize(n, wanted);
                for (int k = 0; k < wanted; ++k) {
                    const Eigen::Index idx = m - 1 - k;
                    ritz(k) = tri.eigenvalues()(idx);
                    ritz_vecs.col(k) = Q.leftCols(m) * tri.eigenvectors().col(idx);
                }
                break;
            }
            if (done) {
                break;  // nothing above the floor
            }
        }
        if (last) {
            throw SolverError("lanczos reached the Krylov cap of " + std::to_string(max_dim) +
                                  " without converging",
                              worst);
        }
        if (b <= 1e-14 * std::abs(a)) {
            // Invariant subspace found; continue from a fresh direction.
            w = seeded_vector(n, rng);
            reorthogonalize(Q, j + 1, w);
            w.normalize();
            b = 0.0;
            Q.col(j + 1) = w;
        } else {
            Q.col(j + 1) = w / b;
        }
        beta.push_back(b);
    }

    LanczosResult out;
    out.krylov_dim = static_cast<int>(alpha.size());
    const auto found = static_cast<int>(ritz.size());
    out.values.resize(found);
    out.vectors.resize(n, found);
    double max_res = 0.0;
    for (int k = 0; k < found; ++k) {
        const double lambda = sigma - 1.0 / ritz(k);
        Eigen::VectorXd v = ritz_vecs.col(k);
        v.normalize();
        out.values(k) = lambda;
        out.vectors.col(k) = v;
        const double res = (A * v - lambda * v).norm() / std::max(std::abs(lambda), 1e-300);
        max_res = std::max(max_res, res);
    }
    out.max_residual = max_res;
    return out;
}

}  // namespace wga
