#include "wga/eme.hpp"
#include "wga/error.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace wga;

namespace {

constexpr double kLambda = 0.633;

RickerParams desk() { return RickerParams{3e-3, 4.0, 4.0, 1.457}; }

TransverseGrid square(double half, double step) {
    return TransverseGrid::covering(-half, half, -half, half, step, step);
}

// Intensity of the two-guide field in guide 1 as a function of z (cm).
double guide1_power(const ModeSet& ms, const ComplexField& in, const RealField& phi,
                    const WaveguideGeometry& geom, double z) {
    const auto f = propagate_eme(ms, in, {z});
    return extract_intensities(f[0], phi, geom, OverlapKind::coherent)[1];
}

}  // namespace

TEST_CASE("Ricker profile landmarks") {
    const auto p = desk();
    CHECK(p.index_at(0.0, 0.0) == doctest::Approx(p.n0 + p.delta_n).epsilon(1e-15));
    CHECK(p.index_at(p.sigma_x, 0.0) == doctest::Approx(p.n0 - p.delta_n * std::exp(-2.0)).epsilon(1e-15));
    CHECK(p.index_at(0.0, -p.sigma_y) == doctest::Approx(p.n0 - p.delta_n * std::exp(-2.0)).epsilon(1e-15));
    CHECK(std::abs(p.index_at(80.0, 0.0) - p.n0) < 1e-15);
    // Stationary point of the x cut at sigma_x.
    const double h = 1e-4;
    const double slope = (p.index_at(p.sigma_x + h, 0.0) - p.index_at(p.sigma_x - h, 0.0)) / (2 * h);
    CHECK(std::abs(slope) < 1e-10);

    const auto prof = ricker_profile(RickerParams{3e-3, 3.0, 5.0, 1.457}, square(20.0, 0.37), 1.0, -2.0);
    CHECK(prof.n.values.minCoeff() >= 1.457 - 3e-3 * std::exp(-2.0) - 1e-9);
    CHECK(prof.n.values.maxCoeff() <= 1.457 + 3e-3);
    CHECK_THROWS_AS((RickerParams{-1e-3, 4.0, 4.0, 1.457}).validate(), InvalidParameter);
}

TEST_CASE("array geometry and superposition") {
    const auto a3 = WaveguideGeometry::from_gaps(19.6, 27.1, 10);
    REQUIRE(a3.size() == 10);
    CHECK(a3.centers[1] - a3.centers[0] == doctest::Approx(19.6));
    for (std::size_t i = 2; i < 10; ++i) CHECK(a3.centers[i] - a3.centers[i - 1] == doctest::Approx(27.1));
    const auto a2 = WaveguideGeometry::from_gaps(27.1, 27.1, 10);
    for (std::size_t i = 1; i < 10; ++i) CHECK(a2.centers[i] - a2.centers[i - 1] == doctest::Approx(27.1));
    CHECK_THROWS_AS((WaveguideGeometry{{0.0, 0.0}}).validate(), InvalidParameter);

    const auto g = square(20.0, 0.5);
    const auto single = array_profile(desk(), WaveguideGeometry{{0.0}}, g);
    const auto direct = ricker_profile(desk(), g);
    CHECK((single.n.values - direct.n.values).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(array_profile(desk(), WaveguideGeometry{{15.0}}, g), GeometryError);

    const auto pair = array_profile(desk(), WaveguideGeometry{{-5.0, 5.0}}, g);
    const auto left = ricker_profile(desk(), g, -5.0), right = ricker_profile(desk(), g, 5.0);
    CHECK((pair.n.values.array() - (left.n.values + right.n.values).array() + 1.457).abs().maxCoeff() < 1e-15);
}

TEST_CASE("Helmholtz operator is symmetric") {
    const auto g = square(6.0, 1.0);
    const auto A = helmholtz_operator(ricker_profile(desk(), g), kLambda);
    const Eigen::MatrixXd d(A);
    CHECK((d - d.transpose()).cwiseAbs().maxCoeff() == 0.0);
    const double k0 = 2 * std::numbers::pi / kLambda;
    CHECK(d(0, 0) == doctest::Approx(-4.0 + k0 * k0 * std::pow(ricker_profile(desk(), g).n.values(0), 2)));
}

TEST_CASE("single desk guide") {
    const auto prof = ricker_profile(desk(), square(32.0, 0.5));
    const auto ms = solve_modes(prof, kLambda, 3);
    REQUIRE(ms.size() >= 1);
    CHECK(ms.n_eff[0] > 1.457);
    CHECK(ms.n_eff[0] < 1.457 + 3e-3);
    CHECK(ms.boundary_ratio < 1e-6);
    for (std::size_t i = 1; i < ms.size(); ++i) CHECK(ms.n_eff[i] < ms.n_eff[i - 1]);
    for (std::size_t i = 0; i < ms.size(); ++i) {
        for (std::size_t j = 0; j < ms.size(); ++j) {
            CHECK(std::abs(inner(ms.modes[i], ms.modes[j]) - (i == j ? 1.0 : 0.0)) < 1e-8);
        }
    }
    if (ms.size() > 1) CHECK(mode_fidelity(ms.modes[0], ms.modes[1]) < 1e-8);
    CHECK(ms.incomplete == (ms.size() < 3));

    // Independent dense solve on a coarse copy of the same problem.
    const auto coarse = ricker_profile(desk(), square(14.0, 1.0));
    const Eigen::MatrixXd A(helmholtz_operator(coarse, kLambda));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    const double k0 = 2 * std::numbers::pi / kLambda;
    const auto cs = solve_modes(coarse, kLambda, 1);
    CHECK(cs.n_eff[0] == doctest::Approx(std::sqrt(es.eigenvalues()(A.rows() - 1)) / k0).epsilon(1e-13));
}

TEST_CASE("guard enforcement on a cramped domain") {
    const auto prof = ricker_profile(desk(), TransverseGrid::covering(-13, 13, -13, 13, 1.0, 1.0));
    ModeSolverOptions o;
    o.enforce_guard = true;
    CHECK_THROWS_AS(solve_modes(prof, kLambda, 1, o), GeometryError);
    CHECK(solve_modes(prof, kLambda, 1).boundary_ratio > 1e-6);
}

TEST_CASE("two identical guides: supermode symmetry and inversion length") {
    const RickerParams p{2.5e-3, 3.0, 3.0, 1.457};
    const auto geom = WaveguideGeometry::from_gaps(27.1, 27.1, 2);
    const auto g = grid_for(geom, EmeGridSpec{});
    const auto ms = solve_modes(array_profile(p, geom, g), kLambda, 2);
    REQUIRE(ms.size() == 2);
    double even_err = 0.0, odd_err = 0.0;
    for (std::size_t iy = 0; iy < g.ny; ++iy) {
        for (std::size_t ix = 0; ix < g.nx; ++ix) {
            const std::size_t mx = g.nx - 1 - ix;
            even_err = std::max(even_err, std::abs(ms.modes[0].at(ix, iy) - ms.modes[0].at(mx, iy)));
            odd_err = std::max(odd_err, std::abs(ms.modes[1].at(ix, iy) + ms.modes[1].at(mx, iy)));
        }
    }
    CHECK(even_err < 1e-6);
    CHECK(odd_err < 1e-6);

    const double beta = coupling_from_splitting(ms.n_eff[0], ms.n_eff[1], kLambda);
    CHECK(beta > 0.0);
    const double zs = std::numbers::pi / (2 * beta);
    const auto phi = localized_mode(p, g, kLambda);
    const auto [wx, wy] = matched_waists(phi);
    const auto in = gaussian_input(geom, wx, wy, g);
    // Parabolic peak of guide-1 power on a +-10% bracket around z_s.
    const double h = 0.1 * zs;
    const double fm = guide1_power(ms, in, phi, geom, zs - h);
    const double f0 = guide1_power(ms, in, phi, geom, zs);
    const double fp = guide1_power(ms, in, phi, geom, zs + h);
    const double zpk = zs + h * 0.5 * (fm - fp) / (fm - 2 * f0 + fp);
    CHECK(std::abs(zpk / zs - 1.0) < 0.02);
    CHECK(f0 > 0.99);
}

TEST_CASE("coupling from splitting") {
    CHECK(coupling_from_splitting(1.4571, 1.4570, 0.633) == doctest::Approx(std::numbers::pi * 1e-4 / 0.633 * 1e4));
    CHECK(coupling_from_splitting(1.4570, 1.4571, 0.633) == coupling_from_splitting(1.4571, 1.4570, 0.633));
    CHECK_THROWS_AS(coupling_from_splitting(1.4571, 1.4570, -1.0), InvalidParameter);
}

TEST_CASE("expansion: projection, power conservation, input overlap") {
    const RickerParams p{2.5e-3, 3.0, 3.0, 1.457};
    const auto geom = WaveguideGeometry::from_gaps(20.0, 20.0, 3);
    const auto g = grid_for(geom, EmeGridSpec{1.0, 1.0, 60.0, 60.0});
    const auto ms = solve_modes(array_profile(p, geom, g), kLambda, 3);
    REQUIRE(ms.size() == 3);
    const auto phi = localized_mode(p, g, kLambda);
    const auto [wx, wy] = matched_waists(phi);
    const auto in = gaussian_input(geom, wx, wy, g);
    CHECK(norm(in) == doctest::Approx(1.0).epsilon(1e-14));
    std::size_t ipk = 0;
    in.values.cwiseAbs().maxCoeff(&ipk);
    CHECK(g.x(ipk % g.nx) == doctest::Approx(0.0).scale(1.0).epsilon(0.5 * g.dx));
    CHECK(std::abs(inner(to_complex(phi), in)) > 0.9);

    const auto a0 = modal_coefficients(ms, in);
    double p0 = 0.0;
    for (const auto& a : a0) p0 += std::norm(a);
    const auto fields = propagate_eme(ms, in, {0.0, 1.0, 7.3, 20.0});
    Eigen::VectorXcd proj = Eigen::VectorXcd::Zero(in.values.size());
    for (std::size_t k = 0; k < ms.size(); ++k) proj += a0[k] * ms.modes[k].values.cast<std::complex<double>>();
    CHECK((fields[0].values - proj).cwiseAbs().maxCoeff() < 1e-14);
    for (const auto& f : fields) {
        CHECK(norm(f) * norm(f) == doctest::Approx(p0).epsilon(1e-12));
        double pz = 0.0;
        for (const auto& a : modal_coefficients(ms, f)) pz += std::norm(a);
        CHECK(pz == doctest::Approx(p0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(propagate_eme(ms, in, {-1.0}), InvalidParameter);
}

TEST_CASE("intensity extraction localises well separated guides") {
    const RickerParams p = desk();
    const auto geom = WaveguideGeometry::from_gaps(20.0, 20.0, 3);  // gap = 5 sigma
    const auto g = grid_for(geom, EmeGridSpec{0.5, 0.5, 40.0, 40.0});
    const auto phi = localized_mode(p, g, kLambda);
    CHECK(norm(phi) == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t j = 0; j < 3; ++j) {
        const auto f = to_complex(shift_x(phi, geom.centers[j]));
        for (auto kind : {OverlapKind::intensity_product, OverlapKind::coherent}) {
            const auto w = extract_intensities(f, phi, geom, kind);
            double sum = 0.0;
            for (double v : w) sum += v;
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
            for (std::size_t i = 0; i < 3; ++i) {
                if (i == j) CHECK(w[i] > 0.999);
                else CHECK(w[i] < 1e-3);
            }
        }
    }
    ComplexField zero(g);
    CHECK_THROWS_AS(extract_intensities(zero, phi, geom), DegenerateInput);
}

TEST_CASE("shift is exact for grid-multiple offsets") {
    const auto g = square(10.0, 0.5);
    RealField f(g);
    for (std::size_t iy = 0; iy < g.ny; ++iy)
        for (std::size_t ix = 0; ix < g.nx; ++ix) f.at(ix, iy) = std::exp(-g.x(ix) * g.x(ix) / 4 - g.y(iy) * g.y(iy) / 9);
    const auto s = shift_x(f, 1.5);
    CHECK(s.at(13, 20) == f.at(10, 20));
    const auto half = shift_x(f, 0.25);
    const double x = g.x(20) - 0.25;
    CHECK(half.at(20, 20) == doctest::Approx(std::exp(-x * x / 4)).epsilon(1e-3));
}

TEST_CASE("mode fidelity") {
    const auto g = square(5.0, 1.0);
    RealField a(g), b(g);
    a.values.setZero();
    b.values.setZero();
    a.values(3) = 1.0;
    b.values(7) = 2.0;
    CHECK(mode_fidelity(a, a) == doctest::Approx(1.0));
    CHECK(mode_fidelity(a, b) == 0.0);
    b.values(3) = -1.0;
    CHECK(mode_fidelity(a, b) == doctest::Approx(0.2));
    CHECK(mode_fidelity(to_complex(a), to_complex(a)) == doctest::Approx(1.0));
    CHECK_THROWS_AS(mode_fidelity(a, RealField(g)), DegenerateInput);
}

TEST_CASE("index reconstruction") {
    const auto p = desk();
    const auto g = square(20.0, 0.25);
    const auto ms = solve_modes(ricker_profile(p, g), kLambda, 1);
    const auto r = reconstruct_index(ms.modes[0], ms.n_eff[0], kLambda, 0.05);
    const std::size_t c = g.nx / 2;
    REQUIRE(r.valid[g.index(c, c)]);
    CHECK(std::abs(r.profile.n.at(c, c) - (p.n0 + p.delta_n)) / (p.n0 + p.delta_n) < 0.01);
    // Discrete inversion is exact up to the stencil.
    CHECK(r.profile.n.at(c, c) == doctest::Approx(p.n0 + p.delta_n).epsilon(1e-6));
    CHECK(r.negative_radicand == 0);
    CHECK(r.valid_count > 100);

    const auto none = reconstruct_index(ms.modes[0], ms.n_eff[0], kLambda, 1.0);
    CHECK(none.valid_count == 0);
    for (double v : none.profile.n.values) CHECK(std::isnan(v));
    CHECK_THROWS_AS(reconstruct_index(ms.modes[0], ms.n_eff[0], kLambda, 0.0), InvalidParameter);
}

TEST_CASE("Ricker fit round trip") {
    const RickerParams truth{3e-3, 4.0, 4.0, 1.457};
    const auto g = square(20.0, 0.25);
    const auto clean = solve_modes(ricker_profile(truth, g, 0.3, -0.2), kLambda, 1).modes[0];

    FitOptions exact;
    exact.smooth_cuts = false;
    const auto f = fit_ricker(clean, kLambda, 1.457, exact);
    CHECK(f.params.delta_n == doctest::Approx(truth.delta_n).epsilon(0.02));
    CHECK(f.params.sigma_x == doctest::Approx(truth.sigma_x).epsilon(0.02));
    CHECK(f.params.sigma_y == doctest::Approx(truth.sigma_y).epsilon(0.02));
    CHECK(f.fidelity > 0.999);
    CHECK(f.center_x == doctest::Approx(0.3).epsilon(0.02));
    CHECK(f.center_y == doctest::Approx(-0.2).epsilon(0.02));
    const double resid = (f.fitted_mode.values - clean.values).cwiseAbs().maxCoeff() / clean.values.maxCoeff();
    CHECK(resid < 2.4e-4);
}

TEST_CASE("fit errors") {
    const auto g = square(10.0, 0.5);
    RealField flat(g);
    flat.values.setConstant(1.0);
    CHECK_THROWS_AS(fit_ricker(flat, kLambda, 1.457), FitError);
}

TEST_CASE("grid refinement changes n_eff by less than 1e-6") {
    const auto coarse = solve_modes(ricker_profile(desk(), square(32.0, 0.2)), kLambda, 1);
    const auto fine = solve_modes(ricker_profile(desk(), square(32.0, 0.1)), kLambda, 1);
    CHECK(std::abs(coarse.n_eff[0] - fine.n_eff[0]) < 1e-6);
}
