#include "wga/eme.hpp"

#include "wga/error.hpp"
#include "wga/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace wga {

namespace {

constexpr double kPi = std::numbers::pi;

double k0_of(double wavelength) {
    if (!(wavelength > 0.0) || !std::isfinite(wavelength)) {
        throw InvalidParameter("wavelength must be positive and finite");
    }
    return 2.0 * kPi / wavelength;
}

// Vertex of the parabola through (-1, fm), (0, f0), (1, fp); offset in samples.
double parabola_offset(double fm, double f0, double fp) {
    const double den = fm - 2.0 * f0 + fp;
    if (den == 0.0) {
        return 0.0;
    }
    return std::clamp(0.5 * (fm - fp) / den, -0.5, 0.5);
}

}  // namespace

void RickerParams::validate() const {
    if (!(delta_n > 0.0) || !std::isfinite(delta_n)) {
        throw InvalidParameter("ricker delta_n must be positive");
    }
    if (!(sigma_x > 0.0) || !(sigma_y > 0.0) || !std::isfinite(sigma_x) || !std::isfinite(sigma_y)) {
        throw InvalidParameter("ricker widths must be positive");
    }
    if (!(n0 > 0.0) || !std::isfinite(n0)) {
        throw InvalidParameter("substrate index must be positive");
    }
}

double RickerParams::index_at(double x, double y) const noexcept {
    const double u = 2.0 * x * x / (sigma_x * sigma_x) + 2.0 * y * y / (sigma_y * sigma_y);
    return n0 + delta_n * (1.0 - u) * std::exp(-u);
}

WaveguideGeometry WaveguideGeometry::from_gaps(double d0, double d, std::size_t count,
                                               double first_center) {
    if (count == 0) {
        throw InvalidParameter("waveguide geometry needs at least one guide");
    }
    if (count > 1 && (!(d0 > 0.0) || (count > 2 && !(d > 0.0)))) {
        throw InvalidParameter("waveguide gaps must be positive");
    }
    WaveguideGeometry g;
    g.centers.push_back(first_center);
    for (std::size_t i = 1; i < count; ++i) {
        g.centers.push_back(g.centers.back() + (i == 1 ? d0 : d));
    }
    return g;
}

void WaveguideGeometry::validate() const {
    if (centers.empty()) {
        throw InvalidParameter("waveguide geometry needs at least one guide");
    }
    for (std::size_t i = 0; i < centers.size(); ++i) {
        if (!std::isfinite(centers[i]) || (i > 0 && !(centers[i] > centers[i - 1]))) {
            throw InvalidParameter("waveguide centres must be finite and strictly increasing");
        }
    }
}

IndexProfile ricker_profile(const RickerParams& p, const TransverseGrid& grid, double center_x,
                            double center_y) {
    p.validate();
    grid.validate();
    IndexProfile out{RealField(grid), p.n0};
    for (std::size_t iy = 0; iy < grid.ny; ++iy) {
        for (std::size_t ix = 0; ix < grid.nx; ++ix) {
            out.n.at(ix, iy) = p.index_at(grid.x(ix) - center_x, grid.y(iy) - center_y);
        }
    }
    return out;
}

IndexProfile array_profile(const RickerParams& p, const WaveguideGeometry& geom,
                           const TransverseGrid& grid) {
    p.validate();
    grid.validate();
    geom.validate();
    const double mx = 3.0 * p.sigma_x;
    const double my = 3.0 * p.sigma_y;
    if (geom.centers.front() - mx < grid.x0 || geom.centers.back() + mx > grid.x_max() ||
        -my < grid.y0 || my > grid.y_max()) {
        throw GeometryError("waveguides need a 3 sigma margin inside the transverse grid");
    }
    IndexProfile out{RealField(grid), p.n0};
    out.n.values.setConstant(p.n0);
    for (std::size_t iy = 0; iy < grid.ny; ++iy) {
        for (std::size_t ix = 0; ix < grid.nx; ++ix) {
            double acc = 0.0;
            for (double c : geom.centers) {
                acc += p.index_at(grid.x(ix) - c, grid.y(iy)) - p.n0;
            }
            out.n.at(ix, iy) += acc;
        }
    }
    return out;
}

Eigen::SparseMatrix<double> helmholtz_operator(const IndexProfile& profile, double wavelength) {
    const auto& g = profile.grid();
    g.validate();
    const double k0 = k0_of(wavelength);
    const double cx = 1.0 / (g.dx * g.dx);
    const double cy = 1.0 / (g.dy * g.dy);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(5 * g.size());
    for (std::size_t iy = 0; iy < g.ny; ++iy) {
        for (std::size_t ix = 0; ix < g.nx; ++ix) {
            const auto i = static_cast<int>(g.index(ix, iy));
            const double n = profile.n.at(ix, iy);
            if (!std::isfinite(n)) {
                throw InvalidParameter("index profile has non-finite values");
            }
            trip.emplace_back(i, i, k0 * k0 * n * n - 2.0 * cx - 2.0 * cy);
            if (ix > 0) trip.emplace_back(i, i - 1, cx);
            if (ix + 1 < g.nx) trip.emplace_back(i, i + 1, cx);
            if (iy > 0) trip.emplace_back(i, i - static_cast<int>(g.nx), cy);
            if (iy + 1 < g.ny) trip.emplace_back(i, i + static_cast<int>(g.nx), cy);
        }
    }
    Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(g.size()),
                                  static_cast<Eigen::Index>(g.size()));
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
}

namespace {

// Positive orientation: the first sample above half the peak magnitude is > 0.
void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
    const double peak = v.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) >= 0.5 * peak) {
            if (v(i) < 0.0) {
                v = -v;
            }
            return;
        }
    }
}

double edge_ratio(const RealField& f) {
    const auto& g = f.grid;
    const double peak = f.values.cwiseAbs().maxCoeff();
    if (peak == 0.0) {
        return 0.0;
    }
    double edge = 0.0;
    for (std::size_t ix = 0; ix < g.nx; ++ix) {
        edge = std::max({edge, std::abs(f.at(ix, 0)), std::abs(f.at(ix, g.ny - 1))});
    }
    for (std::size_t iy = 0; iy < g.ny; ++iy) {
        edge = std::max({edge, std::abs(f.at(0, iy)), std::abs(f.at(g.nx - 1, iy))});
    }
    return edge / peak;
}

}  // namespace

ModeSet solve_modes(const IndexProfile& profile, double wavelength, int n_modes,
                    const ModeSolverOptions& opts) {
    if (n_modes < 1) {
        throw InvalidParameter("solve_modes needs n_modes >= 1");
    }
    const auto& g = profile.grid();
    const double k0 = k0_of(wavelength);
    const Eigen::SparseMatrix<double> A = helmholtz_operator(profile, wavelength);
    const double floor = k0 * k0 * profile.n0 * profile.n0;
    const double n_max = profile.n.values.maxCoeff();

    ModeSet out;
    out.grid = g;
    out.wavelength = wavelength;
    out.requested = n_modes;

    // Stage 1: the top eigenvalue, with the shift at the Rayleigh bound k0^2 max(n)^2.
    LanczosOptions o1;
    o1.n_eigs = 1;
    o1.max_dim = opts.max_krylov;
    o1.tol = n_modes == 1 ? opts.tol : 1e-6;
    o1.floor = floor;
    const double sigma1 = k0 * k0 * n_max * n_max;
    if (!(sigma1 > floor)) {
        out.incomplete = true;
        return out;
    }
    LanczosResult r = largest_eigenpairs(A, sigma1, o1);
    if (r.values.size() > 0 && n_modes > 1) {
        // Stage 2: shift just above the top, so the bound cluster dominates.
        const double lam1 = r.values(0);
        LanczosOptions o2 = o1;
        o2.n_eigs = std::min<int>(n_modes, static_cast<int>(A.rows()));
        o2.tol = opts.tol;
        const double sigma2 = std::min(sigma1, lam1 + 0.1 * (lam1 - floor));
        r = largest_eigenpairs(A, sigma2, o2);
    }

    const double scale = 1.0 / std::sqrt(g.cell_area());
    for (Eigen::Index k = 0; k < r.values.size(); ++k) {
        const double lam = r.values(k);
        if (!(lam > floor)) {
            continue;
        }
        RealField mode(g, r.vectors.col(k) * scale);
        fix_sign(mode.values);
        out.boundary_ratio = std::max(out.boundary_ratio, edge_ratio(mode));
        out.n_eff.push_back(std::sqrt(lam) / k0);
        out.modes.push_back(std::move(mode));
    }
    out.max_residual = r.max_residual;
    out.incomplete = static_cast<int>(out.modes.size()) < n_modes;
    if (opts.enforce_guard && out.boundary_ratio > opts.boundary_guard) {
        throw GeometryError("mode amplitude at the grid edge is " +
                            format_double(out.boundary_ratio) +
                            " of peak; enlarge the transverse domain");
    }
    return out;
}

ComplexField gaussian_input(const WaveguideGeometry& geom, double waist_x, double waist_y,
                            const TransverseGrid& grid, double center_y) {
    geom.validate();
    grid.validate();
    if (!(waist_x > 0.0) || !(waist_y > 0.0)) {
        throw InvalidParameter("gaussian waists must be positive");
    }
    ComplexField f(grid);
    const double cx = geom.centers.front();
    for (std::size_t iy = 0; iy < grid.ny; ++iy) {
        for (std::size_t ix = 0; ix < grid.nx; ++ix) {
            const double u = (grid.x(ix) - cx) / waist_x;
            const double v = (grid.y(iy) - center_y) / waist_y;
            f.at(ix, iy) = std::exp(-u * u - v * v);
        }
    }
    const double nrm = norm(f);
    if (!(nrm > 0.0)) {
        throw DegenerateInput("gaussian input vanishes on the grid");
    }
    f.values /= nrm;
    return f;
}

std::pair<double, double> matched_waists(const RealField& mode) {
    const auto& g = mode.grid;
    double w = 0.0, mx = 0.0, my = 0.0;
    for (std::size_t iy = 0; iy < g.ny; ++iy) {
        for (std::size_t ix = 0; ix < g.nx; ++ix) {
            const double i2 = mode.at(ix, iy) * mode.at(ix, iy);
            w += i2;
            mx += i2 * g.x(ix);
            my += i2 * g.y(iy);
        }
    }
    if (!(w > 0.0)) {
        throw DegenerateInput("mode is identically zero");
    }
    mx /= w;
    my /= w;
    double vx = 0.0, vy = 0.0;
    for (std::size_t iy = 0; iy < g.ny; ++iy) {
        for (std::size_t ix = 0; ix < g.nx; ++ix) {
            const double i2 = mode.at(ix, iy) * mode.at(ix, iy);
            vx += i2 * (g.x(ix) - mx) * (g.x(ix) - mx);
            vy += i2 * (g.y(iy) - my) * (g.y(iy) - my);
        }
    }
    // exp(-2 x^2 / w^2) has variance w^2 / 4.
    return {2.0 * std::sqrt(vx / w), 2.0 * std::sqrt(vy / w)};
}

std::vector<std::complex<double>> modal_coefficients(const ModeSet& modes,
                                                     const ComplexField& input) {
    if (!input.grid.same_as(modes.grid)) {
        throw InvalidParameter("input field and modes are sampled on different grids");
    }
    std::vector<std::complex<double>> a;
    a.reserve(modes.size());
    const double area = modes.grid.cell_area();
    for (const auto& m : modes.modes) {
        a.push_back(m.values.cast<std::complex<double>>().dot(input.values) * area);
    }
    return a;
}

std::vector<ComplexField> propagate_eme(const ModeSet& modes, const ComplexField& input,
                                        const std::vector<double>& z_cm) {
    const auto a = modal_coefficients(modes, input);
    const double k0 = k0_of(modes.wavelength);
    std::vector<ComplexField> out;
    out.reserve(z_cm.size());
    for (double z : z_cm) {
        if (!(z >= 0.0) || !std::isfinite(z)) {
            throw InvalidParameter("propagation distances must be finite and >= 0");
        }
        const double z_um = z * 1e4;
        ComplexField f(modes.grid);
        for (std::size_t k = 0; k < modes.size(); ++k) {
            // Phase relative to the top mode keeps the argument small at long z.
            const double dphi = k0 * (modes.n_eff[k] - modes.n_eff[0]) * z_um;
            const std::complex<double> ck = a[k] * std::polar(1.0, dphi);
            f.values += ck * modes.modes[k].values.cast<std::complex<double>>();
        }
        f.values *= std::polar(1.0, std::fmod(k0 * modes.n_eff[0] * z_um, 2.0 * kPi));
        out.push_back(std::move(f));
    }
    return out;
}

RealField localized_mode(const RickerParams& p, const TransverseGrid& grid, double wavelength,
                         double center_x, double center_y, double window_half_width,
                         const ModeSolverOptions& opts) {
    grid.validate();
    auto lo_index = [](double lo, double origin, double step) {
        return static_cast<long>(std::ceil((lo - origin) / step - 1e-9));
    };
    const long ix0 = std::max(0L, lo_index(center_x - window_half_width, grid.x0, grid.dx));
    const long ix1 = std::min(static_cast<long>(grid.nx) - 1,
                              static_cast<long>(std::floor((center_x + window_half_width - grid.x0) / grid.dx + 1e-9)));
    const long iy0 = std::max(0L, lo_index(center_y - window_half_width, grid.y0, grid.dy));
    const long iy1 = std::min(static_cast<long>(grid.ny) - 1,
                              static_cast<long>(std::floor((center_y + window_half_width - grid.y0) / grid.dy + 1e-9)));
    if (ix1 - ix0 + 1 < 8 || iy1 - iy0 + 1 < 8) {
        throw GeometryError("localized-mode window does not overlap the grid");
    }
    TransverseGrid sub;
    sub.nx = static_cast<std::size_t>(ix1 - ix0 + 1);
    sub.ny = static_cast<std::size_t>(iy1 - iy0 + 1);
    sub.dx = grid.dx;
    sub.dy = grid.dy;
    sub.x0 = grid.x(static_cast<std::size_t>(ix0));
    sub.y0 = grid.y(static_cast<std::size_t>(iy0));

    const ModeSet ms = solve_modes(ricker_profile(p, sub, center_x, center_y), wavelength, 1, opts);
    if (ms.modes.empty()) {
        throw SolverError("isolated guide has no bound mode", 0.0);
    }
    RealField out(grid);
    for (std::size_t iy = 0; iy < sub.ny; ++iy) {
        for (std::size_t ix = 0; ix < sub.nx; ++ix) {
            out.at(ix + static_cast<std::size_t>(ix0), iy + static_cast<std::size_t>(iy0)) =
                ms.modes[0].at(ix, iy);
        }
    }
    return out;
}

RealField shift_x(const RealField& f, double shift) {
    const auto& g = f.grid;
    RealField out(g);
    const double s = shift / g.dx;
    const double fl = std::floor(s);
    const double t = s - fl;  // in [0, 1)
    const long whole = static_cast<long>(fl);
    const long nx = static_cast<long>(g.nx);
    // out(ix) = f(ix - s); the source point i - t sits at u = 1 - t past i - 1.
    const double u = 1.0 - t;
    const double w0 = 0.5 * (-u * u * u + 2.0 * u * u - u);
    const double w1 = 0.5 * (3.0 * u * u * u - 5.0 * u * u + 2.0);
    const double w2 = 0.5 * (-3.0 * u * u * u + 4.0 * u * u + u);
    const double w3 = 0.5 * (u * u * u - u * u);
    for (std::size_t iy = 0; iy < g.ny; ++iy) {
        auto src = [&](long i) { return (i >= 0 && i < nx) ? f.at(static_cast<std::size_t>(i), iy) : 0.0; };
        for (long ix = 0; ix < nx; ++ix) {
            const long i = ix - whole;
            const double v = t == 0.0 ? src(i)
                                      : w3 * src(i + 1) + w2 * src(i) + w1 * src(i - 1) + w0 * src(i - 2);
            out.at(static_cast<std::size_t>(ix), iy) = v;
        }
    }
    return out;
}

std::vector<double> extract_intensities(const ComplexField& field, const RealField& localized,
                                        const WaveguideGeometry& geom, OverlapKind kind) {
    geom.validate();
    if (!field.grid.same_as(localized.grid)) {
        throw InvalidParameter("field and localized mode are sampled on different grids");
    }
    if (field.values.cwiseAbs().maxCoeff() == 0.0) {
        throw DegenerateInput("field is identically zero");
    }
    const double area = field.grid.cell_area();
    std::vector<double> c;
    c.reserve(geom.size());
    for (double d : geom.centers) {
        const RealField phi = shift_x(localized, d);
        double v = 0.0;
        if (kind == OverlapKind::intensity_product) {
            v = (field.values.cwiseAbs2().array() * phi.values.array().square()).sum() * area;
        } else {
            v = std::norm(phi.values.cast<std::complex<double>>().dot(field.values) * area);
        }
        c.push_back(v);
    }
    double total = 0.0;
    for (double v : c) {
        total += v;
    }
    if (!(total > 0.0) || !std::isfinite(total)) {
        throw DegenerateInput("field has no overlap with any guide");
    }
    for (double& v : c) {
        v /= total;
    }
    return c;
}

ReconstructedIndex reconstruct_index(const RealField& mode, double n_eff, double wavelength,
                                     double intensity_floor, double n0) {
    const auto& g = mode.grid;
    g.validate();
    if (!(intensity_floor > 0.0) || !(intensity_floor <= 1.0)) {
        throw InvalidParameter("intensity floor must lie in (0, 1]");
    }
    if (!(n_eff > 0.0)) {
        throw InvalidParameter("effective index must be positive");
    }
    const double k0 = k0_of(wavelength);
    const double k2 = k0 * k0 * n_eff * n_eff;
    const double peak = mode.values.maxCoeff();
    if (!(peak > 0.0)) {
        throw DegenerateInput("mode has no positive samples");
    }
    ReconstructedIndex out;
    out.profile = IndexProfile{RealField(g), n0};
    out.profile.n.values.setConstant(std::numeric_limits<double>::quiet_NaN());
    out.valid.assign(g.size(), false);
    const double cx = 1.0 / (g.dx * g.dx);
    const double cy = 1.0 / (g.dy * g.dy);
    for (std::size_t iy = 1; iy + 1 < g.ny; ++iy) {
        for (std::size_t ix = 1; ix + 1 < g.nx; ++ix) {
            const double psi = mode.at(ix, iy);
            if (!(psi > intensity_floor * peak)) {
                continue;
            }
            const double lap = (mode.at(ix - 1, iy) + mode.at(ix + 1, iy) - 2.0 * psi) * cx +
                               (mode.at(ix, iy - 1) + mode.at(ix, iy + 1) - 2.0 * psi) * cy;
            const double rad = (k2 * psi - lap) / (k0 * k0 * psi);
            if (!(rad > 0.0)) {
                ++out.negative_radicand;
                continue;
            }
            out.profile.n.at(ix, iy) = std::sqrt(rad);
            out.valid[g.index(ix, iy)] = true;
            ++out.valid_count;
        }
    }
    return out;
}

double mode_fidelity(const RealField& a, const RealField& b) {
    const double na = inner(a, a);
    const double nb = inner(b, b);
    if (!(na > 0.0) || !(nb > 0.0)) {
        throw DegenerateInput("fidelity of a zero field");
    }
    const double ab = inner(a, b);
    return std::clamp(ab * ab / (na * nb), 0.0, 1.0);
}

double mode_fidelity(const ComplexField& a, const ComplexField& b) {
    const double na = std::real(inner(a, a));
    const double nb = std::real(inner(b, b));
    if (!(na > 0.0) || !(nb > 0.0)) {
        throw DegenerateInput("fidelity of a zero field");
    }
    return std::clamp(std::norm(inner(a, b)) / (na * nb), 0.0, 1.0);
}

namespace {

// Minimum of the cubic through samples best-1 .. best+2 (dir = +1) or
// best-2 .. best+1 (dir = -1), searched within half a step of the guess.
double cubic_min_offset(const std::vector<double>& v, std::size_t best, int dir, double guess) {
    // Newton form on nodes t = -1, 0, 1, 2*dir relative to best.
    const double fm = v[best - 1], f0 = v[best], fp = v[best + 1];
    const double ff = v[dir > 0 ? best + 2 : best - 2];
    const double t3 = 2.0 * dir;
    // Cubic p(t) = f0 + a t + b t^2 + c t^3 through the four nodes.
    const double b = 0.5 * (fp + fm) - f0;
    const double a_plus_c = 0.5 * (fp - fm);
    // p(t3) = f0 + a t3 + b t3^2 + c t3^3 with a = a_plus_c - c.
    const double c = (ff - f0 - a_plus_c * t3 - b * t3 * t3) / (t3 * t3 * t3 - t3);
    const double a = a_plus_c - c;
    // p'(t) = a + 2 b t + 3 c t^2; Newton from the parabola vertex.
    double t = guess;
    for (int it = 0; it < 20; ++it) {
        const double d1 = a + 2.0 * b * t + 3.0 * c * t * t;
        const double d2 = 2.0 * b + 6.0 * c * t;
        if (!(d2 > 0.0)) {
            return guess;
        }
        const double step = d1 / d2;
        t -= step;
        if (std::abs(step) < 1e-12) {
            break;
        }
    }
    return std::abs(t) <= 0.75 ? t : guess;
}

struct CutMinimum {
    bool found{false};
    double position{0.0};  // um
    double value{0.0};
};

// Valid run of the cut containing peak, then the minimum on each side that is
// strictly inside the run.
std::pair<CutMinimum, CutMinimum> cut_minima(const std::vector<double>& cut, std::size_t peak,
                                             double origin, double step, bool smooth) {
    const std::size_t n = cut.size();
    std::vector<double> v = cut;
    if (smooth) {
        for (std::size_t i = 0; i < n; ++i) {
            if (i == 0 || i + 1 == n || std::isnan(cut[i - 1]) || std::isnan(cut[i]) ||
                std::isnan(cut[i + 1])) {
                v[i] = std::numeric_limits<double>::quiet_NaN();
            } else {
                v[i] = (cut[i - 1] + cut[i] + cut[i + 1]) / 3.0;
            }
        }
    }
    if (std::isnan(v[peak])) {
        throw FitError("reconstructed index is masked at the mode peak");
    }
    std::size_t lo = peak, hi = peak;
    while (lo > 0 && !std::isnan(v[lo - 1])) --lo;
    while (hi + 1 < n && !std::isnan(v[hi + 1])) ++hi;

    auto side = [&](std::size_t from, std::size_t to) {
        CutMinimum m;
        if (from > to) {
            return m;
        }
        std::size_t best = from;
        for (std::size_t i = from; i <= to; ++i) {
            if (v[i] < v[best]) best = i;
        }
        if (best == lo || best == hi || best == peak) {
            return m;
        }
        double off = parabola_offset(v[best - 1], v[best], v[best + 1]);
        // A fourth sample on the vertex side upgrades the parabola to a cubic.
        const long far = off >= 0.0 ? static_cast<long>(best) + 2 : static_cast<long>(best) - 2;
        if (far >= static_cast<long>(lo) && far <= static_cast<long>(hi) && far != static_cast<long>(peak)) {
            off = cubic_min_offset(v, best, off >= 0.0 ? 1 : -1, off);
        }
        m.found = true;
        m.position = origin + (static_cast<double>(best) + off) * step;
        m.value = v[best];
        return m;
    };
    return {side(lo, peak == 0 ? 0 : peak - 1), side(peak + 1, hi)};
}

double golden_max(const std::function<double(double)>& f, double a, double b, double rel_tol,
                  int& evals) {
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - r * (b - a), x2 = a + r * (b - a);
    double f1 = f(x1), f2 = f(x2);
    evals += 2;
    while ((b - a) > rel_tol * 0.5 * (std::abs(a) + std::abs(b))) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        }
        ++evals;
    }
    return f1 > f2 ? x1 : x2;
}

}  // namespace

RickerFit fit_ricker(const RealField& measured_in, double wavelength, double n0,
                     const FitOptions& opts) {
    const auto& g = measured_in.grid;
    g.validate();
    RealField measured = measured_in;
    if (measured.values.sum() < 0.0) {
        measured.values = -measured.values;
    }
    const double nrm = norm(measured);
    if (!(nrm > 0.0) || !std::isfinite(nrm)) {
        throw DegenerateInput("measured mode is zero or non-finite");
    }
    measured.values /= nrm;

    Eigen::Index pk = 0;
    measured.values.maxCoeff(&pk);
    const std::size_t px = static_cast<std::size_t>(pk) % g.nx;
    const std::size_t py = static_cast<std::size_t>(pk) / g.nx;
    if (px == 0 || py == 0 || px + 1 == g.nx || py + 1 == g.ny) {
        throw FitError("mode peak lies on the grid edge");
    }
    RickerFit fit;
    fit.center_x = g.x(px) + g.dx * parabola_offset(measured.at(px - 1, py), measured.at(px, py),
                                                    measured.at(px + 1, py));
    fit.center_y = g.y(py) + g.dy * parabola_offset(measured.at(px, py - 1), measured.at(px, py),
                                                    measured.at(px, py + 1));

    // Widths only depend on the shape of n(x, y); any n_eff serves for the map.
    const ReconstructedIndex rec = reconstruct_index(measured, n0, wavelength, opts.intensity_floor, n0);
    std::vector<double> row(g.nx), col(g.ny);
    for (std::size_t ix = 0; ix < g.nx; ++ix) row[ix] = rec.profile.n.at(ix, py);
    for (std::size_t iy = 0; iy < g.ny; ++iy) col[iy] = rec.profile.n.at(px, iy);
    const auto [xl, xr] = cut_minima(row, px, g.x0, g.dx, opts.smooth_cuts);
    const auto [yl, yr] = cut_minima(col, py, g.y0, g.dy, opts.smooth_cuts);

    auto width = [](const CutMinimum& l, const CutMinimum& r, double c, const char* axis) {
        if (l.found && r.found) return 0.5 * ((c - l.position) + (r.position - c));
        if (l.found) return c - l.position;
        if (r.found) return r.position - c;
        throw FitError(std::string("no interior index minima along ") + axis);
    };
    RickerParams p;
    p.n0 = n0;
    p.sigma_x = width(xl, xr, fit.center_x, "x");
    p.sigma_y = width(yl, yr, fit.center_y, "y");
    if (!(p.sigma_x > 0.0) || !(p.sigma_y > 0.0)) {
        throw FitError("extracted widths are not positive");
    }

    // Peak-to-dip contrast in n^2 is independent of the unknown n_eff:
    // (n0 + dn)^2 - (n0 - dn e^-2)^2 ~ 2 n0 dn (1 + e^-2).
    std::vector<double> mins;
    for (const auto* m : {&xl, &xr, &yl, &yr}) {
        if (m->found) mins.push_back(m->value);
    }
    double n_min = 0.0;
    for (double v : mins) n_min += v;
    n_min /= static_cast<double>(mins.size());
    const double n_pk = rec.profile.n.at(px, py);
    const double e2 = std::exp(-2.0);
    const double dn_est = (n_pk * n_pk - n_min * n_min) / (2.0 * n0 * (1.0 + e2));
    if (!(dn_est > 0.0) || !std::isfinite(dn_est)) {
        throw FitError("reconstructed map has no index peak above its dips");
    }
    fit.delta_n_estimate = dn_est;
    // The dip sits at n0 - dn e^-2; the map is offset by n0^2 - n_eff^2 in n^2.
    const double dip_true = n0 - dn_est * e2;
    fit.n_eff_estimate = std::sqrt(std::max(0.0, n0 * n0 - (n_min * n_min - dip_true * dip_true)));

    auto candidate = [&](double dn) {
        RickerParams q = p;
        q.delta_n = dn;
        const ModeSet ms = solve_modes(ricker_profile(q, g, fit.center_x, fit.center_y), wavelength,
                                       1, opts.solver);
        if (ms.modes.empty()) {
            return RealField(g);
        }
        return ms.modes[0];
    };
    auto objective = [&](double dn) {
        const RealField m = candidate(dn);
        if (m.values.cwiseAbs().maxCoeff() == 0.0) {
            return 0.0;
        }
        return mode_fidelity(m, measured);
    };
    const double best = golden_max(objective, opts.bracket_low * dn_est, opts.bracket_high * dn_est,
                                   opts.rel_tol, fit.evaluations);
    p.delta_n = best;
    fit.params = p;
    fit.fitted_mode = candidate(best);
    ++fit.evaluations;
    fit.fidelity = fit.fitted_mode.values.cwiseAbs().maxCoeff() > 0.0
                       ? mode_fidelity(fit.fitted_mode, measured)
                       : 0.0;
    if (fit.fidelity < 0.5) {
        throw FitError("best ricker fit reaches fidelity " + format_double(fit.fidelity) +
                       " only");
    }
    return fit;
}

double coupling_from_splitting(double n_eff_even, double n_eff_odd, double wavelength_um) {
    k0_of(wavelength_um);
    return kPi * std::abs(n_eff_even - n_eff_odd) / wavelength_um * 1e4;
}

TransverseGrid grid_for(const WaveguideGeometry& geom, const EmeGridSpec& spec) {
    geom.validate();
    return TransverseGrid::covering(geom.centers.front() - spec.margin_x,
                                    geom.centers.back() + spec.margin_x, -spec.margin_y,
                                    spec.margin_y, spec.dx, spec.dy);
}

PairCoupling pair_coupling(const RickerParams& p, double gap_um, double wavelength,
                           const EmeGridSpec& spec, const ModeSolverOptions& opts) {
    const auto geom = WaveguideGeometry::from_gaps(gap_um, gap_um, 2);
    const auto grid = grid_for(geom, spec);
    const ModeSet ms = solve_modes(array_profile(p, geom, grid), wavelength, 2, opts);
    if (ms.size() < 2) {
        throw SolverError("guide pair supports fewer than two bound supermodes", 0.0);
    }
    PairCoupling c;
    c.n_eff_even = ms.n_eff[0];
    c.n_eff_odd = ms.n_eff[1];
    c.beta_per_cm = coupling_from_splitting(c.n_eff_even, c.n_eff_odd, wavelength);
    return c;
}

RickerParams calibrate_contrast(RickerParams base, double gap_um, double target_beta,
                                double wavelength, const EmeGridSpec& spec, double rel_tol,
                                const ModeSolverOptions& opts) {
    base.validate();
    if (!(target_beta > 0.0)) {
        throw InvalidParameter("target coupling must be positive");
    }
    auto f = [&](double dn) {
        RickerParams q = base;
        q.delta_n = dn;
        return std::log(pair_coupling(q, gap_um, wavelength, spec, opts).beta_per_cm / target_beta);
    };
    // log(beta) falls nearly linearly with sqrt(dn); iterate in that variable.
    double s0 = std::sqrt(base.delta_n);
    double f0 = f(base.delta_n);
    double s1 = s0 * (f0 > 0.0 ? 1.1 : 0.9);
    double f1 = f(s1 * s1);
    for (int it = 0; it < 30; ++it) {
        if (std::abs(f1) <= rel_tol) {
            base.delta_n = s1 * s1;
            return base;
        }
        if (f1 == f0) {
            break;
        }
        double s2 = s1 - f1 * (s1 - s0) / (f1 - f0);
        s2 = std::clamp(s2, 0.5 * s1, 2.0 * s1);
        s0 = s1;
        f0 = f1;
        s1 = s2;
        f1 = f(s1 * s1);
    }
    throw SolverError("contrast calibration did not converge", f1);
}

}  // namespace wga
