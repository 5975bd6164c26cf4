// Scalar eigenmode-expansion simulator for waveguide arrays
//
// Index landscapes are sums of Ricker ("Mexican hat") wavelets on a uniform
// transverse grid. Bound supermodes solve the scalar eigenproblem
//     [laplacian + k0^2 n(x,y)^2] psi = k^2 psi,   n_eff = k / k0,
// with a 5-point laplacian and zero (Dirichlet) boundary. A launched field is
// expanded onto those supermodes and each coefficient picks up the phase
// exp(i k0 n_eff z). Transverse lengths are um, propagation distances cm.

#pragma once

#include "wga/field.hpp"

#include <Eigen/Sparse>

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

namespace wga {

struct RickerParams {
    double delta_n{3e-3};
    double sigma_x{4.0};  // um; the index minimum along x sits at sigma_x
    double sigma_y{4.0};
    double n0{1.457};

    void validate() const;
    // n(x, y) for offsets (x, y) from the guide centre.
    double index_at(double x, double y) const noexcept;
};

struct IndexProfile {
    RealField n;
    double n0{1.457};

    const TransverseGrid& grid() const noexcept { return n.grid; }
};

struct WaveguideGeometry {
    std::vector<double> centers;  // x positions (um), strictly increasing

    // count guides starting at first_center, first gap d0 and bulk gap d.
    static WaveguideGeometry from_gaps(double d0, double d, std::size_t count,
                                       double first_center = 0.0);
    void validate() const;
    std::size_t size() const noexcept { return centers.size(); }
};

IndexProfile ricker_profile(const RickerParams& p, const TransverseGrid& grid, double center_x = 0.0,
                            double center_y = 0.0);

// n0 + sum_i (n(x - d_i, y) - n0). Every centre needs a 3 sigma margin inside
// the grid, otherwise GeometryError.
IndexProfile array_profile(const RickerParams& p, const WaveguideGeometry& geom,
                           const TransverseGrid& grid);

struct ModeSolverOptions {
    int max_krylov{240};
    double tol{1e-12};
    double boundary_guard{1e-6};  // modes must fall below this fraction of peak at the edge
    bool enforce_guard{false};    // throw GeometryError instead of only reporting
};

struct ModeSet {
    TransverseGrid grid;
    std::vector<RealField> modes;  // unit grid norm, sign fixed
    std::vector<double> n_eff;     // descending
    double wavelength{0.633};
    int requested{0};
    bool incomplete{false};        // fewer bound modes than requested
    double boundary_ratio{0.0};    // max over modes of edge |psi| / peak |psi|
    double max_residual{0.0};

    std::size_t size() const noexcept { return modes.size(); }
};

// Sparse matrix of laplacian + k0^2 n^2 on the profile grid.
Eigen::SparseMatrix<double> helmholtz_operator(const IndexProfile& profile, double wavelength);

ModeSet solve_modes(const IndexProfile& profile, double wavelength, int n_modes,
                    const ModeSolverOptions& opts = {});

// Unit-norm Gaussian exp(-(x-d_0)^2/wx^2 - (y-y_c)^2/wy^2) on guide 0.
ComplexField gaussian_input(const WaveguideGeometry& geom, double waist_x, double waist_y,
                            const TransverseGrid& grid, double center_y = 0.0);

// Gaussian waists whose intensity second moments match those of the mode.
std::pair<double, double> matched_waists(const RealField& mode);

std::vector<std::complex<double>> modal_coefficients(const ModeSet& modes,
                                                     const ComplexField& input);

// Field at each distance z (cm). The z = 0 entry is the projection of the
// input onto the modal subspace.
std::vector<ComplexField> propagate_eme(const ModeSet& modes, const ComplexField& input,
                                        const std::vector<double>& z_cm);

// Single-guide fundamental mode centred at (center_x, center_y), solved on a
// window aligned with grid and embedded into it (zero outside the window).
RealField localized_mode(const RickerParams& p, const TransverseGrid& grid, double wavelength,
                         double center_x = 0.0, double center_y = 0.0,
                         double window_half_width = 70.0, const ModeSolverOptions& opts = {});

// f(x - shift, y) by cubic (Catmull-Rom) interpolation along x; zero outside.
RealField shift_x(const RealField& f, double shift);

enum class OverlapKind {
    intensity_product,  // |c_i|^2 = integral |Psi(x,y) Phi(x - d_i, y)|^2
    coherent            // |c_i|^2 = |integral Psi(x,y) Phi(x - d_i, y)|^2
};

// Per-guide weights normalised to sum to 1. localized_mode is the isolated
// guide mode centred at x = 0 on the field's grid.
std::vector<double> extract_intensities(const ComplexField& field, const RealField& localized_mode,
                                        const WaveguideGeometry& geom,
                                        OverlapKind kind = OverlapKind::intensity_product);

struct ReconstructedIndex {
    IndexProfile profile;        // NaN where masked
    std::vector<bool> valid;     // per sample
    std::size_t valid_count{0};
    std::size_t negative_radicand{0};
};

// n = sqrt((k^2 psi - laplacian psi) / (k0^2 psi)) where psi exceeds
// intensity_floor * max(psi); edge samples and negative radicands are masked.
ReconstructedIndex reconstruct_index(const RealField& mode, double n_eff, double wavelength,
                                     double intensity_floor, double n0 = 1.457);

double mode_fidelity(const RealField& a, const RealField& b);
double mode_fidelity(const ComplexField& a, const ComplexField& b);

struct FitOptions {
    double intensity_floor{0.05};
    bool smooth_cuts{true};        // 3-point moving average on the axis cuts
    double rel_tol{1e-4};          // golden-section stopping width, relative
    double bracket_low{0.5};       // search interval as multiples of the estimate
    double bracket_high{1.5};
    ModeSolverOptions solver{};
};

struct RickerFit {
    RickerParams params;
    double fidelity{0.0};
    double center_x{0.0};
    double center_y{0.0};
    double delta_n_estimate{0.0};  // from the reconstructed map, before the overlap search
    double n_eff_estimate{0.0};
    int evaluations{0};
    RealField fitted_mode;
};

RickerFit fit_ricker(const RealField& measured_mode, double wavelength, double n0,
                     const FitOptions& opts = {});

// ---- two-guide calibration ----

// Coupling (1/cm) from a supermode splitting: pi * dn_eff / lambda.
double coupling_from_splitting(double n_eff_even, double n_eff_odd, double wavelength_um);

struct EmeGridSpec {
    double dx{1.0};
    double dy{1.0};
    double margin_x{110.0};  // um beyond the outer guides
    double margin_y{110.0};  // um above and below the guide plane
};

TransverseGrid grid_for(const WaveguideGeometry& geom, const EmeGridSpec& spec);

struct PairCoupling {
    double beta_per_cm{0.0};
    double n_eff_even{0.0};
    double n_eff_odd{0.0};
};

// Coupling of two identical guides separated by gap_um.
PairCoupling pair_coupling(const RickerParams& p, double gap_um, double wavelength,
                           const EmeGridSpec& spec, const ModeSolverOptions& opts = {});

// Adjusts delta_n so the pair coupling at gap_um equals target_beta (1/cm).
// Secant iteration on log(beta); relative accuracy rel_tol.
RickerParams calibrate_contrast(RickerParams base, double gap_um, double target_beta,
                                double wavelength, const EmeGridSpec& spec,
                                double rel_tol = 1e-3, const ModeSolverOptions& opts = {});

}  // namespace wga
