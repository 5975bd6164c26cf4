// Survival amplitude c0(tau) of the semi-infinite
// boundary-defect chain (beta = 1): piecewise Bessel closed forms, a contour
// quadrature route, and the bound-state energies.
//
// Two formula modes are provided:
//   FormulaMode::printed     the correction series exactly as commonly quoted:
//                            S_< carries 2*J0 and S_> the weight gamma^(2l-2n).
//                            c0(0) = 2 for delta < 1 and S_> grows without bound
//                            as gamma increases; kept to document both defects.
//   FormulaMode::reconciled  S_< carries J0 and S_> the weight gamma^(2n-2l).
//                            This is the residue expansion of the contour
//                            integral and matches exact chain propagation.
// The contour route likewise places the two poles at +-i*gamma (printed, all
// delta) or at +-i*gamma for delta < 1 and +-gamma for delta > 1 (reconciled).

#pragma once

#include <complex>
#include <optional>
#include <utility>

namespace wga {

enum class Regime { sub_critical, critical, super_critical };
enum class FormulaMode { printed, reconciled };

const char* to_string(Regime r) noexcept;
const char* to_string(FormulaMode m) noexcept;

// |delta - 1| below this routes every evaluator to the critical branch.
inline constexpr double kCriticalBand = 1e-6;

struct RegimeParams {
    double delta{1.0};
    double gamma{0.0};             // sqrt|1 - delta^2|
    std::optional<double> amp;     // (delta^2 - 2) / (delta^2 - 1)
    std::optional<double> omega;   // delta^2 / sqrt|delta^2 - 1|
    Regime regime{Regime::critical};
};

struct SeriesTolerance {
    double abs_tol{1e-12};
    long max_terms{1000000};
    // Largest tolerated cancellation error, eps * sum|terms|. Beyond it the
    // evaluator throws SeriesDivergence instead of returning noise; this
    // happens only close to delta = 1 at long times.
    double max_rounding{1e-9};

    void validate() const;
};

RegimeParams regime_params(double delta);

double c0_critical(double tau);

double s_less(double tau, double gamma, const SeriesTolerance& tol = {},
              FormulaMode mode = FormulaMode::reconciled);

double s_greater(double tau, double gamma, const SeriesTolerance& tol = {},
                 FormulaMode mode = FormulaMode::reconciled);

std::complex<double> c0_closed_form(double delta, double tau, const SeriesTolerance& tol = {},
                                    FormulaMode mode = FormulaMode::reconciled);

struct ContourOptions {
    int n_points_start{32};
    double tolerance{1e-10};
    int max_doublings{20};
    FormulaMode mode{FormulaMode::reconciled};
};

std::complex<double> c0_contour(double delta, double tau, const ContourOptions& opts = {});

// +-Omega when the chain binds two states outside the band [-2, 2]
// (delta > sqrt 2); nullopt otherwise.
std::optional<std::pair<double, double>> bound_state_energies(double delta);

}  // namespace wga
