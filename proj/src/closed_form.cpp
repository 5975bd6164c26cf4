#include "wga/closed_form.hpp"

#include "wga/bessel.hpp"
#include "wga/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace wga {

namespace {

constexpr int kConsecutiveSmall = 5;
constexpr int kBilateralCheck = 10;

void check_tau(double tau) {
    if (!(tau >= 0.0) || !std::isfinite(tau)) {
        throw InvalidParameter("tau must be finite and >= 0");
    }
}

void check_delta(double delta) {
    if (!(delta > 0.0) || !std::isfinite(delta)) {
        throw InvalidParameter("delta must be positive and finite");
    }
}

bool near_critical(double delta) { return std::abs(delta - 1.0) < kCriticalBand; }

struct BesselSums {
    double bilateral{0.0};  // sum_{l in Z} J_l(2 tau) / gamma^l
    double even{0.0};       // sum_{l >= 0} J_2l(2 tau) / gamma^2l
    double magnitude{0.0};  // sum of |terms|, the scale of the rounding error
};

// Alternating sums lose about eps * sum|terms| to cancellation; near delta = 1
// (small gamma) that exceeds any useful accuracy.
void check_rounding(const char* which, double magnitude, const SeriesTolerance& tol) {
    const double err = std::numeric_limits<double>::epsilon() * magnitude;
    if (err > tol.max_rounding) {
        throw SeriesDivergence(std::string(which) + " series loses accuracy to cancellation (estimated error " +
                                   std::to_string(err) + ")",
                               err);
    }
}

// Both S_< series share one pass over l. Terms past the turning point decay
// like (tau/gamma)^l / l!, so the cached Bessel sequence grows until the
// consecutive-small guard fires.
BesselSums less_sums(double tau, double gamma, const SeriesTolerance& tol) {
    const double x = 2.0 * tau;
    long cap = static_cast<long>(std::ceil(std::numbers::e * x / (2.0 * gamma))) + 64;
    for (;;) {
        cap = std::min(cap, tol.max_terms);
        const auto J = bessel_j_sequence(static_cast<int>(cap), x);
        BesselSums sums;
        double inv_pow = 1.0;  // gamma^-l
        double pow = 1.0;      // gamma^l
        int small_run = 0;
        long stop_at = -1;
        double last = 0.0;
        for (long l = 0; l <= cap; ++l) {
            const double j = J[static_cast<std::size_t>(l)];
            const double pos = j * inv_pow;
            double mag = std::abs(pos);
            sums.bilateral += pos;
            if (l > 0) {
                const double neg = (l % 2 == 0 ? j : -j) * pow;
                sums.bilateral += neg;
                mag += std::abs(neg);
            }
            if (l % 2 == 0) {
                sums.even += pos;
            }
            last = mag;
            sums.magnitude += mag;
            if (!std::isfinite(mag) || !std::isfinite(sums.bilateral)) {
                throw SeriesDivergence("S_< Bessel series overflowed at l = " + std::to_string(l),
                                       mag);
            }
            if (stop_at >= 0) {
                if (mag >= tol.abs_tol) {
                    stop_at = -1;  // the L+10 check failed; keep going
                    small_run = 0;
                } else if (l >= stop_at) {
                    return sums;
                }
            } else if (mag < tol.abs_tol) {
                if (++small_run >= kConsecutiveSmall) {
                    stop_at = l + kBilateralCheck;
                }
            } else {
                small_run = 0;
            }
            inv_pow /= gamma;
            pow *= gamma;
        }
        if (cap >= tol.max_terms) {
            throw SeriesDivergence("S_< Bessel series did not converge within max_terms", last);
        }
        cap *= 2;
    }
}

}  // namespace

const char* to_string(Regime r) noexcept {
    switch (r) {
        case Regime::sub_critical: return "sub_critical";
        case Regime::critical: return "critical";
        case Regime::super_critical: return "super_critical";
    }
    return "unknown";
}

const char* to_string(FormulaMode m) noexcept {
    return m == FormulaMode::printed ? "printed" : "reconciled";
}

void SeriesTolerance::validate() const {
    if (!(abs_tol > 0.0)) {
        throw InvalidParameter("series abs_tol must be positive");
    }
    if (max_terms < 1) {
        throw InvalidParameter("series max_terms must be >= 1");
    }
    if (!(max_rounding > 0.0)) {
        throw InvalidParameter("series max_rounding must be positive");
    }
}

RegimeParams regime_params(double delta) {
    check_delta(delta);
    RegimeParams rp;
    rp.delta = delta;
    const double d2 = delta * delta;
    rp.gamma = std::sqrt(std::abs(1.0 - d2));
    if (near_critical(delta)) {
        rp.regime = Regime::critical;
        return rp;
    }
    rp.regime = delta < 1.0 ? Regime::sub_critical : Regime::super_critical;
    rp.amp = (d2 - 2.0) / (d2 - 1.0);
    rp.omega = d2 / std::sqrt(std::abs(d2 - 1.0));
    return rp;
}

double c0_critical(double tau) {
    check_tau(tau);
    if (tau == 0.0) {
        return 1.0;
    }
    return bessel_j(1, 2.0 * tau) / tau;
}

double s_less(double tau, double gamma, const SeriesTolerance& tol, FormulaMode mode) {
    check_tau(tau);
    tol.validate();
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw InvalidParameter("s_less needs 0 < gamma < 1");
    }
    const auto sums = less_sums(tau, gamma, tol);
    const double j0 = bessel_j(0, 2.0 * tau);
    const double lead = mode == FormulaMode::printed ? 2.0 * j0 : j0;
    const double weight = 1.0 + 1.0 / (gamma * gamma);
    check_rounding("S_<", weight * sums.magnitude, tol);
    return lead + weight * (0.5 * sums.bilateral - sums.even);
}

double s_greater(double tau, double gamma, const SeriesTolerance& tol, FormulaMode mode) {
    check_tau(tau);
    tol.validate();
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw InvalidParameter("s_greater needs gamma > 0");
    }
    const double prefactor = 1.0 - 1.0 / (gamma * gamma);
    const double j0 = bessel_j(0, 2.0 * tau);
    if (tau == 0.0) {
        return j0 - prefactor;  // only the n = 0 term survives
    }
    // Power of gamma per unit of (l - n): +2 as printed, -2 reconciled.
    const double gamma_exp = mode == FormulaMode::printed ? 2.0 : -2.0;
    const double log_tau = std::log(tau);
    const double log_gamma = std::log(gamma);

    double total = 0.0;
    double magnitude = 0.0;
    int small_run = 0;
    double inner = 0.0;
    for (long n = 0; n < tol.max_terms; ++n) {
        inner = 0.0;
        for (long l = n; l <= 2 * n; ++l) {
            const double log_term = 2.0 * static_cast<double>(n) * log_tau -
                                    std::lgamma(static_cast<double>(l) + 1.0) -
                                    std::lgamma(static_cast<double>(2 * n - l) + 1.0) +
                                    gamma_exp * static_cast<double>(l - n) * log_gamma;
            inner += std::exp(log_term);
        }
        if (n % 2 == 1) {
            inner = -inner;  // (i tau)^{2n} = (-1)^n tau^{2n}
        }
        if (!std::isfinite(inner)) {
            throw SeriesDivergence("S_> double series overflowed at n = " + std::to_string(n),
                                   inner);
        }
        total += inner;
        magnitude += std::abs(inner);
        if (std::abs(prefactor * inner) < tol.abs_tol) {
            if (++small_run >= kConsecutiveSmall) {
                check_rounding("S_>", std::abs(prefactor) * magnitude, tol);
                return j0 - prefactor * total;
            }
        } else {
            small_run = 0;
        }
    }
    throw SeriesDivergence("S_> double series did not converge within max_terms",
                           std::abs(prefactor * inner));
}

std::complex<double> c0_closed_form(double delta, double tau, const SeriesTolerance& tol,
                                    FormulaMode mode) {
    check_delta(delta);
    check_tau(tau);
    if (near_critical(delta)) {
        return c0_critical(tau);
    }
    const auto rp = regime_params(delta);
    if (rp.regime == Regime::sub_critical) {
        return 0.5 * *rp.amp * std::exp(-*rp.omega * tau) + s_less(tau, rp.gamma, tol, mode);
    }
    return *rp.amp * std::cos(*rp.omega * tau) + s_greater(tau, rp.gamma, tol, mode);
}

std::complex<double> c0_contour(double delta, double tau, const ContourOptions& opts) {
    check_delta(delta);
    check_tau(tau);
    if (near_critical(delta)) {
        throw InvalidParameter("contour route is degenerate for |delta - 1| < 1e-6");
    }
    if (opts.n_points_start < 2 || opts.max_doublings < 0 || !(opts.tolerance > 0.0)) {
        throw InvalidParameter("invalid contour quadrature options");
    }
    using cd = std::complex<double>;
    const double gamma = std::sqrt(std::abs(1.0 - delta * delta));
    // Denominator z^2 + pole_sign * gamma^2: +1 puts the poles at +-i gamma.
    const bool imaginary_poles = opts.mode == FormulaMode::printed || delta < 1.0;
    const double pole_sign = imaginary_poles ? 1.0 : -1.0;
    const double g2 = pole_sign * gamma * gamma;
    const cd i{0.0, 1.0};

    auto integrand = [&](cd z) {
        return std::exp(i * tau * (z + 1.0 / z)) * (z * z - 1.0) / (z * (z * z + g2));
    };

    // Simple poles: residue of (z^2 - 1) / (z (z^2 + g2)) at z_p is (z_p^2 - 1) / (2 z_p^2).
    const cd pole = pole_sign > 0.0 ? cd{0.0, gamma} : cd{gamma, 0.0};
    cd residues{0.0, 0.0};
    for (const cd zp : {pole, -pole}) {
        residues += (zp * zp - 1.0) / (2.0 * zp * zp) * std::exp(i * tau * (zp + 1.0 / zp));
    }

    // Essential singularity at 0: periodic trapezoid on a circle that excludes the poles.
    // (1 / 2 pi i) \oint f dz = mean over theta of f(z) z.
    const double radius = std::min(1.0, 0.9 * gamma);
    const double two_pi = 2.0 * std::numbers::pi;
    long n = opts.n_points_start;
    cd sum{0.0, 0.0};
    for (long k = 0; k < n; ++k) {
        const cd z = std::polar(radius, two_pi * static_cast<double>(k) / static_cast<double>(n));
        sum += integrand(z) * z;
    }
    cd estimate = sum / static_cast<double>(n);
    double change = 0.0;
    for (int d = 0; d < opts.max_doublings; ++d) {
        // New nodes sit halfway between the old ones.
        for (long k = 0; k < n; ++k) {
            const double theta = two_pi * (static_cast<double>(k) + 0.5) / static_cast<double>(n);
            const cd z = std::polar(radius, theta);
            sum += integrand(z) * z;
        }
        n *= 2;
        const cd refined = sum / static_cast<double>(n);
        change = std::abs(refined - estimate);
        estimate = refined;
        if (change < opts.tolerance) {
            return estimate + residues;
        }
    }
    throw QuadratureError("contour quadrature did not converge after " +
                              std::to_string(opts.max_doublings) + " doublings",
                          change);
}

std::optional<std::pair<double, double>> bound_state_energies(double delta) {
    check_delta(delta);
    const double d2 = delta * delta;
    if (!(d2 - 2.0 > 1e-12)) {
        return std::nullopt;
    }
    const double omega = d2 / std::sqrt(d2 - 1.0);
    return std::pair{-omega, omega};
}

}  // namespace wga
