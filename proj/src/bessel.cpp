#include "wga/bessel.hpp"

#include "wga/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wga {

namespace {

constexpr double kDomain = 1e4;
constexpr double kRescaleAbove = 1e250;

void check_domain(double x) {
    if (!std::isfinite(x) || std::abs(x) >= kDomain) {
        throw RangeError("bessel_j argument outside |x| < 1e4: " + std::to_string(x));
    }
}

// Recurrence start order: well past both the requested order and the
// turning point l ~ x so the seeded tail carries no visible error.
int start_order(int max_order, double x) {
    const double lead = std::max(static_cast<double>(max_order), x);
    int m = static_cast<int>(lead + 30.0 + 8.0 * std::sqrt(lead + 1.0));
    return m + (m % 2);  // even start keeps the normalisation sum aligned
}

// Fills out[0..max_order] with J_l(x) for x > 0.
void miller(int max_order, double x, std::vector<double>& out) {
    const int m = start_order(max_order, x);
    out.assign(static_cast<std::size_t>(max_order) + 1, 0.0);

    double next = 0.0;  // J_{l+1}
    double cur = 1e-300;  // J_l, arbitrary seed
    double norm = 0.0;
    for (int l = m; l >= 1; --l) {
        // J_{l-1} = (2l/x) J_l - J_{l+1}
        const double prev = (2.0 * l / x) * cur - next;
        next = cur;
        cur = prev;
        const int lm1 = l - 1;
        if (lm1 <= max_order) {
            out[static_cast<std::size_t>(lm1)] = cur;
        }
        if (lm1 > 0 && lm1 % 2 == 0) {
            norm += cur;
        }
        if (std::abs(cur) > kRescaleAbove) {
            cur /= kRescaleAbove;
            next /= kRescaleAbove;
            norm /= kRescaleAbove;
            for (auto& v : out) {
                v /= kRescaleAbove;
            }
        }
    }
    norm = 2.0 * norm + cur;  // cur now holds the unnormalised J_0
    for (auto& v : out) {
        v /= norm;
    }
}

}  // namespace

std::vector<double> bessel_j_sequence(int max_order, double x) {
    if (max_order < 0) {
        throw InvalidParameter("bessel_j_sequence needs max_order >= 0");
    }
    check_domain(x);
    std::vector<double> out;
    if (x == 0.0) {
        out.assign(static_cast<std::size_t>(max_order) + 1, 0.0);
        out[0] = 1.0;
        return out;
    }
    const double ax = std::abs(x);
    miller(max_order, ax, out);
    if (x < 0.0) {
        for (std::size_t l = 1; l < out.size(); l += 2) {
            out[l] = -out[l];
        }
    }
    return out;
}

double bessel_j(int order, double x) {
    const int l = std::abs(order);
    const double value = bessel_j_sequence(l, x)[static_cast<std::size_t>(l)];
    return (order < 0 && (l % 2 == 1)) ? -value : value;
}

}  // namespace wga
