#include "wga/finite_size.hpp"

#include "wga/error.hpp"

#include <algorithm>
#include <cmath>

namespace wga {

DeviationSeries deviation(const LatticeSpec& spec_trunc, const LatticeSpec& spec_ref,
                          const TimeGrid& grid) {
    spec_trunc.validate();
    spec_ref.validate();
    if (spec_trunc.beta != spec_ref.beta || spec_trunc.delta != spec_ref.delta ||
        spec_trunc.alpha != spec_ref.alpha) {
        throw InvalidComparison("truncated and reference chains must share beta, delta and alpha");
    }
    if (spec_ref.n_sites < spec_trunc.n_sites) {
        throw InvalidComparison("reference chain must not be smaller than the truncated chain");
    }

    const auto trunc_norm = spec_trunc.normalized();
    const auto ref_norm = spec_ref.normalized();
    const Propagator trunc(build_hamiltonian(trunc_norm), initial_state(trunc_norm.n_sites));
    const Propagator full(build_hamiltonian(ref_norm), initial_state(ref_norm.n_sites));

    DeviationSeries out{grid, {}, {}, spec_trunc.n_sites, spec_ref.n_sites};
    out.d_values.reserve(grid.size());
    const auto n = static_cast<Eigen::Index>(spec_trunc.n_sites);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto a = trunc.state_at(grid[i]);
        const auto b = full.state_at(grid[i]);
        // Zero padding: entries of b beyond n pair with zeros.
        const std::complex<double> overlap = a.dot(b.head(n));
        const double d = 1.0 - std::norm(overlap);
        out.d_values.push_back(std::clamp(d, 0.0, 1.0));
    }
    return out;
}

DeviationSeries cumulative_deviation(DeviationSeries series) {
    const auto& tau = series.grid.tau();
    if (tau.size() < 2) {
        throw InsufficientData("cumulative deviation needs at least 2 grid points");
    }
    if (series.d_values.size() != tau.size()) {
        throw InsufficientData("deviation values missing or not aligned with the grid");
    }
    if (tau.front() != 0.0) {
        throw InvalidParameter("cumulative deviation needs a grid starting at tau = 0");
    }
    series.c_values.assign(tau.size(), std::nullopt);
    double integral = 0.0;
    for (std::size_t i = 1; i < tau.size(); ++i) {
        integral += 0.5 * (tau[i] - tau[i - 1]) * (series.d_values[i] + series.d_values[i - 1]);
        series.c_values[i] = integral / tau[i];
    }
    return series;
}

std::optional<double> onset_time(const DeviationSeries& series, double threshold) {
    if (!(threshold > 0.0)) {
        throw InvalidParameter("onset threshold must be positive");
    }
    const auto& tau = series.grid.tau();
    const auto& d = series.d_values;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i] > threshold) {
            if (i == 0) {
                return tau[0];
            }
            const double frac = (threshold - d[i - 1]) / (d[i] - d[i - 1]);
            return tau[i - 1] + frac * (tau[i] - tau[i - 1]);
        }
    }
    return std::nullopt;
}

}  // namespace wga
