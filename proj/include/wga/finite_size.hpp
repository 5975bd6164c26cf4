// Deviation of a truncated chain from a large reference

#pragma once

#include "wga/lattice.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace wga {

inline constexpr std::size_t kDefaultReferenceSites = 600;

struct DeviationSeries {
    TimeGrid grid;
    std::vector<double> d_values;                // D_N(tau) = 1 - |<trunc|full>|^2
    std::vector<std::optional<double>> c_values;  // C_N(tau); empty until filled, missing at tau = 0
    std::size_t n_trunc{0};
    std::size_t n_ref{0};
};

// Both chains start from the edge excitation and evolve in units of beta.
// The truncated state is zero-padded to the reference dimension.
DeviationSeries deviation(const LatticeSpec& spec_trunc, const LatticeSpec& spec_ref,
                          const TimeGrid& grid);

// C_N(tau) = (1/tau) * integral_0^tau D_N, composite trapezoid on the grid.
DeviationSeries cumulative_deviation(DeviationSeries series);

// First tau with D_N > threshold, linearly interpolated. nullopt if never crossed.
std::optional<double> onset_time(const DeviationSeries& series, double threshold);

}  // namespace wga
