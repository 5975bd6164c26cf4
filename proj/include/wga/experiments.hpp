// The three array sets and the closed-form / coupled-mode /
// EME comparison
//
// Couplings are in 1/cm, gaps in um. Every model is evaluated on one shared
// TimeGrid in tau = beta z; the EME leg maps tau to z = tau / beta_num where
// beta_num is the pair coupling its own supermodes give at the bulk gap.

#pragma once

#include "wga/eme.hpp"
#include "wga/lattice.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace wga {

struct ExperimentPreset {
    std::string label;
    double d0{0.0};     // first gap (um)
    double d{0.0};      // bulk gap (um)
    double beta0{0.0};  // first coupling (1/cm)
    double beta{0.0};   // bulk coupling (1/cm)
    double delta{0.0};  // beta0 / beta as tabulated
    std::size_t n_sites{10};
    double tau_max{4.0};

    LatticeSpec lattice() const;
    WaveguideGeometry geometry() const;
    nlohmann::json to_json() const;
};

// A1, A2 or A3; anything else throws InvalidParameter.
ExperimentPreset preset(const std::string& label);
std::vector<std::string> preset_labels();

// sqrt(mean((a - b)^2)); throws InvalidParameter on empty or unequal input.
double rms_error(const std::vector<double>& a, const std::vector<double>& b);

struct EmeConfig {
    double wavelength{0.633};
    RickerParams guide{2.5e-3, 3.0, 3.0, 1.457};
    EmeGridSpec grid{};
    bool calibrate{true};        // tune guide.delta_n so the bulk pair coupling equals preset beta
    double calibration_tol{1e-3};
    double localized_window{70.0};
    ModeSolverOptions solver{};
};

struct EmeRun {
    RickerParams guide;          // after calibration
    double beta_num{0.0};        // pair coupling at d (1/cm)
    double beta0_num{0.0};       // pair coupling at d0 (1/cm)
    double delta_num{0.0};
    std::size_t n_modes{0};
    double boundary_ratio{0.0};
    std::vector<double> z_cm;
    Eigen::MatrixXd probs;           // times x guides, intensity-product overlap
    Eigen::MatrixXd probs_coherent;  // times x guides, coherent overlap
};

EmeRun run_eme(const ExperimentPreset& p, const TimeGrid& grid, const EmeConfig& cfg);

struct ModelTrace {
    std::string model;
    Eigen::MatrixXd probs;  // times x sites; one column for the closed form
    std::vector<std::optional<double>> gamma_eff;
};

struct PairRms {
    std::string a;
    std::string b;
    double rms_site0{0.0};
    std::optional<double> rms_all_sites;
};

struct ComparisonReport {
    ExperimentPreset preset;
    TimeGrid grid;
    std::vector<ModelTrace> traces;  // closed_form, coupled_mode, then the EME legs if run
    std::vector<PairRms> rms;
    std::optional<EmeRun> eme;

    const ModelTrace* trace(const std::string& model) const;
    nlohmann::json to_json() const;
};

// Models: closed_form (reconciled series, semi-infinite), coupled_mode
// (n_sites chain with the tabulated delta), and with run_eme: eme, eme_coherent
// and coupled_mode_fitted (chain with the EME-derived delta). The grid must
// lie within [0, tau_max].
ComparisonReport compare_models(const ExperimentPreset& p, const TimeGrid& grid,
                                const EmeConfig& cfg, bool run_eme_leg = true);

}  // namespace wga
