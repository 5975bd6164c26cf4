#include "wga/experiments.hpp"

#include "wga/closed_form.hpp"
#include "wga/error.hpp"

#include <cmath>

namespace wga {

LatticeSpec ExperimentPreset::lattice() const {
    LatticeSpec s;
    s.n_sites = n_sites;
    s.beta = beta;
    s.delta = delta;
    s.alpha = 0.0;
    return s;
}

WaveguideGeometry ExperimentPreset::geometry() const {
    return WaveguideGeometry::from_gaps(d0, d, n_sites);
}

nlohmann::json ExperimentPreset::to_json() const {
    return nlohmann::json{{"label", label},       {"d0_um", d0},       {"d_um", d},
                          {"beta0_per_cm", beta0}, {"beta_per_cm", beta}, {"delta", delta},
                          {"n_sites", n_sites},    {"tau_max", tau_max}};
}

ExperimentPreset preset(const std::string& label) {
    // Tabulated values; delta is the listed ratio, not recomputed from beta0/beta.
    if (label == "A1") return {"A1", 31.2, 27.1, 0.090, 0.190, 0.474};
    if (label == "A2") return {"A2", 27.1, 27.1, 0.214, 0.214, 1.0};
    if (label == "A3") return {"A3", 19.6, 27.1, 0.800, 0.192, 4.17};
    throw InvalidParameter("unknown preset '" + label + "' (expected A1, A2 or A3)");
}

std::vector<std::string> preset_labels() { return {"A1", "A2", "A3"}; }

double rms_error(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || a.size() != b.size()) {
        throw InvalidParameter("rms_error needs two non-empty series of equal length");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += (a[i] - b[i]) * (a[i] - b[i]);
    }
    return std::sqrt(acc / static_cast<double>(a.size()));
}

EmeRun run_eme(const ExperimentPreset& p, const TimeGrid& grid, const EmeConfig& cfg) {
    EmeRun run;
    run.guide = cfg.guide;
    if (cfg.calibrate) {
        run.guide = calibrate_contrast(cfg.guide, p.d, p.beta, cfg.wavelength, cfg.grid,
                                       cfg.calibration_tol, cfg.solver);
    }
    run.beta_num = pair_coupling(run.guide, p.d, cfg.wavelength, cfg.grid, cfg.solver).beta_per_cm;
    run.beta0_num = p.d0 == p.d ? run.beta_num
                                : pair_coupling(run.guide, p.d0, cfg.wavelength, cfg.grid, cfg.solver)
                                      .beta_per_cm;
    run.delta_num = run.beta0_num / run.beta_num;

    const WaveguideGeometry geom = p.geometry();
    const TransverseGrid tg = grid_for(geom, cfg.grid);
    const ModeSet modes = solve_modes(array_profile(run.guide, geom, tg), cfg.wavelength,
                                      static_cast<int>(p.n_sites), cfg.solver);
    run.n_modes = modes.size();
    run.boundary_ratio = modes.boundary_ratio;
    if (modes.modes.empty()) {
        throw SolverError("array supports no bound supermode", 0.0);
    }

    const RealField phi = localized_mode(run.guide, tg, cfg.wavelength, 0.0, 0.0,
                                         cfg.localized_window, cfg.solver);
    const auto [wx, wy] = matched_waists(phi);
    const ComplexField input = gaussian_input(geom, wx, wy, tg);

    for (double tau : grid.tau()) {
        run.z_cm.push_back(tau / run.beta_num);
    }
    const auto fields = propagate_eme(modes, input, run.z_cm);
    const auto n_t = static_cast<Eigen::Index>(grid.size());
    const auto n_s = static_cast<Eigen::Index>(p.n_sites);
    run.probs.resize(n_t, n_s);
    run.probs_coherent.resize(n_t, n_s);
    for (Eigen::Index t = 0; t < n_t; ++t) {
        const auto& f = fields[static_cast<std::size_t>(t)];
        const auto prod = extract_intensities(f, phi, geom, OverlapKind::intensity_product);
        const auto coh = extract_intensities(f, phi, geom, OverlapKind::coherent);
        for (Eigen::Index s = 0; s < n_s; ++s) {
            run.probs(t, s) = prod[static_cast<std::size_t>(s)];
            run.probs_coherent(t, s) = coh[static_cast<std::size_t>(s)];
        }
    }
    return run;
}

namespace {

std::vector<double> column(const Eigen::MatrixXd& m, Eigen::Index c) {
    std::vector<double> out(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        out[static_cast<std::size_t>(r)] = m(r, c);
    }
    return out;
}

ModelTrace make_trace(std::string model, Eigen::MatrixXd probs, const TimeGrid& grid) {
    ModelTrace t;
    t.model = std::move(model);
    t.gamma_eff = effective_decay_rate(column(probs, 0), grid);
    t.probs = std::move(probs);
    return t;
}

ModelTrace chain_trace(std::string model, const ExperimentPreset& p, double delta,
                       const TimeGrid& grid) {
    LatticeSpec spec = p.lattice();
    spec.delta = delta;
    const LatticeSpec unit = spec.normalized();
    const auto trace = propagate(build_hamiltonian(unit), initial_state(unit.n_sites), grid);
    return make_trace(std::move(model), site_probabilities(trace), grid);
}

PairRms pair_rms(const ModelTrace& a, const ModelTrace& b) {
    PairRms r;
    r.a = a.model;
    r.b = b.model;
    r.rms_site0 = rms_error(column(a.probs, 0), column(b.probs, 0));
    if (a.probs.cols() == b.probs.cols() && a.probs.cols() > 1) {
        const Eigen::MatrixXd d = a.probs - b.probs;
        r.rms_all_sites = std::sqrt(d.squaredNorm() / static_cast<double>(d.size()));
    }
    return r;
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(m(r, c));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

const ModelTrace* ComparisonReport::trace(const std::string& model) const {
    for (const auto& t : traces) {
        if (t.model == model) {
            return &t;
        }
    }
    return nullptr;
}

ComparisonReport compare_models(const ExperimentPreset& p, const TimeGrid& grid,
                                const EmeConfig& cfg, bool run_eme_leg) {
    if (grid.front() < 0.0 || grid.back() > p.tau_max) {
        throw InvalidParameter("comparison grid must lie within [0, " + format_double(p.tau_max) +
                               "]");
    }
    ComparisonReport rep{p, grid, {}, {}, std::nullopt};

    Eigen::MatrixXd cf(static_cast<Eigen::Index>(grid.size()), 1);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        cf(static_cast<Eigen::Index>(i), 0) = std::norm(c0_closed_form(p.delta, grid[i]));
    }
    rep.traces.push_back(make_trace("closed_form", cf, grid));
    rep.traces.push_back(chain_trace("coupled_mode", p, p.delta, grid));

    if (run_eme_leg) {
        EmeRun run = run_eme(p, grid, cfg);
        rep.traces.push_back(make_trace("eme", run.probs, grid));
        rep.traces.push_back(make_trace("eme_coherent", run.probs_coherent, grid));
        rep.traces.push_back(chain_trace("coupled_mode_fitted", p, run.delta_num, grid));
        rep.eme = std::move(run);
    }
    for (std::size_t i = 0; i < rep.traces.size(); ++i) {
        for (std::size_t j = i + 1; j < rep.traces.size(); ++j) {
            rep.rms.push_back(pair_rms(rep.traces[i], rep.traces[j]));
        }
    }
    return rep;
}

nlohmann::json ComparisonReport::to_json() const {
    nlohmann::json j;
    j["preset"] = preset.to_json();
    j["tau"] = grid.tau();
    nlohmann::json tr = nlohmann::json::object();
    for (const auto& t : traces) {
        nlohmann::json g = nlohmann::json::array();
        for (const auto& v : t.gamma_eff) {
            g.push_back(v ? nlohmann::json(*v) : nlohmann::json(nullptr));
        }
        tr[t.model] = {{"probabilities", matrix_json(t.probs)}, {"gamma_eff", g}};
    }
    j["traces"] = tr;
    nlohmann::json rj = nlohmann::json::array();
    for (const auto& r : rms) {
        rj.push_back({{"a", r.a},
                      {"b", r.b},
                      {"rms_site0", r.rms_site0},
                      {"rms_all_sites", r.rms_all_sites ? nlohmann::json(*r.rms_all_sites)
                                                        : nlohmann::json(nullptr)}});
    }
    j["rms"] = rj;
    if (eme) {
        j["eme"] = {{"delta_n", eme->guide.delta_n},
                    {"sigma_x_um", eme->guide.sigma_x},
                    {"sigma_y_um", eme->guide.sigma_y},
                    {"n0", eme->guide.n0},
                    {"beta_num_per_cm", eme->beta_num},
                    {"beta0_num_per_cm", eme->beta0_num},
                    {"delta_num", eme->delta_num},
                    {"n_modes", eme->n_modes},
                    {"boundary_ratio", eme->boundary_ratio},
                    {"z_cm", eme->z_cm}};
    } else {
        j["eme"] = nullptr;
    }
    return j;
}

}  // namespace wga
