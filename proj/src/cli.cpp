#include "wga/cli.hpp"

#include "wga/closed_form.hpp"
#include "wga/csv.hpp"
#include "wga/eme.hpp"
#include "wga/error.hpp"
#include "wga/experiments.hpp"
#include "wga/field.hpp"
#include "wga/finite_size.hpp"
#include "wga/lattice.hpp"
#include "wga/svg.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

namespace wga::cli {

namespace {

using nlohmann::json;

void emit(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << text;
    } else {
        write_file_atomic(path, text);
    }
}

TimeGrid grid_from(double tau_max, std::size_t steps) {
    if (!(tau_max > 0.0)) throw InvalidParameter("--tau-max must be positive");
    if (steps < 1) throw InvalidParameter("--steps must be at least 1");
    return TimeGrid::uniform(0.0, tau_max, steps + 1);
}

// Shortest text that reads back to the same double; for human-readable lines.
std::string shortest(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::vector<std::optional<double>> opt_column(const std::vector<double>& v) {
    return {v.begin(), v.end()};
}

struct Common {
    std::string out;
    std::string svg;
};

CLI::App* add_sub(CLI::App& app, const std::string& name, const std::string& desc,
                  std::string& config_path) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", config_path,
                    "JSON object of option values keyed by long option name; flags win");
    return sub;
}

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string json_scalar(const std::string& key, const json& v) {
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return format_double(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    throw UsageError("config key '" + key + "' must hold a scalar or a list of scalars");
}

// Splices the keys of a --config JSON file into args (subcommand first),
// skipping keys that are also given explicitly.
std::vector<std::string> merge_config(const CLI::App& app, std::vector<std::string> args) {
    if (args.empty() || args.front().rfind('-', 0) == 0) return args;
    const CLI::App* sub = app.get_subcommand_no_throw(args.front());
    if (sub == nullptr) return args;

    std::string path;
    std::vector<std::string> rest;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    if (path.empty()) return args;

    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw UsageError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw UsageError("config file '" + path + "' must hold a JSON object");

    auto given = [&](const std::string& flag) {
        return std::any_of(rest.begin(), rest.end(), [&](const std::string& a) {
            return a == flag || a.rfind(flag + "=", 0) == 0;
        });
    };
    std::vector<std::string> merged{args.front()};
    std::vector<std::string> positional;
    for (const auto& [key, value] : j.items()) {
        const CLI::Option* opt = sub->get_option_no_throw("--" + key);
        const bool is_positional = opt == nullptr && sub->get_option_no_throw(key) != nullptr &&
                                   sub->get_option_no_throw(key)->get_lnames().empty();
        if (key == "help" || key == "config" || (opt == nullptr && !is_positional)) {
            throw UsageError("unknown config key '" + key + "' for " + args.front());
        }
        std::vector<std::string> vals;
        if (value.is_array()) {
            for (const auto& v : value) vals.push_back(json_scalar(key, v));
        } else {
            vals.push_back(json_scalar(key, value));
        }
        if (is_positional) {
            if (std::none_of(rest.begin(), rest.end(),
                             [](const std::string& a) { return a.rfind('-', 0) != 0; })) {
                positional.insert(positional.end(), vals.begin(), vals.end());
            }
            continue;
        }
        if (given("--" + key)) continue;
        if (opt->get_expected_max() == 0) {
            if (vals.size() != 1 || (vals[0] != "true" && vals[0] != "false")) {
                throw UsageError("config flag '" + key + "' must be true or false");
            }
            if (vals[0] == "true") merged.push_back("--" + key);
            continue;
        }
        for (const auto& v : vals) {
            merged.push_back("--" + key);
            merged.push_back(v);
        }
    }
    merged.insert(merged.end(), rest.begin(), rest.end());
    merged.insert(merged.end(), positional.begin(), positional.end());
    return merged;
}

// ---- closed-form ----

struct ClosedFormArgs : Common {
    double delta{1.0};
    double tau_max{4.0};
    std::size_t steps{400};
    std::string mode{"reconciled"};
    std::string method{"series"};
};

void closed_form_cmd(const ClosedFormArgs& a, std::ostream& out) {
    const FormulaMode mode = a.mode == "printed" ? FormulaMode::printed : FormulaMode::reconciled;
    const TimeGrid grid = grid_from(a.tau_max, a.steps);
    CsvTable t;
    t.header = {"tau", "re_c0", "im_c0", "prob", "gamma_eff"};
    std::vector<double> prob;
    std::vector<std::complex<double>> c0;
    for (double tau : grid.tau()) {
        std::complex<double> c;
        if (a.method == "contour") {
            ContourOptions o;
            o.mode = mode;
            c = c0_contour(a.delta, tau, o);
        } else {
            c = c0_closed_form(a.delta, tau, {}, mode);
        }
        c0.push_back(c);
        prob.push_back(std::norm(c));
    }
    const auto g = effective_decay_rate(prob, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        t.rows.push_back({grid[i], c0[i].real(), c0[i].imag(), prob[i], g[i]});
    }
    emit(to_csv(t), a.out, out);
    if (!a.svg.empty()) {
        ChartOptions o;
        o.title = "Survival probability, delta = " + format_double(a.delta);
        o.y_label = "|c0|^2";
        write_file_atomic(a.svg, render_line_chart({{"|c0|^2", grid.tau(), opt_column(prob)}}, o));
    }
}

// ---- propagate ----

struct PropagateArgs : Common {
    std::size_t sites{10};
    double delta{1.0};
    double beta{1.0};
    double alpha{0.0};
    double tau_max{4.0};
    std::size_t steps{400};
};

void propagate_cmd(const PropagateArgs& a, std::ostream& out) {
    LatticeSpec spec;
    spec.n_sites = a.sites;
    spec.delta = a.delta;
    spec.beta = a.beta;
    spec.alpha = a.alpha;
    spec.validate();
    const LatticeSpec unit = spec.normalized();
    const TimeGrid grid = grid_from(a.tau_max, a.steps).with_beta(a.beta);
    const auto trace = propagate(build_hamiltonian(unit), initial_state(unit.n_sites), grid);
    const Eigen::MatrixXd p = site_probabilities(trace);
    const auto z = grid.z();
    CsvTable t;
    t.header = {"tau", "z_cm"};
    for (std::size_t s = 0; s < a.sites; ++s) t.header.push_back("p_" + std::to_string(s));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::vector<std::optional<double>> row{grid[i], z[i]};
        for (Eigen::Index s = 0; s < p.cols(); ++s) row.emplace_back(p(static_cast<Eigen::Index>(i), s));
        t.rows.push_back(std::move(row));
    }
    emit(to_csv(t), a.out, out);
    if (!a.svg.empty()) {
        std::vector<Series> ss;
        for (Eigen::Index s = 0; s < p.cols(); ++s) {
            std::vector<std::optional<double>> y;
            for (Eigen::Index i = 0; i < p.rows(); ++i) y.emplace_back(p(i, s));
            ss.push_back({"site " + std::to_string(s), grid.tau(), y});
        }
        ChartOptions o;
        o.title = "Site populations, N = " + std::to_string(a.sites) + ", delta = " +
                  format_double(a.delta);
        o.y_label = "|c_n|^2";
        write_file_atomic(a.svg, render_line_chart(ss, o));
    }
}

// ---- finite-size ----

struct FiniteSizeArgs : Common {
    std::size_t sites{10};
    std::size_t ref_sites{kDefaultReferenceSites};
    double delta{1.0};
    double tau_max{4.0};
    std::size_t steps{400};
    std::optional<double> threshold;
};

void finite_size_cmd(const FiniteSizeArgs& a, std::ostream& out, std::ostream& err) {
    LatticeSpec trunc;
    trunc.n_sites = a.sites;
    trunc.delta = a.delta;
    LatticeSpec ref = trunc;
    ref.n_sites = a.ref_sites;
    const TimeGrid grid = grid_from(a.tau_max, a.steps);
    const DeviationSeries s = cumulative_deviation(deviation(trunc, ref, grid));
    CsvTable t;
    t.header = {"tau", "d_n", "c_n"};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        t.rows.push_back({grid[i], s.d_values[i], s.c_values[i]});
    }
    emit(to_csv(t), a.out, out);
    if (a.threshold) {
        const auto on = onset_time(s, *a.threshold);
        err << "onset_time " << (on ? format_double(*on) : std::string("none")) << '\n';
    }
    if (!a.svg.empty()) {
        ChartOptions o;
        o.title = "Finite-size deviation, N = " + std::to_string(a.sites) + " vs " +
                  std::to_string(a.ref_sites) + ", delta = " + format_double(a.delta);
        o.y_label = "deviation";
        o.log_y = true;
        write_file_atomic(a.svg, render_line_chart({{"D_N", grid.tau(), opt_column(s.d_values)},
                                                    {"C_N", grid.tau(), s.c_values}},
                                                   o));
    }
}

// ---- EME options shared by eme-simulate and compare ----

struct OpticsArgs {
    double wavelength{0.633};
    double n0{1.457};
    double delta_n{2.5e-3};
    double sigma_x{3.0};
    double sigma_y{3.0};
    double dx{1.0};
    double dy{1.0};
    double margin_x{110.0};
    double margin_y{110.0};
    bool no_calibrate{false};

    void add(CLI::App* sub) {
        sub->add_option("--wavelength", wavelength, "Vacuum wavelength (um)")->capture_default_str();
        sub->add_option("--n0", n0, "Substrate index")->capture_default_str();
        sub->add_option("--delta-n", delta_n, "Peak index contrast (start value when calibrating)")
            ->capture_default_str();
        sub->add_option("--sigma-x", sigma_x, "Ricker width along x (um)")->capture_default_str();
        sub->add_option("--sigma-y", sigma_y, "Ricker width along y (um)")->capture_default_str();
        sub->add_option("--dx", dx, "Transverse step along x (um)")->capture_default_str();
        sub->add_option("--dy", dy, "Transverse step along y (um)")->capture_default_str();
        sub->add_option("--margin-x", margin_x, "Domain margin beyond the outer guides (um)")
            ->capture_default_str();
        sub->add_option("--margin-y", margin_y, "Domain half-height (um)")->capture_default_str();
        sub->add_flag("--no-calibrate", no_calibrate,
                      "Keep --delta-n instead of matching the bulk pair coupling to beta");
    }

    EmeConfig config() const {
        EmeConfig c;
        c.wavelength = wavelength;
        c.guide = RickerParams{delta_n, sigma_x, sigma_y, n0};
        c.grid = EmeGridSpec{dx, dy, margin_x, margin_y};
        c.calibrate = !no_calibrate;
        return c;
    }
};

// ---- eme-simulate ----

struct EmeSimArgs : Common {
    std::string preset_label{"A2"};
    std::optional<double> d0;
    std::optional<double> d;
    std::optional<std::size_t> guides;
    std::optional<double> beta;
    double tau_max{4.0};
    std::size_t steps{40};
    std::string overlap{"product"};
    std::string mode_out;
    OpticsArgs optics;
};

void eme_simulate_cmd(const EmeSimArgs& a, std::ostream& out) {
    ExperimentPreset p = preset(a.preset_label);
    if (a.d0) p.d0 = *a.d0;
    if (a.d) p.d = *a.d;
    if (a.guides) p.n_sites = *a.guides;
    if (a.beta) p.beta = *a.beta;
    const EmeConfig cfg = a.optics.config();
    const TimeGrid grid = grid_from(a.tau_max, a.steps);
    const EmeRun run = run_eme(p, grid, cfg);
    const Eigen::MatrixXd& probs = a.overlap == "coherent" ? run.probs_coherent : run.probs;

    CsvTable t;
    t.header = {"tau", "z_cm"};
    for (std::size_t s = 0; s < p.n_sites; ++s) t.header.push_back("c_" + std::to_string(s));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::vector<std::optional<double>> row{grid[i], run.z_cm[i]};
        for (Eigen::Index s = 0; s < probs.cols(); ++s) row.emplace_back(probs(static_cast<Eigen::Index>(i), s));
        t.rows.push_back(std::move(row));
    }
    emit(to_csv(t), a.out, out);
    if (!a.mode_out.empty()) {
        const TransverseGrid tg = grid_for(p.geometry(), cfg.grid);
        save_field(a.mode_out, localized_mode(run.guide, tg, cfg.wavelength, 0.0, 0.0,
                                              cfg.localized_window, cfg.solver));
    }
    if (!a.svg.empty()) {
        std::vector<Series> ss;
        for (Eigen::Index s = 0; s < probs.cols(); ++s) {
            std::vector<std::optional<double>> y;
            for (Eigen::Index i = 0; i < probs.rows(); ++i) y.emplace_back(probs(i, s));
            ss.push_back({"guide " + std::to_string(s), grid.tau(), y});
        }
        ChartOptions o;
        o.title = "EME guide intensities, " + p.label;
        o.y_label = "|c_i|^2";
        write_file_atomic(a.svg, render_line_chart(ss, o));
    }
}

// ---- eme-reconstruct ----

struct ReconstructArgs {
    std::string mode;
    double n_eff{1.457};
    double wavelength{0.633};
    double floor{0.05};
    double n0{1.457};
    std::string out;
};

void eme_reconstruct_cmd(const ReconstructArgs& a, std::ostream& out) {
    const RealField mode = load_field(a.mode);
    const ReconstructedIndex r = reconstruct_index(mode, a.n_eff, a.wavelength, a.floor, a.n0);
    if (!a.out.empty()) save_field(a.out, r.profile.n);
    const json j{{"valid_count", r.valid_count},
                 {"masked_count", r.valid.size() - r.valid_count},
                 {"negative_radicand", r.negative_radicand}};
    out << j.dump(2) << '\n';
}

// ---- eme-fit ----

struct FitArgs {
    std::string mode;
    double wavelength{0.633};
    double n0{1.457};
    double floor{0.05};
    bool no_smooth{false};
    std::string fitted_out;
    std::string out;
};

void eme_fit_cmd(const FitArgs& a, std::ostream& out) {
    const RealField mode = load_field(a.mode);
    FitOptions o;
    o.intensity_floor = a.floor;
    o.smooth_cuts = !a.no_smooth;
    const RickerFit f = fit_ricker(mode, a.wavelength, a.n0, o);
    if (!a.fitted_out.empty()) save_field(a.fitted_out, f.fitted_mode);
    const json j{{"delta_n", f.params.delta_n},
                 {"sigma_x_um", f.params.sigma_x},
                 {"sigma_y_um", f.params.sigma_y},
                 {"n0", f.params.n0},
                 {"fidelity", f.fidelity},
                 {"center_x_um", f.center_x},
                 {"center_y_um", f.center_y},
                 {"delta_n_estimate", f.delta_n_estimate},
                 {"n_eff_estimate", f.n_eff_estimate},
                 {"evaluations", f.evaluations}};
    emit(j.dump(2) + "\n", a.out, out);
}

// ---- compare ----

struct CompareArgs : Common {
    std::string preset_label;
    double tau_max{4.0};
    std::size_t steps{40};
    bool skip_eme{false};
    OpticsArgs optics;
};

void compare_cmd(const CompareArgs& a, std::ostream& out) {
    const ExperimentPreset p = preset(a.preset_label);
    const TimeGrid grid = grid_from(a.tau_max, a.steps);
    const ComparisonReport rep = compare_models(p, grid, a.optics.config(), !a.skip_eme);
    emit(rep.to_json().dump(2) + "\n", a.out, out);
    if (!a.svg.empty()) {
        std::vector<Series> ss;
        for (const auto& t : rep.traces) {
            std::vector<std::optional<double>> y;
            for (Eigen::Index i = 0; i < t.probs.rows(); ++i) y.emplace_back(t.probs(i, 0));
            ss.push_back({t.model, grid.tau(), y});
        }
        ChartOptions o;
        o.title = "Edge-site population, " + p.label;
        o.y_label = "|c0|^2";
        write_file_atomic(a.svg, render_line_chart(ss, o));
    }
}

// ---- preset ----

void preset_cmd(const std::string& label, bool as_json, std::ostream& out) {
    const ExperimentPreset p = preset(label);
    if (as_json) {
        out << p.to_json().dump(2) << '\n';
        return;
    }
    out << p.label << ": d0 = " << shortest(p.d0) << " um, d = " << shortest(p.d)
        << " um, beta0 = " << shortest(p.beta0) << " /cm, beta = " << shortest(p.beta)
        << " /cm, delta = " << shortest(p.delta) << ", N = " << p.n_sites << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Waveguide-array edge-defect toolkit: closed forms, chains, finite-size and EME"};
    app.name("wga");
    app.require_subcommand(1);
    std::string config_path;  // consumed by merge_config before parsing

    ClosedFormArgs cf;
    auto* s_cf = add_sub(app, "closed-form", "Survival amplitude c0(tau) of the semi-infinite chain", config_path);
    s_cf->add_option("--delta", cf.delta, "Boundary defect beta0/beta")->required();
    s_cf->add_option("--tau-max", cf.tau_max, "Largest tau = beta z")->capture_default_str();
    s_cf->add_option("--steps", cf.steps, "Number of tau intervals (steps+1 rows)")->capture_default_str();
    s_cf->add_option("--mode", cf.mode, "Series form")->check(CLI::IsMember({"reconciled", "printed"}))
        ->capture_default_str();
    s_cf->add_option("--method", cf.method, "Evaluation route")->check(CLI::IsMember({"series", "contour"}))
        ->capture_default_str();
    s_cf->add_option("--out", cf.out, "CSV output path (stdout when omitted)");
    s_cf->add_option("--svg", cf.svg, "SVG chart path");

    PropagateArgs pr;
    auto* s_pr = add_sub(app, "propagate", "Site populations of a finite chain", config_path);
    s_pr->add_option("--sites", pr.sites, "Number of sites")->capture_default_str();
    s_pr->add_option("--delta", pr.delta, "Boundary defect beta0/beta")->capture_default_str();
    s_pr->add_option("--beta", pr.beta, "Bulk coupling (1/cm), sets z = tau/beta")->capture_default_str();
    s_pr->add_option("--alpha", pr.alpha, "Uniform on-site term (1/cm)")->capture_default_str();
    s_pr->add_option("--tau-max", pr.tau_max, "Largest tau = beta z")->capture_default_str();
    s_pr->add_option("--steps", pr.steps, "Number of tau intervals")->capture_default_str();
    s_pr->add_option("--out", pr.out, "CSV output path (stdout when omitted)");
    s_pr->add_option("--svg", pr.svg, "SVG chart path");

    FiniteSizeArgs fs;
    auto* s_fs = add_sub(app, "finite-size", "Deviation D_N and its running average C_N", config_path);
    s_fs->add_option("--sites", fs.sites, "Truncated chain length N")->capture_default_str();
    s_fs->add_option("--ref-sites", fs.ref_sites, "Reference chain length")->capture_default_str();
    s_fs->add_option("--delta", fs.delta, "Boundary defect beta0/beta")->capture_default_str();
    s_fs->add_option("--tau-max", fs.tau_max, "Largest tau = beta z")->capture_default_str();
    s_fs->add_option("--steps", fs.steps, "Number of tau intervals")->capture_default_str();
    s_fs->add_option("--threshold", fs.threshold, "Report the first tau with D_N above this");
    s_fs->add_option("--out", fs.out, "CSV output path (stdout when omitted)");
    s_fs->add_option("--svg", fs.svg, "SVG chart path (log scale)");

    EmeSimArgs es;
    auto* s_es = add_sub(app, "eme-simulate", "Eigenmode-expansion run of a waveguide array", config_path);
    s_es->add_option("--preset", es.preset_label, "Geometry preset A1, A2 or A3")->capture_default_str();
    s_es->add_option("--d0", es.d0, "Override the first gap (um)");
    s_es->add_option("--d", es.d, "Override the bulk gap (um)");
    s_es->add_option("--guides", es.guides, "Override the number of guides");
    s_es->add_option("--beta", es.beta, "Override the calibration target coupling (1/cm)");
    s_es->add_option("--tau-max", es.tau_max, "Largest tau = beta z")->capture_default_str();
    s_es->add_option("--steps", es.steps, "Number of tau intervals")->capture_default_str();
    s_es->add_option("--overlap", es.overlap, "Intensity extraction")
        ->check(CLI::IsMember({"product", "coherent"}))
        ->capture_default_str();
    s_es->add_option("--mode-out", es.mode_out, "Write the isolated-guide mode as a field file");
    s_es->add_option("--out", es.out, "CSV output path (stdout when omitted)");
    s_es->add_option("--svg", es.svg, "SVG chart path");
    es.optics.add(s_es);

    ReconstructArgs rc;
    auto* s_rc = add_sub(app, "eme-reconstruct", "Index map from a mode amplitude field file", config_path);
    s_rc->add_option("--mode", rc.mode, "Mode amplitude field file")->required();
    s_rc->add_option("--n-eff", rc.n_eff, "Effective index of the mode")->capture_default_str();
    s_rc->add_option("--wavelength", rc.wavelength, "Vacuum wavelength (um)")->capture_default_str();
    s_rc->add_option("--floor", rc.floor, "Mask below this fraction of the peak amplitude")
        ->capture_default_str();
    s_rc->add_option("--n0", rc.n0, "Substrate index stored with the map")->capture_default_str();
    s_rc->add_option("--out", rc.out, "Field file for the masked index map");

    FitArgs ft;
    auto* s_ft = add_sub(app, "eme-fit", "Ricker fit to a measured mode amplitude field file", config_path);
    s_ft->add_option("--mode", ft.mode, "Mode amplitude field file")->required();
    s_ft->add_option("--wavelength", ft.wavelength, "Vacuum wavelength (um)")->capture_default_str();
    s_ft->add_option("--n0", ft.n0, "Substrate index")->capture_default_str();
    s_ft->add_option("--floor", ft.floor, "Reconstruction mask floor")->capture_default_str();
    s_ft->add_flag("--no-smooth", ft.no_smooth, "Locate minima on raw axis cuts");
    s_ft->add_option("--fitted-out", ft.fitted_out, "Field file for the fitted mode");
    s_ft->add_option("--out", ft.out, "JSON output path (stdout when omitted)");

    CompareArgs cp;
    auto* s_cp = add_sub(app, "compare", "Closed form vs coupled-mode vs EME for a preset", config_path);
    s_cp->add_option("--preset", cp.preset_label, "A1, A2 or A3")->required();
    s_cp->add_option("--tau-max", cp.tau_max, "Largest tau = beta z")->capture_default_str();
    s_cp->add_option("--steps", cp.steps, "Number of tau intervals")->capture_default_str();
    s_cp->add_flag("--skip-eme", cp.skip_eme, "Leave out the EME leg");
    s_cp->add_option("--out", cp.out, "JSON report path (stdout when omitted)");
    s_cp->add_option("--svg", cp.svg, "SVG chart path");
    cp.optics.add(s_cp);

    std::string preset_label;
    bool preset_json = false;
    auto* s_ps = add_sub(app, "preset", "Print a tabulated array set", config_path);
    s_ps->add_option("label", preset_label, "A1, A2 or A3")->required();
    s_ps->add_flag("--json", preset_json, "Emit JSON");

    try {
        const std::vector<std::string> merged = merge_config(app, args);
        std::vector<std::string> rev(merged.rbegin(), merged.rend());
        app.parse(rev);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        // Subcommand help is raised as a ParseError with success exit code.
        if (e.get_exit_code() == 0) {
            for (const CLI::App* sub : app.get_subcommands()) {
                out << sub->help();
            }
            if (app.get_subcommands().empty()) out << app.help();
            return 0;
        }
        err << "usage error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (s_cf->parsed()) closed_form_cmd(cf, out);
        else if (s_pr->parsed()) propagate_cmd(pr, out);
        else if (s_fs->parsed()) finite_size_cmd(fs, out, err);
        else if (s_es->parsed()) eme_simulate_cmd(es, out);
        else if (s_rc->parsed()) eme_reconstruct_cmd(rc, out);
        else if (s_ft->parsed()) eme_fit_cmd(ft, out);
        else if (s_cp->parsed()) compare_cmd(cp, out);
        else if (s_ps->parsed()) preset_cmd(preset_label, preset_json, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    out.flush();
    return 0;
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace wga::cli
