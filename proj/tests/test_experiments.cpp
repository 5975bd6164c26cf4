#include "wga/closed_form.hpp"
#include "wga/error.hpp"
#include "wga/experiments.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace wga;

namespace {

std::vector<double> col(const Eigen::MatrixXd& m, Eigen::Index c) {
    std::vector<double> v(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) v[static_cast<std::size_t>(r)] = m(r, c);
    return v;
}

// Local minima of a sampled curve, refined by a parabola through the
// neighbouring samples.
std::vector<double> local_minima(const std::vector<double>& tau, const std::vector<double>& y) {
    std::vector<double> out;
    for (std::size_t i = 1; i + 1 < y.size(); ++i) {
        if (y[i] < y[i - 1] && y[i] <= y[i + 1]) {
            const double h = tau[i] - tau[i - 1];
            const double den = y[i - 1] - 2 * y[i] + y[i + 1];
            out.push_back(tau[i] + (den > 0 ? 0.5 * h * (y[i - 1] - y[i + 1]) / den : 0.0));
        }
    }
    return out;
}

}  // namespace

TEST_CASE("presets carry the tabulated rows") {
    const auto a1 = preset("A1");
    CHECK(a1.d0 == 31.2);
    CHECK(a1.d == 27.1);
    CHECK(a1.beta0 == 0.090);
    CHECK(a1.beta == 0.190);
    CHECK(a1.delta == 0.474);
    const auto a2 = preset("A2");
    CHECK(a2.d0 == 27.1);
    CHECK(a2.beta0 == 0.214);
    CHECK(a2.delta == 1.0);
    const auto a3 = preset("A3");
    CHECK(a3.d0 == 19.6);
    CHECK(a3.beta0 == 0.800);
    CHECK(a3.beta == 0.192);
    CHECK(a3.delta == 4.17);
    for (const auto& l : preset_labels()) {
        const auto p = preset(l);
        CHECK(p.n_sites == 10);
        CHECK(p.tau_max == 4.0);
        CHECK(std::abs(p.beta0 / p.beta / p.delta - 1.0) < 0.02);
        CHECK(p.geometry().size() == 10);
        CHECK(p.to_json()["label"] == l);
    }
    CHECK_THROWS_AS(preset("A4"), InvalidParameter);
}

TEST_CASE("rms error") {
    const std::vector<double> a{0.1, 0.2, 0.3};
    CHECK(rms_error(a, a) == 0.0);
    CHECK(rms_error(a, {0.15, 0.25, 0.35}) == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(rms_error({0.0, 0.0}, {3.0, 4.0}) == doctest::Approx(std::sqrt(12.5)));
    CHECK_THROWS_AS(rms_error(a, {1.0}), InvalidParameter);
    CHECK_THROWS_AS(rms_error({}, {}), InvalidParameter);
}

TEST_CASE("A2 coupled-mode chain agrees with the closed form") {
    const auto g = TimeGrid::uniform(0.0, 4.0, 201);
    const auto rep = compare_models(preset("A2"), g, EmeConfig{}, false);
    CHECK_FALSE(rep.eme.has_value());
    CHECK(rep.traces.size() == 2);
    REQUIRE(rep.rms.size() == 1);
    CHECK(rep.rms[0].rms_site0 < 1e-3);
    CHECK(rep.rms[0].rms_site0 >= 0.0);
    CHECK_FALSE(rep.rms[0].rms_all_sites.has_value());
    const auto* cm = rep.trace("coupled_mode");
    REQUIRE(cm != nullptr);
    CHECK(cm->probs.cols() == 10);
    CHECK((cm->probs.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-10);
    CHECK(rep.trace("eme") == nullptr);
    const auto j = rep.to_json();
    CHECK(j["eme"].is_null());
    CHECK(j["tau"].size() == 201);
    CHECK(j["traces"]["closed_form"]["gamma_eff"][0].is_null());
}

TEST_CASE("A3 coupled-mode minima landmarks") {
    const auto g = TimeGrid::uniform(0.0, 4.0, 801);
    const auto rep = compare_models(preset("A3"), g, EmeConfig{}, false);
    const auto mins = local_minima(g.tau(), col(rep.trace("coupled_mode")->probs, 0));
    REQUIRE(mins.size() >= 2);
    CHECK(std::abs(mins.front() - 0.38) < 0.05);
    CHECK(std::any_of(mins.begin(), mins.end(), [](double t) { return std::abs(t - 3.29) < 0.05; }));
}

TEST_CASE("A1 decay rate settles at late times") {
    const auto g = TimeGrid::uniform(0.0, 4.0, 401);
    const auto rep = compare_models(preset("A1"), g, EmeConfig{}, false);
    const auto& ge = rep.trace("coupled_mode")->gamma_eff;
    std::vector<double> late, early;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!ge[i]) continue;
        if (g[i] >= 2.0) late.push_back(*ge[i]);
        if (g[i] > 0.0 && g[i] < 0.5) early.push_back(*ge[i]);
    }
    const double mean = std::accumulate(late.begin(), late.end(), 0.0) / late.size();
    double var = 0.0;
    for (double v : late) var += (v - mean) * (v - mean);
    const double rel_std = std::sqrt(var / late.size()) / mean;
    CHECK(rel_std < 0.25);
    // Short-time rate is far from the late plateau (quadratic onset).
    CHECK(early.front() < 0.25 * mean);
}

TEST_CASE("comparison grid must stay inside the preset window") {
    CHECK_THROWS_AS(compare_models(preset("A2"), TimeGrid::uniform(0.0, 5.0, 11), EmeConfig{}, false),
                    InvalidParameter);
}

TEST_CASE("A2 full comparison including the EME leg") {
    // Ten uniform samples on (0, 4] plus tau = 1 at index 2.
    std::vector<double> t{0.4, 0.8, 1.0};
    for (int i = 3; i <= 10; ++i) t.push_back(0.4 * i);
    const TimeGrid g(t);
    const auto rep = compare_models(preset("A2"), g, EmeConfig{});
    REQUIRE(rep.eme.has_value());
    CHECK(rep.traces.size() == 5);
    CHECK(rep.rms.size() == 10);
    CHECK(std::abs(rep.eme->beta_num / 0.214 - 1.0) < 2e-3);
    CHECK(rep.eme->delta_num == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rep.eme->n_modes == 10);
    const auto& eme = rep.trace("eme")->probs;
    CHECK((eme.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
    for (const auto& r : rep.rms) {
        CHECK(r.rms_site0 >= 0.0);
        if (r.a == "coupled_mode_fitted" || r.b == "coupled_mode_fitted") continue;
        if (r.a == "coupled_mode" && r.b == "eme") CHECK(*r.rms_all_sites < 0.06);
    }
    std::vector<double> a, b;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (i == 2) continue;
        const double j1 = std::cyl_bessel_j(1.0, 2.0 * g[i]) / g[i];
        a.push_back(j1 * j1);
        b.push_back(eme(static_cast<Eigen::Index>(i), 0));
    }
    CHECK(rms_error(a, b) < 0.06);
    const double j1 = std::cyl_bessel_j(1.0, 2.0);
    CHECK(std::abs(eme(2, 0) - j1 * j1) < 0.05);
    const auto j = rep.to_json();
    CHECK(j["eme"]["n_modes"] == 10);
    CHECK(j["traces"]["eme"]["probabilities"].size() == 11);
}

TEST_CASE("A3 closed-form minima are deeper than the EME minima") {
    std::vector<double> t;
    for (int i = 0; i <= 20; ++i) t.push_back(3.09 + 0.02 * i);
    const TimeGrid g(t);
    const auto run = run_eme(preset("A3"), g, EmeConfig{});
    double cf_min = 1.0, eme_min = 1.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        cf_min = std::min(cf_min, std::norm(c0_closed_form(4.17, g[i])));
        eme_min = std::min(eme_min, run.probs(static_cast<Eigen::Index>(i), 0));
    }
    CHECK(cf_min < eme_min);
}
