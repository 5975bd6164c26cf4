#include "wga/cli.hpp"
#include "wga/csv.hpp"
#include "wga/eme.hpp"
#include "wga/field.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result call(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = wga::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("wga_cli_" + std::to_string(::getpid()))) {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

wga::CsvTable parse(const std::string& text) {
    std::istringstream in(text);
    return wga::read_csv(in);
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
    CHECK(call({}).code == 2);
    CHECK(call({"bogus"}).code == 2);
    CHECK(call({"closed-form"}).code == 2);  // --delta is required
    CHECK(call({"closed-form", "--delta", "1", "--nope"}).code == 2);
    CHECK(call({"closed-form", "--delta", "abc"}).code == 2);
    CHECK(call({"closed-form", "--delta", "1", "--mode", "other"}).code == 2);
    const auto r = call({"preset"});
    CHECK(r.code == 2);
    CHECK(r.err.find("usage error") != std::string::npos);
}

TEST_CASE("domain errors exit with 1") {
    CHECK(call({"closed-form", "--delta", "-1"}).code == 1);
    CHECK(call({"preset", "A9"}).code == 1);
    CHECK(call({"propagate", "--sites", "1"}).code == 1);
    CHECK(call({"eme-fit", "--mode", "/nonexistent/mode.txt"}).code == 1);
}

TEST_CASE("help for every subcommand") {
    for (const char* sub : {"closed-form", "propagate", "finite-size", "eme-simulate", "eme-reconstruct",
                            "eme-fit", "compare", "preset"}) {
        const auto r = call({sub, "--help"});
        CAPTURE(sub);
        CHECK(r.code == 0);
        CHECK(r.out.find("--config") != std::string::npos);
    }
    CHECK(call({"--help"}).code == 0);
}

TEST_CASE("closed-form table") {
    const auto r = call({"closed-form", "--delta", "1.0", "--tau-max", "4", "--steps", "400"});
    REQUIRE(r.code == 0);
    const auto t = parse(r.out);
    CHECK(t.header == std::vector<std::string>{"tau", "re_c0", "im_c0", "prob", "gamma_eff"});
    REQUIRE(t.rows.size() == 401);
    CHECK(*t.rows[0][t.column("tau")] == 0.0);
    CHECK(*t.rows[0][t.column("prob")] == 1.0);
    CHECK_FALSE(t.rows[0][t.column("gamma_eff")].has_value());
    CHECK(*t.rows[400][t.column("tau")] == 4.0);
    const double j = std::cyl_bessel_j(1.0, 4.0) / 2.0;
    CHECK(*t.rows[200][t.column("prob")] == doctest::Approx(j * j).epsilon(1e-12));
    // contour route agrees with the series
    const auto c = parse(call({"closed-form", "--delta", "0.474", "--method", "contour", "--steps", "8"}).out);
    const auto s = parse(call({"closed-form", "--delta", "0.474", "--steps", "8"}).out);
    for (std::size_t i = 0; i < 9; ++i) CHECK(std::abs(*c.rows[i][3] - *s.rows[i][3]) < 1e-6);
}

TEST_CASE("files round trip bit-identically and runs are deterministic") {
    TempDir dir;
    for (const auto& args : std::vector<std::vector<std::string>>{
             {"closed-form", "--delta", "4.17", "--steps", "50"},
             {"propagate", "--sites", "10", "--delta", "0.474", "--beta", "0.19", "--steps", "40"},
             {"finite-size", "--sites", "10", "--delta", "1.0", "--steps", "40"}}) {
        auto with_out = args;
        with_out.insert(with_out.end(), {"--out", dir / "a.csv", "--svg", dir / "a.svg"});
        REQUIRE(call(with_out).code == 0);
        const std::string first = slurp(dir / "a.csv");
        REQUIRE(call(with_out).code == 0);
        CHECK(slurp(dir / "a.csv") == first);
        const auto table = wga::load_csv(dir / "a.csv");
        CHECK(wga::to_csv(table) == first);
        CHECK(call(args).out == first);
        CHECK(first.find('\r') == std::string::npos);
        CHECK(slurp(dir / "a.svg").rfind("<svg", 0) == 0);
    }
}

TEST_CASE("propagate table") {
    const auto t = parse(call({"propagate", "--sites", "10", "--delta", "0.474", "--beta", "0.19", "--steps", "40"}).out);
    REQUIRE(t.header.size() == 12);
    CHECK(t.header[1] == "z_cm");
    CHECK(*t.rows[40][1] == doctest::Approx(4.0 / 0.19));
    for (const auto& row : t.rows) {
        double s = 0.0;
        for (std::size_t c = 2; c < row.size(); ++c) s += *row[c];
        CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("finite-size table and onset") {
    const auto r = call({"finite-size", "--sites", "10", "--ref-sites", "600", "--delta", "1.0", "--tau-max", "4",
                         "--threshold", "1e-6"});
    REQUIRE(r.code == 0);
    const auto t = parse(r.out);
    CHECK(t.header == std::vector<std::string>{"tau", "d_n", "c_n"});
    CHECK(*t.rows[0][1] == 0.0);
    CHECK_FALSE(t.rows[0][2].has_value());
    CHECK(*t.rows.back()[2] == doctest::Approx(4.1917030441413416e-4).epsilon(1e-10));
    CHECK(r.err.find("onset_time 2.36") != std::string::npos);
}

TEST_CASE("preset output") {
    const auto r = call({"preset", "A3", "--json"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["d0_um"] == 19.6);
    CHECK(j["d_um"] == 27.1);
    CHECK(j["beta0_per_cm"] == 0.8);
    CHECK(j["beta_per_cm"] == 0.192);
    CHECK(j["delta"] == 4.17);
    CHECK(call({"preset", "A1"}).out.find("delta = 0.474") != std::string::npos);
}

TEST_CASE("config files") {
    TempDir dir;
    {
        std::ofstream(dir / "cf.json") << R"({"delta": 1.0, "tau-max": 2, "steps": 4})";
        std::ofstream(dir / "bad.json") << R"({"delta": 1.0, "colour": "red"})";
        std::ofstream(dir / "broken.json") << "{not json";
        std::ofstream(dir / "ps.json") << R"({"label": "A2", "json": true})";
    }
    const auto a = call({"closed-form", "--config", dir / "cf.json"});
    REQUIRE(a.code == 0);
    const auto ta = parse(a.out);
    CHECK(ta.rows.size() == 5);
    CHECK(*ta.rows.back()[0] == 2.0);
    const auto b = parse(call({"closed-form", "--config", dir / "cf.json", "--steps", "8"}).out);
    CHECK(b.rows.size() == 9);
    CHECK(call({"closed-form", "--config", dir / "bad.json"}).code == 2);
    CHECK(call({"closed-form", "--config", dir / "broken.json"}).code == 2);
    CHECK(call({"closed-form", "--config", dir / "missing.json"}).code == 2);
    const auto p = call({"preset", "--config", dir / "ps.json"});
    REQUIRE(p.code == 0);
    CHECK(nlohmann::json::parse(p.out)["label"] == "A2");
}

TEST_CASE("compare without the EME leg") {
    TempDir dir;
    REQUIRE(call({"compare", "--preset", "A1", "--skip-eme", "--steps", "20", "--out", dir / "r.json",
                  "--svg", dir / "r.svg"})
                .code == 0);
    std::ifstream in(dir / "r.json");
    const auto j = nlohmann::json::parse(in);
    CHECK(j["preset"]["label"] == "A1");
    CHECK(j["tau"].size() == 21);
    CHECK(j["eme"].is_null());
    CHECK(j["rms"][0]["a"] == "closed_form");
    CHECK(j["rms"][0]["b"] == "coupled_mode");
    CHECK(call({"compare", "--preset", "A1", "--skip-eme", "--tau-max", "6"}).code == 1);
}

TEST_CASE("reconstruct and fit from a mode file") {
    TempDir dir;
    const wga::RickerParams p{3e-3, 4.0, 4.0, 1.457};
    const auto g = wga::TransverseGrid::covering(-20, 20, -20, 20, 0.5, 0.5);
    const auto ms = wga::solve_modes(wga::ricker_profile(p, g), 0.633, 1);
    wga::save_field(dir / "mode.txt", ms.modes[0]);

    const auto r = call({"eme-reconstruct", "--mode", dir / "mode.txt", "--n-eff", wga::format_double(ms.n_eff[0]),
                         "--out", dir / "n.txt"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["valid_count"].get<int>() > 100);
    CHECK(j["negative_radicand"] == 0);
    const auto n = wga::load_field(dir / "n.txt");
    CHECK(n.at(g.nx / 2, g.ny / 2) == doctest::Approx(1.46).epsilon(1e-6));

    const auto f = call({"eme-fit", "--mode", dir / "mode.txt", "--fitted-out", dir / "fit.txt"});
    REQUIRE(f.code == 0);
    const auto fj = nlohmann::json::parse(f.out);
    CHECK(fj["fidelity"].get<double>() > 0.999);
    CHECK(fj["delta_n"].get<double>() == doctest::Approx(3e-3).epsilon(0.05));
    CHECK(wga::load_field(dir / "fit.txt").grid.same_as(g));
}

TEST_CASE("installed binary reports exit codes") {
    const std::string bin = WGA_CLI_PATH;
    const auto status = [&](const std::string& args) {
        const int s = std::system((bin + " " + args + " >/dev/null 2>&1").c_str());
        return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
    };
    CHECK(status("preset A2 --json") == 0);
    CHECK(status("closed-form --delta 1 --unknown") == 2);
    CHECK(status("closed-form --delta -2") == 1);
}
