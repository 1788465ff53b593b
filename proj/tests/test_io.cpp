#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "qdiff/config.hpp"
#include "qdiff/run_output.hpp"
#include "qdiff/simulate.hpp"

using namespace qdiff;
namespace fsys = std::filesystem;

namespace {

std::string slurp(const fsys::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fsys::path path;
    TempDir() {
        path = fsys::temp_directory_path() /
               ("qdiff-test-" + std::to_string(std::random_device{}()));
        fsys::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fsys::remove_all(path, ec);
    }
};

RunConfig tiny_run() {
    RunConfig c;
    c.model.kind = "free";
    c.model.L = 0;
    c.gamma = 0.05;
    c.t_max = 3.0;
    c.record_points = 10;
    c.boundary_margin = 3;
    return c;
}

bool has_tmp_residue(const fsys::path& dir) {
    for (const auto& e : fsys::directory_iterator(dir))
        if (e.path().filename().string().find(".tmp-") != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_CASE("config parsing") {
    SECTION("minimal config fills documented defaults") {
        const RunConfig c = config_from_json(json::parse(R"({"model":{"kind":"free"}})"));
        CHECK(c.hopping_J == -1.0);
        CHECK(c.gamma == 0.0);
        CHECK(c.t_max == 50.0);
        CHECK(c.record_points == 60);
        CHECK(c.master_seed == 12345);
        CHECK(c.model.beta == kGoldenBeta);
        CHECK(c.model.phi == 0.0);
        CHECK(c.lead_length == -1);
        CHECK(c.realizations == -1);
        CHECK(c.error_control == "fixed");
    }
    SECTION("rejects missing or bad fields") {
        CHECK_THROWS_AS(config_from_json(json::parse("{}")), ConfigError);
        CHECK_THROWS_AS(config_from_json(json::parse(R"({"model":{"kind":"spam"}})")),
                        ConfigError);
        CHECK_THROWS_AS(
            config_from_json(json::parse(R"({"model":{"kind":"free"},"t_max":-1})")),
            ConfigError);
        CHECK_THROWS_AS(
            config_from_json(json::parse(R"({"model":{"kind":"disordered","V":0}})")),
            ConfigError);
        CHECK_THROWS_AS(
            config_from_json(json::parse(R"({"model":{"kind":"free"},"hopping_J":0})")),
            ConfigError);
        CHECK_THROWS_AS(
            config_from_json(json::parse(
                R"({"model":{"kind":"free"},"integrator":{"error_control":"rk45"}})")),
            ConfigError);
        CHECK_THROWS_AS(
            config_from_json(json::parse(R"({"model":{"kind":"free"},"t_max":"soon"})")),
            ConfigError);
    }
    SECTION("gamma accepts a scalar or a per-site table") {
        const RunConfig a =
            config_from_json(json::parse(R"({"model":{"kind":"free"},"gamma":0.3})"));
        CHECK(a.gamma == 0.3);
        CHECK(a.gamma_table.empty());
        const RunConfig b = config_from_json(
            json::parse(R"({"model":{"kind":"free"},"gamma":[0.1,0.2,0.3]})"));
        CHECK(b.gamma_table == std::vector<double>{0.1, 0.2, 0.3});
    }
    SECTION("config -> json -> config is stable") {
        RunConfig c = tiny_run();
        c.model.kind = "harper";
        c.model.Delta = 1.5;
        c.fit_t_lo = 2.0;
        c.fit_t_hi = 3.0;
        const RunConfig back = config_from_json(to_json(c));
        CHECK(to_json(back) == to_json(c));
    }
}

TEST_CASE("environment overrides") {
    json j = json::parse(
        R"({"model":{"kind":"harper","Delta":0.5},"t_max":50.0,"gamma":0.0})");
    setenv("QDIFF_MODEL_DELTA", "2.5", 1);
    setenv("QDIFF_T_MAX", "20", 1);
    setenv("QDIFF_MODEL_KIND", "harper", 1);  // unquoted string, taken verbatim
    apply_env_overrides(j);
    unsetenv("QDIFF_MODEL_DELTA");
    unsetenv("QDIFF_T_MAX");
    unsetenv("QDIFF_MODEL_KIND");
    const RunConfig c = config_from_json(j);
    CHECK(c.model.Delta == 2.5);
    CHECK(c.t_max == 20.0);
    CHECK(c.model.kind == "harper");
    CHECK(c.gamma == 0.0);  // untouched without an env var
}

TEST_CASE("fmt_g17 round-trips doubles exactly") {
    for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -1.602176634e-19, 0.0, 2.0}) {
        const std::string s = fmt_g17(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
}

TEST_CASE("simulate writes a complete run directory") {
    TempDir tmp;
    const fsys::path dir = tmp.path / "run";
    const SimulationOutcome out = simulate(tiny_run(), dir);
    CHECK(fsys::exists(dir / "metadata.json"));
    CHECK(fsys::exists(dir / "variance.csv"));
    CHECK(fsys::exists(dir / "potential.csv"));
    CHECK(fsys::exists(dir / "fit.json"));
    CHECK(fsys::exists(dir / "plot.csv"));
    CHECK_FALSE(has_tmp_residue(tmp.path));

    const std::string csv = slurp(dir / "variance.csv");
    CHECK(csv.rfind("t,sigma2,first_moment,trace_drift,boundary_occ\n", 0) == 0);
    const json meta = json::parse(slurp(dir / "metadata.json"));
    CHECK(meta["derived"]["total_sites"].get<int>() ==
          out.resolved.geometry.total_sites());
    CHECK(meta["results"]["guard_clean"].get<bool>());
}

TEST_CASE("a run rerun from its own metadata.json is byte-identical") {
    TempDir tmp;
    const fsys::path d1 = tmp.path / "a", d2 = tmp.path / "b";
    simulate(tiny_run(), d1);
    const RunConfig replay = load_config_file((d1 / "metadata.json").string());
    simulate(replay, d2);
    CHECK(slurp(d1 / "variance.csv") == slurp(d2 / "variance.csv"));
    CHECK(slurp(d1 / "potential.csv") == slurp(d2 / "potential.csv"));
    CHECK(slurp(d1 / "fit.json") == slurp(d2 / "fit.json"));
}

TEST_CASE("failed runs leave no output directory behind") {
    TempDir tmp;
    RunConfig bad = tiny_run();
    bad.dt = 5.0;  // far beyond the RK4 stability limit
    bad.t_max = 40.0;
    bad.record_points = 2;  // sparse grid, nothing clamps the oversized step
    const fsys::path dir = tmp.path / "run";
    CHECK_THROWS_AS(simulate(bad, dir), IntegrationError);
    CHECK_FALSE(fsys::exists(dir));
    CHECK_FALSE(has_tmp_residue(tmp.path));
}

TEST_CASE("simulate replaces an existing run directory atomically") {
    TempDir tmp;
    const fsys::path dir = tmp.path / "run";
    simulate(tiny_run(), dir);
    fsys::create_directories(dir / "stale-marker");
    simulate(tiny_run(), dir);
    CHECK_FALSE(fsys::exists(dir / "stale-marker"));
    CHECK(fsys::exists(dir / "variance.csv"));
}

TEST_CASE("sweep writes one run per value plus a summary") {
    TempDir tmp;
    RunConfig base = tiny_run();
    const fsys::path dir = tmp.path / "sweep";
    const auto rows = sweep(base, "gamma", {0.0, 0.1}, dir);
    REQUIRE(rows.size() == 2);
    CHECK(fsys::exists(dir / "summary.csv"));
    CHECK(fsys::exists(dir / "run_000" / "variance.csv"));
    CHECK(fsys::exists(dir / "run_001" / "variance.csv"));
    const std::string summary = slurp(dir / "summary.csv");
    CHECK(summary.rfind("model,V,Delta,gamma,", 0) == 0);
    // header + one row per value
    CHECK(std::count(summary.begin(), summary.end(), '\n') == 3);

    CHECK_THROWS_AS(sweep(base, "gamma", {}, tmp.path / "x"), ConfigError);
    CHECK_THROWS_AS(sweep(base, "J", {1.0}, tmp.path / "x"), ConfigError);
}

TEST_CASE("load_config_file error paths") {
    TempDir tmp;
    CHECK_THROWS_AS(load_config_file((tmp.path / "missing.json").string()), ConfigError);
    const fsys::path bad = tmp.path / "bad.json";
    std::ofstream(bad) << "{not json";
    CHECK_THROWS_AS(load_config_file(bad.string()), ConfigError);
}
