#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>
#include <json.hpp>

#include "balpot/errors.hpp"
#include "balpot/runner.hpp"

using namespace balpot;
namespace fs = std::filesystem;

namespace {

const char* kGinibre = R"({
  "potential": {"alpha": 0.5, "t": 1.0, "nu": []},
  "grid": {"n": 64, "L": 2.0},
  "verify": {"reference": {"type": "annulus", "a": [0, 0], "beta": 0}}
})";

const char* kAnnulus = R"({
  "potential": {"alpha": 0.5, "t": 1.0, "nu": [{"type": "point", "location": [0.3, 0.0], "mass": 1.0}]},
  "grid": {"n": 64, "L": 2.0},
  "verify": {"reference": {"type": "annulus", "a": [0.3, 0.0], "beta": 1.0}}
})";

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("balpot_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
    text.replace(text.find(from), from.size(), to);
    return text;
}

}  // namespace

TEST_CASE("config defaults") {
    const RunConfig c = parse_config(kAnnulus);
    CHECK(c.grid.n == 64);
    CHECK(resolved_rho(c) == doctest::Approx(std::sqrt(2.0)));
    CHECK(c.solver.options.omega == 0.0);
    CHECK(c.solver.options.boundary == BoundaryMode::far_field);
    CHECK(c.grid.point_splat == PointSplat::tsc);
    REQUIRE(c.reference);
    CHECK(c.reference->beta == 1.0);

    const RunConfig d = parse_config(R"({"potential": {"alpha": 0.5, "t": 1.0,
        "nu": [{"type": "point", "location": [3.0, 0.0], "mass": 1.0}]}})");
    CHECK(d.grid.n == 256);
    CHECK(resolved_half_width(d) == doctest::Approx(4.5));
    const RunConfig e = parse_config(R"({"potential": {"alpha": 0.5, "t": 1.0}, "rho": 2.0})");
    CHECK(resolved_half_width(e) == doctest::Approx(3.0));
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS(parse_config("{"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"potential": {"alpha": 0.5, "t": 1}, "extra": 1})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"potential": {"alpha": -0.5, "t": 1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"potential": {"alpha": 0.5, "t": 1}, "grid": {"n": 65}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"potential": {"alpha": 0.5, "t": 1}, "grid": {"n": 30}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"potential": {"alpha": 0.5, "t": 1}, "grid": {"n": 4096}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"potential": {"alpha": 0.5, "t": 1, "nu": [{"type": "blob"}]}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"potential": {"alpha": 0.5, "t": 1}, "solver": {"omega": 2.5}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(replace(kAnnulus, "\"beta\": 1.0", "\"beta\": 2.0")), ConfigError);
    try {
        parse_config(R"({"potential": {"alpha": 0.5, "t": 1}, "rho": 0.5})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("minimal radius") != std::string::npos);
    }
}

TEST_CASE("config echo round-trips") {
    const RunConfig c = parse_config(kAnnulus);
    const RunConfig again = parse_config(config_json(c));
    CHECK(config_json(again) == config_json(c));
}

TEST_CASE("rho lists") {
    const auto r = parse_rho_list("1.5,2, 2.5");
    REQUIRE(r.size() == 3);
    CHECK(r[1] == 2.0);
    CHECK_THROWS_AS(parse_rho_list("1.5,,2"), ConfigError);
    CHECK_THROWS_AS(parse_rho_list("abc"), ConfigError);
}

TEST_CASE("solve writes all artifacts") {
    const fs::path out = scratch("solve");
    std::ostringstream log;
    REQUIRE(run_solve(parse_config(kGinibre), out, log) == exit_ok);
    for (const char* f : {"u.csv", "mu.csv", "sigma.csv", "support.pgm", "report.json"}) CHECK(fs::exists(out / f));

    std::ifstream csv(out / "mu.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "# 64 2 0.0625");
    int rows = 0;
    for (std::string line; std::getline(csv, line);) {
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 63);
    }
    CHECK(rows == 64);

    const std::string pgm = slurp(out / "support.pgm");
    const std::string pgm_header = "P5\n64 64\n255\n";
    REQUIRE(pgm.size() == pgm_header.size() + 64 * 64);
    CHECK(pgm.compare(0, pgm_header.size(), pgm_header) == 0);
    CHECK(static_cast<unsigned char>(pgm[pgm_header.size() + 32 * 64 + 32]) == 255);
    CHECK(pgm[pgm_header.size()] == 0);

    const auto report = nlohmann::json::parse(slurp(out / "report.json"));
    for (const char* key : {"mass_error", "F_estimate", "F_from_energy", "on_support_std", "off_support_min_gap",
                            "bounds_violation", "support_area", "boundary_band_max", "iterations",
                            "reference_errors", "grid", "config_echo"}) {
        CHECK(report.contains(key));
    }
    CHECK(report["mass_error"].get<double>() <= 1e-6);
    CHECK(report["F_estimate"].get<double>() == doctest::Approx(0.5).epsilon(2e-2));
    CHECK(report["grid"]["h"].get<double>() == 0.0625);
    CHECK(report["config_echo"]["grid"]["n"] == 64);
}

TEST_CASE("identical configs give identical reports") {
    std::ostringstream log;
    const RunConfig c = parse_config(kAnnulus);
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    REQUIRE(run_solve(c, a, log) == exit_ok);
    REQUIRE(run_solve(c, b, log) == exit_ok);
    CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
}

TEST_CASE("exit codes") {
    std::ostringstream log;
    RunConfig c = parse_config(kAnnulus);

    RunConfig small_rho = c;
    small_rho.rho = 1.0;
    CHECK(run_solve(small_rho, scratch("rho"), log) == exit_config);
    CHECK(log.str().find("minimal radius") != std::string::npos);

    RunConfig stuck = c;
    stuck.solver.options.max_iter = 2;
    CHECK(run_solve(stuck, scratch("stuck"), log) == exit_not_converged);

    RunConfig leaky = c;
    leaky.rho = 1.5 * std::sqrt(2.0);
    leaky.grid.L = 3.2;
    leaky.solver.options.boundary = BoundaryMode::zero;
    const fs::path out = scratch("leaky");
    CHECK(run_solve(leaky, out, log) == exit_verification);
    REQUIRE(fs::exists(out / "report.json"));
    const auto report = nlohmann::json::parse(slurp(out / "report.json"));
    CHECK_FALSE(report["failed_checks"].empty());
}

TEST_CASE("auto_enlarge doubles L on band failure") {
    std::ostringstream log;
    RunConfig c = parse_config(kAnnulus);
    c.rho = 1.5 * std::sqrt(2.0);
    c.grid.n = 128;
    c.grid.L = 2.4;
    c.solver.options.boundary = BoundaryMode::zero;
    c.solver.band_tol = 1e-2;
    c.solver.auto_enlarge = true;
    c.reference.reset();
    const RunArtifacts run = execute(c, log);
    CHECK(run.enlargements == 1);
    CHECK(*run.config.grid.L == doctest::Approx(4.8));
    CHECK(run.sigma.grid().n == 128);
    CHECK(log.str().find("enlarging L") != std::string::npos);
}

TEST_CASE("convergence table") {
    std::ostringstream log;
    const fs::path out = scratch("conv");
    CHECK(run_convergence(parse_config(kAnnulus), 3, out, log) == exit_ok);
    std::ifstream csv(out / "convergence.csv");
    std::string line;
    int rows = -1;
    while (std::getline(csv, line)) ++rows;
    CHECK(rows == 3);

    const fs::path single = scratch("conv1");
    CHECK(run_convergence(parse_config(kAnnulus), 1, single, log) == exit_ok);
    const std::string text = slurp(single / "convergence.csv");
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
    CHECK(text.find(",,") != std::string::npos);

    const RunConfig no_ref = parse_config(R"({"potential": {"alpha": 0.5, "t": 1.0}, "grid": {"n": 64}})");
    CHECK(run_convergence(no_ref, 2, scratch("conv2"), log) == exit_config);
}

TEST_CASE("rho sweep") {
    std::ostringstream log;
    const RunConfig c = parse_config(kAnnulus);
    const double R = std::sqrt(2.0);
    const fs::path out = scratch("sweep");
    CHECK(run_rho_sweep(c, {R, 1.25 * R, 1.5 * R}, out, log) == exit_ok);
    const std::string text = slurp(out / "rho_sweep.csv");
    CHECK(std::count(text.begin(), text.end(), '\n') == 4);

    const fs::path one = scratch("sweep1");
    CHECK(run_rho_sweep(c, {R}, one, log) == exit_ok);
    const std::string single = slurp(one / "rho_sweep.csv");
    CHECK(std::count(single.begin(), single.end(), '\n') == 1);

    CHECK(run_rho_sweep(c, {0.9 * R, R}, scratch("sweep2"), log) == exit_config);
}
