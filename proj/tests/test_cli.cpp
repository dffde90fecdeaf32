#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "curvband/cli.hpp"

using namespace curvband;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("curvband_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

// value of `key = value` in a summary
std::string summary_value(const std::string& summary, const std::string& key)
{
    const auto at = summary.find("\n" + key + " = ");
    if (at == std::string::npos) return {};
    const auto start = at + key.size() + 4;
    return summary.substr(start, summary.find('\n', start) - start);
}

}  // namespace

TEST_CASE("command names")
{
    CHECK(parse_command("gauge-check") == Command::gauge_check);
    CHECK(to_string(Command::evolve) == "evolve");
    CHECK_THROWS_AS(parse_command("plot"), std::invalid_argument);
}

TEST_CASE("geometry on the flat disc")
{
    RunConfig c;
    c.n_points = 32;
    c.output_path = scratch("geometry").string();
    const auto r = run_command(c, Command::geometry);
    REQUIRE(r.exit_code == 0);
    const std::string csv = slurp(fs::path(c.output_path) / "geometry.csv");
    CHECK(csv.rfind("rho,Z,H,K,Hsq_minus_K,F_at_q0\n", 0) == 0);
    std::istringstream rows(csv);
    std::string line;
    std::getline(rows, line);
    int count = 0;
    while (std::getline(rows, line)) {
        CHECK(line.find(",1,0,0,0,1") != std::string::npos);
        ++count;
    }
    CHECK(count == 32);
    CHECK(fs::exists(fs::path(c.output_path) / "summary.txt"));
    CHECK(summary_value(r.summary, "mode_discrepancy.max_entry") == "0");
}

TEST_CASE("spectrum with defaults reproduces the first Bessel zero")
{
    RunConfig c;
    c.output_path = scratch("spectrum").string();
    c.m_list = {0, 1};
    const auto r = run_command(c, Command::spectrum);
    REQUIRE(r.exit_code == 0);
    const double ground = std::stod(summary_value(r.summary, "spectrum.m0.ground"));
    CHECK(ground == doctest::Approx(2.891592).epsilon(1e-4));
    CHECK(fs::exists(fs::path(c.output_path) / "spectrum_m1.csv"));
    CHECK(std::stod(summary_value(r.summary, "hermiticity.m0.max_asymmetry")) < 1e-10);
    CHECK(summary_value(r.summary, "spectrum.m0.method") == "symmetrizable-tridiagonal");
}

TEST_CASE("runs are byte-for-byte deterministic")
{
    RunConfig c;
    c.surface.kind = "paraboloid";
    c.field.kind = "frame-synthetic";
    c.field.a3 = 1.0;
    c.field.gamma_interval = {{0.3, 0.7}};
    c.n_points = 200;
    c.m_list = {0, 1, 2};
    c.output_path = scratch("determinism_a").string();
    const auto a = run_command(c, Command::spectrum);
    const fs::path first = c.output_path;
    c.output_path = scratch("determinism_b").string();
    const auto b = run_command(c, Command::spectrum);
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    for (const char* f : {"spectrum_m0.csv", "spectrum_m1.csv", "spectrum_m2.csv"})
        CHECK(slurp(first / f) == slurp(fs::path(c.output_path) / f));

    // thread count does not change the results
    setenv("CURVBAND_THREADS", "1", 1);
    CHECK(thread_budget() == 1);
    c.output_path = scratch("determinism_c").string();
    const auto s = run_command(c, Command::spectrum);
    unsetenv("CURVBAND_THREADS");
    for (const char* f : {"spectrum_m0.csv", "spectrum_m1.csv", "spectrum_m2.csv"})
        CHECK(slurp(first / f) == slurp(fs::path(c.output_path) / f));
    CHECK(s.exit_code == 0);
}

TEST_CASE("evolve reports growth at the coupling rate")
{
    RunConfig c;
    c.surface.kind = "sphere-cap";
    c.surface.rho_max = 1.5;
    c.field.kind = "frame-synthetic";
    c.field.coupling = 0.2;
    c.n_points = 200;
    c.output_path = scratch("evolve").string();
    const auto r = run_command(c, Command::evolve);
    REQUIRE(r.exit_code == 0);
    CHECK(std::stod(summary_value(r.summary, "evolve.log_norm_slope")) == doctest::Approx(0.2).epsilon(1e-4));
    CHECK(summary_value(r.summary, "evolve.behavior") == "growth");
    CHECK(summary_value(r.summary, "hermiticity.m0.anti_hermitian_is_coupling") == "true");
    CHECK(fs::exists(fs::path(c.output_path) / "trace.csv"));
}

TEST_CASE("gauge check outputs")
{
    RunConfig c;
    c.surface.kind = "paraboloid";
    c.field.kind = "axial-uniform";
    c.field.b = 1.0;
    c.n_points = 64;
    c.output_path = scratch("gauge_ok").string();
    const auto ok = run_command(c, Command::gauge_check);
    REQUIRE(ok.exit_code == 0);
    CHECK(summary_value(ok.summary, "gauge.pass") == "true");

    c.field.kind = "frame-synthetic";
    c.field.a1 = 1.0;
    c.output_path = scratch("gauge_bad").string();
    const auto bad = run_command(c, Command::gauge_check);
    REQUIRE(bad.exit_code == 0);
    CHECK(summary_value(bad.summary, "gauge.pass") == "false");
}

TEST_CASE("failures leave a summary and a nonzero exit code")
{
    RunConfig c;
    c.surface.kind = "flat";
    c.field.kind = "frame-synthetic";
    c.field.coupling = 0.2;  // needs H != 0
    c.n_points = 32;
    c.output_path = scratch("failure").string();
    const auto r = run_command(c, Command::spectrum);
    CHECK(r.exit_code != 0);
    CHECK_FALSE(r.error.empty());
    CHECK(slurp(fs::path(c.output_path) / "summary.txt").find("error = ") != std::string::npos);

    RunConfig invalid;
    invalid.n_points = 4;
    invalid.output_path = scratch("invalid").string();
    const auto v = run_command(invalid, Command::geometry);
    CHECK(v.exit_code != 0);
    CHECK(v.error.find("n_points >= 16") != std::string::npos);
}
