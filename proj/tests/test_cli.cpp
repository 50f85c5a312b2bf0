// End-to-end checks of the ridcov binary: flag handling, exit codes, output
// files, manifests, and reproducibility.  The binary path comes in through
// RIDCOV_CLI_BIN at compile time.

#include "test_support.hpp"

#include "doctest.h"
#include "json.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

using namespace testsupport;

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> split_lines(const std::string& text)
{
    std::vector<std::string> lines;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line))
        lines.push_back(line);
    return lines;
}

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ','))
        fields.push_back(field);
    return fields;
}

// Minimal city: one 30 m building at the origin inside a 1 km square ROI,
// one vendor, one residential square.  A single R2000 receiver on the only
// candidate site covers every trajectory end to end.
CityStrings one_building_city()
{
    json buildings = json::array();
    buildings.push_back(polygon_feature(square_ring(0.0, 0.0, 20.0), {{"height", 30.0}}));
    json vendors = json::array();
    vendors.push_back(point_feature(lonlat_at(-300.0, -300.0)));
    json residential = json::array();
    residential.push_back(polygon_feature(square_ring(200.0, 200.0, 150.0)));

    CityStrings city;
    city.buildings = feature_collection(buildings);
    city.vendors = feature_collection(vendors);
    city.residential = feature_collection(residential);
    city.roi = feature_collection(json::array({polygon_feature(square_ring(0.0, 0.0, 500.0))}));
    return city;
}

std::string city_flags(const CityPaths& paths)
{
    return " --buildings " + paths.buildings.string() + " --vendors " +
           paths.vendors.string() + " --residential " + paths.residential.string() +
           " --roi " + paths.roi.string();
}

} // namespace

TEST_SUITE("cli")
{
    TEST_CASE("analytic single evaluation prints the reference row")
    {
        const CliResult res = run_cli("analytic --rc 0.5 --re 1");
        REQUIRE(res.exit_code == 0);
        const auto lines = split_lines(res.output);
        REQUIRE(lines.size() == 2);
        CHECK(lines[0] == "rho,r_c,r_e,e_ude,e_udm,delta");
        const auto fields = split_csv(lines[1]);
        REQUIRE(fields.size() == 6);
        CHECK(std::stod(fields[0]) == doctest::Approx(0.5));
        CHECK(std::stod(fields[3]) == doctest::Approx(ude_closed_form(0.5)).epsilon(1e-6));
        CHECK(std::stod(fields[4]) == doctest::Approx(udm_closed_form(0.5)).epsilon(1e-6));
        CHECK(std::stod(fields[5]) ==
              doctest::Approx(ude_closed_form(0.5) - udm_closed_form(0.5)).epsilon(1e-5));
    }

    TEST_CASE("analytic sweep writes 101 rows with zero delta at the endpoints")
    {
        const fs::path dir = fresh_temp_dir("cli-sweep");
        const fs::path out = dir / "curve.csv";
        const CliResult res = run_cli("analytic --rho-sweep 0:1:0.01 --out " + out.string());
        REQUIRE(res.exit_code == 0);

        const auto lines = split_lines(read_file(out));
        REQUIRE(lines.size() == 102); // header + 101 grid points
        CHECK(lines[1] == "0,0,1,0,0,0");
        CHECK(lines.back() == "1,1,1,1,1,0");
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const auto f = split_csv(lines[i]);
            REQUIRE(f.size() == 6);
            const double rho = std::stod(f[0]);
            CHECK(rho == doctest::Approx((i - 1) * 0.01).epsilon(1e-12));
            CHECK(std::stod(f[3]) == doctest::Approx(ude_closed_form(rho)).epsilon(1e-6));
            CHECK(std::stod(f[4]) == doctest::Approx(udm_closed_form(rho)).epsilon(1e-6));
        }

        const json manifest = json::parse(read_file(out.string() + ".manifest.json"));
        CHECK(manifest.at("subcommand") == "analytic");
        CHECK(manifest.at("tool_version").is_string());
        CHECK(manifest.at("duration_seconds").get<double>() >= 0.0);
        REQUIRE(manifest.at("outputs").size() == 1);
        CHECK(manifest.at("outputs")[0] == out.string());
    }

    TEST_CASE("analytic usage errors exit 1")
    {
        CHECK(run_cli("analytic").exit_code == 1);                      // no inputs
        CHECK(run_cli("analytic --rc 2 --re 1").exit_code == 1);        // r_c > r_e
        CHECK(run_cli("analytic --rc 0.5").exit_code == 1);             // missing --re
        CHECK(run_cli("analytic --rho-sweep 0:1:0.1 --rc 0.5 --re 1").exit_code == 1);
        CHECK(run_cli("analytic --rho-sweep nonsense").exit_code == 1);
        CHECK(run_cli("analytic --rho-sweep 0:2:0.1").exit_code == 1);  // stop > 1
        CHECK(run_cli("analytic --no-such-flag").exit_code == 1);
        CHECK(run_cli("").exit_code == 1);                              // subcommand required
        CHECK(run_cli("frobnicate").exit_code == 1);
    }

    TEST_CASE("analytic exits 3 when the quadrature budget is exhausted")
    {
        const CliResult res = run_cli("analytic --rc 0.5 --re 1 --quad-max-subdiv 0");
        CHECK(res.exit_code == 3);
        CHECK(res.output.find("converge") != std::string::npos);
    }

    TEST_CASE("version flag reports without a subcommand")
    {
        const CliResult res = run_cli("--version");
        CHECK(res.exit_code == 0);
        CHECK(res.output.find("0.1.0") != std::string::npos);
    }

    TEST_CASE("mc-verify reruns with one seed are byte-identical across thread counts")
    {
        const fs::path dir = fresh_temp_dir("cli-mc");
        const std::string base = "mc-verify --n-trials 400 --seed 11 --out ";
        REQUIRE(run_cli(base + (dir / "a.csv").string() + " --threads 2").exit_code == 0);
        REQUIRE(run_cli(base + (dir / "b.csv").string() + " --threads 2").exit_code == 0);
        REQUIRE(run_cli(base + (dir / "c.csv").string() + " --threads 5").exit_code == 0);

        const std::string a = read_file(dir / "a.csv");
        CHECK(a == read_file(dir / "b.csv"));
        CHECK(a == read_file(dir / "c.csv"));

        const auto lines = split_lines(a);
        REQUIRE(lines.size() == 51); // header + 5 radii x 5 fractions x 2 cases
        CHECK(lines[0] == "case,r_e,r_c,analytic,mc_mean,mc_std,mc_stderr,n_trials,within_4se");

        const json manifest = json::parse(read_file((dir / "a.csv").string() + ".manifest.json"));
        CHECK(manifest.at("subcommand") == "mc-verify");
        CHECK(manifest.at("master_seed") == 11);
    }

    TEST_CASE("mc-verify rejects malformed grid lists")
    {
        CHECK(run_cli("mc-verify --re-grid 1,two,3").exit_code == 1);
        CHECK(run_cli("mc-verify --fractions ,").exit_code == 1);
    }

    TEST_CASE("urban saturates a one-building city with one R2000 receiver")
    {
        const fs::path dir = fresh_temp_dir("cli-urban");
        const CityPaths city = write_city(one_building_city(), dir);
        const std::string common =
            "urban" + city_flags(city) +
            " --tech R2000 --n-receivers 1 --trajectories-per-trial 40 --n-trials 3"
            " --n-customers 80 --seed 5 --threads 2";

        const fs::path out1 = dir / "run1";
        REQUIRE(run_cli(common + " --out " + out1.string()).exit_code == 0);

        const json summary = json::parse(read_file(out1 / "summary.json"));
        CHECK(summary.at("tech") == "R2000");
        CHECK(summary.at("target").is_null());
        CHECK(summary.at("n_receivers") == 1);
        CHECK(summary.at("achieved_mean") == 1.0); // receiver spans the whole city
        CHECK(summary.at("trials") == 3);
        CHECK(summary.at("failures") == 0);
        CHECK(summary.at("converged") == true);

        const auto lines = split_lines(read_file(out1 / "running_means.csv"));
        REQUIRE(lines.size() == 121); // header + 3 trials x 40 trajectories
        CHECK(lines[0] == "trajectory_index,running_mean");
        CHECK(lines[1] == "1,1");
        CHECK(lines.back() == "120,1");

        const json manifest = json::parse(read_file(out1 / "manifest.json"));
        CHECK(manifest.at("subcommand") == "urban");
        CHECK(manifest.at("master_seed") == 5);
        CHECK(manifest.at("outputs").size() == 2);
        CHECK(manifest.at("config").at("tech") == "R2000");

        // bit-stable rerun
        const fs::path out2 = dir / "run2";
        REQUIRE(run_cli(common + " --out " + out2.string()).exit_code == 0);
        CHECK(read_file(out1 / "running_means.csv") == read_file(out2 / "running_means.csv"));
        CHECK(read_file(out1 / "summary.json") == read_file(out2 / "summary.json"));
    }

    TEST_CASE("urban reads config files and lets flags override them")
    {
        const fs::path dir = fresh_temp_dir("cli-urban-cfg");
        const CityPaths city = write_city(one_building_city(), dir);

        // relative paths resolve against the config file's directory
        const json cfg = {{"buildings", "buildings.geojson"},
                          {"vendors", "vendors.geojson"},
                          {"residential", "residential.geojson"},
                          {"roi", "roi.geojson"},
                          {"tech", "R250"},
                          {"n_receivers", 0},
                          {"trajectories_per_trial", 30},
                          {"n_trials", 2},
                          {"n_customers", 60},
                          {"seed", 9}};
        std::ofstream(dir / "scenario.json") << cfg.dump();

        const fs::path out = dir / "run";
        const CliResult res =
            run_cli("urban --config " + (dir / "scenario.json").string() +
                    " --tech R2000 --n-receivers 1 --out " + out.string());
        REQUIRE(res.exit_code == 0);

        const json summary = json::parse(read_file(out / "summary.json"));
        CHECK(summary.at("tech") == "R2000");    // flag wins over config
        CHECK(summary.at("n_receivers") == 1);   // flag wins over config
        CHECK(summary.at("trials") == 2);        // config value kept
        CHECK(summary.at("achieved_mean") == 1.0);
    }

    TEST_CASE("urban rejects unknown config keys")
    {
        const fs::path dir = fresh_temp_dir("cli-urban-badcfg");
        std::ofstream(dir / "bad.json") << R"({"bogus_key": 1})";
        const CliResult res =
            run_cli("urban --config " + (dir / "bad.json").string() + " --out " +
                    (dir / "out").string());
        CHECK(res.exit_code == 2);
        CHECK(res.output.find("unknown config key") != std::string::npos);

        std::ofstream(dir / "badrrt.json") << R"({"rrt": {"bogus": 1}})";
        CHECK(run_cli("urban --config " + (dir / "badrrt.json").string() + " --out " +
                      (dir / "out2").string())
                  .exit_code == 2);
    }

    TEST_CASE("urban requires theme paths and an output directory")
    {
        const fs::path dir = fresh_temp_dir("cli-urban-miss");
        CHECK(run_cli("urban").exit_code == 1); // --out required
        CHECK(run_cli("urban --out " + (dir / "o").string()).exit_code == 1);
        const CliResult res = run_cli("urban --out " + (dir / "o2").string() +
                                      " --buildings /no/such/file.geojson --vendors " +
                                      "/no/such/v.geojson --residential /no/such/r.geojson");
        CHECK(res.exit_code == 2); // paths given but unreadable
    }

    TEST_CASE("urban search mode records its evaluations and final choice")
    {
        const fs::path dir = fresh_temp_dir("cli-urban-search");
        const CityPaths city = write_city(one_building_city(), dir);
        const fs::path out = dir / "run";
        const CliResult res = run_cli(
            "urban" + city_flags(city) +
            " --tech R2000 --find-target 0.5 --trajectories-per-trial 30 --n-trials 2"
            " --n-customers 60 --seed 7 --out " + out.string());
        REQUIRE(res.exit_code == 0);

        const json search = json::parse(read_file(out / "search.json"));
        CHECK(search.at("target") == 0.5);
        CHECK(search.at("n_receivers") == 1);
        CHECK(search.at("achieved_mean").get<double>() >= 0.5);
        REQUIRE(!search.at("evaluations").empty());
        for (const auto& e : search.at("evaluations")) {
            CHECK(e.contains("n_receivers"));
            CHECK(e.contains("mean"));
        }

        const json summary = json::parse(read_file(out / "summary.json"));
        CHECK(summary.at("target") == 0.5);
        CHECK(summary.at("n_receivers") == 1);
        // the final evaluation reuses the search's paired seed
        CHECK(summary.at("achieved_mean") == search.at("achieved_mean"));

        const json manifest = json::parse(read_file(out / "manifest.json"));
        CHECK(manifest.at("outputs").size() == 3);
    }

    TEST_CASE("urban search failure exits 3 and leaves no partial outputs")
    {
        const fs::path dir = fresh_temp_dir("cli-urban-unreach");
        const CityPaths city = write_city(one_building_city(), dir);
        const fs::path out = dir / "run";
        // one candidate site, R250 disk cannot reach 0.99 mean coverage
        const CliResult res = run_cli(
            "urban" + city_flags(city) +
            " --tech R250 --find-target 0.99 --trajectories-per-trial 30 --n-trials 2"
            " --n-customers 60 --seed 7 --out " + out.string());
        CHECK(res.exit_code == 3);
        CHECK(!fs::exists(out / "summary.json"));
        CHECK(!fs::exists(out / "running_means.csv"));
        CHECK(!fs::exists(out / "manifest.json"));
    }

    TEST_CASE("hybrid writes a schema-complete reproducible report")
    {
        const fs::path dir = fresh_temp_dir("cli-hybrid");
        const CityPaths city = write_city(one_building_city(), dir);
        const std::string common =
            "hybrid" + city_flags(city) +
            " --r-e 250 --tech R250 --case UDM --n-trajectories 100 --seed 5";

        const fs::path out1 = dir / "h1";
        REQUIRE(run_cli(common + " --out " + out1.string()).exit_code == 0);
        const json report = json::parse(read_file(out1 / "report.json"));

        CHECK(report.at("K").get<int>() >= 1);
        CHECK(report.at("r_e") == 250.0);
        CHECK(report.at("r_c") == 250.0);
        CHECK(report.at("case") == "UDM");
        const double estimate = report.at("estimate").get<double>();
        const double epsilon = report.at("epsilon").get<double>();
        CHECK(estimate >= 0.0);
        CHECK(estimate <= 1.0);
        CHECK(epsilon >= 0.0);
        CHECK(epsilon <= 1.0);
        CHECK(estimate <= 1.0 - epsilon + 1e-12); // residual mass contributes zero

        const auto& hist = report.at("residual_fraction_histogram");
        REQUIRE(hist.size() == 10);
        std::uint64_t total = 0;
        for (const auto& h : hist)
            total += h.get<std::uint64_t>();
        CHECK(total == 100);

        const json manifest = json::parse(read_file(out1 / "manifest.json"));
        CHECK(manifest.at("subcommand") == "hybrid");

        const fs::path out2 = dir / "h2";
        REQUIRE(run_cli(common + " --out " + out2.string()).exit_code == 0);
        CHECK(read_file(out1 / "report.json") == read_file(out2 / "report.json"));
    }

    TEST_CASE("hybrid reports an empty packing when nothing fits")
    {
        const fs::path dir = fresh_temp_dir("cli-hybrid-empty");
        const CityPaths city = write_city(one_building_city(), dir);
        const fs::path out = dir / "h";
        const CliResult res = run_cli("hybrid" + city_flags(city) +
                                      " --r-e 5000 --tech R250 --n-trajectories 50 --out " +
                                      out.string());
        REQUIRE(res.exit_code == 0);
        const json report = json::parse(read_file(out / "report.json"));
        CHECK(report.at("K") == 0);
        CHECK(report.at("estimate") == 0.0);
        CHECK(report.at("epsilon") == 1.0);
        CHECK(report.contains("warning"));
    }

    TEST_CASE("hybrid rejects an unknown chord case")
    {
        const fs::path dir = fresh_temp_dir("cli-hybrid-case");
        const CityPaths city = write_city(one_building_city(), dir);
        CHECK(run_cli("hybrid" + city_flags(city) + " --case UDX --out " +
                      (dir / "h").string())
                  .exit_code == 2);
    }

    TEST_CASE("ingest-check reports per-theme statistics")
    {
        const fs::path dir = fresh_temp_dir("cli-ingest");
        const CityPaths city = write_city(one_building_city(), dir);
        const CliResult res = run_cli(
            "ingest-check --buildings " + city.buildings.string() + " --vendors " +
            city.vendors.string() + " --residential " + city.residential.string() +
            " --roi " + city.roi.string() + " --n-customers 40");
        REQUIRE(res.exit_code == 0);
        CHECK(res.output.find("buildings: 1 features, 1 used") != std::string::npos);
        CHECK(res.output.find("vendors: 1 features") != std::string::npos);
        CHECK(res.output.find("candidate sites: 1") != std::string::npos);
        CHECK(res.output.find("customers: 40") != std::string::npos);
    }

    TEST_CASE("ingest-check dumps an occupancy raster with its side header")
    {
        const fs::path dir = fresh_temp_dir("cli-ingest-grid");
        const CityPaths city = write_city(one_building_city(), dir);
        const fs::path base = dir / "grid";
        const CliResult res = run_cli(
            "ingest-check --buildings " + city.buildings.string() + " --vendors " +
            city.vendors.string() + " --residential " + city.residential.string() +
            " --roi " + city.roi.string() + " --dump-grid " + base.string() +
            " --altitude-ft 60 --cell-size 20");
        REQUIRE(res.exit_code == 0);

        const std::string pgm = read_file(base.string() + ".pgm");
        CHECK(pgm.rfind("P2\n", 0) == 0);
        CHECK(pgm.find('1') != std::string::npos); // 60 ft is below the 30 m roof

        const json header = json::parse(read_file(base.string() + ".json"));
        CHECK(header.at("altitude_ft") == 60.0);
        CHECK(header.at("cell_size_m") == 20.0);
        CHECK(header.at("width").get<int>() > 0);
        CHECK(header.at("height").get<int>() > 0);

        const json manifest = json::parse(read_file(base.string() + ".manifest.json"));
        CHECK(manifest.at("subcommand") == "ingest-check");
        CHECK(manifest.at("outputs").size() == 2);
    }

    TEST_CASE("ingest-check exits 2 on malformed GeoJSON")
    {
        const fs::path dir = fresh_temp_dir("cli-ingest-bad");
        const CityPaths city = write_city(one_building_city(), dir);
        std::ofstream(dir / "mangled.geojson") << "not json at all";
        const CliResult res = run_cli(
            "ingest-check --buildings " + (dir / "mangled.geojson").string() +
            " --vendors " + city.vendors.string() + " --residential " +
            city.residential.string());
        CHECK(res.exit_code == 2);
        CHECK(res.output.find("parse error") != std::string::npos);
    }
}
