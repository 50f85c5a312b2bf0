// ridcov: batch front-end for receiver coverage experiments.
//
// Subcommands: analytic, mc-verify, urban, hybrid, ingest-check.
// Units at the interfaces: radii in meters, altitudes in feet, angles in
// radians.  Exit codes: 0 success, 1 usage, 2 data error, 3 convergence or
// planning failure.

#include "ridcov/errors.hpp"
#include "ridcov/expectation.hpp"
#include "ridcov/geo.hpp"
#include "ridcov/hybrid.hpp"
#include "ridcov/manifest.hpp"
#include "ridcov/monte_carlo.hpp"
#include "ridcov/planner.hpp"
#include "ridcov/rng.hpp"
#include "ridcov/urban.hpp"
#include "ridcov/version.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr std::uint64_t kWorldStreamId = 9001; // customer sampling stream

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

int default_threads()
{
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

double elapsed_seconds(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<double> parse_double_list(const std::string& text, const std::string& what)
{
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(item, &used));
            while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used])))
                ++used;
            if (used != item.size())
                throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw std::invalid_argument(what + ": cannot parse '" + item + "'");
        }
    }
    if (values.empty())
        throw std::invalid_argument(what + ": empty list");
    return values;
}

std::vector<double> parse_sweep(const std::string& spec)
{
    double a = 0.0;
    double b = 0.0;
    double step = 0.0;
    char trailing = 0;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%lf%c", &a, &b, &step, &trailing) != 3)
        throw std::invalid_argument("sweep spec must look like start:stop:step");
    if (!(step > 0.0) || !(a >= 0.0) || !(b <= 1.0) || !(a <= b))
        throw std::invalid_argument("sweep needs 0 <= start <= stop <= 1 and step > 0");

    std::vector<double> rhos;
    for (int k = 0;; ++k) {
        double rho = a + k * step;
        if (rho > b + 0.5 * step)
            break;
        rho = std::min(rho, b); // snap accumulated rounding onto the endpoint
        rhos.push_back(rho);
        if (rho >= b)
            break;
    }
    return rhos;
}

std::string resolve_path(const fs::path& base, const std::string& p)
{
    if (p.empty())
        return p;
    const fs::path path(p);
    return path.is_absolute() ? path.string() : (base / path).string();
}

json load_json_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ridcov::DataError("cannot open config file: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ridcov::DataError("config file " + path + ": " + e.what());
    }
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& where)
{
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!known.contains(key))
            throw ridcov::DataError("unknown config key in " + where + ": '" + key + "'");
    }
}

template <typename T>
T config_get(const json& obj, const std::string& key)
{
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ridcov::DataError("config key '" + key + "': " + e.what());
    }
}

// -------------------------------------------------------------------------
// analytic

struct AnalyticArgs {
    double r_c = 0.0;
    double r_e = 0.0;
    std::string rho_sweep;
    std::string out_path;
    ridcov::QuadratureConfig quad;
    bool have_rc = false;
    bool have_re = false;
};

int run_analytic(const AnalyticArgs& args)
{
    const auto start = std::chrono::steady_clock::now();

    std::ostringstream csv;
    csv << "rho,r_c,r_e,e_ude,e_udm,delta\n";
    const auto emit = [&](double rho, double r_c, double r_e) {
        double ude = 0.0;
        double udm = 0.0;
        if (rho >= 1.0) {
            ude = udm = 1.0;
        } else if (rho > 0.0) {
            const ridcov::CoverageGeometry geom({0.0, 0.0}, r_c, r_e);
            ude = ridcov::expected_coverage_ude(geom, args.quad).value;
            udm = ridcov::expected_coverage_udm(geom, args.quad).value;
        }
        csv << fmt(rho) << ',' << fmt(r_c) << ',' << fmt(r_e) << ',' << fmt(ude) << ','
            << fmt(udm) << ',' << fmt(ude - udm) << '\n';
    };

    if (!args.rho_sweep.empty()) {
        if (args.have_rc || args.have_re)
            throw std::invalid_argument("--rho-sweep excludes --rc/--re");
        for (const double rho : parse_sweep(args.rho_sweep))
            emit(rho, rho, 1.0);
    } else {
        if (!args.have_rc || !args.have_re)
            throw std::invalid_argument("provide --rc and --re, or --rho-sweep");
        const ridcov::CoverageGeometry geom({0.0, 0.0}, args.r_c, args.r_e); // validates
        emit(geom.rho(), args.r_c, args.r_e);
    }

    if (args.out_path.empty()) {
        std::cout << csv.str();
        return 0;
    }

    ridcov::write_text_file_atomic(args.out_path, csv.str());
    ridcov::RunManifest manifest;
    manifest.subcommand = "analytic";
    manifest.config = {{"rc", args.have_rc ? json(args.r_c) : json()},
                       {"re", args.have_re ? json(args.r_e) : json()},
                       {"rho_sweep", args.rho_sweep},
                       {"quad_rel", args.quad.relative_tolerance},
                       {"quad_abs", args.quad.absolute_tolerance},
                       {"quad_max_subdiv", args.quad.max_subdivisions}};
    manifest.tool_version = ridcov::kVersion;
    manifest.output_paths = {args.out_path};
    manifest.duration_seconds = elapsed_seconds(start);
    ridcov::write_manifest(manifest, args.out_path + ".manifest.json");
    return 0;
}

// -------------------------------------------------------------------------
// mc-verify

struct McArgs {
    std::uint64_t n_trials = 10000;
    std::uint64_t seed = 0;
    int threads = 0; // 0 = all cores
    std::string re_grid;
    std::string fractions;
    std::string out_path;
    ridcov::QuadratureConfig quad;
};

int run_mc_verify(const McArgs& args)
{
    const auto start = std::chrono::steady_clock::now();

    const std::vector<double> grid = args.re_grid.empty()
                                         ? ridcov::default_r_e_grid()
                                         : parse_double_list(args.re_grid, "--re-grid");
    const std::vector<double> fractions =
        args.fractions.empty() ? ridcov::default_rc_fractions()
                               : parse_double_list(args.fractions, "--fractions");
    const int threads = args.threads > 0 ? args.threads : default_threads();

    const ridcov::RngStream rng(args.seed, 0);
    const auto cells =
        ridcov::verification_sweep(grid, fractions, args.n_trials, rng, args.quad, threads);

    std::ostringstream csv;
    ridcov::write_sweep_csv(cells, csv, true);

    std::size_t ok = 0;
    for (const auto& cell : cells)
        ok += cell.within_4se ? 1u : 0u;
    std::cerr << cells.size() << " cells, " << ok << " within 4 standard errors\n";

    if (args.out_path.empty()) {
        std::cout << csv.str();
        return 0;
    }

    ridcov::write_text_file_atomic(args.out_path, csv.str());
    ridcov::RunManifest manifest;
    manifest.subcommand = "mc-verify";
    manifest.config = {{"n_trials", args.n_trials},
                       {"seed", args.seed},
                       {"threads", threads},
                       {"re_grid", grid},
                       {"fractions", fractions}};
    manifest.master_seed = args.seed;
    manifest.tool_version = ridcov::kVersion;
    manifest.output_paths = {args.out_path};
    manifest.duration_seconds = elapsed_seconds(start);
    ridcov::write_manifest(manifest, args.out_path + ".manifest.json");
    return 0;
}

// -------------------------------------------------------------------------
// urban

struct UrbanCliArgs {
    std::string config_path;
    std::string out_dir;
    std::string buildings;
    std::string vendors;
    std::string residential;
    std::string roi;
    double altitude_ft = 200.0;
    std::string tech = "R2000";
    std::string planner_name = "SLPP";
    int n_receivers = 0;
    int trajectories_per_trial = 1000;
    int n_trials = 20;
    std::uint64_t seed = 0;
    int threads = 0;
    double find_target = 0.0;
    std::uint64_t n_customers = 2000;
    double cell_size_m = 10.0;

    // set by CLI11 when the user passed the flag
    CLI::Option* o_buildings = nullptr;
    CLI::Option* o_vendors = nullptr;
    CLI::Option* o_residential = nullptr;
    CLI::Option* o_roi = nullptr;
    CLI::Option* o_altitude = nullptr;
    CLI::Option* o_tech = nullptr;
    CLI::Option* o_planner = nullptr;
    CLI::Option* o_n_receivers = nullptr;
    CLI::Option* o_traj = nullptr;
    CLI::Option* o_trials = nullptr;
    CLI::Option* o_seed = nullptr;
    CLI::Option* o_threads = nullptr;
    CLI::Option* o_target = nullptr;
    CLI::Option* o_customers = nullptr;
    CLI::Option* o_cell = nullptr;
};

struct UrbanSettings {
    ridcov::urban::WorldFiles files;
    ridcov::urban::WorldOptions world;
    ridcov::urban::ScenarioConfig scenario;
    std::optional<double> find_target;
    ridcov::urban::SearchBounds bounds;
    std::string tech_name = "R2000";
    std::string planner_name = "SLPP";
};

ridcov::planner::Kind planner_from_string(const std::string& name)
{
    if (name == "SLPP")
        return ridcov::planner::Kind::SLPP;
    if (name == "RRTStar")
        return ridcov::planner::Kind::RRTStar;
    throw ridcov::DataError("unknown planner '" + name + "' (use SLPP or RRTStar)");
}

void apply_urban_config(const json& cfg, const fs::path& base_dir, UrbanSettings& s)
{
    static const std::set<std::string> known = {
        "buildings",   "vendors",        "residential",
        "roi",         "altitude_ft",    "tech",
        "planner",     "n_receivers",    "trajectories_per_trial",
        "n_trials",    "seed",           "n_threads",
        "redraw_receivers_per_trial",    "convergence_window",
        "convergence_tolerance",         "max_od_resamples",
        "n_customers", "cell_size_m",    "default_height_m",
        "find_target", "search_lower",   "search_upper",
        "rrt"};
    if (!cfg.is_object())
        throw ridcov::DataError("config root must be a JSON object");
    reject_unknown_keys(cfg, known, "config");

    if (cfg.contains("buildings"))
        s.files.buildings_path = resolve_path(base_dir, config_get<std::string>(cfg, "buildings"));
    if (cfg.contains("vendors"))
        s.files.vendors_path = resolve_path(base_dir, config_get<std::string>(cfg, "vendors"));
    if (cfg.contains("residential"))
        s.files.residential_path =
            resolve_path(base_dir, config_get<std::string>(cfg, "residential"));
    if (cfg.contains("roi"))
        s.files.roi_path = resolve_path(base_dir, config_get<std::string>(cfg, "roi"));

    if (cfg.contains("altitude_ft"))
        s.scenario.altitude_ft = config_get<double>(cfg, "altitude_ft");
    if (cfg.contains("tech"))
        s.tech_name = config_get<std::string>(cfg, "tech");
    if (cfg.contains("planner"))
        s.planner_name = config_get<std::string>(cfg, "planner");
    if (cfg.contains("n_receivers"))
        s.scenario.n_receivers = config_get<int>(cfg, "n_receivers");
    if (cfg.contains("trajectories_per_trial"))
        s.scenario.trajectories_per_trial = config_get<int>(cfg, "trajectories_per_trial");
    if (cfg.contains("n_trials"))
        s.scenario.n_trials = config_get<int>(cfg, "n_trials");
    if (cfg.contains("seed"))
        s.scenario.seed = config_get<std::uint64_t>(cfg, "seed");
    if (cfg.contains("n_threads"))
        s.scenario.n_threads = config_get<int>(cfg, "n_threads");
    if (cfg.contains("redraw_receivers_per_trial"))
        s.scenario.redraw_receivers_per_trial =
            config_get<bool>(cfg, "redraw_receivers_per_trial");
    if (cfg.contains("convergence_window"))
        s.scenario.convergence_window = config_get<int>(cfg, "convergence_window");
    if (cfg.contains("convergence_tolerance"))
        s.scenario.convergence_tolerance = config_get<double>(cfg, "convergence_tolerance");
    if (cfg.contains("max_od_resamples"))
        s.scenario.max_od_resamples = config_get<int>(cfg, "max_od_resamples");
    if (cfg.contains("n_customers"))
        s.world.n_customers = config_get<std::size_t>(cfg, "n_customers");
    if (cfg.contains("cell_size_m"))
        s.world.cell_size_m = config_get<double>(cfg, "cell_size_m");
    if (cfg.contains("default_height_m"))
        s.world.default_height_m = config_get<double>(cfg, "default_height_m");
    if (cfg.contains("find_target"))
        s.find_target = config_get<double>(cfg, "find_target");
    if (cfg.contains("search_lower"))
        s.bounds.lower = config_get<int>(cfg, "search_lower");
    if (cfg.contains("search_upper"))
        s.bounds.upper = config_get<int>(cfg, "search_upper");

    if (cfg.contains("rrt")) {
        const json& rrt = cfg.at("rrt");
        static const std::set<std::string> rrt_known = {
            "max_iterations", "step_size",           "goal_bias",
            "goal_radius",    "rewire_radius_gamma", "collision_check_resolution"};
        if (!rrt.is_object())
            throw ridcov::DataError("config key 'rrt' must be an object");
        reject_unknown_keys(rrt, rrt_known, "config.rrt");
        if (rrt.contains("max_iterations"))
            s.scenario.rrt.max_iterations = config_get<int>(rrt, "max_iterations");
        if (rrt.contains("step_size"))
            s.scenario.rrt.step_size = config_get<double>(rrt, "step_size");
        if (rrt.contains("goal_bias"))
            s.scenario.rrt.goal_bias = config_get<double>(rrt, "goal_bias");
        if (rrt.contains("goal_radius"))
            s.scenario.rrt.goal_radius = config_get<double>(rrt, "goal_radius");
        if (rrt.contains("rewire_radius_gamma"))
            s.scenario.rrt.rewire_radius_gamma = config_get<double>(rrt, "rewire_radius_gamma");
        if (rrt.contains("collision_check_resolution"))
            s.scenario.rrt.collision_check_resolution =
                config_get<double>(rrt, "collision_check_resolution");
    }
}

json effective_urban_config(const UrbanSettings& s)
{
    json cfg = {{"buildings", s.files.buildings_path},
                {"vendors", s.files.vendors_path},
                {"residential", s.files.residential_path},
                {"roi", s.files.roi_path},
                {"altitude_ft", s.scenario.altitude_ft},
                {"tech", s.tech_name},
                {"planner", s.planner_name},
                {"n_receivers", s.scenario.n_receivers},
                {"trajectories_per_trial", s.scenario.trajectories_per_trial},
                {"n_trials", s.scenario.n_trials},
                {"seed", s.scenario.seed},
                {"n_threads", s.scenario.n_threads},
                {"redraw_receivers_per_trial", s.scenario.redraw_receivers_per_trial},
                {"convergence_window", s.scenario.convergence_window},
                {"convergence_tolerance", s.scenario.convergence_tolerance},
                {"max_od_resamples", s.scenario.max_od_resamples},
                {"n_customers", s.world.n_customers},
                {"cell_size_m", s.world.cell_size_m},
                {"default_height_m", s.world.default_height_m},
                {"rrt",
                 {{"max_iterations", s.scenario.rrt.max_iterations},
                  {"step_size", s.scenario.rrt.step_size},
                  {"goal_bias", s.scenario.rrt.goal_bias},
                  {"goal_radius", s.scenario.rrt.goal_radius},
                  {"rewire_radius_gamma", s.scenario.rrt.rewire_radius_gamma},
                  {"collision_check_resolution", s.scenario.rrt.collision_check_resolution}}}};
    cfg["find_target"] = s.find_target ? json(*s.find_target) : json();
    return cfg;
}

std::string running_means_csv(const std::vector<double>& running_means)
{
    std::ostringstream csv;
    csv << "trajectory_index,running_mean\n";
    for (std::size_t i = 0; i < running_means.size(); ++i)
        csv << (i + 1) << ',' << fmt(running_means[i]) << '\n';
    return csv.str();
}

int run_urban(const UrbanCliArgs& args)
{
    const auto start = std::chrono::steady_clock::now();

    UrbanSettings s;
    if (!args.config_path.empty())
        apply_urban_config(load_json_file(args.config_path),
                           fs::path(args.config_path).parent_path(), s);

    if (args.o_buildings->count())
        s.files.buildings_path = args.buildings;
    if (args.o_vendors->count())
        s.files.vendors_path = args.vendors;
    if (args.o_residential->count())
        s.files.residential_path = args.residential;
    if (args.o_roi->count())
        s.files.roi_path = args.roi;
    if (args.o_altitude->count())
        s.scenario.altitude_ft = args.altitude_ft;
    if (args.o_tech->count())
        s.tech_name = args.tech;
    if (args.o_planner->count())
        s.planner_name = args.planner_name;
    if (args.o_n_receivers->count())
        s.scenario.n_receivers = args.n_receivers;
    if (args.o_traj->count())
        s.scenario.trajectories_per_trial = args.trajectories_per_trial;
    if (args.o_trials->count())
        s.scenario.n_trials = args.n_trials;
    if (args.o_seed->count())
        s.scenario.seed = args.seed;
    if (args.o_threads->count())
        s.scenario.n_threads = args.threads;
    if (args.o_target->count())
        s.find_target = args.find_target;
    if (args.o_customers->count())
        s.world.n_customers = args.n_customers;
    if (args.o_cell->count())
        s.world.cell_size_m = args.cell_size_m;

    if (s.files.buildings_path.empty() || s.files.vendors_path.empty() ||
        s.files.residential_path.empty())
        throw std::invalid_argument(
            "buildings, vendors and residential paths are required (config keys or flags)");

    s.scenario.tech = ridcov::urban::tech_from_string(s.tech_name);
    s.scenario.planner = planner_from_string(s.planner_name);
    if (s.scenario.n_threads <= 0)
        s.scenario.n_threads = default_threads();
    if (s.scenario.planner == ridcov::planner::Kind::RRTStar)
        s.world.grid_altitudes_ft = {s.scenario.altitude_ft};

    const fs::path out_dir(args.out_dir);
    fs::create_directories(out_dir);

    const ridcov::urban::World world = ridcov::urban::load_world(
        s.files, s.world, ridcov::RngStream(s.scenario.seed, kWorldStreamId));

    json search_json;
    ridcov::urban::ScenarioConfig cfg = s.scenario;
    if (s.find_target) {
        const ridcov::urban::SearchOutcome found =
            ridcov::urban::find_receiver_count(*s.find_target, cfg, world, s.bounds);
        cfg.n_receivers = found.n_receivers;
        json evals = json::array();
        for (const auto& [n, mean] : found.evaluations)
            evals.push_back({{"n_receivers", n}, {"mean", mean}});
        search_json = {{"target", *s.find_target},
                       {"n_receivers", found.n_receivers},
                       {"achieved_mean", found.achieved_mean},
                       {"evaluations", evals}};
    }

    const ridcov::urban::ScenarioResult result = ridcov::urban::evaluate_scenario(cfg, world);

    const json summary = {{"tech", s.tech_name},
                          {"target", s.find_target ? json(*s.find_target) : json()},
                          {"n_receivers", cfg.n_receivers},
                          {"achieved_mean", result.overall_mean},
                          {"trials", cfg.n_trials},
                          {"failures", result.planning_failures},
                          {"converged", result.converged}};

    const fs::path csv_path = out_dir / "running_means.csv";
    const fs::path summary_path = out_dir / "summary.json";
    ridcov::write_text_file_atomic(csv_path, running_means_csv(result.running_means));
    ridcov::write_text_file_atomic(summary_path, summary.dump(2) + "\n");

    ridcov::RunManifest manifest;
    manifest.subcommand = "urban";
    manifest.config = effective_urban_config(s);
    manifest.config["n_receivers"] = cfg.n_receivers; // found count in search mode
    manifest.master_seed = s.scenario.seed;
    manifest.tool_version = ridcov::kVersion;
    manifest.output_paths = {csv_path.string(), summary_path.string()};
    if (s.find_target) {
        const fs::path search_path = out_dir / "search.json";
        ridcov::write_text_file_atomic(search_path, search_json.dump(2) + "\n");
        manifest.output_paths.push_back(search_path.string());
    }
    manifest.duration_seconds = elapsed_seconds(start);
    ridcov::write_manifest(manifest, out_dir / "manifest.json");

    std::cerr << "mean coverage " << fmt(result.overall_mean) << " over "
              << result.n_trajectories << " trajectories ("
              << result.planning_failures << " planning failures)\n";
    return 0;
}

// -------------------------------------------------------------------------
// hybrid

struct HybridCliArgs {
    std::string config_path;
    std::string out_dir;
    std::string buildings;
    std::string vendors;
    std::string residential;
    std::string roi;
    double r_e_m = 2000.0;
    std::string tech = "R250";
    std::string chord_case = "UDM";
    int n_trajectories = 1000;
    std::uint64_t seed = 0;

    CLI::Option* o_buildings = nullptr;
    CLI::Option* o_vendors = nullptr;
    CLI::Option* o_residential = nullptr;
    CLI::Option* o_roi = nullptr;
    CLI::Option* o_r_e = nullptr;
    CLI::Option* o_tech = nullptr;
    CLI::Option* o_case = nullptr;
    CLI::Option* o_traj = nullptr;
    CLI::Option* o_seed = nullptr;
};

struct HybridSettings {
    ridcov::urban::WorldFiles files;
    ridcov::urban::WorldOptions world;
    double r_e_m = 2000.0;
    std::string tech_name = "R250";
    std::string case_name = "UDM";
    int n_trajectories = 1000;
    std::uint64_t seed = 0;
};

void apply_hybrid_config(const json& cfg, const fs::path& base_dir, HybridSettings& s)
{
    static const std::set<std::string> known = {
        "buildings",   "vendors",      "residential",      "roi",
        "r_e_m",       "tech",         "case",             "n_trajectories",
        "seed",        "n_customers",  "cell_size_m",      "default_height_m"};
    if (!cfg.is_object())
        throw ridcov::DataError("config root must be a JSON object");
    reject_unknown_keys(cfg, known, "config");

    if (cfg.contains("buildings"))
        s.files.buildings_path = resolve_path(base_dir, config_get<std::string>(cfg, "buildings"));
    if (cfg.contains("vendors"))
        s.files.vendors_path = resolve_path(base_dir, config_get<std::string>(cfg, "vendors"));
    if (cfg.contains("residential"))
        s.files.residential_path =
            resolve_path(base_dir, config_get<std::string>(cfg, "residential"));
    if (cfg.contains("roi"))
        s.files.roi_path = resolve_path(base_dir, config_get<std::string>(cfg, "roi"));
    if (cfg.contains("r_e_m"))
        s.r_e_m = config_get<double>(cfg, "r_e_m");
    if (cfg.contains("tech"))
        s.tech_name = config_get<std::string>(cfg, "tech");
    if (cfg.contains("case"))
        s.case_name = config_get<std::string>(cfg, "case");
    if (cfg.contains("n_trajectories"))
        s.n_trajectories = config_get<int>(cfg, "n_trajectories");
    if (cfg.contains("seed"))
        s.seed = config_get<std::uint64_t>(cfg, "seed");
    if (cfg.contains("n_customers"))
        s.world.n_customers = config_get<std::size_t>(cfg, "n_customers");
    if (cfg.contains("cell_size_m"))
        s.world.cell_size_m = config_get<double>(cfg, "cell_size_m");
    if (cfg.contains("default_height_m"))
        s.world.default_height_m = config_get<double>(cfg, "default_height_m");
}

ridcov::ChordCase case_from_string(const std::string& name)
{
    if (name == "UDE")
        return ridcov::ChordCase::UDE;
    if (name == "UDM")
        return ridcov::ChordCase::UDM;
    throw ridcov::DataError("unknown chord case '" + name + "' (use UDE or UDM)");
}

int run_hybrid(const HybridCliArgs& args)
{
    const auto start = std::chrono::steady_clock::now();

    HybridSettings s;
    if (!args.config_path.empty())
        apply_hybrid_config(load_json_file(args.config_path),
                            fs::path(args.config_path).parent_path(), s);
    if (args.o_buildings->count())
        s.files.buildings_path = args.buildings;
    if (args.o_vendors->count())
        s.files.vendors_path = args.vendors;
    if (args.o_residential->count())
        s.files.residential_path = args.residential;
    if (args.o_roi->count())
        s.files.roi_path = args.roi;
    if (args.o_r_e->count())
        s.r_e_m = args.r_e_m;
    if (args.o_tech->count())
        s.tech_name = args.tech;
    if (args.o_case->count())
        s.case_name = args.chord_case;
    if (args.o_traj->count())
        s.n_trajectories = args.n_trajectories;
    if (args.o_seed->count())
        s.seed = args.seed;

    if (s.files.buildings_path.empty() || s.files.vendors_path.empty() ||
        s.files.residential_path.empty())
        throw std::invalid_argument(
            "buildings, vendors and residential paths are required (config keys or flags)");
    if (s.n_trajectories <= 0)
        throw std::invalid_argument("n_trajectories must be positive");

    const ridcov::urban::ReceiverTech tech = ridcov::urban::tech_from_string(s.tech_name);
    const ridcov::ChordCase chord_case = case_from_string(s.case_name);

    const fs::path out_dir(args.out_dir);
    fs::create_directories(out_dir);

    const ridcov::urban::World world = ridcov::urban::load_world(
        s.files, s.world, ridcov::RngStream(s.seed, kWorldStreamId));
    const ridcov::hybrid::EnvironmentPacking packing =
        ridcov::hybrid::pack_roi(world.roi, s.r_e_m, tech.radius_m);

    if (world.vendors.empty())
        throw ridcov::DataError("world has no vendors inside the region of interest");
    if (world.customers.empty())
        throw ridcov::DataError("world has no customers");

    ridcov::RngStream od_rng(s.seed, 0);
    double total_length = 0.0;
    double weighted_estimate = 0.0;
    double residual_length = 0.0;
    std::array<std::uint64_t, 10> histogram{};
    for (int t = 0; t < s.n_trajectories; ++t) {
        ridcov::planner::Trajectory traj;
        bool planned = false;
        for (int attempt = 0; attempt < 50 && !planned; ++attempt) {
            const ridcov::planner::OdPair od{
                world.vendors[od_rng.below(world.vendors.size())],
                world.customers[od_rng.below(world.customers.size())]};
            try {
                traj = ridcov::planner::plan_slpp(od);
                planned = true;
            } catch (const ridcov::PlanningError&) {
            }
        }
        if (!planned)
            throw ridcov::PlanningError("could not draw a non-degenerate OD pair");

        const ridcov::hybrid::TrajectoryDecomposition decomp =
            ridcov::hybrid::decompose_trajectory(traj, packing);
        const ridcov::hybrid::HybridEstimate est =
            ridcov::hybrid::hybrid_expected_coverage(decomp, packing, chord_case);

        total_length += decomp.total_length;
        weighted_estimate += est.estimate * decomp.total_length;
        residual_length += decomp.residual_length;
        const int bin = std::min(9, static_cast<int>(est.epsilon * 10.0));
        ++histogram[static_cast<std::size_t>(std::max(0, bin))];
    }
    if (total_length <= 0.0)
        throw ridcov::DataError("trajectories have zero total length");

    json report = {{"K", packing.environments.size()},
                   {"r_e", s.r_e_m},
                   {"r_c", tech.radius_m},
                   {"case", s.case_name},
                   {"estimate", weighted_estimate / total_length},
                   {"epsilon", residual_length / total_length},
                   {"residual_fraction_histogram", histogram},
                   {"n_trajectories", s.n_trajectories}};
    if (!packing.warning.empty())
        report["warning"] = packing.warning;

    const fs::path report_path = out_dir / "report.json";
    ridcov::write_text_file_atomic(report_path, report.dump(2) + "\n");

    ridcov::RunManifest manifest;
    manifest.subcommand = "hybrid";
    manifest.config = {{"buildings", s.files.buildings_path},
                       {"vendors", s.files.vendors_path},
                       {"residential", s.files.residential_path},
                       {"roi", s.files.roi_path},
                       {"r_e_m", s.r_e_m},
                       {"tech", s.tech_name},
                       {"case", s.case_name},
                       {"n_trajectories", s.n_trajectories},
                       {"seed", s.seed},
                       {"n_customers", s.world.n_customers},
                       {"cell_size_m", s.world.cell_size_m},
                       {"default_height_m", s.world.default_height_m}};
    manifest.master_seed = s.seed;
    manifest.tool_version = ridcov::kVersion;
    manifest.output_paths = {report_path.string()};
    manifest.duration_seconds = elapsed_seconds(start);
    ridcov::write_manifest(manifest, out_dir / "manifest.json");

    std::cerr << "K=" << packing.environments.size() << " estimate "
              << fmt(weighted_estimate / total_length) << " epsilon "
              << fmt(residual_length / total_length) << '\n';
    return 0;
}

// -------------------------------------------------------------------------
// ingest-check

struct IngestArgs {
    std::string buildings;
    std::string vendors;
    std::string residential;
    std::string roi;
    std::string dump_grid_base;
    double altitude_ft = 200.0;
    double cell_size_m = 10.0;
    std::uint64_t n_customers = 200;
    std::uint64_t seed = 0;
};

void print_stats(const char* label, const ridcov::geo::ParseStats& stats)
{
    std::cout << label << ": " << stats.features_total << " features, "
              << stats.features_used << " used, " << stats.features_skipped << " skipped";
    if (stats.heights_defaulted > 0)
        std::cout << ", " << stats.heights_defaulted << " heights defaulted";
    std::cout << '\n';
    std::size_t shown = 0;
    for (const std::string& w : stats.warnings) {
        if (++shown > 5) {
            std::cout << "  ... " << (stats.warnings.size() - 5) << " more warnings\n";
            break;
        }
        std::cout << "  warning: " << w << '\n';
    }
}

int run_ingest_check(const IngestArgs& args)
{
    const auto start = std::chrono::steady_clock::now();

    ridcov::urban::WorldFiles files;
    files.buildings_path = args.buildings;
    files.vendors_path = args.vendors;
    files.residential_path = args.residential;
    files.roi_path = args.roi;

    ridcov::urban::WorldOptions options;
    options.n_customers = args.n_customers;
    options.cell_size_m = args.cell_size_m;
    if (!args.dump_grid_base.empty())
        options.grid_altitudes_ft = {args.altitude_ft};

    const ridcov::urban::World world = ridcov::urban::load_world(
        files, options, ridcov::RngStream(args.seed, kWorldStreamId));

    print_stats("buildings", world.buildings_stats);
    print_stats("vendors", world.vendors_stats);
    print_stats("residential", world.residential_stats);

    const double area_km2 = ridcov::geo::polygon_area(world.roi.boundary) / 1e6;
    std::cout << "roi: " << world.roi.boundary.size() << " vertices, " << fmt(area_km2)
              << " km^2, hull " << world.roi.obstacle_hull.size() << " vertices\n";
    std::cout << "buildings outside hull: " << world.buildings_outside_hull
              << ", vendors outside roi: " << world.vendors_outside_roi << '\n';
    std::cout << "candidate sites: " << world.candidate_sites.size()
              << ", vendors: " << world.vendors.size()
              << ", customers: " << world.customers.size() << '\n';

    if (!args.dump_grid_base.empty()) {
        const ridcov::geo::OccupancyGrid* grid = world.grid_at(args.altitude_ft);
        if (grid == nullptr)
            throw ridcov::DataError("no occupancy grid at " + fmt(args.altitude_ft) + " ft");
        std::ostringstream raster;
        std::ostringstream header;
        ridcov::geo::write_occupancy_pgm(*grid, raster, header);
        const std::string pgm_path = args.dump_grid_base + ".pgm";
        const std::string json_path = args.dump_grid_base + ".json";
        ridcov::write_text_file_atomic(pgm_path, raster.str());
        ridcov::write_text_file_atomic(json_path, header.str());

        int occupied = 0;
        for (const auto v : grid->cells)
            occupied += v;
        std::cout << "grid at " << args.altitude_ft << " ft: " << grid->width << "x"
                  << grid->height << " cells, " << occupied << " occupied\n";

        ridcov::RunManifest manifest;
        manifest.subcommand = "ingest-check";
        manifest.config = {{"buildings", args.buildings},
                           {"vendors", args.vendors},
                           {"residential", args.residential},
                           {"roi", args.roi},
                           {"altitude_ft", args.altitude_ft},
                           {"cell_size_m", args.cell_size_m},
                           {"n_customers", args.n_customers},
                           {"seed", args.seed}};
        manifest.master_seed = args.seed;
        manifest.tool_version = ridcov::kVersion;
        manifest.output_paths = {pgm_path, json_path};
        manifest.duration_seconds = elapsed_seconds(start);
        ridcov::write_manifest(manifest, args.dump_grid_base + ".manifest.json");
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Expected Remote ID receiver coverage of drone trajectories"};
    app.set_version_flag("--version", std::string(ridcov::kVersion));
    app.require_subcommand(1);

    AnalyticArgs an;
    CLI::App* analytic = app.add_subcommand(
        "analytic", "Closed-form expected coverage (UDE and UDM) via quadrature");
    CLI::Option* o_rc = analytic->add_option("--rc", an.r_c, "receiver radius, meters");
    CLI::Option* o_re = analytic->add_option("--re", an.r_e, "environment radius, meters");
    analytic->add_option("--rho-sweep", an.rho_sweep,
                         "sweep rho = r_c/r_e as start:stop:step over [0,1]");
    analytic->add_option("--out", an.out_path, "write CSV here instead of stdout");
    analytic->add_option("--quad-rel", an.quad.relative_tolerance, "quadrature rel tolerance");
    analytic->add_option("--quad-abs", an.quad.absolute_tolerance, "quadrature abs tolerance");
    analytic->add_option("--quad-max-subdiv", an.quad.max_subdivisions,
                         "quadrature subdivision budget");

    McArgs mc;
    CLI::App* mc_verify = app.add_subcommand(
        "mc-verify", "Monte Carlo sweep against the analytic values (4 stderr check)");
    mc_verify->add_option("--n-trials", mc.n_trials, "chords per cell");
    mc_verify->add_option("--seed", mc.seed, "master seed");
    mc_verify->add_option("--threads", mc.threads, "worker threads (0 = all cores)");
    mc_verify->add_option("--re-grid", mc.re_grid, "comma list of environment radii");
    mc_verify->add_option("--fractions", mc.fractions, "comma list of r_c/r_e fractions");
    mc_verify->add_option("--out", mc.out_path, "write CSV here instead of stdout");
    mc_verify->add_option("--quad-rel", mc.quad.relative_tolerance, "quadrature rel tolerance");
    mc_verify->add_option("--quad-abs", mc.quad.absolute_tolerance, "quadrature abs tolerance");
    mc_verify->add_option("--quad-max-subdiv", mc.quad.max_subdivisions,
                          "quadrature subdivision budget");

    UrbanCliArgs ur;
    CLI::App* urban = app.add_subcommand(
        "urban", "City-scale scenario evaluation or receiver-count search");
    urban->add_option("--config", ur.config_path, "JSON config (flags override keys)");
    urban->add_option("--out", ur.out_dir, "output directory")->required();
    ur.o_buildings = urban->add_option("--buildings", ur.buildings, "buildings GeoJSON");
    ur.o_vendors = urban->add_option("--vendors", ur.vendors, "vendors GeoJSON");
    ur.o_residential =
        urban->add_option("--residential", ur.residential, "residential GeoJSON");
    ur.o_roi = urban->add_option("--roi", ur.roi, "region-of-interest polygon GeoJSON");
    ur.o_altitude = urban->add_option("--altitude-ft", ur.altitude_ft, "flight altitude, feet");
    ur.o_tech = urban->add_option("--tech", ur.tech, "receiver tech: R250, R1000, R2000");
    ur.o_planner = urban->add_option("--planner", ur.planner_name, "SLPP or RRTStar");
    ur.o_n_receivers = urban->add_option("--n-receivers", ur.n_receivers, "receivers to deploy");
    ur.o_traj = urban->add_option("--trajectories-per-trial", ur.trajectories_per_trial,
                                  "trajectories per trial");
    ur.o_trials = urban->add_option("--n-trials", ur.n_trials, "independent trials");
    ur.o_seed = urban->add_option("--seed", ur.seed, "master seed");
    ur.o_threads = urban->add_option("--threads", ur.threads, "worker threads (0 = all cores)");
    ur.o_target = urban->add_option("--find-target", ur.find_target,
                                    "search for the fewest receivers reaching this mean");
    ur.o_customers = urban->add_option("--n-customers", ur.n_customers, "customers to sample");
    ur.o_cell = urban->add_option("--cell-size", ur.cell_size_m, "occupancy cell size, meters");

    HybridCliArgs hy;
    CLI::App* hybrid = app.add_subcommand(
        "hybrid", "Pack the ROI with idealized environments and estimate coverage");
    hybrid->add_option("--config", hy.config_path, "JSON config (flags override keys)");
    hybrid->add_option("--out", hy.out_dir, "output directory")->required();
    hy.o_buildings = hybrid->add_option("--buildings", hy.buildings, "buildings GeoJSON");
    hy.o_vendors = hybrid->add_option("--vendors", hy.vendors, "vendors GeoJSON");
    hy.o_residential =
        hybrid->add_option("--residential", hy.residential, "residential GeoJSON");
    hy.o_roi = hybrid->add_option("--roi", hy.roi, "region-of-interest polygon GeoJSON");
    hy.o_r_e = hybrid->add_option("--r-e", hy.r_e_m, "environment radius, meters");
    hy.o_tech = hybrid->add_option("--tech", hy.tech, "receiver tech: R250, R1000, R2000");
    hy.o_case = hybrid->add_option("--case", hy.chord_case, "chord sampling case: UDE or UDM");
    hy.o_traj = hybrid->add_option("--n-trajectories", hy.n_trajectories, "trajectories");
    hy.o_seed = hybrid->add_option("--seed", hy.seed, "master seed");

    IngestArgs in;
    CLI::App* ingest = app.add_subcommand(
        "ingest-check", "Parse city themes, report stats, optionally dump a grid");
    ingest->add_option("--buildings", in.buildings, "buildings GeoJSON")->required();
    ingest->add_option("--vendors", in.vendors, "vendors GeoJSON")->required();
    ingest->add_option("--residential", in.residential, "residential GeoJSON")->required();
    ingest->add_option("--roi", in.roi, "region-of-interest polygon GeoJSON");
    ingest->add_option("--dump-grid", in.dump_grid_base,
                       "write <base>.pgm and <base>.json occupancy dump");
    ingest->add_option("--altitude-ft", in.altitude_ft, "grid altitude, feet");
    ingest->add_option("--cell-size", in.cell_size_m, "occupancy cell size, meters");
    ingest->add_option("--n-customers", in.n_customers, "customers to sample");
    ingest->add_option("--seed", in.seed, "sampling seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    an.have_rc = o_rc->count() > 0;
    an.have_re = o_re->count() > 0;

    try {
        if (analytic->parsed())
            return run_analytic(an);
        if (mc_verify->parsed())
            return run_mc_verify(mc);
        if (urban->parsed())
            return run_urban(ur);
        if (hybrid->parsed())
            return run_hybrid(hy);
        if (ingest->parsed())
            return run_ingest_check(in);
        std::cerr << "error: no subcommand\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const ridcov::ConvergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const ridcov::PlanningError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const ridcov::DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
