#include "ridcov/urban.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace ridcov::urban {

namespace {

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<Point2> project_ring(const std::vector<geo::LonLat>& ring, geo::LonLat ref)
{
    std::vector<Point2> out;
    out.reserve(ring.size());
    for (const geo::LonLat& p : ring)
        out.push_back(geo::project_to_local(p, ref));
    return out;
}

long altitude_key(double altitude_ft) { return std::lround(altitude_ft); }

struct TrialOutput {
    std::vector<double> coverages;
    std::uint64_t failures = 0;
};

} // namespace

ReceiverTech make_tech(TechName name)
{
    switch (name) {
    case TechName::R250: return {name, 250.0};
    case TechName::R1000: return {name, 1000.0};
    default: return {TechName::R2000, 2000.0};
    }
}

ReceiverTech tech_from_string(std::string_view name)
{
    if (name == "R250")
        return make_tech(TechName::R250);
    if (name == "R1000")
        return make_tech(TechName::R1000);
    if (name == "R2000")
        return make_tech(TechName::R2000);
    throw DataError("unknown receiver tech '" + std::string(name) +
                    "' (expected R250, R1000 or R2000)");
}

const char* to_string(TechName name)
{
    switch (name) {
    case TechName::R250: return "R250";
    case TechName::R1000: return "R1000";
    default: return "R2000";
    }
}

std::vector<Disk> ReceiverDeployment::disks() const
{
    std::vector<Disk> out;
    out.reserve(centers.size());
    for (const Point2& c : centers)
        out.push_back({c, tech.radius_m});
    return out;
}

const geo::OccupancyGrid* World::grid_at(double altitude_ft) const
{
    const auto it = grids.find(altitude_key(altitude_ft));
    return it == grids.end() ? nullptr : &it->second;
}

World assemble_world(const geo::ThemeFeatures& buildings,
                     const geo::ThemeFeatures& vendors,
                     const geo::ThemeFeatures& residential,
                     const std::vector<geo::LonLat>& roi_ring,
                     const WorldOptions& options, RngStream rng)
{
    // ROI ring in lon/lat: explicit, or the convex hull of everything parsed.
    // The projection is linear in (lon, lat), so taking the hull before
    // projecting is equivalent to taking it after.
    std::vector<geo::LonLat> ring = roi_ring;
    if (ring.empty()) {
        std::vector<Point2> all;
        for (const auto& poly : buildings.polygons)
            for (const geo::LonLat& p : poly)
                all.push_back({p.lon, p.lat});
        for (const geo::LonLat& p : vendors.points)
            all.push_back({p.lon, p.lat});
        for (const auto& poly : residential.polygons)
            for (const geo::LonLat& p : poly)
                all.push_back({p.lon, p.lat});
        const std::vector<Point2> hull = geo::convex_hull(std::move(all));
        if (hull.size() < 3)
            throw DataError("cannot derive a region of interest: fewer than three "
                            "distinct coordinates in the input themes");
        for (const Point2& p : hull)
            ring.push_back({p.x, p.y});
    }
    if (ring.size() < 3)
        throw DataError("region of interest polygon needs at least three vertices");

    World world;
    {
        std::vector<Point2> ring_pts;
        ring_pts.reserve(ring.size());
        for (const geo::LonLat& p : ring)
            ring_pts.push_back({p.lon, p.lat});
        const Point2 c = geo::polygon_centroid(ring_pts);
        world.reference = {c.x, c.y};
    }

    world.roi.boundary = project_ring(ring, world.reference);

    // Obstacle hull: boundary plus every building vertex, so out-of-ROI
    // buildings still act as obstacles.
    std::vector<Point2> hull_input = world.roi.boundary;
    std::vector<geo::BuildingFootprint> all_buildings;
    all_buildings.reserve(buildings.polygons.size());
    for (std::size_t i = 0; i < buildings.polygons.size(); ++i) {
        geo::BuildingFootprint b;
        b.polygon = project_ring(buildings.polygons[i], world.reference);
        b.height_m = buildings.heights_m[i];
        b.centroid = geo::polygon_centroid(b.polygon);
        for (const Point2& p : b.polygon)
            hull_input.push_back(p);
        all_buildings.push_back(std::move(b));
    }
    world.roi.obstacle_hull = geo::convex_hull(std::move(hull_input));

    for (auto& b : all_buildings) {
        if (geo::point_in_polygon(b.centroid, world.roi.obstacle_hull))
            world.buildings.push_back(std::move(b));
        else
            ++world.buildings_outside_hull;
    }
    world.candidate_sites = geo::candidate_receiver_sites(world.buildings);

    for (const geo::LonLat& v : vendors.points) {
        const Point2 p = geo::project_to_local(v, world.reference);
        if (geo::point_in_polygon(p, world.roi.boundary))
            world.vendors.push_back(p);
        else
            ++world.vendors_outside_roi;
    }

    std::vector<std::vector<Point2>> residential_rings;
    residential_rings.reserve(residential.polygons.size());
    for (const auto& poly : residential.polygons)
        residential_rings.push_back(project_ring(poly, world.reference));

    if (options.n_customers > 0) {
        RngStream customer_rng = rng.substream(0);
        world.customers = geo::sample_customers(residential_rings, options.n_customers,
                                                customer_rng, &world.roi.boundary);
    }

    for (const double altitude_ft : options.grid_altitudes_ft) {
        world.grids.emplace(altitude_key(altitude_ft),
                            geo::build_occupancy_grid(world.buildings, world.roi,
                                                      altitude_ft, options.cell_size_m));
    }

    world.buildings_stats = buildings.stats;
    world.vendors_stats = vendors.stats;
    world.residential_stats = residential.stats;
    return world;
}

World load_world(const WorldFiles& files, const WorldOptions& options, RngStream rng)
{
    const geo::ThemeFeatures buildings = geo::parse_theme_geojson(
        read_file(files.buildings_path), geo::Theme::Buildings, options.default_height_m);
    const geo::ThemeFeatures vendors =
        geo::parse_theme_geojson(read_file(files.vendors_path), geo::Theme::Vendors);
    const geo::ThemeFeatures residential = geo::parse_theme_geojson(
        read_file(files.residential_path), geo::Theme::Residential);

    std::vector<geo::LonLat> roi_ring;
    if (!files.roi_path.empty()) {
        const geo::ThemeFeatures roi = geo::parse_theme_geojson(read_file(files.roi_path),
                                                                geo::Theme::Residential);
        if (roi.polygons.empty())
            throw DataError("ROI file contains no polygon: " + files.roi_path);
        roi_ring = roi.polygons[0];
    }
    return assemble_world(buildings, vendors, residential, roi_ring, options, rng);
}

ReceiverDeployment place_receivers(std::size_t n, std::span<const Point2> sites,
                                   ReceiverTech tech, RngStream& rng)
{
    if (n > sites.size())
        throw std::invalid_argument("requested " + std::to_string(n) +
                                    " receivers but only " + std::to_string(sites.size()) +
                                    " candidate sites exist");

    // Partial Fisher-Yates over an index array.
    std::vector<std::uint32_t> idx(sites.size());
    std::iota(idx.begin(), idx.end(), 0u);
    ReceiverDeployment out;
    out.tech = tech;
    out.centers.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
        std::swap(idx[i], idx[j]);
        out.centers.push_back(sites[idx[i]]);
    }
    return out;
}

namespace {

ScenarioResult run_scenario(const ScenarioConfig& cfg, const World& world,
                            const ReceiverDeployment* fixed_deployment)
{
    if (cfg.n_trials <= 0 || cfg.trajectories_per_trial <= 0)
        throw std::invalid_argument("trial counts must be positive");
    if (cfg.n_receivers < 0)
        throw std::invalid_argument("receiver count must be non-negative");
    if (world.vendors.empty())
        throw DataError("world has no vendors inside the region of interest");
    if (world.customers.empty())
        throw DataError("world has no customers");
    if (fixed_deployment == nullptr &&
        static_cast<std::size_t>(cfg.n_receivers) > world.candidate_sites.size())
        throw DataError("receiver count exceeds candidate sites (" +
                        std::to_string(world.candidate_sites.size()) + ")");

    const geo::OccupancyGrid* grid = nullptr;
    if (cfg.planner == planner::Kind::RRTStar) {
        grid = world.grid_at(cfg.altitude_ft);
        if (grid == nullptr)
            throw DataError("no occupancy grid prepared at " +
                            std::to_string(cfg.altitude_ft) + " ft");
    }

    const RngStream master(cfg.seed, 0);

    // Fixed-deployment mode draws once; redraw mode draws per trial below.
    ReceiverDeployment shared;
    bool use_shared = false;
    if (fixed_deployment != nullptr) {
        shared = *fixed_deployment;
        use_shared = true;
    } else if (!cfg.redraw_receivers_per_trial) {
        RngStream deploy_rng = master.substream(0);
        shared = place_receivers(static_cast<std::size_t>(cfg.n_receivers),
                                 world.candidate_sites, cfg.tech, deploy_rng);
        use_shared = true;
    }

    const std::size_t n_vendors = world.vendors.size();
    const std::size_t n_customers = world.customers.size();
    std::vector<TrialOutput> trials(static_cast<std::size_t>(cfg.n_trials));
    std::exception_ptr worker_error;
    std::mutex error_mutex;

    const auto run_trial = [&](int t) {
        const RngStream trial_stream = master.substream(1 + static_cast<std::uint64_t>(t));
        ReceiverDeployment deployment;
        if (use_shared) {
            deployment = shared;
        } else {
            RngStream deploy_rng = trial_stream.substream(0);
            deployment = place_receivers(static_cast<std::size_t>(cfg.n_receivers),
                                         world.candidate_sites, cfg.tech, deploy_rng);
        }
        const std::vector<Disk> disks = deployment.disks();

        TrialOutput out;
        out.coverages.reserve(cfg.trajectories_per_trial);
        RngStream od_rng = trial_stream.substream(1);
        for (int j = 0; j < cfg.trajectories_per_trial; ++j) {
            planner::Trajectory traj;
            bool planned = false;
            for (int attempt = 0; attempt <= cfg.max_od_resamples && !planned; ++attempt) {
                const planner::OdPair od{world.vendors[od_rng.below(n_vendors)],
                                         world.customers[od_rng.below(n_customers)]};
                try {
                    if (cfg.planner == planner::Kind::SLPP) {
                        traj = planner::plan_slpp(od, cfg.altitude_ft);
                    } else {
                        planner::RrtStarParams params = cfg.rrt;
                        params.rng = od_rng.substream(
                            static_cast<std::uint64_t>(j) * 1000 + attempt);
                        traj = planner::plan_rrt_star(od, *grid, params, cfg.altitude_ft);
                    }
                    planned = true;
                } catch (const PlanningError&) {
                    ++out.failures;
                }
            }
            if (!planned)
                throw PlanningError("trial " + std::to_string(t) + ": exhausted " +
                                    std::to_string(cfg.max_od_resamples) +
                                    " OD resamples without a plannable pair");
            out.coverages.push_back(polyline_coverage_proportion(traj.waypoints, disks));
        }
        trials[static_cast<std::size_t>(t)] = std::move(out);
    };

    const auto guarded_trial = [&](int t) {
        try {
            run_trial(t);
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!worker_error)
                worker_error = std::current_exception();
        }
    };

    const int workers = std::max(1, cfg.n_threads);
    if (workers == 1 || cfg.n_trials == 1) {
        for (int t = 0; t < cfg.n_trials; ++t)
            guarded_trial(t);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (int t = w; t < cfg.n_trials; t += workers)
                    guarded_trial(t);
            });
        }
        for (auto& th : pool)
            th.join();
    }
    if (worker_error)
        std::rethrow_exception(worker_error);

    ScenarioResult result;
    double total = 0.0;
    for (const TrialOutput& trial : trials) {
        result.planning_failures += trial.failures;
        double trial_sum = 0.0;
        for (const double cov : trial.coverages) {
            trial_sum += cov;
            total += cov;
            ++result.n_trajectories;
            result.running_means.push_back(total / static_cast<double>(result.n_trajectories));
        }
        result.per_trial_means.push_back(trial_sum / trial.coverages.size());
    }
    result.overall_mean = total / static_cast<double>(result.n_trajectories);
    result.converged =
        static_cast<std::size_t>(cfg.convergence_window) < result.running_means.size() &&
        convergence_check(result.running_means,
                          static_cast<std::size_t>(cfg.convergence_window),
                          cfg.convergence_tolerance);
    return result;
}

} // namespace

ScenarioResult evaluate_scenario(const ScenarioConfig& cfg, const World& world)
{
    return run_scenario(cfg, world, nullptr);
}

ScenarioResult evaluate_scenario_with_deployment(const ScenarioConfig& cfg,
                                                 const World& world,
                                                 const ReceiverDeployment& deployment)
{
    return run_scenario(cfg, world, &deployment);
}

bool convergence_check(std::span<const double> running_means, std::size_t window,
                       double tolerance)
{
    if (window == 0 || window >= running_means.size())
        throw std::invalid_argument("window must be positive and smaller than the series");
    const double final_value = running_means.back();
    for (std::size_t i = running_means.size() - window; i < running_means.size(); ++i) {
        if (std::abs(running_means[i] - final_value) > tolerance)
            return false;
    }
    return true;
}

SearchOutcome find_receiver_count(double target, const ScenarioConfig& cfg,
                                  const World& world, SearchBounds bounds)
{
    if (target == 0.0)
        return {0, 0.0, false, 0, {}};
    if (!(target > 0.0) || !(target < 1.0))
        throw std::invalid_argument("coverage target must lie in [0, 1)");
    if (world.candidate_sites.empty())
        throw DataError("world has no candidate receiver sites");

    const int upper = bounds.upper > 0
                          ? std::min<int>(bounds.upper,
                                          static_cast<int>(world.candidate_sites.size()))
                          : static_cast<int>(world.candidate_sites.size());
    const int lower = std::clamp(bounds.lower, 1, upper);

    SearchOutcome outcome;
    std::map<int, std::pair<double, bool>> cache; // n -> (mean, converged)
    const auto evaluate = [&](int n) {
        if (const auto it = cache.find(n); it != cache.end())
            return it->second;
        ScenarioConfig run_cfg = cfg;
        run_cfg.n_receivers = n;
        const ScenarioResult r = evaluate_scenario(run_cfg, world);
        outcome.planning_failures += r.planning_failures;
        outcome.evaluations.emplace_back(n, r.overall_mean);
        cache[n] = {r.overall_mean, r.converged};
        return cache[n];
    };

    // Coarse geometric sweep up from the lower bound.
    int n = lower;
    int last_below = 0;
    while (true) {
        const auto [mean, converged] = evaluate(n);
        if (mean >= target)
            break;
        if (n >= upper) {
            double best_mean = 0.0;
            int best_n = n;
            for (const auto& [en, emean] : outcome.evaluations) {
                if (emean > best_mean) {
                    best_mean = emean;
                    best_n = en;
                }
            }
            throw TargetUnreachable("coverage target " + std::to_string(target) +
                                        " unreachable within " + std::to_string(upper) +
                                        " receivers (best mean " + std::to_string(best_mean) +
                                        " at n=" + std::to_string(best_n) + ")",
                                    best_n, best_mean);
        }
        last_below = n;
        n = std::min(upper, 2 * n);
    }

    // Bisect (last_below, n]; every tested count above keeps its cached mean.
    int lo = std::max(last_below, lower - 1);
    int hi = n;
    while (hi - lo > 1) {
        const int mid = lo + (hi - lo) / 2;
        if (mid <= last_below || mid >= hi) // safety; cannot occur with lo < mid < hi
            break;
        const auto [mean, converged] = evaluate(mid);
        if (mean >= target)
            hi = mid;
        else
            lo = mid;
    }

    outcome.n_receivers = hi;
    outcome.achieved_mean = cache[hi].first;
    outcome.converged = cache[hi].second;
    return outcome;
}

} // namespace ridcov::urban
