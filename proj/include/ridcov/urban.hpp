#pragma once

// City-scale coverage experiments: world assembly from parsed themes,
// receiver deployment, scenario evaluation with running means, and the
// receiver-count search.

#include "ridcov/errors.hpp"
#include "ridcov/geo.hpp"
#include "ridcov/geometry.hpp"
#include "ridcov/planner.hpp"
#include "ridcov/rng.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ridcov::urban {

enum class TechName { R250, R1000, R2000 };

struct ReceiverTech {
    TechName name = TechName::R2000;
    double radius_m = 2000.0;
};

ReceiverTech make_tech(TechName name);
ReceiverTech tech_from_string(std::string_view name); // "R250" | "R1000" | "R2000"
const char* to_string(TechName name);

struct ReceiverDeployment {
    std::vector<Point2> centers; // distinct candidate sites
    ReceiverTech tech;

    std::vector<Disk> disks() const;
};

// Assembled, projected city.  All coordinates are meters in the local frame
// centered on the ROI centroid.
struct World {
    geo::LonLat reference;
    geo::RegionOfInterest roi;
    std::vector<geo::BuildingFootprint> buildings; // centroid inside the obstacle hull
    std::vector<Point2> vendors;                   // inside the ROI boundary
    std::vector<Point2> customers;                 // inside residential and ROI
    std::vector<Point2> candidate_sites;           // building centroids
    std::map<long, geo::OccupancyGrid> grids;      // keyed by altitude_ft rounded
    geo::ParseStats buildings_stats, vendors_stats, residential_stats;
    std::size_t vendors_outside_roi = 0;
    std::size_t buildings_outside_hull = 0;

    const geo::OccupancyGrid* grid_at(double altitude_ft) const;
};

struct WorldOptions {
    std::size_t n_customers = 2000;
    double default_height_m = 8.0;
    double cell_size_m = 10.0;
    std::vector<double> grid_altitudes_ft; // occupancy grids to prebuild
};

// Projects and assembles a world from parsed themes.  When roi_ring is empty
// the ROI boundary is the convex hull of every parsed coordinate.  Customers
// are sampled from rng; the obstacle hull is the convex hull of the boundary
// plus all building vertices.
World assemble_world(const geo::ThemeFeatures& buildings,
                     const geo::ThemeFeatures& vendors,
                     const geo::ThemeFeatures& residential,
                     const std::vector<geo::LonLat>& roi_ring,
                     const WorldOptions& options, RngStream rng);

// File-based convenience wrapper: reads the three theme files (and the
// optional ROI polygon file) and assembles the world.
struct WorldFiles {
    std::string buildings_path;
    std::string vendors_path;
    std::string residential_path;
    std::string roi_path; // optional, empty = derive hull
};
World load_world(const WorldFiles& files, const WorldOptions& options, RngStream rng);

struct ScenarioConfig {
    double altitude_ft = 200.0;
    ReceiverTech tech = make_tech(TechName::R2000);
    planner::Kind planner = planner::Kind::SLPP;
    int n_receivers = 0;
    int trajectories_per_trial = 1000;
    int n_trials = 20;
    std::uint64_t seed = 0;
    bool redraw_receivers_per_trial = true;
    int convergence_window = 50;
    double convergence_tolerance = 0.03;
    planner::RrtStarParams rrt;
    int max_od_resamples = 50;
    int n_threads = 1;
};

struct ScenarioResult {
    std::vector<double> per_trial_means;
    double overall_mean = 0.0;
    std::vector<double> running_means; // cumulative mean after each trajectory
    bool converged = false;
    std::uint64_t n_trajectories = 0;
    std::uint64_t planning_failures = 0;
};

// n distinct sites uniform without replacement.
ReceiverDeployment place_receivers(std::size_t n, std::span<const Point2> sites,
                                   ReceiverTech tech, RngStream& rng);

// Per trial: deployment (redrawn or shared per cfg), then
// trajectories_per_trial OD pairs (uniform vendor origin, uniform customer
// destination) planned and scored against the deployment's disks.  RRT*
// failures resample the OD pair up to max_od_resamples times and are counted.
// Fixed seed gives a bit-identical result for any n_threads.
ScenarioResult evaluate_scenario(const ScenarioConfig& cfg, const World& world);

// Same trajectory machinery against one fixed, caller-supplied deployment
// (cfg.n_receivers ignored).
ScenarioResult evaluate_scenario_with_deployment(const ScenarioConfig& cfg,
                                                 const World& world,
                                                 const ReceiverDeployment& deployment);

// True iff every one of the last `window` running means deviates from the
// final value by at most `tolerance`.
bool convergence_check(std::span<const double> running_means, std::size_t window,
                       double tolerance);

struct SearchBounds {
    int lower = 1;
    int upper = 0; // 0 = number of candidate sites
};

struct SearchOutcome {
    int n_receivers = 0;
    double achieved_mean = 0.0;
    bool converged = false;
    std::uint64_t planning_failures = 0;
    std::vector<std::pair<int, double>> evaluations; // (n, mean) in eval order
};

class TargetUnreachable : public ConvergenceError {
public:
    TargetUnreachable(const std::string& what, int best_n, double best_mean)
        : ConvergenceError(what, best_mean, 0.0), best_n_(best_n) {}
    int best_n() const { return best_n_; }

private:
    int best_n_;
};

// Smallest tested receiver count whose mean reaches `target`, found by
// doubling then bisection; every evaluation reuses cfg's seed and trial
// counts (paired seeds keep the count-vs-mean comparison low-variance).
// target = 0 returns n = 0 immediately; otherwise target must lie in (0,1).
// Unreachable targets throw TargetUnreachable with the best (n, mean).
SearchOutcome find_receiver_count(double target, const ScenarioConfig& cfg,
                                  const World& world, SearchBounds bounds = {});

} // namespace ridcov::urban
