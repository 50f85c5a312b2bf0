#pragma once

// Trajectory generation between origin-destination pairs: obstacle-blind
// straight lines (SLPP) and RRT* over an occupancy grid.

#include "ridcov/geo.hpp"
#include "ridcov/geometry.hpp"
#include "ridcov/rng.hpp"

#include <string>
#include <vector>

namespace ridcov::planner {

enum class Kind { SLPP, RRTStar };

const char* to_string(Kind k);

struct OdPair {
    Point2 origin{};
    Point2 destination{};
};

struct Trajectory {
    std::vector<Point2> waypoints; // >= 2, consecutive points distinct
    Kind planner = Kind::SLPP;
    double altitude_ft = 0.0;
    double total_length = 0.0;
};

struct RrtStarParams {
    int max_iterations = 5000;
    double step_size = 50.0;          // meters
    double goal_bias = 0.05;
    double goal_radius = 25.0;        // meters
    double rewire_radius_gamma = 2.0; // shrinking-ball scale, floored at step_size
    double collision_check_resolution = 0.0; // meters; <= 0 means cell_size / 2
    RngStream rng{};
};

// Straight line from origin to destination.  Ignores obstacles and altitude.
// Coincident endpoints throw PlanningError.
Trajectory plan_slpp(const OdPair& od, double altitude_ft = 0.0);

// Standard RRT*: sample (goal-biased) in free space over the grid extent,
// steer by step_size, choose parent and rewire within a shrinking radius
// floored at step_size, then extract the cheapest path reaching the goal
// region.  The sample sequence depends only on params.rng, so extending
// max_iterations keeps the earlier tree as a prefix and the returned cost is
// non-increasing in the iteration budget.  Throws PlanningError when the
// endpoint cells are occupied or no path reached the goal region.
Trajectory plan_rrt_star(const OdPair& od, const geo::OccupancyGrid& grid,
                         RrtStarParams params, double altitude_ft = 0.0);

// One JSON object per line: {"planner","altitude_ft","length_m","waypoints"}.
std::string trajectory_to_json_line(const Trajectory& traj);

} // namespace ridcov::planner
