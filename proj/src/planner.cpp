#include "ridcov/planner.hpp"

#include "ridcov/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace ridcov::planner {

namespace {

std::string describe(const OdPair& od)
{
    char buf[128];
    std::snprintf(buf, sizeof(buf), "(%.1f, %.1f) -> (%.1f, %.1f)",
                  od.origin.x, od.origin.y, od.destination.x, od.destination.y);
    return buf;
}

bool segment_free(const geo::OccupancyGrid& grid, Point2 a, Point2 b, double resolution)
{
    const double len = distance(a, b);
    const int steps = std::max(1, static_cast<int>(std::ceil(len / resolution)));
    for (int i = 0; i <= steps; ++i) {
        const double t = static_cast<double>(i) / steps;
        if (grid.occupied_point(a + t * (b - a)))
            return false;
    }
    return true;
}

struct Tree {
    std::vector<Point2> points;
    std::vector<int> parent;
    std::vector<double> cost;
    std::vector<std::vector<int>> children;

    int add(Point2 p, int par, double c)
    {
        points.push_back(p);
        parent.push_back(par);
        cost.push_back(c);
        children.emplace_back();
        if (par >= 0)
            children[par].push_back(static_cast<int>(points.size()) - 1);
        return static_cast<int>(points.size()) - 1;
    }

    // Move `node` under `new_parent` and push the cost change to descendants.
    void reparent(int node, int new_parent, double new_cost)
    {
        auto& siblings = children[parent[node]];
        siblings.erase(std::find(siblings.begin(), siblings.end(), node));
        parent[node] = new_parent;
        children[new_parent].push_back(node);

        const double delta = new_cost - cost[node];
        std::vector<int> stack{node};
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            cost[v] += delta;
            for (const int child : children[v])
                stack.push_back(child);
        }
    }
};

double rewire_radius(const RrtStarParams& params, std::size_t tree_size)
{
    const double n = static_cast<double>(tree_size) + 1.0;
    return std::max(params.step_size,
                    2.0 * params.step_size * params.rewire_radius_gamma *
                        std::sqrt(std::log(n) / n));
}

} // namespace

const char* to_string(Kind k) { return k == Kind::SLPP ? "SLPP" : "RRTStar"; }

Trajectory plan_slpp(const OdPair& od, double altitude_ft)
{
    const double len = distance(od.origin, od.destination);
    if (len == 0.0)
        throw PlanningError("coincident origin and destination " + describe(od));
    return {{od.origin, od.destination}, Kind::SLPP, altitude_ft, len};
}

Trajectory plan_rrt_star(const OdPair& od, const geo::OccupancyGrid& grid,
                         RrtStarParams params, double altitude_ft)
{
    if (params.max_iterations <= 0 || params.step_size <= 0.0 ||
        params.goal_radius <= 0.0 || params.rewire_radius_gamma <= 0.0 ||
        params.goal_bias < 0.0 || params.goal_bias >= 1.0)
        throw std::invalid_argument("invalid RRT* parameters");
    if (distance(od.origin, od.destination) == 0.0)
        throw PlanningError("coincident origin and destination " + describe(od));
    if (grid.occupied_point(od.origin))
        throw PlanningError("origin cell occupied for OD " + describe(od));
    if (grid.occupied_point(od.destination))
        throw PlanningError("destination cell occupied for OD " + describe(od));

    const double resolution = params.collision_check_resolution > 0.0
                                  ? params.collision_check_resolution
                                  : grid.cell_size / 2.0;
    const Point2 lo = grid.origin;
    const Point2 hi = grid.max_corner();

    const auto sample_free = [&]() -> Point2 {
        for (int attempt = 0; attempt < 1000; ++attempt) {
            const Point2 p{params.rng.uniform(lo.x, hi.x), params.rng.uniform(lo.y, hi.y)};
            if (!grid.occupied_point(p))
                return p;
        }
        throw PlanningError("could not sample a free point; grid nearly fully occupied");
    };

    Tree tree;
    tree.add(od.origin, -1, 0.0);

    // Goal candidates: (node, cost through node including the final connect).
    std::vector<std::pair<int, double>> goal_candidates;
    const auto consider_goal = [&](int node) {
        const double reach = distance(tree.points[node], od.destination);
        if (reach <= params.goal_radius &&
            segment_free(grid, tree.points[node], od.destination, resolution))
            goal_candidates.emplace_back(node, reach);
    };
    consider_goal(0);

    std::vector<int> near;
    for (int iter = 0; iter < params.max_iterations; ++iter) {
        const Point2 target =
            params.rng.uniform01() < params.goal_bias ? od.destination : sample_free();

        // Nearest node, lowest index winning ties for determinism.
        int nearest = 0;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < tree.points.size(); ++i) {
            const Point2 d = tree.points[i] - target;
            const double d2 = dot(d, d);
            if (d2 < best_d2) {
                best_d2 = d2;
                nearest = static_cast<int>(i);
            }
        }

        const double dist_to_target = std::sqrt(best_d2);
        if (dist_to_target == 0.0)
            continue;
        const Point2 new_point =
            dist_to_target <= params.step_size
                ? target
                : tree.points[nearest] +
                      (params.step_size / dist_to_target) * (target - tree.points[nearest]);
        if (grid.occupied_point(new_point))
            continue;

        const double radius = rewire_radius(params, tree.points.size());
        near.clear();
        for (std::size_t i = 0; i < tree.points.size(); ++i) {
            if (distance(tree.points[i], new_point) <= radius)
                near.push_back(static_cast<int>(i));
        }

        // Choose the cheapest collision-free parent among the neighborhood
        // (falling back to the nearest node).
        int parent = -1;
        double parent_cost = std::numeric_limits<double>::infinity();
        if (segment_free(grid, tree.points[nearest], new_point, resolution)) {
            parent = nearest;
            parent_cost = tree.cost[nearest] + distance(tree.points[nearest], new_point);
        }
        for (const int i : near) {
            if (i == nearest)
                continue;
            const double c = tree.cost[i] + distance(tree.points[i], new_point);
            if (c < parent_cost && segment_free(grid, tree.points[i], new_point, resolution)) {
                parent = i;
                parent_cost = c;
            }
        }
        if (parent < 0)
            continue;

        const int node = tree.add(new_point, parent, parent_cost);

        // Rewire neighbors through the new node when strictly cheaper.
        for (const int i : near) {
            if (i == parent)
                continue;
            const double through = parent_cost + distance(new_point, tree.points[i]);
            if (through + 1e-9 < tree.cost[i] &&
                segment_free(grid, new_point, tree.points[i], resolution))
                tree.reparent(i, node, through);
        }

        consider_goal(node);
    }

    if (goal_candidates.empty())
        throw PlanningError("no path found for OD " + describe(od) + " within " +
                            std::to_string(params.max_iterations) + " iterations");

    int best_node = -1;
    double best_cost = std::numeric_limits<double>::infinity();
    for (const auto& [node, reach] : goal_candidates) {
        const double total = tree.cost[node] + reach;
        if (total < best_cost) {
            best_cost = total;
            best_node = node;
        }
    }

    std::vector<Point2> waypoints;
    for (int v = best_node; v >= 0; v = tree.parent[v])
        waypoints.push_back(tree.points[v]);
    std::reverse(waypoints.begin(), waypoints.end());
    const Point2 last = waypoints.back();
    if (last.x != od.destination.x || last.y != od.destination.y)
        waypoints.push_back(od.destination);

    Trajectory traj;
    traj.planner = Kind::RRTStar;
    traj.altitude_ft = altitude_ft;
    traj.waypoints = std::move(waypoints);
    traj.total_length = 0.0;
    for (std::size_t i = 0; i + 1 < traj.waypoints.size(); ++i)
        traj.total_length += distance(traj.waypoints[i], traj.waypoints[i + 1]);
    return traj;
}

std::string trajectory_to_json_line(const Trajectory& traj)
{
    nlohmann::json j;
    j["planner"] = to_string(traj.planner);
    j["altitude_ft"] = traj.altitude_ft;
    j["length_m"] = traj.total_length;
    auto& pts = j["waypoints"] = nlohmann::json::array();
    for (const Point2& p : traj.waypoints)
        pts.push_back({p.x, p.y});
    return j.dump();
}

} // namespace ridcov::planner
