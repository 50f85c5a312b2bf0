#include "ridcov/hybrid.hpp"

#include "ridcov/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace ridcov::hybrid {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

// Distance from an interior point to each edge line of a convex CCW hull;
// the circle fits iff every such distance is at least r (up to tolerance).
bool circle_inside_hull(Point2 center, double r, std::span<const Point2> hull)
{
    const double tol = 1e-9 * std::max(1.0, r);
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const Point2 a = hull[i];
        const Point2 b = hull[(i + 1) % hull.size()];
        const Point2 edge = b - a;
        const double len = norm(edge);
        if (len == 0.0)
            continue;
        const double side = (edge.x * (center.y - a.y) - edge.y * (center.x - a.x)) / len;
        if (side < r - tol) // negative side means outside the hull entirely
            return false;
    }
    return true;
}

} // namespace

EnvironmentPacking pack_roi(const geo::RegionOfInterest& roi, double r_e, double r_c)
{
    if (!(r_c > 0.0) || !(r_e > 0.0))
        throw std::invalid_argument("packing radii must be positive");
    if (r_c > r_e)
        throw std::invalid_argument("environment radius must be at least the receiver radius");
    if (roi.obstacle_hull.size() < 3)
        throw std::invalid_argument("region of interest hull is degenerate");

    const std::span<const Point2> hull(roi.obstacle_hull);
    double min_x = hull[0].x, max_x = min_x, min_y = hull[0].y, max_y = min_y;
    for (const Point2& p : hull) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }

    EnvironmentPacking packing;
    packing.r_c = r_c;

    // Triangular lattice anchored at the hull centroid: row pitch sqrt(3)*r_e,
    // column pitch 2*r_e, odd rows offset by r_e.
    const Point2 anchor = geo::polygon_centroid(hull);
    const double row_pitch = kSqrt3 * r_e;
    const int j_min = static_cast<int>(std::floor((min_y - anchor.y) / row_pitch)) - 1;
    const int j_max = static_cast<int>(std::ceil((max_y - anchor.y) / row_pitch)) + 1;
    for (int j = j_min; j <= j_max; ++j) {
        const double y = anchor.y + j * row_pitch;
        const double offset = (j % 2 == 0) ? 0.0 : r_e;
        const int i_min =
            static_cast<int>(std::floor((min_x - anchor.x - offset) / (2.0 * r_e))) - 1;
        const int i_max =
            static_cast<int>(std::ceil((max_x - anchor.x - offset) / (2.0 * r_e))) + 1;
        for (int i = i_min; i <= i_max; ++i) {
            const Point2 center{anchor.x + offset + 2.0 * r_e * i, y};
            if (circle_inside_hull(center, r_e, hull))
                packing.environments.push_back({center, r_e});
        }
    }

    if (packing.environments.empty())
        packing.warning = "no environment circle of radius " + std::to_string(r_e) +
                          " fits inside the region of interest";
    return packing;
}

TrajectoryDecomposition decompose_trajectory(const planner::Trajectory& traj,
                                             const EnvironmentPacking& packing)
{
    if (traj.waypoints.size() < 2)
        throw std::invalid_argument("trajectory needs at least two waypoints");

    TrajectoryDecomposition decomp;
    double covered_total = 0.0;

    struct Hit {
        double t0, t1;
        std::size_t env;
    };
    std::vector<Hit> hits;

    for (std::size_t s = 0; s + 1 < traj.waypoints.size(); ++s) {
        const Point2 a = traj.waypoints[s];
        const Point2 b = traj.waypoints[s + 1];
        const double len = distance(a, b);
        decomp.total_length += len;
        if (len == 0.0)
            continue;

        hits.clear();
        for (std::size_t e = 0; e < packing.environments.size(); ++e) {
            const Environment& env = packing.environments[e];
            if (const auto iv = segment_disk_interval(a, b, {env.center, env.r_e}))
                hits.push_back({iv->first, iv->second, e});
        }
        std::sort(hits.begin(), hits.end(),
                  [](const Hit& u, const Hit& v) { return u.t0 < v.t0; });

        // Non-overlapping circles can still give hairline interval overlaps
        // at tangency seams; clamp each start to the previous end.
        double prev_end = 0.0;
        for (const Hit& hit : hits) {
            const double t0 = std::max(hit.t0, prev_end);
            const double t1 = std::max(hit.t1, t0);
            prev_end = t1;
            if (t1 <= t0)
                continue;
            DecompositionPiece piece;
            piece.environment_index = hit.env;
            piece.polyline = {a + t0 * (b - a), a + t1 * (b - a)};
            piece.length = (t1 - t0) * len;
            covered_total += piece.length;
            decomp.pieces.push_back(std::move(piece));
        }
    }

    decomp.residual_length = std::max(0.0, decomp.total_length - covered_total);
    return decomp;
}

HybridEstimate hybrid_expected_coverage(const TrajectoryDecomposition& decomp,
                                        const EnvironmentPacking& packing,
                                        ChordCase chord_case,
                                        const QuadratureConfig& quad)
{
    if (!(decomp.total_length > 0.0))
        throw std::invalid_argument("decomposition has zero total length");

    // The packing shares one r_e across environments, but cache by radius so
    // mixed-radius packings are also handled.
    std::map<double, double> expectation_by_radius;
    const auto expectation_for = [&](double r_e) {
        if (const auto it = expectation_by_radius.find(r_e);
            it != expectation_by_radius.end())
            return it->second;
        const CoverageGeometry geom({0.0, 0.0}, packing.r_c, r_e);
        const double value = expected_coverage(chord_case, geom, quad).value;
        expectation_by_radius[r_e] = value;
        return value;
    };

    double weighted = 0.0;
    for (const DecompositionPiece& piece : decomp.pieces) {
        if (piece.environment_index >= packing.environments.size())
            throw std::invalid_argument("decomposition references an unknown environment");
        weighted += piece.length *
                    expectation_for(packing.environments[piece.environment_index].r_e);
    }

    HybridEstimate out;
    out.estimate = std::clamp(weighted / decomp.total_length, 0.0, 1.0);
    out.epsilon = std::clamp(decomp.residual_length / decomp.total_length, 0.0, 1.0);
    return out;
}

} // namespace ridcov::hybrid
