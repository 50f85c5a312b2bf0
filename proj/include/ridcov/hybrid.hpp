#pragma once

// Hybrid coverage estimator: pack the region of interest with idealized
// circular environments, split trajectories into per-environment pieces, and
// apply the analytic expected coverage to each piece.  Trajectory mass in no
// environment contributes zero and is reported as the approximation error.

#include "ridcov/expectation.hpp"
#include "ridcov/geo.hpp"
#include "ridcov/geometry.hpp"
#include "ridcov/planner.hpp"
#include "ridcov/quadrature.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace ridcov::hybrid {

struct Environment {
    Point2 center{};
    double r_e = 0.0;
};

struct EnvironmentPacking {
    std::vector<Environment> environments;
    double r_c = 0.0;    // shared receiver radius, r_c <= every r_e
    std::string warning; // set when nothing fits
};

// Hexagonal-lattice packing: centers on a triangular lattice of pitch 2*r_e
// anchored at the hull centroid, keeping only circles that lie entirely
// inside the ROI's convex hull.  Yields an empty packing (with a warning)
// when no circle fits.  Requires 0 < r_c <= r_e.
EnvironmentPacking pack_roi(const geo::RegionOfInterest& roi, double r_e, double r_c);

struct DecompositionPiece {
    std::size_t environment_index = 0;
    std::vector<Point2> polyline; // a sub-segment of the trajectory
    double length = 0.0;
};

struct TrajectoryDecomposition {
    std::vector<DecompositionPiece> pieces;
    double residual_length = 0.0; // trajectory mass in no environment
    double total_length = 0.0;
};

// Splits each trajectory segment into intervals inside each environment
// circle.  Environments do not overlap, so piece lengths plus the residual
// reconstruct the total length.
TrajectoryDecomposition decompose_trajectory(const planner::Trajectory& traj,
                                             const EnvironmentPacking& packing);

struct HybridEstimate {
    double estimate = 0.0; // length-weighted analytic expectation
    double epsilon = 0.0;  // residual_length / total_length
};

HybridEstimate hybrid_expected_coverage(const TrajectoryDecomposition& decomp,
                                        const EnvironmentPacking& packing,
                                        ChordCase chord_case,
                                        const QuadratureConfig& quad = {});

} // namespace ridcov::hybrid
