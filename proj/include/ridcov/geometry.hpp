#pragma once

// Planar primitives for receiver coverage of chords and polylines.
//
// The idealized model puts a drone trajectory (a chord) inside a circular
// environment of radius r_e with a single receiver disk of radius r_c at the
// same center.  The covered proportion of a chord then depends only on the
// distance ell from the chord midpoint to the center.  The general route
// (segment/disk clipping + interval union) works for arbitrary polylines and
// receiver sets and must agree with the closed form in the concentric case.

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace ridcov {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }

double dot(Point2 a, Point2 b);
double norm(Point2 p);
double distance(Point2 a, Point2 b);

struct Disk {
    Point2 center{};
    double radius = 0.0;
};

// Concentric receiver/environment pair.  Requires 0 < r_c <= r_e, both finite.
struct CoverageGeometry {
    Point2 center{};
    double r_c = 0.0;
    double r_e = 0.0;

    CoverageGeometry(Point2 center_, double r_c_, double r_e_);

    double rho() const { return r_c / r_e; }
};

// A chord of the environment circle, identified by the polar angles of its
// endpoints.  Angles are stored reduced to [0, 2*pi).
struct Chord {
    double alpha = 0.0;
    double beta = 0.0;
    Point2 endpoint_a{};
    Point2 endpoint_b{};
    Point2 midpoint{};
    double ell = 0.0;       // midpoint distance to the environment center
    bool degenerate = false; // alpha == beta after reduction
};

// Builds the chord with endpoints at angles alpha, beta on the environment
// circle.  Accepts any finite angles.
Chord chord_from_angles(double alpha, double beta, const CoverageGeometry& geom);

// Squared midpoint distance of the chord with endpoint angles (0, beta):
// r_e^2 * (1 + cos(beta)) / 2.  One endpoint can always be rotated to angle 0,
// so this gives the midpoint-distance law for endpoint-sampled chords.
double ell_squared_ude(double beta, double r_e);

// Covered proportion of a chord at midpoint distance ell, concentric case:
//   sqrt((r_c^2 - ell^2) / (r_e^2 - ell^2))   for ell < r_c, else 0.
// Requires 0 <= ell <= r_e.  Returns 1 when r_c == r_e (the whole chord lies
// inside the receiver disk, including the degenerate ell == r_e limit).
double concentric_coverage_proportion(double ell, const CoverageGeometry& geom);

// Parameter interval [t0, t1] of segment a + t*(b - a), t in [0, 1], that lies
// strictly inside the disk.  Empty optional when the intersection has zero
// length (miss, tangency, or degenerate segment).
std::optional<std::pair<double, double>>
segment_disk_interval(Point2 a, Point2 b, const Disk& disk);

// Length of the part of segment [a, b] inside the disk.
double segment_disk_intersection_length(Point2 a, Point2 b, const Disk& disk);

// Fraction of the polyline's total length covered by the union of the disks.
// Overlapping disks are not double counted.  Requires at least two points and
// positive total length.  An empty disk set yields 0.
double polyline_coverage_proportion(std::span<const Point2> points,
                                    std::span<const Disk> disks);

} // namespace ridcov
