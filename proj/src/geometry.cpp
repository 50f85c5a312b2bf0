#include "ridcov/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ridcov {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Intervals closer than this (in segment parameter units) are merged when
// forming the union, so tangent disks do not leave phantom gaps.
constexpr double kMergeTol = 1e-12;

double reduce_angle(double a)
{
    double t = std::fmod(a, kTwoPi);
    if (t < 0.0)
        t += kTwoPi;
    if (t >= kTwoPi) // fmod can round back up to 2*pi for tiny negatives
        t -= kTwoPi;
    return t;
}

} // namespace

double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }

double norm(Point2 p) { return std::hypot(p.x, p.y); }

double distance(Point2 a, Point2 b) { return norm(b - a); }

CoverageGeometry::CoverageGeometry(Point2 center_, double r_c_, double r_e_)
    : center(center_), r_c(r_c_), r_e(r_e_)
{
    if (!std::isfinite(r_c) || !std::isfinite(r_e) ||
        !std::isfinite(center.x) || !std::isfinite(center.y))
        throw std::invalid_argument("coverage geometry: radii and center must be finite");
    if (r_c <= 0.0 || r_e <= 0.0)
        throw std::invalid_argument("coverage geometry: radii must be positive");
    if (r_c > r_e)
        throw std::invalid_argument("coverage geometry: receiver radius exceeds environment radius");
}

Chord chord_from_angles(double alpha, double beta, const CoverageGeometry& geom)
{
    if (!std::isfinite(alpha) || !std::isfinite(beta))
        throw std::invalid_argument("chord angles must be finite");

    Chord c;
    c.alpha = reduce_angle(alpha);
    c.beta = reduce_angle(beta);
    c.endpoint_a = geom.center + Point2{geom.r_e * std::cos(c.alpha), geom.r_e * std::sin(c.alpha)};
    c.endpoint_b = geom.center + Point2{geom.r_e * std::cos(c.beta), geom.r_e * std::sin(c.beta)};
    c.midpoint = 0.5 * (c.endpoint_a + c.endpoint_b);
    c.ell = std::min(distance(c.midpoint, geom.center), geom.r_e);
    c.degenerate = (c.alpha == c.beta);
    return c;
}

double ell_squared_ude(double beta, double r_e)
{
    return r_e * r_e * (1.0 + std::cos(beta)) / 2.0;
}

double concentric_coverage_proportion(double ell, const CoverageGeometry& geom)
{
    if (!(ell >= 0.0) || ell > geom.r_e)
        throw std::invalid_argument("midpoint distance outside [0, r_e]");
    if (geom.r_c == geom.r_e)
        return 1.0;
    if (ell >= geom.r_c)
        return 0.0;
    return std::sqrt((geom.r_c * geom.r_c - ell * ell) /
                     (geom.r_e * geom.r_e - ell * ell));
}

std::optional<std::pair<double, double>>
segment_disk_interval(Point2 a, Point2 b, const Disk& disk)
{
    const Point2 d = b - a;
    const double A = dot(d, d);
    if (A == 0.0)
        return std::nullopt;

    const Point2 f = a - disk.center;
    const double B = 2.0 * dot(f, d);
    const double C = dot(f, f) - disk.radius * disk.radius;

    const double disc = B * B - 4.0 * A * C;
    if (disc <= 0.0)
        return std::nullopt;

    // Numerically stable roots: avoid cancellation between -B and sqrt(disc).
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (B + std::copysign(sq, B));
    double t0 = q / A;
    double t1 = (q != 0.0) ? C / q : -t0; // q == 0 only when B == 0 and C == 0
    if (t0 > t1)
        std::swap(t0, t1);

    t0 = std::max(t0, 0.0);
    t1 = std::min(t1, 1.0);
    if (t0 >= t1)
        return std::nullopt;
    return std::make_pair(t0, t1);
}

double segment_disk_intersection_length(Point2 a, Point2 b, const Disk& disk)
{
    const auto iv = segment_disk_interval(a, b, disk);
    if (!iv)
        return 0.0;
    return (iv->second - iv->first) * distance(a, b);
}

double polyline_coverage_proportion(std::span<const Point2> points,
                                    std::span<const Disk> disks)
{
    if (points.size() < 2)
        throw std::invalid_argument("trajectory needs at least two points");

    double total = 0.0;
    double covered = 0.0;
    std::vector<std::pair<double, double>> intervals;

    for (size_t i = 0; i + 1 < points.size(); ++i) {
        const Point2 a = points[i];
        const Point2 b = points[i + 1];
        const double len = distance(a, b);
        total += len;
        if (len == 0.0)
            continue;

        intervals.clear();
        for (const Disk& disk : disks) {
            if (const auto iv = segment_disk_interval(a, b, disk))
                intervals.push_back(*iv);
        }
        if (intervals.empty())
            continue;

        std::sort(intervals.begin(), intervals.end());
        double lo = intervals[0].first;
        double hi = intervals[0].second;
        double merged = 0.0;
        for (size_t k = 1; k < intervals.size(); ++k) {
            if (intervals[k].first <= hi + kMergeTol) {
                hi = std::max(hi, intervals[k].second);
            } else {
                merged += hi - lo;
                lo = intervals[k].first;
                hi = intervals[k].second;
            }
        }
        merged += hi - lo;
        covered += merged * len;
    }

    if (total <= 0.0)
        throw std::invalid_argument("trajectory has zero length");
    return std::clamp(covered / total, 0.0, 1.0);
}

} // namespace ridcov
