#include "ridcov/geo.hpp"

#include "ridcov/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>

namespace ridcov::geo {

namespace {

using nlohmann::json;

constexpr double kDegToRad = std::numbers::pi / 180.0;

const char* theme_name(Theme t)
{
    switch (t) {
    case Theme::Buildings: return "Buildings";
    case Theme::Vendors: return "Vendors";
    default: return "Residential";
    }
}

void warn(ParseStats& stats, std::size_t index, const std::string& message)
{
    stats.warnings.push_back("feature " + std::to_string(index) + ": " + message);
}

// Outer ring of one GeoJSON polygon coordinate array, without the closing
// duplicate vertex.  Returns empty when the ring is unusable.
std::vector<LonLat> read_outer_ring(const json& rings)
{
    if (!rings.is_array() || rings.empty() || !rings[0].is_array())
        return {};
    std::vector<LonLat> ring;
    for (const json& coord : rings[0]) {
        if (!coord.is_array() || coord.size() < 2 ||
            !coord[0].is_number() || !coord[1].is_number())
            return {};
        ring.push_back({coord[0].get<double>(), coord[1].get<double>()});
    }
    if (ring.size() >= 2 && ring.front().lon == ring.back().lon &&
        ring.front().lat == ring.back().lat)
        ring.pop_back();
    if (ring.size() < 3)
        return {};
    return ring;
}

LonLat ring_centroid_lonlat(const std::vector<LonLat>& ring)
{
    // The projection is linear in (lon, lat), so the planar centroid can be
    // computed directly in degrees.
    std::vector<Point2> pts;
    pts.reserve(ring.size());
    for (const LonLat& p : ring)
        pts.push_back({p.lon, p.lat});
    const Point2 c = polygon_centroid(pts);
    return {c.x, c.y};
}

// Height property: accept numbers and numeric-prefix strings ("12", "12 m").
bool read_height(const json& props, double& out)
{
    if (!props.is_object() || !props.contains("height"))
        return false;
    const json& h = props["height"];
    if (h.is_number()) {
        out = h.get<double>();
        return out >= 0.0;
    }
    if (h.is_string()) {
        const std::string s = h.get<std::string>();
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end != s.c_str()) {
            out = v;
            return out >= 0.0;
        }
    }
    return false;
}

bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d)
{
    const auto orient = [](Point2 p, Point2 q, Point2 r) {
        const double v = (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
        return (v > 0.0) - (v < 0.0);
    };
    const int o1 = orient(a, b, c);
    const int o2 = orient(a, b, d);
    const int o3 = orient(c, d, a);
    const int o4 = orient(c, d, b);
    if (o1 != o2 && o3 != o4)
        return true;
    const auto on_segment = [](Point2 p, Point2 q, Point2 r) {
        return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) &&
               std::min(p.y, q.y) <= r.y && r.y <= std::max(p.y, q.y);
    };
    if (o1 == 0 && on_segment(a, b, c)) return true;
    if (o2 == 0 && on_segment(a, b, d)) return true;
    if (o3 == 0 && on_segment(c, d, a)) return true;
    if (o4 == 0 && on_segment(c, d, b)) return true;
    return false;
}

bool polygon_intersects_rect(std::span<const Point2> ring,
                             double x0, double y0, double x1, double y1)
{
    // Any ring vertex inside the rectangle?
    for (const Point2& p : ring) {
        if (p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1)
            return true;
    }
    // Rectangle center inside the polygon (rect fully inside footprint)?
    if (point_in_polygon({0.5 * (x0 + x1), 0.5 * (y0 + y1)}, ring))
        return true;
    // Any edge crossing?
    const Point2 corners[4] = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
    for (std::size_t i = 0; i < ring.size(); ++i) {
        const Point2 a = ring[i];
        const Point2 b = ring[(i + 1) % ring.size()];
        for (int k = 0; k < 4; ++k) {
            if (segments_intersect(a, b, corners[k], corners[(k + 1) % 4]))
                return true;
        }
    }
    return false;
}

} // namespace

ThemeFeatures parse_theme_geojson(std::string_view bytes, Theme theme,
                                  double default_height_m)
{
    json root;
    try {
        root = json::parse(bytes);
    } catch (const json::parse_error& e) {
        throw DataError("GeoJSON parse error at byte " + std::to_string(e.byte) +
                        ": " + e.what());
    }

    if (!root.is_object() || root.value("type", "") != "FeatureCollection")
        throw DataError("expected a GeoJSON FeatureCollection");
    if (!root.contains("features") || !root["features"].is_array())
        throw DataError("FeatureCollection has no features array");

    ThemeFeatures out;
    std::size_t index = 0;
    for (const json& feature : root["features"]) {
        ++out.stats.features_total;
        const std::size_t i = index++;

        if (!feature.is_object() || !feature.contains("geometry") ||
            feature["geometry"].is_null()) {
            ++out.stats.features_skipped;
            warn(out.stats, i, "missing geometry, skipped");
            continue;
        }
        const json& geometry = feature["geometry"];
        const std::string type = geometry.value("type", "");
        const json props = feature.value("properties", json::object());

        std::vector<std::vector<LonLat>> rings;
        if (type == "Polygon") {
            if (auto ring = read_outer_ring(geometry.value("coordinates", json::array()));
                !ring.empty())
                rings.push_back(std::move(ring));
        } else if (type == "MultiPolygon") {
            for (const json& part : geometry.value("coordinates", json::array())) {
                if (auto ring = read_outer_ring(part); !ring.empty())
                    rings.push_back(std::move(ring));
            }
        }

        if (type == "Point") {
            if (theme == Theme::Vendors) {
                const json& c = geometry.value("coordinates", json::array());
                if (c.is_array() && c.size() >= 2 && c[0].is_number() && c[1].is_number()) {
                    out.points.push_back({c[0].get<double>(), c[1].get<double>()});
                    ++out.stats.features_used;
                } else {
                    ++out.stats.features_skipped;
                    warn(out.stats, i, "malformed Point coordinates, skipped");
                }
            } else {
                ++out.stats.features_skipped;
                warn(out.stats, i, std::string("point geometry under ") +
                                       theme_name(theme) + " theme, skipped");
            }
            continue;
        }

        if (rings.empty()) {
            ++out.stats.features_skipped;
            warn(out.stats, i, "unsupported or degenerate geometry '" + type + "', skipped");
            continue;
        }

        switch (theme) {
        case Theme::Buildings: {
            double height = default_height_m;
            if (!read_height(props, height)) {
                height = default_height_m;
                ++out.stats.heights_defaulted;
                warn(out.stats, i, "missing or invalid height, default applied");
            }
            for (auto& ring : rings) {
                out.polygons.push_back(std::move(ring));
                out.heights_m.push_back(height);
            }
            break;
        }
        case Theme::Vendors:
            for (const auto& ring : rings)
                out.points.push_back(ring_centroid_lonlat(ring));
            break;
        case Theme::Residential:
            for (auto& ring : rings)
                out.polygons.push_back(std::move(ring));
            break;
        }
        ++out.stats.features_used;
    }
    return out;
}

Point2 project_to_local(LonLat p, LonLat reference)
{
    if (!(std::abs(reference.lat) < 85.0))
        throw std::invalid_argument("projection reference latitude must satisfy |lat| < 85");
    const double scale = std::cos(reference.lat * kDegToRad);
    return {kEarthRadiusMeters * (p.lon - reference.lon) * kDegToRad * scale,
            kEarthRadiusMeters * (p.lat - reference.lat) * kDegToRad};
}

LonLat unproject_from_local(Point2 p, LonLat reference)
{
    if (!(std::abs(reference.lat) < 85.0))
        throw std::invalid_argument("projection reference latitude must satisfy |lat| < 85");
    const double scale = std::cos(reference.lat * kDegToRad);
    return {reference.lon + p.x / (kEarthRadiusMeters * kDegToRad * scale),
            reference.lat + p.y / (kEarthRadiusMeters * kDegToRad)};
}

double polygon_area(std::span<const Point2> ring)
{
    if (ring.size() < 3)
        return 0.0;
    // Work relative to the first vertex: the shoelace sum is translation
    // invariant over a closed ring, and small polygons far from the origin
    // (lon/lat degrees, metric city frames) would otherwise cancel badly.
    const Point2 o = ring[0];
    double twice = 0.0;
    for (std::size_t i = 0; i < ring.size(); ++i) {
        const Point2 a = ring[i] - o;
        const Point2 b = ring[(i + 1) % ring.size()] - o;
        twice += a.x * b.y - b.x * a.y;
    }
    return std::abs(twice) / 2.0;
}

Point2 polygon_centroid(std::span<const Point2> ring)
{
    if (ring.empty())
        throw std::invalid_argument("centroid of empty polygon");
    const Point2 o = ring[0];
    double twice = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    for (std::size_t i = 0; i < ring.size(); ++i) {
        const Point2 a = ring[i] - o;
        const Point2 b = ring[(i + 1) % ring.size()] - o;
        const double cross = a.x * b.y - b.x * a.y;
        twice += cross;
        cx += (a.x + b.x) * cross;
        cy += (a.y + b.y) * cross;
    }
    if (twice == 0.0) {
        // Degenerate ring: fall back to the vertex average.
        Point2 mean{};
        for (const Point2& p : ring)
            mean = mean + p;
        return {mean.x / ring.size(), mean.y / ring.size()};
    }
    return o + Point2{cx / (3.0 * twice), cy / (3.0 * twice)};
}

bool point_in_polygon(Point2 p, std::span<const Point2> ring)
{
    bool inside = false;
    for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
        const Point2 a = ring[i];
        const Point2 b = ring[j];
        if ((a.y > p.y) != (b.y > p.y) &&
            p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x)
            inside = !inside;
    }
    return inside;
}

std::vector<Point2> convex_hull(std::vector<Point2> points)
{
    std::sort(points.begin(), points.end(), [](Point2 a, Point2 b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    points.erase(std::unique(points.begin(), points.end(),
                             [](Point2 a, Point2 b) { return a.x == b.x && a.y == b.y; }),
                 points.end());
    if (points.size() < 3)
        return points;

    const auto cross = [](Point2 o, Point2 a, Point2 b) {
        return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    };
    std::vector<Point2> hull(2 * points.size());
    std::size_t k = 0;
    for (const Point2& p : points) { // lower
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0)
            --k;
        hull[k++] = p;
    }
    const std::size_t lower = k + 1;
    for (auto it = points.rbegin() + 1; it != points.rend(); ++it) { // upper
        while (k >= lower && cross(hull[k - 2], hull[k - 1], *it) <= 0.0)
            --k;
        hull[k++] = *it;
    }
    hull.resize(k - 1);
    return hull;
}

bool OccupancyGrid::occupied_point(Point2 p) const
{
    const int ix = static_cast<int>(std::floor((p.x - origin.x) / cell_size));
    const int iy = static_cast<int>(std::floor((p.y - origin.y) / cell_size));
    return occupied_cell(ix, iy);
}

OccupancyGrid build_occupancy_grid(std::span<const BuildingFootprint> buildings,
                                   const RegionOfInterest& roi,
                                   double altitude_ft, double cell_size_m)
{
    if (!(cell_size_m > 0.0))
        throw std::invalid_argument("cell size must be positive");
    if (roi.obstacle_hull.empty())
        throw std::invalid_argument("region of interest has no obstacle hull");

    double min_x = roi.obstacle_hull[0].x, max_x = min_x;
    double min_y = roi.obstacle_hull[0].y, max_y = min_y;
    for (const Point2& p : roi.obstacle_hull) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }

    OccupancyGrid grid;
    grid.origin = {min_x, min_y};
    grid.cell_size = cell_size_m;
    grid.width = std::max(1, static_cast<int>(std::ceil((max_x - min_x) / cell_size_m)));
    grid.height = std::max(1, static_cast<int>(std::ceil((max_y - min_y) / cell_size_m)));
    grid.altitude_ft = altitude_ft;
    grid.altitude_m = altitude_ft * kFeetToMeters;
    grid.cells.assign(static_cast<std::size_t>(grid.width) * grid.height, 0);

    for (const BuildingFootprint& building : buildings) {
        if (building.height_m < grid.altitude_m || building.polygon.size() < 3)
            continue;

        double bx0 = building.polygon[0].x, bx1 = bx0;
        double by0 = building.polygon[0].y, by1 = by0;
        for (const Point2& p : building.polygon) {
            bx0 = std::min(bx0, p.x);
            bx1 = std::max(bx1, p.x);
            by0 = std::min(by0, p.y);
            by1 = std::max(by1, p.y);
        }
        const int ix0 = std::max(0, static_cast<int>(std::floor((bx0 - min_x) / cell_size_m)));
        const int ix1 = std::min(grid.width - 1,
                                 static_cast<int>(std::floor((bx1 - min_x) / cell_size_m)));
        const int iy0 = std::max(0, static_cast<int>(std::floor((by0 - min_y) / cell_size_m)));
        const int iy1 = std::min(grid.height - 1,
                                 static_cast<int>(std::floor((by1 - min_y) / cell_size_m)));

        for (int iy = iy0; iy <= iy1; ++iy) {
            for (int ix = ix0; ix <= ix1; ++ix) {
                std::uint8_t& cell = grid.cells[static_cast<std::size_t>(iy) * grid.width + ix];
                if (cell)
                    continue;
                const double x0 = min_x + ix * cell_size_m;
                const double y0 = min_y + iy * cell_size_m;
                if (polygon_intersects_rect(building.polygon, x0, y0,
                                            x0 + cell_size_m, y0 + cell_size_m))
                    cell = 1;
            }
        }
    }
    return grid;
}

std::vector<Point2> candidate_receiver_sites(std::span<const BuildingFootprint> buildings)
{
    std::vector<Point2> sites;
    sites.reserve(buildings.size());
    for (const BuildingFootprint& b : buildings)
        sites.push_back(b.centroid);
    return sites;
}

std::vector<Point2> sample_customers(std::span<const std::vector<Point2>> residential_polygons,
                                     std::size_t n, RngStream& rng,
                                     const std::vector<Point2>* clip)
{
    std::vector<double> cumulative;
    cumulative.reserve(residential_polygons.size());
    double total_area = 0.0;
    for (const auto& ring : residential_polygons) {
        total_area += polygon_area(ring);
        cumulative.push_back(total_area);
    }
    if (n > 0 && total_area <= 0.0)
        throw DataError("residential polygons have zero total area");

    std::vector<Point2> out;
    out.reserve(n);
    std::size_t attempts = 0;
    const std::size_t max_attempts = 10000 + 1000 * n;
    while (out.size() < n) {
        if (++attempts > max_attempts)
            throw DataError("customer sampling rejected too many draws; "
                            "residential area barely overlaps the region of interest");

        const double pick = rng.uniform01() * total_area;
        const std::size_t poly_index =
            std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin();
        const auto& ring = residential_polygons[std::min(poly_index, residential_polygons.size() - 1)];

        double x0 = ring[0].x, x1 = x0, y0 = ring[0].y, y1 = y0;
        for (const Point2& p : ring) {
            x0 = std::min(x0, p.x);
            x1 = std::max(x1, p.x);
            y0 = std::min(y0, p.y);
            y1 = std::max(y1, p.y);
        }
        const Point2 candidate{rng.uniform(x0, x1), rng.uniform(y0, y1)};
        if (!point_in_polygon(candidate, ring))
            continue;
        if (clip != nullptr && !point_in_polygon(candidate, *clip))
            continue;
        out.push_back(candidate);
    }
    return out;
}

void write_occupancy_pgm(const OccupancyGrid& grid, std::ostream& raster,
                         std::ostream& header)
{
    raster << "P2\n" << grid.width << " " << grid.height << "\n1\n";
    for (int iy = grid.height - 1; iy >= 0; --iy) {
        for (int ix = 0; ix < grid.width; ++ix) {
            raster << (grid.occupied_cell(ix, iy) ? '1' : '0');
            raster << (ix + 1 == grid.width ? '\n' : ' ');
        }
    }

    nlohmann::json meta;
    meta["origin"] = {grid.origin.x, grid.origin.y};
    meta["cell_size_m"] = grid.cell_size;
    meta["altitude_ft"] = grid.altitude_ft;
    meta["altitude_m"] = grid.altitude_m;
    meta["width"] = grid.width;
    meta["height"] = grid.height;
    header << meta.dump(2) << "\n";
}

} // namespace ridcov::geo
