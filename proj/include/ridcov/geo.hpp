#pragma once

// City data ingest: GeoJSON theme files (buildings, vendors, residential),
// a local planar projection, polygon utilities, altitude-sliced occupancy
// grids, and candidate receiver sites (building centroids).

#include "ridcov/geometry.hpp"
#include "ridcov/rng.hpp"

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ridcov::geo {

inline constexpr double kFeetToMeters = 0.3048;
inline constexpr double kEarthRadiusMeters = 6371000.0;

struct LonLat {
    double lon = 0.0;
    double lat = 0.0;
};

enum class Theme { Buildings, Vendors, Residential };

struct ParseStats {
    std::size_t features_total = 0;
    std::size_t features_used = 0;
    std::size_t features_skipped = 0;
    std::size_t heights_defaulted = 0;
    std::vector<std::string> warnings;
};

// Unprojected parse output.  Buildings fill polygons+heights, Residential
// fills polygons, Vendors fills points (polygon vendors are reduced to their
// centroids).
struct ThemeFeatures {
    std::vector<std::vector<LonLat>> polygons;
    std::vector<double> heights_m; // parallel to polygons for Buildings
    std::vector<LonLat> points;
    ParseStats stats;
};

// Parses a GeoJSON FeatureCollection.  Outer rings only (holes are treated as
// solid); MultiPolygon parts become separate polygons.  Features with missing
// or unusable geometry are skipped with a warning.  Malformed JSON or a
// non-FeatureCollection root throws DataError (with the byte offset for
// syntax errors).
ThemeFeatures parse_theme_geojson(std::string_view bytes, Theme theme,
                                  double default_height_m = 8.0);

// Local equirectangular projection about `reference`:
//   x = R * dlon * cos(lat_ref),  y = R * dlat   (angles in radians).
// Adequate below ~20 km extents; requires |reference.lat| < 85 degrees.
Point2 project_to_local(LonLat p, LonLat reference);
LonLat unproject_from_local(Point2 p, LonLat reference);

// Polygon helpers over implicit-closure rings (no repeated last vertex).
double polygon_area(std::span<const Point2> ring);
Point2 polygon_centroid(std::span<const Point2> ring);
bool point_in_polygon(Point2 p, std::span<const Point2> ring);

// Convex hull (counterclockwise, no repeated point).  Collinear input yields
// a degenerate hull of fewer than 3 points.
std::vector<Point2> convex_hull(std::vector<Point2> points);

struct BuildingFootprint {
    std::vector<Point2> polygon;
    double height_m = 0.0;
    Point2 centroid{};
};

struct RegionOfInterest {
    std::vector<Point2> boundary;      // city polygon (may be non-convex)
    std::vector<Point2> obstacle_hull; // convex, contains boundary
};

struct OccupancyGrid {
    Point2 origin{};  // lower-left corner
    double cell_size = 0.0;
    int width = 0;
    int height = 0;
    double altitude_ft = 0.0;
    double altitude_m = 0.0;
    std::vector<std::uint8_t> cells; // row-major, 1 = obstacle

    bool in_bounds(int ix, int iy) const
    {
        return ix >= 0 && iy >= 0 && ix < width && iy < height;
    }
    bool occupied_cell(int ix, int iy) const
    {
        return in_bounds(ix, iy) && cells[static_cast<std::size_t>(iy) * width + ix] != 0;
    }
    // Points outside the grid count as free.
    bool occupied_point(Point2 p) const;
    Point2 max_corner() const
    {
        return origin + Point2{width * cell_size, height * cell_size};
    }
};

// Grid over the ROI obstacle hull's bounding box; a cell is an obstacle iff
// some building with height >= altitude overlaps the cell rectangle.
// Altitude is given in feet and converted internally.
OccupancyGrid build_occupancy_grid(std::span<const BuildingFootprint> buildings,
                                   const RegionOfInterest& roi,
                                   double altitude_ft, double cell_size_m);

// One centroid per footprint, in input order.
std::vector<Point2> candidate_receiver_sites(std::span<const BuildingFootprint> buildings);

// n points uniform over the union of the polygons (area-weighted polygon
// choice, then rejection sampling in the chosen polygon's bounding box).
// When `clip` is non-null, points must also fall inside that ring, i.e. the
// sample is uniform over union(polygons) intersected with clip.  Zero total
// area (or a clip that rejects everything) throws DataError.
std::vector<Point2> sample_customers(std::span<const std::vector<Point2>> residential_polygons,
                                     std::size_t n, RngStream& rng,
                                     const std::vector<Point2>* clip = nullptr);

// ASCII PGM raster (P2, maxval 1, rows top-down) plus a JSON side file with
// origin, cell_size, altitude and dimensions.
void write_occupancy_pgm(const OccupancyGrid& grid, std::ostream& raster,
                         std::ostream& header);

} // namespace ridcov::geo
