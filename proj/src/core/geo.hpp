/*
 * Copyright 2026 The RML Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Planar geometry over a local tangent projection plus the navigation grid.

#ifndef RML_CORE_GEO_HPP
#define RML_CORE_GEO_HPP

#include <cstdint>
#include <variant>
#include <vector>

namespace rml::geo {

struct Vec2 {
  double x = 0.0;  // east, meters
  double y = 0.0;  // north, meters

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  bool operator==(const Vec2&) const = default;
};

double norm(Vec2 v);
double dist(Vec2 a, Vec2 b);

/// Azimuthal equidistant projection around a reference point: range and
/// bearing on the sphere become polar coordinates in the plane. Error is
/// negligible at city-scale extents.
class LocalProjection {
 public:
  LocalProjection() = default;
  LocalProjection(double origin_lat_deg, double origin_lon_deg);

  Vec2 forward(double lat_deg, double lon_deg) const;

 private:
  double lat0_ = 0.0;  // radians
  double lon0_ = 0.0;
  double cos_lat0_ = 1.0;
  double sin_lat0_ = 0.0;
};

/// Navigation grid: origin latitude/longitude at the grid center, extent in
/// meters, cells indexed column-major-free as id = row * cols + col with
/// cell (0,0) in the southwest corner.
struct GridSpec {
  double origin_lat = 0.0;
  double origin_lon = 0.0;
  double width_m = 0.0;
  double height_m = 0.0;
  int cols = 0;
  int rows = 0;

  size_t cells() const { return size_t(cols) * size_t(rows); }
  double res_x() const { return width_m / cols; }
  double res_y() const { return height_m / rows; }

  Vec2 cell_center(int col, int row) const {
    return {-width_m / 2.0 + (col + 0.5) * res_x(),
            -height_m / 2.0 + (row + 0.5) * res_y()};
  }
  Vec2 cell_center(size_t cell) const {
    return cell_center(static_cast<int>(cell % cols),
                       static_cast<int>(cell / cols));
  }
  bool contains(Vec2 p) const {
    return p.x >= -width_m / 2 && p.x <= width_m / 2 && p.y >= -height_m / 2 &&
           p.y <= height_m / 2;
  }
  LocalProjection projection() const {
    return LocalProjection(origin_lat, origin_lon);
  }
};

struct Ring {
  std::vector<Vec2> points;  // implicitly closed
};

struct Polygon {
  Ring outer;
  std::vector<Ring> holes;
};

struct Polyline {
  std::vector<Vec2> points;
};

using Geometry = std::variant<Vec2, Polyline, Polygon>;

bool point_in_ring(Vec2 p, const Ring& ring);
bool point_in_polygon(Vec2 p, const Polygon& poly);
double dist_point_segment(Vec2 p, Vec2 a, Vec2 b);
double dist_point_ring(Vec2 p, const Ring& ring);

/// Zero inside (outside any hole), otherwise distance to the boundary.
double dist_point_polygon(Vec2 p, const Polygon& poly);
double dist_point_polyline(Vec2 p, const Polyline& line);

/// Distance to a geometry translated by `shift`.
double dist_point_geometry(Vec2 p, const Geometry& geom, Vec2 shift = {});

/// Whether the (translated) geometry covers p; false for zero-area shapes.
bool geometry_covers(Vec2 p, const Geometry& geom, Vec2 shift = {});

struct BBox {
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;

  double dist_lower_bound(Vec2 p) const;
};

BBox bbox_of(const Geometry& geom);

}  // namespace rml::geo

#endif  // RML_CORE_GEO_HPP
