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

#include "core/geo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rml::geo {

namespace {
constexpr double kEarthRadiusM = 6371008.8;
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
}  // namespace

double norm(Vec2 v) { return std::sqrt(v.x * v.x + v.y * v.y); }
double dist(Vec2 a, Vec2 b) { return norm(a - b); }

LocalProjection::LocalProjection(double origin_lat_deg, double origin_lon_deg)
    : lat0_(origin_lat_deg * kDegToRad),
      lon0_(origin_lon_deg * kDegToRad),
      cos_lat0_(std::cos(origin_lat_deg * kDegToRad)),
      sin_lat0_(std::sin(origin_lat_deg * kDegToRad)) {}

Vec2 LocalProjection::forward(double lat_deg, double lon_deg) const {
  double lat = lat_deg * kDegToRad;
  double lon = lon_deg * kDegToRad;
  double dlon = lon - lon0_;
  double cos_lat = std::cos(lat);
  double sin_lat = std::sin(lat);
  double cos_c =
      sin_lat0_ * sin_lat + cos_lat0_ * cos_lat * std::cos(dlon);
  cos_c = std::clamp(cos_c, -1.0, 1.0);
  double c = std::acos(cos_c);  // angular distance
  if (c < 1e-12) return {0.0, 0.0};
  double k = kEarthRadiusM * c / std::sin(c);
  double x = k * cos_lat * std::sin(dlon);
  double y = k * (cos_lat0_ * sin_lat - sin_lat0_ * cos_lat * std::cos(dlon));
  return {x, y};
}

bool point_in_ring(Vec2 p, const Ring& ring) {
  // Even-odd ray casting.
  bool inside = false;
  size_t n = ring.points.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    Vec2 a = ring.points[i];
    Vec2 b = ring.points[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      double x_cross = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

bool point_in_polygon(Vec2 p, const Polygon& poly) {
  if (!point_in_ring(p, poly.outer)) return false;
  for (const auto& hole : poly.holes)
    if (point_in_ring(p, hole)) return false;
  return true;
}

double dist_point_segment(Vec2 p, Vec2 a, Vec2 b) {
  Vec2 ab = b - a;
  double len2 = ab.x * ab.x + ab.y * ab.y;
  if (len2 <= 0.0) return dist(p, a);
  double t = ((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return dist(p, Vec2{a.x + t * ab.x, a.y + t * ab.y});
}

double dist_point_ring(Vec2 p, const Ring& ring) {
  double best = std::numeric_limits<double>::infinity();
  size_t n = ring.points.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    best = std::min(best, dist_point_segment(p, ring.points[j],
                                             ring.points[i]));
  }
  return best;
}

double dist_point_polygon(Vec2 p, const Polygon& poly) {
  if (point_in_polygon(p, poly)) return 0.0;
  double best = dist_point_ring(p, poly.outer);
  for (const auto& hole : poly.holes)
    best = std::min(best, dist_point_ring(p, hole));
  return best;
}

double dist_point_polyline(Vec2 p, const Polyline& line) {
  if (line.points.size() == 1) return dist(p, line.points[0]);
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 1; i < line.points.size(); ++i) {
    best = std::min(best,
                    dist_point_segment(p, line.points[i - 1], line.points[i]));
  }
  return best;
}

double dist_point_geometry(Vec2 p, const Geometry& geom, Vec2 shift) {
  Vec2 q = p - shift;
  if (const Vec2* point = std::get_if<Vec2>(&geom)) return dist(q, *point);
  if (const Polyline* line = std::get_if<Polyline>(&geom))
    return dist_point_polyline(q, *line);
  return dist_point_polygon(q, std::get<Polygon>(geom));
}

bool geometry_covers(Vec2 p, const Geometry& geom, Vec2 shift) {
  const Polygon* poly = std::get_if<Polygon>(&geom);
  if (!poly) return false;
  return point_in_polygon(p - shift, *poly);
}

double BBox::dist_lower_bound(Vec2 p) const {
  double dx = std::max({min_x - p.x, 0.0, p.x - max_x});
  double dy = std::max({min_y - p.y, 0.0, p.y - max_y});
  return std::sqrt(dx * dx + dy * dy);
}

BBox bbox_of(const Geometry& geom) {
  BBox box{std::numeric_limits<double>::infinity(),
           std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity()};
  auto extend = [&](Vec2 p) {
    box.min_x = std::min(box.min_x, p.x);
    box.min_y = std::min(box.min_y, p.y);
    box.max_x = std::max(box.max_x, p.x);
    box.max_y = std::max(box.max_y, p.y);
  };
  if (const Vec2* point = std::get_if<Vec2>(&geom)) {
    extend(*point);
  } else if (const Polyline* line = std::get_if<Polyline>(&geom)) {
    for (Vec2 p : line->points) extend(p);
  } else {
    const Polygon& poly = std::get<Polygon>(geom);
    for (Vec2 p : poly.outer.points) extend(p);
  }
  return box;
}

}  // namespace rml::geo
