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

#include "core/starmap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <json.hpp>

#include "core/error.hpp"

namespace rml::starmap {

using geo::Vec2;

std::vector<const Feature*> FeatureSet::of_class(std::string_view cls) const {
  std::vector<const Feature*> out;
  for (const auto& f : features)
    if (f.cls == cls) out.push_back(&f);
  return out;
}

namespace {

using nlohmann::json;

Vec2 project_coord(const json& coord, const geo::LocalProjection& projection) {
  // GeoJSON order is [longitude, latitude].
  return projection.forward(coord.at(1).get<double>(),
                            coord.at(0).get<double>());
}

geo::Ring parse_ring(const json& coords,
                     const geo::LocalProjection& projection) {
  geo::Ring ring;
  for (const auto& c : coords) ring.points.push_back(project_coord(c, projection));
  // GeoJSON closes rings explicitly; drop the duplicate closing point.
  if (ring.points.size() > 1 && ring.points.front() == ring.points.back())
    ring.points.pop_back();
  return ring;
}

geo::Polygon parse_polygon(const json& coords,
                           const geo::LocalProjection& projection) {
  geo::Polygon poly;
  bool first = true;
  for (const auto& ring : coords) {
    if (first) {
      poly.outer = parse_ring(ring, projection);
      first = false;
    } else {
      poly.holes.push_back(parse_ring(ring, projection));
    }
  }
  return poly;
}

void append_geometry(std::vector<Feature>& out, const std::string& cls,
                     const json& geometry,
                     const geo::LocalProjection& projection) {
  const std::string type = geometry.at("type").get<std::string>();
  const json& coords = geometry.at("coordinates");
  auto push = [&](geo::Geometry geom) {
    Feature f;
    f.cls = cls;
    f.box = geo::bbox_of(geom);
    f.geom = std::move(geom);
    out.push_back(std::move(f));
  };
  if (type == "Point") {
    push(project_coord(coords, projection));
  } else if (type == "MultiPoint") {
    for (const auto& c : coords) push(project_coord(c, projection));
  } else if (type == "LineString") {
    geo::Polyline line;
    for (const auto& c : coords) line.points.push_back(project_coord(c, projection));
    push(std::move(line));
  } else if (type == "MultiLineString") {
    for (const auto& part : coords) {
      geo::Polyline line;
      for (const auto& c : part) line.points.push_back(project_coord(c, projection));
      push(std::move(line));
    }
  } else if (type == "Polygon") {
    push(parse_polygon(coords, projection));
  } else if (type == "MultiPolygon") {
    for (const auto& part : coords) push(parse_polygon(part, projection));
  } else {
    fail(ErrorCode::Io, "unsupported GeoJSON geometry type " + type);
  }
}

}  // namespace

FeatureSet parse_geojson(const std::string& text,
                         const geo::LocalProjection& projection) {
  json doc = json::parse(text);
  if (doc.at("type").get<std::string>() != "FeatureCollection") {
    fail(ErrorCode::Io, "expected a GeoJSON FeatureCollection");
  }
  FeatureSet set;
  for (const auto& feature : doc.at("features")) {
    if (!feature.contains("geometry") || feature.at("geometry").is_null())
      continue;
    std::string cls;
    if (feature.contains("properties") &&
        feature.at("properties").is_object() &&
        feature.at("properties").contains("class")) {
      cls = feature.at("properties").at("class").get<std::string>();
    }
    append_geometry(set.features, cls, feature.at("geometry"), projection);
  }
  return set;
}

FeatureSet load_geojson(const std::string& path,
                        const geo::LocalProjection& projection) {
  std::ifstream in(path);
  if (!in.good()) fail(ErrorCode::Io, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_geojson(buf.str(), projection);
  } catch (const json::exception& e) {
    fail(ErrorCode::Io, path + ": " + e.what());
  }
}

namespace {

// One translation per (instantiation, feature), shared across all cells:
// the map uncertainty is a property of the map realization, not of the cell.
std::vector<Vec2> draw_shifts(size_t count, double sigma_map,
                              std::mt19937_64& rng) {
  std::vector<Vec2> shifts(count);
  if (sigma_map <= 0.0) return shifts;
  std::normal_distribution<double> noise(0.0, sigma_map);
  for (auto& s : shifts) {
    s.x = noise(rng);
    s.y = noise(rng);
  }
  return shifts;
}

}  // namespace

RelationField occupancy_field(const geo::GridSpec& grid,
                              const FeatureSet& features, std::string_view cls,
                              int samples, double sigma_map, uint64_t seed,
                              bool* empty_class) {
  if (samples < 1) fail(ErrorCode::InvalidArgument, "samples must be >= 1");
  RelationField field;
  field.relation = std::string(cls);
  field.kind = RelationField::Kind::Probability;
  field.p.assign(grid.cells(), 0.0);

  auto members = features.of_class(cls);
  if (empty_class) *empty_class = members.empty();
  if (members.empty()) return field;

  std::mt19937_64 rng(seed);
  std::vector<Vec2> shifts =
      draw_shifts(size_t(samples) * members.size(), sigma_map, rng);

  double max_shift = 0.0;
  for (Vec2 s : shifts) max_shift = std::max(max_shift, geo::norm(s));

  for (size_t cell = 0; cell < grid.cells(); ++cell) {
    Vec2 center = grid.cell_center(cell);
    // Cheap reject: no instantiation can reach this cell.
    bool any_near = false;
    for (const Feature* f : members) {
      if (f->box.dist_lower_bound(center) <= max_shift) {
        any_near = true;
        break;
      }
    }
    if (!any_near) continue;

    int hits = 0;
    for (int s = 0; s < samples; ++s) {
      for (size_t fi = 0; fi < members.size(); ++fi) {
        Vec2 shift = shifts[size_t(s) * members.size() + fi];
        if (geo::geometry_covers(center, members[fi]->geom, shift)) {
          ++hits;
          break;
        }
      }
    }
    field.p[cell] = double(hits) / double(samples);
  }
  return field;
}

RelationField distance_field(const geo::GridSpec& grid,
                             const FeatureSet& features, std::string_view cls,
                             int samples, double sigma_map, uint64_t seed) {
  if (samples < 2) fail(ErrorCode::InvalidArgument, "samples must be >= 2");
  auto members = features.of_class(cls);
  if (members.empty()) {
    fail(ErrorCode::EmptyFeatureClass,
         "no features of class " + std::string(cls));
  }

  RelationField field;
  field.relation = std::string(cls);
  field.kind = RelationField::Kind::Density;
  field.mu.assign(grid.cells(), 0.0);
  field.sigma.assign(grid.cells(), 0.0);

  std::mt19937_64 rng(seed);
  std::vector<Vec2> shifts =
      draw_shifts(size_t(samples) * members.size(), sigma_map, rng);

  std::vector<size_t> feat_order(members.size());
  std::vector<double> lower(members.size());
  for (size_t i = 0; i < members.size(); ++i) feat_order[i] = i;

  for (size_t cell = 0; cell < grid.cells(); ++cell) {
    Vec2 center = grid.cell_center(cell);
    for (size_t i = 0; i < members.size(); ++i)
      lower[i] = members[i]->box.dist_lower_bound(center);
    std::sort(feat_order.begin(), feat_order.end(),
              [&](size_t a, size_t b) { return lower[a] < lower[b]; });

    double sum = 0.0, sum_sq = 0.0;
    for (int s = 0; s < samples; ++s) {
      double best = std::numeric_limits<double>::infinity();
      for (size_t oi = 0; oi < feat_order.size(); ++oi) {
        size_t fi = feat_order[oi];
        Vec2 shift = shifts[size_t(s) * members.size() + fi];
        if (lower[fi] - geo::norm(shift) >= best) continue;
        best = std::min(best, geo::dist_point_geometry(center,
                                                       members[fi]->geom,
                                                       shift));
      }
      sum += best;
      sum_sq += best * best;
    }
    double mean = sum / samples;
    double var = (sum_sq - samples * mean * mean) / (samples - 1);
    field.mu[cell] = mean;
    field.sigma[cell] = std::max(std::sqrt(std::max(var, 0.0)), kSigmaMinM);
  }
  return field;
}

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

void weights_for_cell(double mu, double sigma, std::span<const double> cuts,
                      double* out) {
  double prev = 0.0;
  for (size_t i = 0; i < cuts.size(); ++i) {
    double f = norm_cdf((cuts[i] - mu) / sigma);
    out[i] = std::max(f - prev, 0.0);
    prev = std::max(prev, f);
  }
  out[cuts.size()] = std::max(1.0 - prev, 0.0);
}

}  // namespace

std::vector<double> interval_weights(const RelationField& field,
                                     std::span<const double> cuts) {
  if (field.kind != RelationField::Kind::Density) {
    fail(ErrorCode::InvalidArgument, "interval weights need a Density field");
  }
  size_t cells = field.mu.size();
  size_t stride = cuts.size() + 1;
  std::vector<double> out(cells * stride);
  for (size_t cell = 0; cell < cells; ++cell) {
    weights_for_cell(field.mu[cell], field.sigma[cell], cuts,
                     out.data() + cell * stride);
  }
  return out;
}

std::vector<double> interval_weights_at(const RelationField& field,
                                        std::span<const double> cuts,
                                        std::span<const uint32_t> cells) {
  size_t stride = cuts.size() + 1;
  std::vector<double> out(cells.size() * stride);
  for (size_t i = 0; i < cells.size(); ++i) {
    weights_for_cell(field.mu[cells[i]], field.sigma[cells[i]], cuts,
                     out.data() + i * stride);
  }
  return out;
}

namespace {

// Scaled modified Bessel terms e^{-u} I_k(u); series for large u where the
// direct product would lose precision or overflow.
double scaled_bessel_i(int k, double u) {
  if (u < 30.0) {
    return std::exp(-u) * std::cyl_bessel_i(double(k), u);
  }
  double inv = 1.0 / u;
  double c0 = 1.0 / std::sqrt(2.0 * 3.14159265358979323846 * u);
  if (k == 0) {
    return c0 * (1.0 + 0.125 * inv + 0.0703125 * inv * inv +
                 0.0732421875 * inv * inv * inv);
  }
  return c0 * (1.0 - 0.375 * inv - 0.1171875 * inv * inv -
               0.1025390625 * inv * inv * inv);
}

}  // namespace

MeanStd rice_distance_moments(double d, double s) {
  d = std::abs(d);
  if (s <= 0.0) return {d, 0.0};
  double a = d * d / (2.0 * s * s);
  double u = 0.5 * a;
  double i0 = scaled_bessel_i(0, u);
  double i1 = scaled_bessel_i(1, u);
  double mean = s * std::sqrt(3.14159265358979323846 / 2.0) *
                ((1.0 + a) * i0 + a * i1);
  double second = 2.0 * s * s + d * d;
  double var = std::max(second - mean * mean, 0.0);
  return {mean, std::sqrt(var)};
}

DynamicDistanceField::DynamicDistanceField(const geo::GridSpec& grid,
                                           std::string relation,
                                           DynamicFieldConfig config)
    : grid_(grid), config_(config) {
  double diag = std::hypot(grid.width_m, grid.height_m);
  mu_far_ = 10.0 * diag;
  field_.relation = std::move(relation);
  field_.kind = RelationField::Kind::Density;
  field_.mu.assign(grid.cells(), mu_far_);
  field_.sigma.assign(grid.cells(), config_.sigma_min);
}

DynamicDistanceField::Pattern DynamicDistanceField::build_pattern(
    const signals::EntityReport& entity) const {
  Pattern pattern;
  pattern.origin = {entity.east, entity.north};
  int outer = config_.outer_ring_points;
  int inner = outer / 2;
  double r = config_.support_radius_m;
  pattern.points.push_back({0.0, 0.0});
  for (int i = 0; i < inner; ++i) {
    double ang = 2.0 * 3.14159265358979323846 * i / inner;
    pattern.points.push_back({0.5 * r * std::cos(ang), 0.5 * r * std::sin(ang)});
  }
  for (int i = 0; i < outer; ++i) {
    double ang = 2.0 * 3.14159265358979323846 * i / outer;
    pattern.points.push_back({r * std::cos(ang), r * std::sin(ang)});
  }
  // Each pattern carries the smooth distance field of its own entity; the
  // distance-to-nearest kinks between entities are taken exactly by the min
  // over overlapping patterns at the cell, not smeared by interpolation.
  pattern.values.reserve(pattern.points.size());
  for (Vec2 offset : pattern.points) {
    MeanStd m = rice_distance_moments(geo::norm(offset), entity.pos_std);
    m.std = std::max(m.std, config_.sigma_min);
    pattern.values.push_back(m);
  }
  return pattern;
}

namespace {

// Barycentric weights of p in triangle (a, b, c); false when outside.
bool barycentric(Vec2 p, Vec2 a, Vec2 b, Vec2 c, double* w) {
  double det = (b.y - c.y) * (a.x - c.x) + (c.x - b.x) * (a.y - c.y);
  if (std::abs(det) < 1e-12) return false;
  double w0 = ((b.y - c.y) * (p.x - c.x) + (c.x - b.x) * (p.y - c.y)) / det;
  double w1 = ((c.y - a.y) * (p.x - c.x) + (a.x - c.x) * (p.y - c.y)) / det;
  double w2 = 1.0 - w0 - w1;
  const double tol = -1e-9;
  if (w0 < tol || w1 < tol || w2 < tol) return false;
  w[0] = std::max(w0, 0.0);
  w[1] = std::max(w1, 0.0);
  w[2] = std::max(w2, 0.0);
  return true;
}

}  // namespace

MeanStd DynamicDistanceField::interpolate(const Pattern& pattern,
                                          Vec2 offset) const {
  int outer = config_.outer_ring_points;
  int inner = outer / 2;
  double two_pi = 2.0 * 3.14159265358979323846;
  double theta = std::atan2(offset.y, offset.x);
  if (theta < 0) theta += two_pi;

  auto inner_pt = [&](int i) { return 1 + ((i % inner) + inner) % inner; };
  auto outer_pt = [&](int i) { return 1 + inner + ((i % outer) + outer) % outer; };

  int wedge = std::min(int(theta / (two_pi / inner)), inner - 1);
  int tri_sets[4][3] = {
      {0, inner_pt(wedge), inner_pt(wedge + 1)},
      {inner_pt(wedge), outer_pt(2 * wedge), outer_pt(2 * wedge + 1)},
      {inner_pt(wedge), outer_pt(2 * wedge + 1), inner_pt(wedge + 1)},
      {inner_pt(wedge + 1), outer_pt(2 * wedge + 1), outer_pt(2 * wedge + 2)},
  };
  for (const auto& tri : tri_sets) {
    double w[3];
    if (barycentric(offset, pattern.points[tri[0]], pattern.points[tri[1]],
                    pattern.points[tri[2]], w)) {
      MeanStd out;
      out.mean = w[0] * pattern.values[tri[0]].mean +
                 w[1] * pattern.values[tri[1]].mean +
                 w[2] * pattern.values[tri[2]].mean;
      out.std = w[0] * pattern.values[tri[0]].std +
                w[1] * pattern.values[tri[1]].std +
                w[2] * pattern.values[tri[2]].std;
      out.std = std::max(out.std, config_.sigma_min);
      return out;
    }
  }
  // Outside the pattern hull (or in a sliver between chords and circle):
  // nearest support point.
  size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < pattern.points.size(); ++i) {
    double d = geo::dist(offset, pattern.points[i]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return pattern.values[best];
}

std::vector<uint32_t> DynamicDistanceField::update(
    const std::map<std::string, signals::EntityReport>& entities) {
  // Entities whose report changed since the last reconciliation dirty the
  // cells around both their old and new positions.
  std::vector<Vec2> dirty_centers;
  for (const auto& [id, e] : entities) {
    auto it = last_entities_.find(id);
    if (it == last_entities_.end() || !(it->second == e)) {
      dirty_centers.push_back({e.east, e.north});
      if (it != last_entities_.end())
        dirty_centers.push_back({it->second.east, it->second.north});
    }
  }
  for (const auto& [id, e] : last_entities_) {
    if (!entities.count(id)) dirty_centers.push_back({e.east, e.north});
  }
  if (dirty_centers.empty()) return {};

  double reach = config_.support_radius_m +
                 std::max(grid_.res_x(), grid_.res_y());

  // Patterns are built lazily: a dirty cell may fall in the support of an
  // entity that did not itself move.
  std::map<std::string, Pattern> patterns;
  auto pattern_for = [&](const std::string& id,
                         const signals::EntityReport& e) -> const Pattern& {
    auto it = patterns.find(id);
    if (it == patterns.end())
      it = patterns.emplace(id, build_pattern(e)).first;
    return it->second;
  };

  std::vector<uint32_t> changed;
  std::vector<char> visited(grid_.cells(), 0);
  for (Vec2 center : dirty_centers) {
    int col_lo = std::max(
        0, int((center.x - reach + grid_.width_m / 2) / grid_.res_x()) - 1);
    int col_hi = std::min(
        grid_.cols - 1,
        int((center.x + reach + grid_.width_m / 2) / grid_.res_x()) + 1);
    int row_lo = std::max(
        0, int((center.y - reach + grid_.height_m / 2) / grid_.res_y()) - 1);
    int row_hi = std::min(
        grid_.rows - 1,
        int((center.y + reach + grid_.height_m / 2) / grid_.res_y()) + 1);
    for (int row = row_lo; row <= row_hi; ++row) {
      for (int col = col_lo; col <= col_hi; ++col) {
        size_t cell = size_t(row) * grid_.cols + col;
        if (visited[cell]) continue;
        Vec2 p = grid_.cell_center(col, row);
        if (geo::dist(p, center) > reach) continue;
        visited[cell] = 1;

        MeanStd value{mu_far_, config_.sigma_min};
        for (const auto& [id, e] : entities) {
          if (geo::dist(p, {e.east, e.north}) > reach) continue;
          const Pattern& pattern = pattern_for(id, e);
          MeanStd candidate = interpolate(pattern, p - pattern.origin);
          if (candidate.mean < value.mean) value = candidate;
        }
        if (field_.mu[cell] != value.mean || field_.sigma[cell] != value.std) {
          field_.mu[cell] = value.mean;
          field_.sigma[cell] = value.std;
          changed.push_back(uint32_t(cell));
        }
      }
    }
  }
  last_entities_ = entities;
  std::sort(changed.begin(), changed.end());
  return changed;
}

}  // namespace rml::starmap
