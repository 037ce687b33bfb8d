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

// Statistical spatial relations over the navigation grid: per-cell Bernoulli
// occupancy and Normal(mu, sigma) distance parameters derived from uncertain
// map geometry, plus dynamic distance fields around moving entities.

#ifndef RML_CORE_STARMAP_HPP
#define RML_CORE_STARMAP_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "core/geo.hpp"
#include "core/signals.hpp"

namespace rml::starmap {

struct Feature {
  std::string cls;
  geo::Geometry geom;
  geo::BBox box;
};

struct FeatureSet {
  std::vector<Feature> features;

  std::vector<const Feature*> of_class(std::string_view cls) const;
};

/// Loads a GeoJSON FeatureCollection, reading the relation class from the
/// `class` property and projecting coordinates into the grid-local plane.
FeatureSet load_geojson(const std::string& path,
                        const geo::LocalProjection& projection);
FeatureSet parse_geojson(const std::string& text,
                         const geo::LocalProjection& projection);

struct RelationField {
  enum class Kind { Probability, Density };

  std::string relation;
  Kind kind = Kind::Probability;
  double timestamp = 0.0;
  std::vector<double> p;      // Probability: per-cell Bernoulli parameter
  std::vector<double> mu;     // Density: per-cell Normal mean, meters
  std::vector<double> sigma;  // Density: per-cell Normal std, meters
};

inline constexpr double kSigmaMinM = 0.5;

/// Monte Carlo moment matching of a Bernoulli occupancy: the fraction of
/// noise-perturbed feature instantiations covering each cell center. One
/// translation draw per (instantiation, feature), shared across cells.
/// An empty feature class yields all zeros and sets *empty_class.
RelationField occupancy_field(const geo::GridSpec& grid,
                              const FeatureSet& features, std::string_view cls,
                              int samples, double sigma_map, uint64_t seed,
                              bool* empty_class = nullptr);

/// Sample mean/std of the min-distance from each cell center to the
/// perturbed class geometry; sigma floored at kSigmaMinM. Throws
/// EmptyFeatureClass.
RelationField distance_field(const geo::GridSpec& grid,
                             const FeatureSet& features, std::string_view cls,
                             int samples, double sigma_map, uint64_t seed);

/// Standard normal CDF.
double norm_cdf(double x);

/// Per-cell categorical vectors over threshold intervals:
/// (F(c1), F(c2)-F(c1), ..., 1-F(cn)) with F = Phi((c - mu)/sigma).
/// Output is cell-major, cells x (cuts+1), and each vector sums to 1.
std::vector<double> interval_weights(const RelationField& field,
                                     std::span<const double> cuts);

/// Same, restricted to the listed cells (values in listed order).
std::vector<double> interval_weights_at(const RelationField& field,
                                        std::span<const double> cuts,
                                        std::span<const uint32_t> cells);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

/// Exact moments of the distance between a fixed point at range d and a
/// position with isotropic Gaussian noise std s (2-D): Rice distribution.
MeanStd rice_distance_moments(double d, double s);

struct DynamicFieldConfig {
  double support_radius_m = 300.0;
  double sigma_min = kSigmaMinM;
  int outer_ring_points = 16;  // plus outer/2 points at half radius + center
};

/// Maintains a distance-to-nearest-entity field under entity arrivals,
/// moves, and removals. Parameters are evaluated exactly (Rice moments) at a
/// ring-plus-center support pattern around each entity, interpolated
/// linearly (barycentric over the pattern triangulation) inside the pattern
/// hull and by nearest support point just outside it; where patterns of
/// several entities overlap, the cell takes the minimum, which reproduces
/// the distance-to-nearest kinks exactly. Cells beyond every entity's
/// support radius carry a far sentinel that saturates all distance
/// comparisons. Only cells whose parameters changed are touched and
/// reported.
class DynamicDistanceField {
 public:
  DynamicDistanceField(const geo::GridSpec& grid, std::string relation,
                       DynamicFieldConfig config = {});

  /// Reconciles the field with the current entity set; returns the ids of
  /// changed cells (ascending). Applying the same set twice returns empty.
  std::vector<uint32_t> update(
      const std::map<std::string, signals::EntityReport>& entities);

  const RelationField& field() const { return field_; }
  double far_value() const { return mu_far_; }

 private:
  struct Pattern {
    geo::Vec2 origin;
    std::vector<geo::Vec2> points;  // local offsets
    std::vector<MeanStd> values;
  };

  Pattern build_pattern(const signals::EntityReport& entity) const;
  MeanStd interpolate(const Pattern& pattern, geo::Vec2 offset) const;

  geo::GridSpec grid_;
  DynamicFieldConfig config_;
  double mu_far_;
  RelationField field_;
  std::map<std::string, signals::EntityReport> last_entities_;
};

}  // namespace rml::starmap

#endif  // RML_CORE_STARMAP_HPP
