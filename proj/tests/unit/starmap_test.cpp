#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "core/error.hpp"
#include "core/geo.hpp"
#include "core/starmap.hpp"
#include "support/normal_quad.hpp"

using namespace rml;
using namespace rml::starmap;
using geo::Vec2;

namespace {

geo::GridSpec desk_grid(int cols = 20, int rows = 20, double extent = 2000.0) {
  geo::GridSpec grid;
  grid.origin_lat = 40.7;
  grid.origin_lon = -74.0;
  grid.width_m = extent;
  grid.height_m = extent;
  grid.cols = cols;
  grid.rows = rows;
  return grid;
}

FeatureSet square_features(double half, std::string cls, Vec2 center = {}) {
  FeatureSet set;
  geo::Polygon poly;
  poly.outer.points = {{center.x - half, center.y - half},
                       {center.x + half, center.y - half},
                       {center.x + half, center.y + half},
                       {center.x - half, center.y + half}};
  Feature f;
  f.cls = std::move(cls);
  f.box = geo::bbox_of(geo::Geometry{poly});
  f.geom = poly;
  set.features.push_back(std::move(f));
  return set;
}

}  // namespace

TEST_CASE("projection: grid center maps to origin, scale sane") {
  geo::GridSpec grid = desk_grid();
  auto proj = grid.projection();
  Vec2 at_origin = proj.forward(grid.origin_lat, grid.origin_lon);
  CHECK(std::abs(at_origin.x) < 1e-9);
  CHECK(std::abs(at_origin.y) < 1e-9);
  // One degree of latitude is about 111 km.
  Vec2 north = proj.forward(grid.origin_lat + 1.0, grid.origin_lon);
  CHECK(north.y == doctest::Approx(111195.0).epsilon(0.01));
  CHECK(std::abs(north.x) < 200.0);
}

TEST_CASE("occupancy: deep inside polygon is 1, far outside is 0") {
  geo::GridSpec grid = desk_grid();
  FeatureSet set = square_features(600.0, "park");
  RelationField field = occupancy_field(grid, set, "park", 100, 5.0, 42);
  // center cell lies ~50 m from the grid middle, 550+ m from the boundary
  size_t center_cell = grid.cells() / 2 + grid.cols / 2;
  CHECK(field.p[center_cell] == 1.0);
  CHECK(field.p[0] == 0.0);  // corner cell is ~700 m outside
}

TEST_CASE("occupancy: straight edge with symmetric noise gives one half") {
  geo::GridSpec grid;
  grid.origin_lat = 40.7;
  grid.origin_lon = -74.0;
  grid.width_m = 100.0;
  grid.height_m = 100.0;
  grid.cols = 1;
  grid.rows = 1;
  // Cell center (0,0) exactly on the east edge of the square.
  FeatureSet set = square_features(400.0, "park", Vec2{-400.0, 0.0});
  RelationField field = occupancy_field(grid, set, "park", 1000, 10.0, 7);
  CHECK(field.p[0] == doctest::Approx(0.5).epsilon(0.1));
  CHECK(std::abs(field.p[0] - 0.5) < 0.05);
}

TEST_CASE("occupancy: empty class warns and zeros") {
  geo::GridSpec grid = desk_grid(4, 4, 400.0);
  FeatureSet set;
  bool empty = false;
  RelationField field = occupancy_field(grid, set, "park", 10, 5.0, 1, &empty);
  CHECK(empty);
  for (double p : field.p) CHECK(p == 0.0);
}

TEST_CASE("occupancy deterministic under fixed seed") {
  geo::GridSpec grid = desk_grid(8, 8, 1600.0);
  FeatureSet set = square_features(300.0, "park");
  RelationField a = occupancy_field(grid, set, "park", 200, 25.0, 99);
  RelationField b = occupancy_field(grid, set, "park", 200, 25.0, 99);
  CHECK(a.p == b.p);
}

TEST_CASE("occupancy invariant under feature reordering") {
  geo::GridSpec grid = desk_grid(6, 6, 1200.0);
  FeatureSet ab = square_features(200.0, "park", Vec2{-300, 0});
  FeatureSet ba = square_features(250.0, "park", Vec2{300, 0});
  FeatureSet fwd, rev;
  fwd.features = {ab.features[0], ba.features[0]};
  rev.features = {ba.features[0], ab.features[0]};
  RelationField f = occupancy_field(grid, fwd, "park", 400, 20.0, 5);
  RelationField r = occupancy_field(grid, rev, "park", 400, 20.0, 5);
  double tol = 3.0 / std::sqrt(400.0);
  for (size_t i = 0; i < f.p.size(); ++i)
    CHECK(std::abs(f.p[i] - r.p[i]) <= tol);
}

TEST_CASE("distance field: zero noise gives exact distance and floor sigma") {
  geo::GridSpec grid = desk_grid(10, 10, 1000.0);
  FeatureSet set;
  Feature f;
  f.cls = "hospital";
  f.geom = Vec2{0.0, 0.0};
  f.box = geo::bbox_of(f.geom);
  set.features.push_back(f);
  RelationField field = distance_field(grid, set, "hospital", 16, 0.0, 3);
  for (size_t cell = 0; cell < grid.cells(); ++cell) {
    Vec2 c = grid.cell_center(cell);
    CHECK(field.mu[cell] == doctest::Approx(geo::norm(c)).epsilon(1e-12));
    CHECK(field.sigma[cell] == kSigmaMinM);
  }
}

TEST_CASE("distance field: on top of the feature mean is near zero") {
  geo::GridSpec grid;
  grid.origin_lat = 40.7;
  grid.origin_lon = -74.0;
  grid.width_m = 10.0;
  grid.height_m = 10.0;
  grid.cols = 1;
  grid.rows = 1;
  FeatureSet set = square_features(50.0, "park");
  RelationField field = distance_field(grid, set, "park", 64, 3.0, 4);
  CHECK(field.mu[0] < 1.0);  // almost every perturbation still covers 0,0
}

TEST_CASE("distance field: noisy point feature at 100 m") {
  geo::GridSpec grid;
  grid.origin_lat = 40.7;
  grid.origin_lon = -74.0;
  grid.width_m = 10.0;
  grid.height_m = 10.0;
  grid.cols = 1;
  grid.rows = 1;
  FeatureSet set;
  Feature f;
  f.cls = "mast";
  f.geom = Vec2{100.0, 0.0};  // cell center sits at (0,0)
  f.box = geo::bbox_of(f.geom);
  set.features.push_back(f);
  RelationField field = distance_field(grid, set, "mast", 2000, 10.0, 21);
  // Mean distance to a noisy point exceeds the distance to the mean point.
  CHECK(field.mu[0] > 98.0);
  CHECK(field.mu[0] < 104.0);
  // Cross-check against the closed-form moments.
  MeanStd rice = rice_distance_moments(100.0, 10.0);
  CHECK(field.mu[0] == doctest::Approx(rice.mean).epsilon(0.02));
  CHECK(field.sigma[0] == doctest::Approx(rice.std).epsilon(0.10));
}

TEST_CASE("distance field: empty class throws") {
  geo::GridSpec grid = desk_grid(2, 2, 200.0);
  FeatureSet set;
  CHECK_THROWS_AS(distance_field(grid, set, "ghost", 8, 1.0, 1), Error);
}

TEST_CASE("distance field mean is 1-Lipschitz without map noise") {
  geo::GridSpec grid = desk_grid(12, 12, 1200.0);
  FeatureSet set = square_features(150.0, "park", Vec2{200, -100});
  RelationField field = distance_field(grid, set, "park", 4, 0.0, 9);
  std::mt19937_64 rng(33);
  std::uniform_int_distribution<size_t> pick(0, grid.cells() - 1);
  for (int i = 0; i < 500; ++i) {
    size_t a = pick(rng), b = pick(rng);
    double dist_ab = geo::dist(grid.cell_center(a), grid.cell_center(b));
    CHECK(std::abs(field.mu[a] - field.mu[b]) <= dist_ab + 1e-9);
  }
}

TEST_CASE("norm_cdf matches quadrature oracle to 1e-6") {
  for (double x : {-3.0, -1.5, -0.5, 0.0, 0.31, 1.0, 1.5, 2.33, 4.0}) {
    CHECK(std::abs(norm_cdf(x) - rml::testing::normal_cdf_quadrature(x)) <
          1e-6);
  }
}

TEST_CASE("interval weights: worked spot values") {
  RelationField field;
  field.kind = RelationField::Kind::Density;
  field.mu = {35.0, 20.0, 20.0};
  field.sigma = {10.0, 10.0, 10.0};

  // mu=35, sigma=10, cuts [35] -> (0.5, 0.5) by symmetry.
  double cuts1[] = {35.0};
  auto w = interval_weights(field, cuts1);
  CHECK(w[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(w[1] == doctest::Approx(0.5).epsilon(1e-12));
  // mu=20, sigma=10, cut 35 -> Phi(1.5).
  double phi15 = rml::testing::normal_cdf_quadrature(1.5);
  CHECK(w[2] == doctest::Approx(phi15).epsilon(1e-9));
  CHECK(std::abs(w[2] - 0.9332) < 1e-4);

  // mu=20, sigma=10, cuts [15, 35].
  double cuts2[] = {15.0, 35.0};
  auto v = interval_weights(field, cuts2);
  double phi_m05 = rml::testing::normal_cdf_quadrature(-0.5);
  CHECK(v[2 * 3 + 0] == doctest::Approx(phi_m05).epsilon(1e-9));
  CHECK(v[2 * 3 + 1] == doctest::Approx(phi15 - phi_m05).epsilon(1e-9));
  CHECK(v[2 * 3 + 2] == doctest::Approx(1.0 - phi15).epsilon(1e-9));
  CHECK(std::abs(v[2 * 3 + 0] - 0.3085) < 1e-4);
  CHECK(std::abs(v[2 * 3 + 1] - 0.6247) < 1e-4);
  CHECK(std::abs(v[2 * 3 + 2] - 0.0668) < 1e-4);
}

TEST_CASE("interval weights sum to one for random parameters") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> mu_dist(-500.0, 500.0);
  std::uniform_real_distribution<double> sigma_dist(0.5, 200.0);
  std::uniform_real_distribution<double> cut_dist(-400.0, 400.0);
  std::uniform_int_distribution<int> n_cuts(1, 5);
  for (int trial = 0; trial < 2000; ++trial) {
    RelationField field;
    field.kind = RelationField::Kind::Density;
    field.mu = {mu_dist(rng)};
    field.sigma = {sigma_dist(rng)};
    std::vector<double> cuts(n_cuts(rng));
    for (auto& c : cuts) c = cut_dist(rng);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    auto w = interval_weights(field, cuts);
    double sum = 0.0;
    for (double x : w) {
      CHECK(x >= 0.0);
      sum += x;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-9);
  }
}

TEST_CASE("rice moments match monte carlo") {
  std::mt19937_64 rng(77);
  for (auto [d, s] : {std::pair{0.0, 10.0}, {30.0, 10.0}, {100.0, 10.0},
                      {500.0, 15.0}, {5.0, 20.0}}) {
    std::normal_distribution<double> noise(0.0, s);
    double sum = 0, sum_sq = 0;
    const int n = 400000;
    for (int i = 0; i < n; ++i) {
      double x = d + noise(rng);
      double y = noise(rng);
      double r = std::sqrt(x * x + y * y);
      sum += r;
      sum_sq += r * r;
    }
    double mc_mean = sum / n;
    double mc_std = std::sqrt(sum_sq / n - mc_mean * mc_mean);
    MeanStd rice = rice_distance_moments(d, s);
    CHECK(rice.mean == doctest::Approx(mc_mean).epsilon(0.005));
    CHECK(rice.std == doctest::Approx(mc_std).epsilon(0.02));
  }
  // Zero noise degenerates to the exact distance.
  MeanStd exact = rice_distance_moments(123.0, 0.0);
  CHECK(exact.mean == 123.0);
  CHECK(exact.std == 0.0);
}

TEST_CASE("dynamic field: single exact entity hits zero at its cell") {
  geo::GridSpec grid = desk_grid(21, 21, 2100.0);  // cell centers on 100 m grid
  DynamicFieldConfig cfg;
  cfg.support_radius_m = 300.0;
  DynamicDistanceField dyn(grid, "uas", cfg);
  std::map<std::string, signals::EntityReport> entities;
  // Place the entity exactly on the center cell's center.
  Vec2 center = grid.cell_center(size_t(grid.cells() / 2));
  entities["u1"] = signals::EntityReport{"u1", center.x, center.y, 0.0};
  auto changed = dyn.update(entities);
  CHECK(!changed.empty());
  size_t cell = grid.cells() / 2;
  CHECK(dyn.field().mu[cell] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("dynamic field: idempotent updates") {
  geo::GridSpec grid = desk_grid(16, 16, 1600.0);
  DynamicDistanceField dyn(grid, "uas");
  std::map<std::string, signals::EntityReport> entities;
  entities["a"] = signals::EntityReport{"a", 100.0, -50.0, 10.0};
  entities["b"] = signals::EntityReport{"b", -300.0, 200.0, 5.0};
  auto first = dyn.update(entities);
  CHECK(!first.empty());
  auto second = dyn.update(entities);
  CHECK(second.empty());
}

TEST_CASE("dynamic field: removal reverts toward the far sentinel") {
  geo::GridSpec grid = desk_grid(16, 16, 1600.0);
  DynamicDistanceField dyn(grid, "uas");
  std::map<std::string, signals::EntityReport> entities;
  entities["a"] = signals::EntityReport{"a", 0.0, 0.0, 0.0};
  dyn.update(entities);
  size_t cell = grid.cells() / 2;  // near the entity
  double near_mu = dyn.field().mu[8 * 16 + 8];
  CHECK(near_mu < dyn.far_value());

  entities.clear();
  auto changed = dyn.update(entities);
  CHECK(!changed.empty());
  for (double mu : dyn.field().mu) CHECK(mu == dyn.far_value());
  (void)cell;
}

TEST_CASE("dynamic field: midway between two entities interpolates distance") {
  // 100 m cells; entities 1 km apart; support radius wide enough that the
  // patterns overlap the midpoint.
  geo::GridSpec grid = desk_grid(41, 41, 4100.0);
  DynamicFieldConfig cfg;
  cfg.support_radius_m = 600.0;
  DynamicDistanceField dyn(grid, "vessel", cfg);
  std::map<std::string, signals::EntityReport> entities;
  Vec2 a = grid.cell_center(20 * 41 + 15);  // (col 15, row 20)
  Vec2 b = grid.cell_center(20 * 41 + 25);  // 1 km east
  entities["a"] = signals::EntityReport{"a", a.x, a.y, 0.0};
  entities["b"] = signals::EntityReport{"b", b.x, b.y, 0.0};
  dyn.update(entities);

  size_t mid = 20 * 41 + 20;
  Vec2 p = grid.cell_center(mid);
  double truth = std::min(geo::dist(p, a), geo::dist(p, b));
  CHECK(truth == doctest::Approx(500.0));
  // Interpolation error bound: one cell resolution times the unit gradient.
  CHECK(std::abs(dyn.field().mu[mid] - truth) <= grid.res_x());

  // Dense comparison against the exact oracle inside the support disks.
  for (size_t cell = 0; cell < grid.cells(); ++cell) {
    Vec2 q = grid.cell_center(cell);
    double exact = std::min(geo::dist(q, a), geo::dist(q, b));
    if (exact > cfg.support_radius_m - grid.res_x()) continue;
    CHECK(std::abs(dyn.field().mu[cell] - exact) <= 1.5 * grid.res_x());
  }
}

TEST_CASE("dynamic field: movement dirties only nearby cells") {
  geo::GridSpec grid = desk_grid(40, 40, 4000.0);
  DynamicFieldConfig cfg;
  cfg.support_radius_m = 300.0;
  DynamicDistanceField dyn(grid, "uas", cfg);
  std::map<std::string, signals::EntityReport> entities;
  entities["a"] = signals::EntityReport{"a", -1500.0, -1500.0, 0.0};
  entities["b"] = signals::EntityReport{"b", 1500.0, 1500.0, 0.0};
  dyn.update(entities);

  entities["a"].east += 40.0;  // move one cell
  auto changed = dyn.update(entities);
  CHECK(!changed.empty());
  for (uint32_t cell : changed) {
    Vec2 p = grid.cell_center(cell);
    double d_old = geo::dist(p, {-1500.0, -1500.0});
    double d_new = geo::dist(p, {-1460.0, -1500.0});
    CHECK(std::min(d_old, d_new) <=
          cfg.support_radius_m + std::max(grid.res_x(), grid.res_y()) + 1e-9);
  }
}
