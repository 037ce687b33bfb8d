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

#include "core/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "core/compiler.hpp"
#include "core/error.hpp"
#include "core/grid_io.hpp"
#include "core/starmap.hpp"

namespace rml::run {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

uint64_t fnv1a(const std::string& text) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) h = (h ^ c) * 0x100000001b3ull;
  return h;
}

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

struct DynamicChannel {
  std::string token;
  std::vector<double> cuts;
  starmap::DynamicDistanceField field;
  std::map<std::string, signals::EntityReport> entities;
  std::map<std::string, double> last_seen;
  double silence_timeout_s = 120.0;
};

struct RecordedUpdate {
  std::string channel;
  std::vector<uint32_t> cells;
  std::vector<double> values;
};

struct StreamRecord {
  double t = 0.0;
  std::string channel;
  signals::EntityReport report;
};

std::vector<StreamRecord> load_update_stream(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) fail(ErrorCode::Io, "cannot open " + path);
  std::vector<StreamRecord> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      StreamRecord rec;
      rec.t = j.at("t").get<double>();
      rec.channel = j.at("channel").get<std::string>();
      rec.report.id = j.at("id").get<std::string>();
      rec.report.east = j.at("east").get<double>();
      rec.report.north = j.at("north").get<double>();
      rec.report.pos_std = j.value("std", 0.0);
      out.push_back(std::move(rec));
    } catch (const json::exception& e) {
      fail(ErrorCode::MalformedRecord,
           path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

// Sources whose class has no geometry but which are driven by a traffic
// generator do not come from the feature file.
bool is_dynamic(const Scenario& scenario, const std::string& token) {
  if (scenario.uas && scenario.uas->channel == token) return true;
  if (scenario.replay && scenario.replay->channel == token) return true;
  return false;
}

class Engine {
 public:
  Engine(const Scenario& scenario, const RunOptions& options)
      : scenario_(scenario), options_(options) {
    if (options.seed) scenario_.seed = *options.seed;
    if (options.partition_width_hz) {
      scenario_.cluster.partition_width_hz = *options.partition_width_hz;
      scenario_.foc.partition_width_hz = *options.partition_width_hz;
    }
    if (options.dwell_s) scenario_.cluster.dwell_s = *options.dwell_s;
    if (options.duration_s) scenario_.duration_s = *options.duration_s;
    if (options.write_pgm) scenario_.write_pgm = *options.write_pgm;
    foc_ = signals::FocEstimator(scenario_.foc);
  }

  const Scenario& scenario() const { return scenario_; }

  void prime() {
    std::string text = grid_io::read_text_file(scenario_.program_path);
    program_ = lang::parse_program(text);
    lang::ValidationReport report = lang::validate(program_);
    if (!report.ok()) {
      fail(ErrorCode::InvalidProgram,
           scenario_.program_path + " fails validation:\n" +
               report.to_string());
    }
    wmc_ = compiler::compile_wmc(program_);
    thresholds_ = lang::collect_thresholds(program_);

    // Generator channels must exist in the program before any traffic flows.
    for (const std::string* token :
         {scenario_.uas ? &scenario_.uas->channel : nullptr,
          scenario_.replay ? &scenario_.replay->channel : nullptr}) {
      if (token && !wmc_.var_for_token(*token)) {
        fail(ErrorCode::UnknownChannel,
             "scenario drives " + *token +
                 " but the program declares no such source");
      }
    }

    features_ = starmap::load_geojson(scenario_.features_path,
                                      scenario_.grid.projection());
    size_t cells = scenario_.grid.cells();
    rc_ = circuit::ReactiveCircuit::partition(
        wmc_, {}, scenario_.cluster, cells, scenario_.phi.epsilon);

    double max_cut = 0.0;
    for (const auto& [token, cuts] : thresholds_) {
      if (!cuts.empty()) max_cut = std::max(max_cut, cuts.back());
    }

    for (const auto& var : wmc_.vars) {
      const std::string cls =
          var.atom.arg.empty() ? var.atom.name : var.atom.arg;
      if (is_dynamic(scenario_, var.token)) {
        if (var.domain != lang::Domain::Density) {
          fail(ErrorCode::InvalidArgument,
               var.token + ": traffic channels must be Density typed");
        }
        DynamicChannel dc{var.token,
                          thresholds_[var.token],
                          starmap::DynamicDistanceField(
                              scenario_.grid, cls, dynamic_config(var.token)),
                          {},
                          {},
                          120.0};
        if (scenario_.uas && scenario_.uas->channel == var.token)
          dc.silence_timeout_s = scenario_.uas->silence_timeout_s;
        if (scenario_.replay && scenario_.replay->channel == var.token)
          dc.silence_timeout_s = scenario_.replay->silence_timeout_s;
        auto slice =
            starmap::interval_weights(dc.field.field(), dc.cuts);
        rc_.set_source(var.token, slice);
        initial_slices_[var.token] = std::move(slice);
        dynamic_.emplace(var.token, std::move(dc));
      } else if (var.domain == lang::Domain::Probability) {
        bool empty = false;
        auto field = starmap::occupancy_field(
            scenario_.grid, features_, cls, scenario_.static_samples,
            scenario_.error_model.sigma_for(cls),
            scenario_.seed ^ fnv1a(var.token), &empty);
        if (empty) warnings_.push_back("no features of class " + cls);
        std::vector<double> slice(cells * 2);
        for (size_t cell = 0; cell < cells; ++cell) {
          slice[cell * 2] = 1.0 - field.p[cell];
          slice[cell * 2 + 1] = field.p[cell];
        }
        rc_.set_source(var.token, slice);
        initial_slices_[var.token] = std::move(slice);
        static_fields_[var.token] = std::move(field);
      } else {
        auto field = starmap::distance_field(
            scenario_.grid, features_, cls, scenario_.static_samples,
            scenario_.error_model.sigma_for(cls),
            scenario_.seed ^ fnv1a(var.token));
        auto slice =
            starmap::interval_weights(field, thresholds_[var.token]);
        rc_.set_source(var.token, slice);
        initial_slices_[var.token] = std::move(slice);
        static_fields_[var.token] = std::move(field);
      }
    }
    rc_.full_evaluate();
    for (const auto& var : wmc_.vars) foc_.observe(var.token, 0.0, true);
  }

  starmap::DynamicFieldConfig dynamic_config(const std::string& token) {
    starmap::DynamicFieldConfig config;
    const auto& cuts = thresholds_[token];
    if (scenario_.support_radius_m > 0.0) {
      config.support_radius_m = scenario_.support_radius_m;
    } else if (!cuts.empty()) {
      config.support_radius_m = 3.0 * cuts.back();
    }
    return config;
  }

  void ingest(double t, const std::string& channel,
              const signals::EntityReport& report) {
    auto it = dynamic_.find(channel);
    if (it == dynamic_.end()) {
      fail(ErrorCode::UnknownChannel,
           channel + " is not a dynamic channel of this scenario");
    }
    DynamicChannel& dc = it->second;
    ++stats_.updates_seen;

    bool meaningful = true;
    if (auto old = dc.entities.find(report.id); old != dc.entities.end()) {
      meaningful = signals::meaningful(signals::Payload{old->second},
                                       signals::Payload{report},
                                       scenario_.phi);
    }
    foc_.observe(channel, t, meaningful);
    dc.last_seen[report.id] = t;
    if (!meaningful) return;

    ++stats_.updates_meaningful;
    dc.entities[report.id] = report;
    push_field_change(t, dc, "report");
    maybe_repartition(t);
  }

  void expire(double t) {
    for (auto& [token, dc] : dynamic_) {
      std::vector<std::string> stale;
      for (const auto& [id, seen] : dc.last_seen) {
        if (seen + dc.silence_timeout_s < t) stale.push_back(id);
      }
      if (stale.empty()) continue;
      for (const auto& id : stale) {
        dc.entities.erase(id);
        dc.last_seen.erase(id);
      }
      push_field_change(t, dc, "expiry");
    }
  }

  void maybe_repartition(double t) {
    if (!options_.reactive) return;
    bool trigger = false;
    for (const auto& var : wmc_.vars) {
      int now_k = signals::cluster_of(foc_.rate(var.token),
                                      scenario_.cluster.partition_width_hz,
                                      scenario_.cluster.max_clusters);
      int cur_k = rc_.cluster_of_token(var.token);
      if (now_k == cur_k) {
        pending_.erase(var.token);
        continue;
      }
      auto it = pending_.find(var.token);
      if (it == pending_.end() || it->second.first != now_k) {
        pending_[var.token] = {now_k, t};
      } else if (t - it->second.second >= scenario_.cluster.dwell_s) {
        trigger = true;
      }
    }
    if (!trigger) return;
    std::map<std::string, int> clusters;
    for (const auto& var : wmc_.vars) {
      clusters[var.token] = signals::cluster_of(
          foc_.rate(var.token), scenario_.cluster.partition_width_hz,
          scenario_.cluster.max_clusters);
    }
    rc_ = rc_.repartition(clusters);
    pending_.clear();
    ++stats_.repartitions;
    repartition_log_ << lang::format_double(t);
    for (const auto& [token, k] : clusters)
      repartition_log_ << "," << token << "=" << k;
    repartition_log_ << "\n";
  }

  void snapshot(double t) {
    auto grid = rc_.root_grid();
    if (recording_) {
      recorded_snapshots_.push_back({recorded_.size(), grid});
    }
    if (!options_.out_dir.empty()) {
      char name[64];
      std::snprintf(name, sizeof(name), "landscape_%04zu.csv",
                    stats_.snapshots);
      fs::path dir = fs::path(options_.out_dir) / "snapshots";
      grid_io::write_csv((dir / name).string(), scenario_.grid, grid,
                         "landscape", t);
      if (scenario_.write_pgm) {
        std::snprintf(name, sizeof(name), "landscape_%04zu.pgm",
                      stats_.snapshots);
        grid_io::write_pgm((dir / name).string(), scenario_.grid, grid);
      }
    }
    ++stats_.snapshots;

    for (const auto& var : wmc_.vars) {
      rates_log_ << lang::format_double(t) << "," << var.token << ","
                 << lang::format_double(foc_.rate(var.token)) << ","
                 << rc_.cluster_of_token(var.token) << "\n";
    }
    try {
      auto g = rc_.gain(foc_.rates(), t);
      stats_.last_rho = g.rho;
      gain_log_ << lang::format_double(t) << "," << lang::format_double(g.rho)
                << "," << g.total_ops << "," << g.cells << "\n";
    } catch (const Error&) {
      // all rates zero: gain undefined at this instant
    }
  }

  void push_field_change(double t, DynamicChannel& dc, const char* kind) {
    auto changed = dc.field.update(dc.entities);
    if (changed.empty()) return;
    auto values =
        starmap::interval_weights_at(dc.field.field(), dc.cuts, changed);
    if (recording_) {
      recorded_.push_back(RecordedUpdate{dc.token, changed, values});
    }
    double wall0 = now_seconds();
    circuit::UpdateResult result =
        options_.reactive ? rc_.apply_update(dc.token, changed, values)
                          : rc_.apply_update_full(dc.token, changed, values);
    double wall_us = (now_seconds() - wall0) * 1e6;
    if (result.skipped) {
      ++stats_.updates_skipped;
    } else {
      ++stats_.updates_applied;
      stats_.circuit_ops += result.ops;
      apply_wall_us_.push_back(wall_us);
    }
    updates_log_ << lang::format_double(t) << "," << dc.token << "," << kind
                 << "," << (result.skipped ? 0 : 1) << "," << changed.size()
                 << "," << result.ops << "," << lang::format_double(wall_us)
                 << "\n";
  }

  void run_loop() {
    const double duration = scenario_.duration_s;
    std::optional<sim::UasSim> uas;
    if (scenario_.uas && options_.updates_path.empty()) {
      sim::UasSimConfig cfg = scenario_.uas->sim;
      cfg.seed = scenario_.seed ^ 0x9e3779b97f4a7c15ull;
      uas.emplace(cfg, scenario_.grid);
    }
    std::optional<sim::Replayer> replay;
    if (scenario_.replay && options_.updates_path.empty()) {
      replay.emplace(sim::load_ais_csv(scenario_.replay->csv_path),
                     scenario_.replay->time_scale, scenario_.grid.projection(),
                     scenario_.replay->report_std_m);
    }
    std::vector<StreamRecord> stream;
    size_t stream_pos = 0;
    if (!options_.updates_path.empty()) {
      stream = load_update_stream(options_.updates_path);
    }

    double wall_anchor = now_seconds();
    auto pace = [&](double t) {
      if (options_.virtual_clock) return;
      double target = wall_anchor + t;
      double now = now_seconds();
      if (target > now) {
        std::this_thread::sleep_for(
            std::chrono::duration<double>(target - now));
      }
    };

    snapshot(0.0);
    double next_snapshot = scenario_.snapshot_period_s;
    double next_expiry = 1.0;
    const double inf = std::numeric_limits<double>::infinity();

    for (;;) {
      double t_uas = uas ? uas->next_report_time() : inf;
      double t_replay = replay ? replay->next_time() : inf;
      double t_stream = stream_pos < stream.size() ? stream[stream_pos].t : inf;
      double t_next = std::min({t_uas, t_replay, t_stream, next_snapshot,
                                next_expiry});
      if (t_next > duration || t_next == inf) break;
      pace(t_next);
      foc_.poll_all(t_next);

      // Deterministic dispatch at equal times: snapshots, then expiry, then
      // replayed vessels, then simulated traffic.
      if (next_snapshot == t_next) {
        snapshot(t_next);
        next_snapshot += scenario_.snapshot_period_s;
        continue;
      }
      if (next_expiry == t_next) {
        expire(t_next);
        next_expiry += 1.0;
        continue;
      }
      if (t_replay == t_next) {
        auto r = replay->next();
        ingest(r->t, scenario_.replay->channel, r->report);
        continue;
      }
      if (t_stream == t_next) {
        const auto& rec = stream[stream_pos++];
        ingest(rec.t, rec.channel, rec.report);
        continue;
      }
      for (auto& report : uas->step(t_uas)) {
        ingest(report.t, scenario_.uas->channel, report.report);
      }
    }
    stats_.duration_s = duration;
  }

  void write_logs() {
    if (options_.out_dir.empty()) return;
    fs::path dir(options_.out_dir);
    grid_io::write_text_file(
        (dir / "updates.csv").string(),
        "t,channel,kind,applied,cells,ops,wall_us\n" + updates_log_.str());
    grid_io::write_text_file(
        (dir / "rates.csv").string(),
        "t,channel,lambda_hz,cluster\n" + rates_log_.str());
    grid_io::write_text_file((dir / "gain.csv").string(),
                             "t,rho,total_ops_per_cell,cells\n" +
                                 gain_log_.str());
    grid_io::write_text_file((dir / "repartitions.csv").string(),
                             "t,clusters\n" + repartition_log_.str());
    if (!options_.dump_partition_path.empty()) {
      grid_io::write_text_file(options_.dump_partition_path,
                               rc_.dump_partition());
    }
  }

  RunStats finish_stats() {
    for (const auto& var : wmc_.vars) {
      stats_.rates_hz[var.token] = foc_.rate(var.token);
      stats_.clusters[var.token] = rc_.cluster_of_token(var.token);
    }
    return stats_;
  }

  // Bench support.
  void enable_recording() { recording_ = true; }
  const std::vector<RecordedUpdate>& recorded() const { return recorded_; }
  const std::vector<std::pair<size_t, std::vector<double>>>&
  recorded_snapshots() const {
    return recorded_snapshots_;
  }
  const std::vector<double>& apply_wall_us() const { return apply_wall_us_; }
  RunStats& stats() { return stats_; }
  circuit::ReactiveCircuit& rc() { return rc_; }
  const compiler::WmcCircuit& wmc() const { return wmc_; }
  const std::map<std::string, std::vector<double>>& initial_slices() const {
    return initial_slices_;
  }
  const signals::FocEstimator& foc() const { return foc_; }
  const std::map<std::string, starmap::RelationField>& static_fields() const {
    return static_fields_;
  }
  const std::map<std::string, DynamicChannel>& dynamic_channels() const {
    return dynamic_;
  }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  Scenario scenario_;
  RunOptions options_;
  lang::Program program_;
  compiler::WmcCircuit wmc_;
  std::map<std::string, std::vector<double>> thresholds_;
  starmap::FeatureSet features_;
  circuit::ReactiveCircuit rc_;
  signals::FocEstimator foc_{signals::FocConfig{}};
  std::map<std::string, DynamicChannel> dynamic_;
  std::map<std::string, starmap::RelationField> static_fields_;
  std::map<std::string, std::vector<double>> initial_slices_;
  std::map<std::string, std::pair<int, double>> pending_;
  RunStats stats_;
  std::vector<std::string> warnings_;

  bool recording_ = false;
  std::vector<RecordedUpdate> recorded_;
  std::vector<std::pair<size_t, std::vector<double>>> recorded_snapshots_;
  std::vector<double> apply_wall_us_;

  std::ostringstream updates_log_;
  std::ostringstream rates_log_;
  std::ostringstream gain_log_;
  std::ostringstream repartition_log_;
};

void prepare_out_dir(const RunOptions& options, bool with_snapshots) {
  if (options.out_dir.empty()) return;
  fs::create_directories(options.out_dir);
  if (with_snapshots)
    fs::create_directories(fs::path(options.out_dir) / "snapshots");
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / double(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / double(v.size() - 1));
}

}  // namespace

std::string RunStats::to_json() const {
  json j;
  j["duration_s"] = duration_s;
  j["updates_seen"] = updates_seen;
  j["updates_meaningful"] = updates_meaningful;
  j["updates_applied"] = updates_applied;
  j["updates_skipped"] = updates_skipped;
  j["circuit_ops"] = circuit_ops;
  j["snapshots"] = snapshots;
  j["repartitions"] = repartitions;
  j["rho_gain"] = last_rho;
  j["rates_hz"] = rates_hz;
  j["clusters"] = clusters;
  j["wall_seconds"] = wall_seconds;
  return j.dump(2);
}

RunStats run_scenario(const Scenario& scenario, const RunOptions& options) {
  double wall0 = now_seconds();
  prepare_out_dir(options, true);
  Engine engine(scenario, options);
  engine.prime();
  engine.run_loop();
  engine.write_logs();
  RunStats stats = engine.finish_stats();
  stats.wall_seconds = now_seconds() - wall0;
  if (!options.out_dir.empty()) {
    grid_io::write_text_file(
        (fs::path(options.out_dir) / "summary.json").string(),
        stats.to_json() + "\n");
  }
  return stats;
}

std::string BenchStats::to_json() const {
  json j;
  j["updates_applied"] = updates_applied;
  j["speedup_defined"] = speedup_defined;
  j["reactive_mean_us"] = reactive_mean_us;
  j["reactive_std_us"] = reactive_std_us;
  j["full_mean_us"] = full_mean_us;
  j["full_std_us"] = full_std_us;
  j["reactive_ops"] = reactive_ops;
  j["full_ops"] = full_ops;
  j["speedup_wall"] = speedup_wall;
  j["speedup_ops"] = speedup_ops;
  j["rho_gain"] = rho;
  j["max_snapshot_diff"] = max_snapshot_diff;
  j["wall_seconds"] = wall_seconds;
  return j.dump(2);
}

BenchStats bench_scenario(const Scenario& scenario, const RunOptions& options,
                          std::optional<double> duration_s) {
  double wall0 = now_seconds();
  RunOptions reactive_options = options;
  reactive_options.reactive = true;
  reactive_options.virtual_clock = true;
  if (duration_s) reactive_options.duration_s = duration_s;
  reactive_options.out_dir = options.out_dir;
  prepare_out_dir(reactive_options, true);

  // Phase 1: reactive run, recording the weight-level update stream.
  Engine reactive(scenario, reactive_options);
  reactive.enable_recording();
  reactive.prime();
  reactive.run_loop();
  reactive.write_logs();

  BenchStats bench;
  bench.updates_applied = reactive.stats().updates_applied;
  bench.reactive_ops = reactive.stats().circuit_ops;
  bench.reactive_mean_us = mean_of(reactive.apply_wall_us());
  bench.reactive_std_us = std_of(reactive.apply_wall_us());

  // Phase 2: replay the identical stream against a full-re-evaluation
  // circuit primed from the same initial slices.
  circuit::ReactiveCircuit full = circuit::ReactiveCircuit::partition(
      reactive.wmc(), {}, scenario.cluster, scenario.grid.cells(),
      scenario.phi.epsilon);
  for (const auto& [token, slice] : reactive.initial_slices()) {
    full.set_source(token, slice);
  }
  full.full_evaluate();

  std::vector<double> full_wall_us;
  int64_t full_ops = 0;
  size_t snapshot_idx = 0;
  const auto& snapshots = reactive.recorded_snapshots();
  auto compare_snapshots_up_to = [&](size_t update_index) {
    while (snapshot_idx < snapshots.size() &&
           snapshots[snapshot_idx].first == update_index) {
      auto grid = full.root_grid();
      const auto& expected = snapshots[snapshot_idx].second;
      for (size_t i = 0; i < grid.size(); ++i) {
        bench.max_snapshot_diff = std::max(
            bench.max_snapshot_diff, std::abs(grid[i] - expected[i]));
      }
      ++snapshot_idx;
    }
  };
  const auto& recorded = reactive.recorded();
  for (size_t i = 0; i < recorded.size(); ++i) {
    compare_snapshots_up_to(i);
    const auto& update = recorded[i];
    double t0 = now_seconds();
    auto result =
        full.apply_update_full(update.channel, update.cells, update.values);
    double us = (now_seconds() - t0) * 1e6;
    if (!result.skipped) {
      full_wall_us.push_back(us);
      full_ops += result.ops;
    }
  }
  compare_snapshots_up_to(recorded.size());

  bench.full_ops = full_ops;
  bench.full_mean_us = mean_of(full_wall_us);
  bench.full_std_us = std_of(full_wall_us);
  bench.speedup_defined = bench.updates_applied > 0;
  if (bench.speedup_defined) {
    bench.speedup_ops = bench.reactive_ops > 0
                            ? double(bench.full_ops) / double(bench.reactive_ops)
                            : std::numeric_limits<double>::infinity();
    bench.speedup_wall = bench.reactive_mean_us > 0
                             ? bench.full_mean_us / bench.reactive_mean_us
                             : std::numeric_limits<double>::infinity();
  }
  try {
    auto gain = reactive.rc().gain(reactive.foc().rates(),
                                   reactive.scenario().duration_s);
    bench.rho = gain.rho;
  } catch (const Error&) {
    bench.rho = 0.0;
  }
  bench.wall_seconds = now_seconds() - wall0;
  if (!options.out_dir.empty()) {
    grid_io::write_text_file(
        (fs::path(options.out_dir) / "bench.json").string(),
        bench.to_json() + "\n");
  }
  return bench;
}

std::string FieldsStats::to_json() const {
  json j;
  j["written"] = written;
  return j.dump(2);
}

FieldsStats compute_fields(const Scenario& scenario,
                           const RunOptions& options) {
  prepare_out_dir(options, false);
  RunOptions quiet = options;
  Engine engine(scenario, quiet);
  engine.prime();
  FieldsStats stats;
  fs::path dir(options.out_dir);
  auto safe_name = [](const std::string& token) {
    std::string name = token;
    std::replace(name.begin(), name.end(), '/', '_');
    if (!name.empty() && name.front() == '_') name.erase(name.begin());
    return name;
  };
  for (const auto& [token, field] : engine.static_fields()) {
    std::string base = safe_name(token);
    if (field.kind == starmap::RelationField::Kind::Probability) {
      grid_io::write_csv((dir / (base + ".csv")).string(),
                         engine.scenario().grid, field.p, base, 0.0);
      if (engine.scenario().write_pgm) {
        grid_io::write_pgm((dir / (base + ".pgm")).string(),
                           engine.scenario().grid, field.p);
      }
    } else {
      grid_io::write_csv((dir / (base + "_mu.csv")).string(),
                         engine.scenario().grid, field.mu, base + "_mu", 0.0);
      grid_io::write_csv((dir / (base + "_sigma.csv")).string(),
                         engine.scenario().grid, field.sigma, base + "_sigma",
                         0.0);
    }
    stats.written[token] = base;
  }
  return stats;
}

std::string SimulateStats::to_json() const {
  json j;
  j["records"] = records;
  j["malformed_csv_rows"] = malformed_csv_rows;
  j["out_path"] = out_path;
  return j.dump(2);
}

SimulateStats simulate_stream(const Scenario& scenario,
                              const RunOptions& options) {
  SimulateStats stats;
  double duration = options.duration_s.value_or(scenario.duration_s);

  std::vector<StreamRecord> records;
  if (scenario.uas) {
    sim::UasSimConfig cfg = scenario.uas->sim;
    cfg.seed = (options.seed ? *options.seed : scenario.seed) ^
               0x9e3779b97f4a7c15ull;
    sim::UasSim uas(cfg, scenario.grid);
    for (auto& r : uas.step(duration)) {
      records.push_back(
          StreamRecord{r.t, scenario.uas->channel, r.report});
    }
  }
  if (scenario.replay) {
    sim::ReplayTracks tracks = sim::load_ais_csv(scenario.replay->csv_path);
    stats.malformed_csv_rows = tracks.malformed;
    sim::Replayer replay(std::move(tracks), scenario.replay->time_scale,
                         scenario.grid.projection(),
                         scenario.replay->report_std_m);
    while (auto r = replay.next()) {
      if (r->t > duration) break;
      records.push_back(StreamRecord{r->t, scenario.replay->channel,
                                     r->report});
    }
  }
  std::stable_sort(records.begin(), records.end(),
                   [](const StreamRecord& a, const StreamRecord& b) {
                     return a.t < b.t;
                   });

  std::ostringstream out;
  for (const auto& rec : records) {
    json j;
    j["t"] = rec.t;
    j["channel"] = rec.channel;
    j["id"] = rec.report.id;
    j["east"] = rec.report.east;
    j["north"] = rec.report.north;
    j["std"] = rec.report.pos_std;
    out << j.dump() << "\n";
  }
  fs::path out_path(options.out_dir);
  fs::create_directories(out_path);
  std::string file = (out_path / "updates.ndjson").string();
  grid_io::write_text_file(file, out.str());
  stats.records = records.size();
  stats.out_path = file;
  return stats;
}

}  // namespace rml::run
