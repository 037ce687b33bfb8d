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

// Channel update ingestion: the meaningful-change indicator, per-channel
// frequency-of-change estimation, and the frequency-to-cluster binning rule.

#ifndef RML_CORE_SIGNALS_HPP
#define RML_CORE_SIGNALS_HPP

#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace rml::signals {

/// Per-cell parameter grid (1 value per cell for probabilities, 2 for
/// mean/std densities). Row-major over the owning grid.
struct FullField {
  int params_per_cell = 1;
  std::vector<double> values;

  bool operator==(const FullField&) const = default;
};

/// One entity position report in grid-local meters.
struct EntityReport {
  std::string id;
  double east = 0.0;
  double north = 0.0;
  double pos_std = 0.0;  // reported position standard deviation, meters

  bool operator==(const EntityReport&) const = default;
};

using Payload = std::variant<FullField, EntityReport>;

struct SignalUpdate {
  std::string channel;
  double timestamp = 0.0;  // seconds, monotonic per channel
  Payload payload;
};

struct PhiConfig {
  double epsilon = 0.003;  // max-abs parameter change that still counts as noise
  double entity_min_displacement_m = 1.0;  // half a grid cell by convention
};

/// Meaningful-change indicator. Fields compare by maximum absolute
/// per-parameter difference (strictly greater than epsilon); entity reports
/// by Euclidean displacement. Throws ShapeMismatch when the payload kinds or
/// field shapes differ. Callers treat a first-ever payload as meaningful.
bool meaningful(const Payload& old_payload, const Payload& new_payload,
                const PhiConfig& config);

struct FocConfig {
  double partition_width_hz = 0.5;   // h, also the decay-rate floor
  double process_noise_rel = 1e-4;   // random-walk noise per event (relative)
  double measurement_noise_rel = 0.25;
  double silence_factor = 3.0;       // decay after silence_factor / max(rate, h)
};

/// Frequency-of-change tracker: one scalar Kalman filter per channel driven
/// by the gaps between meaningful updates, with the monotonic clock as its
/// only sensor. The filter state is the mean meaningful-update interval; the
/// reported rate is its reciprocal, capped by the elapsed silence so rates
/// of quiet channels fall toward zero.
class FocEstimator {
 public:
  explicit FocEstimator(FocConfig config = {});

  /// Throws NonMonotonicTimestamp if t goes backwards for the channel.
  void observe(const std::string& channel, double t, bool was_meaningful);

  /// Clock tick without a message; advances the silence horizon.
  void poll(const std::string& channel, double t);
  void poll_all(double t);

  /// Estimated meaningful-update rate in Hz; 0 until two meaningful updates
  /// have been seen.
  double rate(const std::string& channel) const;

  std::map<std::string, double> rates() const;

 private:
  struct Channel {
    double last_t = 0.0;
    bool seen = false;
    double last_meaningful_t = 0.0;
    bool any_meaningful = false;
    double tau = 0.0;    // mean interval estimate, seconds
    double scale = 0.0;  // noise anchor, set at the first measurement
    double var = 0.0;    // estimate variance
    bool has_rate = false;
  };

  void kalman_measure(Channel& chan, double interval);
  double channel_rate(const Channel& chan) const;

  FocConfig config_;
  std::map<std::string, Channel> channels_;
};

/// Half-open frequency binning: k*h <= rate < (k+1)*h maps to cluster k,
/// capped at max_clusters. Exact on the boundary: rate == k*h yields k.
int cluster_of(double rate_hz, double width_hz, int max_clusters = 1 << 20);

/// Thread-safe in-process update queue (many producers, one consumer).
class UpdateQueue {
 public:
  void push(SignalUpdate update);
  std::optional<SignalUpdate> pop();
  size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::deque<SignalUpdate> queue_;
};

}  // namespace rml::signals

#endif  // RML_CORE_SIGNALS_HPP
