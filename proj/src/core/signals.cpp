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

#include "core/signals.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"

namespace rml::signals {

bool meaningful(const Payload& old_payload, const Payload& new_payload,
                const PhiConfig& config) {
  if (old_payload.index() != new_payload.index()) {
    fail(ErrorCode::ShapeMismatch, "payload kinds differ");
  }
  if (const FullField* old_field = std::get_if<FullField>(&old_payload)) {
    const FullField& new_field = std::get<FullField>(new_payload);
    if (old_field->params_per_cell != new_field.params_per_cell ||
        old_field->values.size() != new_field.values.size()) {
      fail(ErrorCode::ShapeMismatch, "field shapes differ");
    }
    double max_diff = 0.0;
    for (size_t i = 0; i < new_field.values.size(); ++i) {
      max_diff = std::max(max_diff,
                          std::abs(new_field.values[i] - old_field->values[i]));
    }
    return max_diff > config.epsilon;
  }
  const EntityReport& a = std::get<EntityReport>(old_payload);
  const EntityReport& b = std::get<EntityReport>(new_payload);
  double dx = b.east - a.east;
  double dy = b.north - a.north;
  return std::sqrt(dx * dx + dy * dy) > config.entity_min_displacement_m;
}

FocEstimator::FocEstimator(FocConfig config) : config_(config) {}

void FocEstimator::kalman_measure(Channel& chan, double interval) {
  interval = std::max(interval, 1e-9);
  if (!chan.has_rate) {
    chan.tau = interval;
    chan.scale = interval;
    chan.var = config_.measurement_noise_rel * chan.scale * chan.scale;
    chan.has_rate = true;
    return;
  }
  // Noise magnitudes are anchored to the first observed interval. Only the
  // q/r ratio shapes the gain sequence, so the anchor scale cancels out; a
  // noise term tied to the moving estimate instead would let runs of short
  // gaps shrink r quadratically and collapse the filter onto them.
  double q = config_.process_noise_rel * chan.scale * chan.scale;
  double r = config_.measurement_noise_rel * chan.scale * chan.scale;
  double var_pred = chan.var + q;
  double gain = var_pred / (var_pred + r);
  chan.tau += gain * (interval - chan.tau);
  chan.var = (1.0 - gain) * var_pred;
  chan.tau = std::max(chan.tau, 1e-9);
}

void FocEstimator::observe(const std::string& channel, double t,
                           bool was_meaningful) {
  Channel& chan = channels_[channel];
  if (chan.seen && t < chan.last_t) {
    fail(ErrorCode::NonMonotonicTimestamp,
         "timestamp " + std::to_string(t) + " precedes " +
             std::to_string(chan.last_t) + " on " + channel);
  }
  chan.seen = true;
  chan.last_t = t;
  if (!was_meaningful) return;

  if (chan.any_meaningful) {
    kalman_measure(chan, t - chan.last_meaningful_t);
  } else {
    chan.any_meaningful = true;
  }
  chan.last_meaningful_t = t;
}

void FocEstimator::poll(const std::string& channel, double t) {
  auto it = channels_.find(channel);
  if (it == channels_.end()) return;
  it->second.last_t = std::max(it->second.last_t, t);
}

void FocEstimator::poll_all(double t) {
  for (auto& [_, chan] : channels_) chan.last_t = std::max(chan.last_t, t);
}

double FocEstimator::channel_rate(const Channel& chan) const {
  if (!chan.has_rate || chan.tau <= 0.0) return 0.0;
  double rate = 1.0 / chan.tau;
  // Silence decay: a channel that stays quiet beyond a few expected
  // intervals cannot sustain its estimated rate. The observed gap bounds the
  // rate from above, pulling idle channels toward zero without feeding
  // artificial measurements through the filter.
  double gap = chan.last_t - chan.last_meaningful_t;
  double horizon =
      config_.silence_factor / std::max(rate, config_.partition_width_hz);
  if (gap > horizon) rate = std::min(rate, config_.silence_factor / gap);
  return rate;
}

double FocEstimator::rate(const std::string& channel) const {
  auto it = channels_.find(channel);
  if (it == channels_.end()) return 0.0;
  return channel_rate(it->second);
}

std::map<std::string, double> FocEstimator::rates() const {
  std::map<std::string, double> out;
  for (const auto& [name, chan] : channels_) out[name] = channel_rate(chan);
  return out;
}

int cluster_of(double rate_hz, double width_hz, int max_clusters) {
  if (width_hz <= 0.0) {
    fail(ErrorCode::InvalidArgument, "partition width must be positive");
  }
  if (rate_hz <= 0.0) return 0;
  double quotient = rate_hz / width_hz;
  if (quotient >= static_cast<double>(max_clusters)) return max_clusters;
  int k = static_cast<int>(std::floor(quotient));
  // Repair floating-point division against the half-open rule
  // k*h <= rate < (k+1)*h evaluated in double arithmetic.
  while (k > 0 && static_cast<double>(k) * width_hz > rate_hz) --k;
  while (static_cast<double>(k + 1) * width_hz <= rate_hz) ++k;
  return std::min(k, max_clusters);
}

void UpdateQueue::push(SignalUpdate update) {
  std::lock_guard<std::mutex> lock(mutex_);
  queue_.push_back(std::move(update));
}

std::optional<SignalUpdate> UpdateQueue::pop() {
  std::lock_guard<std::mutex> lock(mutex_);
  if (queue_.empty()) return std::nullopt;
  SignalUpdate update = std::move(queue_.front());
  queue_.pop_front();
  return update;
}

size_t UpdateQueue::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return queue_.size();
}

}  // namespace rml::signals
