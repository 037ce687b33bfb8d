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

#include "core/mdd.hpp"

#include <algorithm>
#include <cassert>
#include <limits>

namespace rml::mdd {

Manager::Manager() {
  nodes_.push_back(Node{});  // kFalse
  nodes_.push_back(Node{});  // kTrue
}

int Manager::make(int var, std::span<const int> kids) {
  assert(!kids.empty());
  bool all_equal = true;
  for (int kid : kids)
    if (kid != kids.front()) {
      all_equal = false;
      break;
    }
  if (all_equal) return kids.front();

  std::vector<int> key;
  key.reserve(kids.size() + 1);
  key.push_back(var);
  key.insert(key.end(), kids.begin(), kids.end());
  auto it = unique_.find(key);
  if (it != unique_.end()) return it->second;

  int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{var, std::vector<int>(kids.begin(), kids.end())});
  unique_.emplace(std::move(key), id);
  return id;
}

Builder::Builder(Manager& manager, std::vector<int> position,
                 std::vector<int> arity)
    : manager_(manager), position_(std::move(position)),
      arity_(std::move(arity)) {}

int Builder::literal_true(int var) {
  const int kids[2] = {kFalse, kTrue};
  return manager_.make(var, kids);
}

int Builder::literal_in(int var, std::span<const char> sat) {
  std::vector<int> kids(sat.size());
  for (size_t i = 0; i < sat.size(); ++i) kids[i] = sat[i] ? kTrue : kFalse;
  return manager_.make(var, kids);
}

int Builder::level_of(int id) const {
  if (manager_.is_terminal(id)) return std::numeric_limits<int>::max();
  return position_[manager_.node(id).var];
}

int Builder::mdd_and(int a, int b) { return apply(a, b, true); }
int Builder::mdd_or(int a, int b) { return apply(a, b, false); }

int Builder::apply(int a, int b, bool is_and) {
  if (is_and) {
    if (a == kFalse || b == kFalse) return kFalse;
    if (a == kTrue) return b;
    if (b == kTrue) return a;
  } else {
    if (a == kTrue || b == kTrue) return kTrue;
    if (a == kFalse) return b;
    if (b == kFalse) return a;
  }
  if (a == b) return a;

  uint64_t key = (static_cast<uint64_t>(std::min(a, b)) << 32) |
                 static_cast<uint32_t>(std::max(a, b));
  auto& cache = is_and ? and_cache_ : or_cache_;
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  int la = level_of(a);
  int lb = level_of(b);
  int top_var =
      la <= lb ? manager_.node(a).var : manager_.node(b).var;
  int n = arity_[top_var];
  std::vector<int> kids(n);
  for (int value = 0; value < n; ++value) {
    int ca = la <= lb ? manager_.node(a).kids[value] : a;
    int cb = lb <= la ? manager_.node(b).kids[value] : b;
    kids[value] = apply(ca, cb, is_and);
  }
  int result = manager_.make(top_var, kids);
  cache.emplace(key, result);
  return result;
}

}  // namespace rml::mdd
