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

// Multi-valued decision diagrams with a shared unique table. Nodes are
// hash-consed and never freed, so a node id is a stable structural identity
// for the sub-formula it roots — that stability is what lets reactive
// circuits carry memoized grids across restructurings.

#ifndef RML_CORE_MDD_HPP
#define RML_CORE_MDD_HPP

#include <cstdint>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

namespace rml::mdd {

/// Node ids 0 and 1 are the terminals.
inline constexpr int kFalse = 0;
inline constexpr int kTrue = 1;

struct Node {
  int var = -1;           // -1 for terminals
  std::vector<int> kids;  // one child per variable value
};

class Manager {
 public:
  Manager();

  /// Hash-consing constructor; collapses nodes whose children are all equal.
  int make(int var, std::span<const int> kids);

  const Node& node(int id) const { return nodes_[id]; }
  bool is_terminal(int id) const { return id < 2; }
  size_t size() const { return nodes_.size(); }

 private:
  struct KeyHash {
    size_t operator()(const std::vector<int>& key) const {
      size_t h = 0xcbf29ce484222325ull;
      for (int v : key) h = (h ^ static_cast<size_t>(v)) * 0x100000001b3ull;
      return h;
    }
  };

  std::vector<Node> nodes_;
  // key = [var, kids...]
  std::unordered_map<std::vector<int>, int, KeyHash> unique_;
};

using ManagerPtr = std::shared_ptr<Manager>;

/// Builds ordered diagrams for one variable order. Apply results are cached
/// per builder because they depend on the order; the unique table is shared.
class Builder {
 public:
  /// `position[var]` gives the level of each variable, 0 = root.
  Builder(Manager& manager, std::vector<int> position,
          std::vector<int> arity);

  int literal_true(int var);                            // Bernoulli var = true
  int literal_in(int var, std::span<const char> sat);   // value in sat set
  int mdd_and(int a, int b);
  int mdd_or(int a, int b);

  Manager& manager() { return manager_; }

 private:
  int apply(int a, int b, bool is_and);
  int level_of(int id) const;

  Manager& manager_;
  std::vector<int> position_;
  std::vector<int> arity_;
  std::unordered_map<uint64_t, int> and_cache_;
  std::unordered_map<uint64_t, int> or_cache_;
};

}  // namespace rml::mdd

#endif  // RML_CORE_MDD_HPP
