#pragma once

#include <algorithm>
#include <set>
#include <utility>
#include <vector>

#include "gmrf/errors.hpp"

namespace gmrf {

/// Unordered pair of distinct vertices, stored with first < second. 0-based.
using Edge = std::pair<int, int>;

inline Edge make_edge(int i, int j) {
  if (i == j) throw InvalidParameter("edge: self-loops not allowed");
  return {std::min(i, j), std::max(i, j)};
}

struct EdgeSet {
  int p = 0;
  std::set<Edge> pairs;

  bool contains(int i, int j) const { return pairs.count(make_edge(i, j)) > 0; }

  void insert(int i, int j) {
    Edge e = make_edge(i, j);
    if (e.first < 0 || e.second >= p) throw InvalidParameter("edge: index out of range");
    pairs.insert(e);
  }

  void erase(int i, int j) { pairs.erase(make_edge(i, j)); }

  std::size_t size() const { return pairs.size(); }

  /// Maximum graph degree (self-loops not counted).
  int max_degree() const {
    std::vector<int> deg(p, 0);
    for (const auto& [i, j] : pairs) {
      ++deg[i];
      ++deg[j];
    }
    return deg.empty() ? 0 : *std::max_element(deg.begin(), deg.end());
  }

  std::vector<int> neighbors(int r) const {
    std::vector<int> out;
    for (const auto& [i, j] : pairs) {
      if (i == r) out.push_back(j);
      if (j == r) out.push_back(i);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  friend bool operator==(const EdgeSet& a, const EdgeSet& b) {
    return a.p == b.p && a.pairs == b.pairs;
  }
};

}  // namespace gmrf
