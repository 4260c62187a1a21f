#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cits/topology.hpp"

namespace cits {

/// Static shortest-hop routing over the link graph. Among equal-length
/// routes the lexicographically smallest next-hop id wins.
class RoutingTable {
 public:
  RoutingTable() = default;
  explicit RoutingTable(const Topology& t);

  std::optional<NodeId> next_hop(const NodeId& from, const NodeId& to) const;
  /// Hop count, or nullopt when unreachable.
  std::optional<int> distance(const NodeId& from, const NodeId& to) const;
  /// Full node sequence from..to, empty when unreachable.
  std::vector<NodeId> path(const NodeId& from, const NodeId& to) const;

 private:
  std::map<NodeId, std::set<NodeId>> adjacency_;
  // dist_[dest][node]
  std::map<NodeId, std::map<NodeId, int>> dist_;
};

}  // namespace cits
