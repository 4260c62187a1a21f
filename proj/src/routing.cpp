#include "cits/routing.hpp"

#include <deque>

namespace cits {

RoutingTable::RoutingTable(const Topology& t) {
  for (const auto& n : t.nodes) adjacency_[n.id];
  for (const auto& l : t.links) {
    if (l.a == l.b || !adjacency_.count(l.a) || !adjacency_.count(l.b)) continue;
    adjacency_[l.a].insert(l.b);
    adjacency_[l.b].insert(l.a);
  }
  for (const auto& [dest, _] : adjacency_) {
    auto& d = dist_[dest];
    d[dest] = 0;
    std::deque<NodeId> queue{dest};
    while (!queue.empty()) {
      const NodeId cur = queue.front();
      queue.pop_front();
      for (const auto& nb : adjacency_.at(cur)) {
        if (d.emplace(nb, d.at(cur) + 1).second) queue.push_back(nb);
      }
    }
  }
}

std::optional<int> RoutingTable::distance(const NodeId& from, const NodeId& to) const {
  const auto it = dist_.find(to);
  if (it == dist_.end()) return std::nullopt;
  const auto jt = it->second.find(from);
  if (jt == it->second.end()) return std::nullopt;
  return jt->second;
}

std::optional<NodeId> RoutingTable::next_hop(const NodeId& from, const NodeId& to) const {
  const auto d = distance(from, to);
  if (!d || *d == 0) return std::nullopt;
  const auto& toward = dist_.at(to);
  // adjacency sets iterate in id order, so the first match is the smallest.
  for (const auto& nb : adjacency_.at(from)) {
    const auto it = toward.find(nb);
    if (it != toward.end() && it->second == *d - 1) return nb;
  }
  return std::nullopt;
}

std::vector<NodeId> RoutingTable::path(const NodeId& from, const NodeId& to) const {
  if (!distance(from, to)) return {};
  std::vector<NodeId> out{from};
  NodeId cur = from;
  while (cur != to) {
    cur = *next_hop(cur, to);
    out.push_back(cur);
  }
  return out;
}

}  // namespace cits
