#include "chaosnet/topology.hpp"

#include <string>

#include "chaosnet/errors.hpp"
#include "chaosnet/rng.hpp"

namespace chaosnet {

double DirectedGraph::in_weight(int i) const {
  double d = 0.0;
  for (int j = 0; j < num_agents; ++j) d += adjacency(i, j);
  return d;
}

DirectedGraph make_graph(int num_agents, Matrix adjacency) {
  if (num_agents < 2) throw InvalidArgument("make_graph: need at least 2 agents");
  if (adjacency.rows() != num_agents || adjacency.cols() != num_agents)
    throw InvalidArgument("make_graph: adjacency must be " + std::to_string(num_agents) + "x" +
                          std::to_string(num_agents));
  for (int i = 0; i < num_agents; ++i) {
    if (adjacency(i, i) != 0.0) throw InvalidArgument("make_graph: self-loop at agent " + std::to_string(i));
    for (int j = 0; j < num_agents; ++j)
      if (adjacency(i, j) < 0.0) throw InvalidArgument("make_graph: negative weight");
  }
  for (int j = 0; j < num_agents; ++j)
    if (adjacency(DirectedGraph::leader, j) != 0.0)
      throw InvalidArgument("make_graph: leader row must be zero (the leader runs uncoupled)");
  return DirectedGraph{num_agents, std::move(adjacency)};
}

std::vector<int> neighbors(const DirectedGraph& g, int i) {
  if (i < 0 || i >= g.num_agents)
    throw InvalidArgument("neighbors: agent index " + std::to_string(i) + " out of range");
  std::vector<int> out;
  for (int j = 0; j < g.num_agents; ++j)
    if (g.adjacency(i, j) > 0.0) out.push_back(j);
  return out;
}

bool has_spanning_tree_rooted_at_leader(const DirectedGraph& g) {
  // BFS over edges j -> i (information flow), starting from the leader.
  std::vector<bool> reached(g.num_agents, false);
  std::vector<int> queue{DirectedGraph::leader};
  reached[DirectedGraph::leader] = true;
  while (!queue.empty()) {
    int j = queue.back();
    queue.pop_back();
    for (int i = 0; i < g.num_agents; ++i) {
      if (!reached[i] && g.adjacency(i, j) > 0.0) {
        reached[i] = true;
        queue.push_back(i);
      }
    }
  }
  for (bool r : reached)
    if (!r) return false;
  return true;
}

DirectedGraph chain_topology(int num_agents) {
  if (num_agents < 2) throw InvalidArgument("chain_topology: need at least 2 agents");
  Matrix a(num_agents, num_agents);
  for (int i = 1; i < num_agents; ++i) a(i, i - 1) = 1.0;
  return make_graph(num_agents, std::move(a));
}

DirectedGraph loop_topology_rossler() {
  Matrix a(5, 5);
  a(1, 0) = 1.0;  // 0 -> 1
  a(2, 1) = 1.0;  // 1 -> 2
  a(3, 2) = 1.0;  // 2 -> 3
  a(4, 3) = 1.0;  // 3 -> 4
  a(2, 4) = 1.0;  // 4 -> 2 closes the loop
  return make_graph(5, std::move(a));
}

const DirectedGraph& SwitchingSchedule::graph_at(double t) const {
  return graphs[index_at(t)];
}

int SwitchingSchedule::index_at(double t) const {
  if (segments.empty()) throw InvalidState("switching schedule is empty");
  int idx = segments.front().second;
  for (const auto& [start, gi] : segments) {
    if (start > t) break;
    idx = gi;
  }
  return idx;
}

SwitchingSchedule sample_switching_schedule(std::vector<DirectedGraph> graphs,
                                            double average_dwell, double horizon,
                                            uint64_t seed) {
  if (graphs.empty()) throw InvalidArgument("sample_switching_schedule: empty graph list");
  if (average_dwell <= 0.0) throw InvalidArgument("sample_switching_schedule: average_dwell must be > 0");
  if (horizon <= 0.0) throw InvalidArgument("sample_switching_schedule: horizon must be > 0");
  int n = graphs.front().num_agents;
  for (const auto& g : graphs) {
    if (g.num_agents != n)
      throw InvalidArgument("sample_switching_schedule: graphs must share the agent count");
    if (!has_spanning_tree_rooted_at_leader(g))
      throw InvalidArgument("sample_switching_schedule: a graph lacks a leader-rooted spanning tree");
  }

  SwitchingSchedule sched;
  sched.average_dwell = average_dwell;
  sched.horizon = horizon;
  sched.graphs = std::move(graphs);

  if (sched.graphs.size() == 1) {
    sched.segments = {{0.0, 0}};
    return sched;
  }

  Rng rng(seed);
  double t = 0.0;
  while (t < horizon) {
    sched.segments.emplace_back(t, rng.uniform_int(0, static_cast<int>(sched.graphs.size()) - 1));
    t += rng.exponential(average_dwell);
  }
  return sched;
}

}  // namespace chaosnet
