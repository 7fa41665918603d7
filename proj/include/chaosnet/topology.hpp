#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "chaosnet/linalg.hpp"

namespace chaosnet {

// Directed follower communication graph. Agents are indexed 0..N-1; agent 0
// is the leader. adjacency(i, j) > 0 means an edge j -> i: agent i receives
// agent j's state with weight a_ij. The leader receives from no one.
struct DirectedGraph {
  int num_agents = 0;
  Matrix adjacency;

  static constexpr int leader = 0;

  double weight(int i, int j) const { return adjacency(i, j); }
  double in_weight(int i) const;  // d_i = sum_j a_ij
};

// Validating constructor: N >= 2, square adjacency, nonnegative weights,
// zero diagonal, empty leader row.
DirectedGraph make_graph(int num_agents, Matrix adjacency);

// {j : a_ij > 0}
std::vector<int> neighbors(const DirectedGraph& g, int i);

// True iff every follower is reachable from the leader along directed edges.
bool has_spanning_tree_rooted_at_leader(const DirectedGraph& g);

// Unit-weight chain 0 -> 1 -> ... -> N-1.
DirectedGraph chain_topology(int num_agents);

// The five-agent loop topology: chain edges 0->1, 1->2 plus the feedback
// cycle 2->3, 3->4, 4->2 among the last three followers.
DirectedGraph loop_topology_rossler();

// Piecewise-constant topology over [0, horizon]. Segments hold (start time,
// graph index); starts are strictly increasing from 0.
struct SwitchingSchedule {
  std::vector<DirectedGraph> graphs;
  std::vector<std::pair<double, int>> segments;
  double average_dwell = 0.0;
  double horizon = 0.0;

  const DirectedGraph& graph_at(double t) const;
  int index_at(double t) const;
};

// Random switching: segment durations i.i.d. exponential with mean
// average_dwell, graph indices uniform. Every graph must pass the
// spanning-tree check. Deterministic for a fixed seed.
SwitchingSchedule sample_switching_schedule(std::vector<DirectedGraph> graphs,
                                            double average_dwell, double horizon,
                                            uint64_t seed);

}  // namespace chaosnet
