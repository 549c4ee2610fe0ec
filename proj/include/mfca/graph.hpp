#pragma once

// Observation graphs over frame sets: the clean geometric neighborhood graph
// and the probabilistic rewiring corruption.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mfca/so3.hpp"

namespace mfca {

enum class EdgeKind { good, rewired };

// Undirected edge stored once with i < j. The angle for the reverse
// direction is implicitly θ_ji = −θ_ij.
struct Edge {
  int i = 0;
  int j = 0;
  double theta = 0.0;  // [0, 2π)
  EdgeKind kind = EdgeKind::good;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct ObservationGraph {
  int n_vertices = 0;
  std::vector<Edge> edges;
  // Rewiring attempts that found no admissible target and dropped the edge.
  int skipped_rewires = 0;

  // Throws InvalidArgument on self loops, duplicates, i > j, out-of-range
  // vertices or angles outside [0, 2π).
  void validate() const;
};

// Edge (i, j) iff ⟨π(x_i), π(x_j)⟩ > cos_threshold, angle from alignment_angle.
ObservationGraph clean_graph(const FrameSet& frames, double cos_threshold);

// Keeps each edge with probability p; otherwise replaces it by (i, j') with j'
// uniform among vertices not adjacent to i, carrying a uniform angle.
ObservationGraph rewire(const ObservationGraph& graph, double p, std::uint64_t seed);

std::vector<int> degrees(const ObservationGraph& graph);

// CSV `i,j,theta,kind`, preceded by a `# n_vertices=N` comment.
void write_graph_csv(std::ostream& os, const ObservationGraph& graph,
                     const std::string& comment = {});
// n_vertices comes from the comment line, or from `n_vertices` when > 0.
ObservationGraph read_graph_csv(std::istream& is, int n_vertices = 0);

}  // namespace mfca
