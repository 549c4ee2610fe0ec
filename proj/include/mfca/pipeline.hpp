#pragma once

// Multi-frequency class averaging: per-frequency class averaging matrices,
// their normalized spectra and embeddings, affinities, aggregation, nearest
// neighbor search and neighbor-quality metrics.

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mfca/eigensolver.hpp"
#include "mfca/graph.hpp"
#include "mfca/so3.hpp"

namespace mfca {

struct FrequencyBlock {
  int k = 0;
  std::vector<double> eigenvalues;  // top 2k+2 of H̃^(k), descending
  Eigen::MatrixXcd embedding;       // n × (2k+1); row i is Ψ^(k)(i)
  std::vector<double> row_norms;    // ‖Ψ^(k)(i)‖
  std::vector<char> isolated;       // zero-degree vertices; their rows are zeroed
  double max_residual = 0.0;

  int size() const { return static_cast<int>(embedding.rows()); }
};

// H^(k)_ij = e^{ιkθ_ij} on edges, θ_ji = −θ_ij, zero elsewhere.
HermitianMatrix build_H(const ObservationGraph& graph, int k);

// D^{−1/2} H D^{−1/2}; rows and columns of zero-degree vertices become zero.
HermitianMatrix normalize(const HermitianMatrix& h, const std::vector<int>& degrees);

FrequencyBlock embed(const ObservationGraph& graph, int k, const SolverOptions& options = {});

// Blocks for k = 1..k_max, computed independently on up to `threads` threads
// (0 = hardware concurrency). Results do not depend on the thread count.
std::vector<FrequencyBlock> embed_all(const ObservationGraph& graph, int k_max, int threads = 0,
                                      const SolverOptions& options = {});

struct Affinity {
  double value = 0.0;
  // Set when either vertex has a zero embedding row; value is then 0.
  bool isolated = false;
};

// |⟨Ψ(i), Ψ(j)⟩| / (‖Ψ(i)‖‖Ψ(j)‖).
Affinity affinity_k(const FrequencyBlock& block, int i, int j);
// Product of affinity_k over all blocks.
Affinity affinity_all(const std::vector<FrequencyBlock>& blocks, int i, int j);
// 2 A^{1/k} − 1, extended by −1 at A = 0.
double g_affinity(const FrequencyBlock& block, int i, int j);
// Mean of g_affinity over all blocks.
double g_all(const std::vector<FrequencyBlock>& blocks, int i, int j);

enum class AffinityKind { single, product, g_mean };

struct AffinityMethod {
  AffinityKind kind = AffinityKind::product;
  int k = 1;  // frequency for AffinityKind::single

  static AffinityMethod single(int k) { return {AffinityKind::single, k}; }
  static AffinityMethod product() { return {AffinityKind::product, 0}; }
  static AffinityMethod g_mean() { return {AffinityKind::g_mean, 0}; }
  // "A1", "A5", "All", "GAll".
  std::string label() const;
};

struct Neighbor {
  int j = 0;
  double affinity = 0.0;
};

// neighbors[i] holds up to K entries in decreasing affinity (ties by
// ascending index). Isolated vertices get empty lists and never appear as
// candidates.
using NeighborLists = std::vector<std::vector<Neighbor>>;

// Rows are processed in bounded chunks from embedding inner products, so the
// n × n affinity matrix is never held in memory.
NeighborLists knn(const std::vector<FrequencyBlock>& blocks, const AffinityMethod& method, int K,
                  int threads = 0);

inline constexpr int kHistogramBins = 90;  // 2° bins over [0°, 180°]

struct NeighborMetrics {
  std::array<int, kHistogramBins> histogram{};
  long long pairs = 0;
  double mean_angle_deg = 0.0;
  double frac_le_10 = 0.0;
  double frac_le_20 = 0.0;
  double frac_le_30 = 0.0;
};

// Angles arccos⟨π_i, π_j⟩ between each vertex and its listed neighbors.
NeighborMetrics evaluate_neighbors(const FrameSet& frames, const NeighborLists& neighbors);

// Angle in degrees between the viewing directions of two frames.
double viewing_angle_deg(const Rotation& a, const Rotation& b);

struct ScatterPoint {
  int i = 0;
  int j = 0;
  double affinity = 0.0;  // A^(k)_ij
  double target = 0.0;    // ((⟨π_i, π_j⟩ + 1) / 2)^k
};

// `sample` distinct unordered pairs drawn uniformly with a seeded generator.
std::vector<ScatterPoint> scatter_data(const FrequencyBlock& block, const FrameSet& frames,
                                       int sample, std::uint64_t seed);

// Top `count` eigenvalues of H̃^(k), descending.
std::vector<double> spectrum_report(const ObservationGraph& graph, int k, int count = 19,
                                    const SolverOptions& options = {});

// Splits a descending sequence into runs of near-equal values: a run ends
// when the next value falls more than rel_band·|values[0]| below the run's
// first member. Returns the run lengths.
std::vector<int> eigenvalue_groups(const std::vector<double>& values, double rel_band = 0.02);

}  // namespace mfca
