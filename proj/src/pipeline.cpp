#include "mfca/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_set>

#include "mfca/angles.hpp"
#include "mfca/error.hpp"
#include "mfca/parallel.hpp"

namespace mfca {

namespace {

constexpr int kChunkRows = 128;

// Rows scaled to unit norm; zero rows stay zero.
Eigen::MatrixXcd unit_rows(const FrequencyBlock& block) {
  Eigen::MatrixXcd u = block.embedding;
  for (Eigen::Index r = 0; r < u.rows(); ++r) {
    if (!block.isolated[r]) u.row(r) /= block.row_norms[r];
  }
  return u;
}

void check_vertex(const FrequencyBlock& block, int i) {
  if (i < 0 || i >= block.size()) throw InvalidArgument("vertex index out of range");
}

void check_blocks(const std::vector<FrequencyBlock>& blocks) {
  if (blocks.empty()) throw InvalidArgument("no frequency blocks");
  for (const auto& b : blocks) {
    if (b.size() != blocks.front().size()) throw InvalidArgument("blocks over different graphs");
  }
}

double g_from_affinity(double a, int k) {
  if (a <= 0.0) return -1.0;
  return 2.0 * std::pow(std::min(a, 1.0), 1.0 / k) - 1.0;
}

}  // namespace

HermitianMatrix build_H(const ObservationGraph& graph, int k) {
  if (k < 1) throw InvalidArgument("build_H: k must be positive");
  graph.validate();
  std::vector<MatrixEntry> entries;
  entries.reserve(graph.edges.size());
  for (const Edge& e : graph.edges) {
    entries.push_back({e.i, e.j, std::polar(1.0, wrap_angle(k * e.theta))});
  }
  return HermitianMatrix::sparse(graph.n_vertices, entries);
}

HermitianMatrix normalize(const HermitianMatrix& h, const std::vector<int>& degrees) {
  if (static_cast<int>(degrees.size()) != h.size()) {
    throw InvalidArgument("normalize: degree vector size mismatch");
  }
  std::vector<double> scale(degrees.size());
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    scale[i] = degrees[i] > 0 ? 1.0 / std::sqrt(static_cast<double>(degrees[i])) : 0.0;
  }
  return h.scaled(scale);
}

FrequencyBlock embed(const ObservationGraph& graph, int k, const SolverOptions& options) {
  if (graph.n_vertices < 1) throw InvalidArgument("embed: empty graph");
  const std::vector<int> deg = degrees(graph);
  const HermitianMatrix ht = normalize(build_H(graph, k), deg);
  const int n = graph.n_vertices;
  const int m = std::min(2 * k + 2, n);
  const int dim = std::min(2 * k + 1, n);
  const EigenPairs pairs = top_eigenpairs(ht, m, options);

  FrequencyBlock block;
  block.k = k;
  block.eigenvalues = pairs.values;
  block.embedding = pairs.vectors.leftCols(dim);
  block.row_norms.resize(n);
  block.isolated.resize(n);
  for (int i = 0; i < n; ++i) {
    block.isolated[i] = deg[i] == 0;
    if (block.isolated[i]) block.embedding.row(i).setZero();
    block.row_norms[i] = block.embedding.row(i).norm();
    // A connected vertex can still have a vanishing row; treat it as isolated.
    if (block.row_norms[i] == 0.0) block.isolated[i] = 1;
  }
  block.max_residual = pairs.max_residual;
  return block;
}

std::vector<FrequencyBlock> embed_all(const ObservationGraph& graph, int k_max, int threads,
                                      const SolverOptions& options) {
  if (k_max < 1) throw InvalidArgument("embed_all: k_max must be positive");
  std::vector<FrequencyBlock> blocks(k_max);
  parallel_for(k_max, threads, [&](int idx) { blocks[idx] = embed(graph, idx + 1, options); });
  return blocks;
}

Affinity affinity_k(const FrequencyBlock& block, int i, int j) {
  check_vertex(block, i);
  check_vertex(block, j);
  const double ni = block.row_norms[i];
  const double nj = block.row_norms[j];
  if (block.isolated[i] || block.isolated[j]) return {0.0, true};
  if (i == j) return {1.0, false};
  const std::complex<double> dot = block.embedding.row(i).dot(block.embedding.row(j));
  return {std::min(1.0, std::abs(dot) / (ni * nj)), false};
}

Affinity affinity_all(const std::vector<FrequencyBlock>& blocks, int i, int j) {
  check_blocks(blocks);
  Affinity out{1.0, false};
  for (const auto& b : blocks) {
    const Affinity a = affinity_k(b, i, j);
    if (a.isolated) return {0.0, true};
    out.value *= a.value;
  }
  return out;
}

double g_affinity(const FrequencyBlock& block, int i, int j) {
  return g_from_affinity(affinity_k(block, i, j).value, block.k);
}

double g_all(const std::vector<FrequencyBlock>& blocks, int i, int j) {
  check_blocks(blocks);
  double sum = 0.0;
  for (const auto& b : blocks) sum += g_affinity(b, i, j);
  return sum / static_cast<double>(blocks.size());
}

std::string AffinityMethod::label() const {
  switch (kind) {
    case AffinityKind::single:
      return "A" + std::to_string(k);
    case AffinityKind::product:
      return "All";
    case AffinityKind::g_mean:
      return "GAll";
  }
  return "?";
}

NeighborLists knn(const std::vector<FrequencyBlock>& blocks, const AffinityMethod& method, int K,
                  int threads) {
  check_blocks(blocks);
  const int n = blocks.front().size();
  if (K < 1 || K >= n) throw InvalidArgument("knn: need 1 <= K < n");

  std::vector<const FrequencyBlock*> used;
  if (method.kind == AffinityKind::single) {
    for (const auto& b : blocks) {
      if (b.k == method.k) used.push_back(&b);
    }
    if (used.empty()) throw InvalidArgument("knn: no block for k = " + std::to_string(method.k));
  } else {
    for (const auto& b : blocks) used.push_back(&b);
  }

  std::vector<Eigen::MatrixXcd> units;
  units.reserve(used.size());
  for (const auto* b : used) units.push_back(unit_rows(*b));
  std::vector<char> isolated(n, 0);
  for (const auto* b : used) {
    for (int i = 0; i < n; ++i) {
      if (b->isolated[i]) isolated[i] = 1;
    }
  }

  NeighborLists out(n);
  const int chunks = (n + kChunkRows - 1) / kChunkRows;
  parallel_for(chunks, threads, [&](int c) {
    const int r0 = c * kChunkRows;
    const int rows = std::min(kChunkRows, n - r0);
    Eigen::MatrixXd score;
    for (std::size_t b = 0; b < used.size(); ++b) {
      Eigen::MatrixXd a =
          (units[b].middleRows(r0, rows).conjugate() * units[b].transpose()).cwiseAbs();
      a = a.cwiseMin(1.0);
      if (method.kind == AffinityKind::g_mean) {
        const int k = used[b]->k;
        a = a.unaryExpr([k](double v) { return g_from_affinity(v, k); });
      }
      if (b == 0) {
        score = std::move(a);
      } else if (method.kind == AffinityKind::g_mean) {
        score += a;
      } else {
        score = score.cwiseProduct(a);
      }
    }
    if (method.kind == AffinityKind::g_mean) score /= static_cast<double>(used.size());

    std::vector<int> cand;
    cand.reserve(n);
    for (int r = 0; r < rows; ++r) {
      const int i = r0 + r;
      if (isolated[i]) continue;
      cand.clear();
      for (int j = 0; j < n; ++j) {
        if (j != i && !isolated[j]) cand.push_back(j);
      }
      const int take = std::min<int>(K, static_cast<int>(cand.size()));
      auto better = [&](int a, int b) {
        const double sa = score(r, a);
        const double sb = score(r, b);
        return sa != sb ? sa > sb : a < b;
      };
      std::partial_sort(cand.begin(), cand.begin() + take, cand.end(), better);
      out[i].reserve(take);
      for (int t = 0; t < take; ++t) out[i].push_back({cand[t], score(r, cand[t])});
    }
  });
  return out;
}

double viewing_angle_deg(const Rotation& a, const Rotation& b) {
  const double c = viewing_direction(a).dot(viewing_direction(b));
  return deg(std::acos(std::clamp(c, -1.0, 1.0)));
}

NeighborMetrics evaluate_neighbors(const FrameSet& frames, const NeighborLists& neighbors) {
  if (frames.size() != neighbors.size()) {
    throw InvalidArgument("evaluate_neighbors: frames and neighbor lists differ in size");
  }
  NeighborMetrics m;
  double sum = 0.0;
  long long le10 = 0, le20 = 0, le30 = 0;
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    for (const Neighbor& nb : neighbors[i]) {
      if (nb.j < 0 || static_cast<std::size_t>(nb.j) >= frames.size() ||
          static_cast<std::size_t>(nb.j) == i) {
        throw InvalidArgument("evaluate_neighbors: invalid neighbor index");
      }
      const double a = viewing_angle_deg(frames[i], frames[nb.j]);
      const int bin = std::min(kHistogramBins - 1, static_cast<int>(a / 2.0));
      ++m.histogram[bin];
      sum += a;
      le10 += a <= 10.0;
      le20 += a <= 20.0;
      le30 += a <= 30.0;
      ++m.pairs;
    }
  }
  if (m.pairs > 0) {
    const double p = static_cast<double>(m.pairs);
    m.mean_angle_deg = sum / p;
    m.frac_le_10 = le10 / p;
    m.frac_le_20 = le20 / p;
    m.frac_le_30 = le30 / p;
  }
  return m;
}

std::vector<ScatterPoint> scatter_data(const FrequencyBlock& block, const FrameSet& frames,
                                       int sample, std::uint64_t seed) {
  const int n = block.size();
  if (static_cast<int>(frames.size()) != n) {
    throw InvalidArgument("scatter_data: frames and block differ in size");
  }
  const long long total = static_cast<long long>(n) * (n - 1) / 2;
  if (sample < 0 || sample > total) throw InvalidArgument("scatter_data: sample exceeds pair count");

  std::mt19937_64 gen(seed);
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(sample);
  if (2LL * sample > total) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    std::shuffle(pairs.begin(), pairs.end(), gen);
    pairs.resize(sample);
  } else {
    std::uniform_int_distribution<int> vertex(0, n - 1);
    std::unordered_set<long long> seen;
    seen.reserve(sample * 2);
    while (static_cast<int>(pairs.size()) < sample) {
      int i = vertex(gen);
      int j = vertex(gen);
      if (i == j) continue;
      if (i > j) std::swap(i, j);
      if (seen.insert(static_cast<long long>(i) * n + j).second) pairs.emplace_back(i, j);
    }
  }

  std::vector<ScatterPoint> out;
  out.reserve(sample);
  for (const auto& [i, j] : pairs) {
    const double c = viewing_direction(frames[i]).dot(viewing_direction(frames[j]));
    const double target = std::pow(std::clamp((c + 1.0) / 2.0, 0.0, 1.0), block.k);
    out.push_back({i, j, affinity_k(block, i, j).value, target});
  }
  return out;
}

std::vector<double> spectrum_report(const ObservationGraph& graph, int k, int count,
                                    const SolverOptions& options) {
  if (count < 1 || count > graph.n_vertices) {
    throw InvalidArgument("spectrum_report: count must lie in [1, n]");
  }
  const HermitianMatrix ht = normalize(build_H(graph, k), degrees(graph));
  return top_eigenpairs(ht, count, options).values;
}

std::vector<int> eigenvalue_groups(const std::vector<double>& values, double rel_band) {
  std::vector<int> groups;
  if (values.empty()) return groups;
  const double band = rel_band * std::abs(values.front());
  double first = values.front();
  int run = 0;
  for (double v : values) {
    if (run > 0 && first - v > band) {
      groups.push_back(run);
      first = v;
      run = 0;
    }
    ++run;
  }
  groups.push_back(run);
  return groups;
}

}  // namespace mfca
