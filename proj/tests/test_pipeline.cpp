#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "mfca/angles.hpp"
#include "mfca/error.hpp"
#include "mfca/pipeline.hpp"
#include "property_suite.hpp"

using namespace mfca;
using cd = std::complex<double>;

namespace {

ObservationGraph path_graph(int n) {
  ObservationGraph g;
  g.n_vertices = n;
  for (int i = 0; i + 1 < n; ++i) g.edges.push_back({i, i + 1, 0.3 * (i + 1), EdgeKind::good});
  return g;
}

const FrameSet& frames2000() {
  static const FrameSet f = sample_uniform(81, 2000);
  return f;
}

const std::vector<FrequencyBlock>& clean_blocks() {
  static const std::vector<FrequencyBlock> b = embed_all(clean_graph(frames2000(), 0.95), 2);
  return b;
}

}  // namespace

TEST_CASE("build_H") {
  ObservationGraph empty;
  empty.n_vertices = 3;
  CHECK(build_H(empty, 1).to_dense().cwiseAbs().maxCoeff() == 0.0);

  ObservationGraph one;
  one.n_vertices = 2;
  one.edges = {{0, 1, 0.7, EdgeKind::good}};
  for (int k : {1, 3}) {
    const Eigen::MatrixXcd h = build_H(one, k).to_dense();
    CHECK(std::abs(h(0, 1) - std::polar(1.0, k * 0.7)) < 1e-15);
    CHECK(std::abs(h(1, 0) - std::polar(1.0, -k * 0.7)) < 1e-15);
    CHECK(h(0, 0) == cd(0.0, 0.0));
  }

  const FrameSet f = sample_uniform(82, 200);
  const ObservationGraph g = clean_graph(f, 0.9);
  const Eigen::MatrixXcd h1 = build_H(g, 1).to_dense();
  for (const Edge& e : g.edges) {
    CHECK(std::abs(h1(e.i, e.j) - transport_rep(f[e.i], f[e.j], 1)) < 1e-12);
  }
}

TEST_CASE("normalize") {
  ObservationGraph cycle;
  cycle.n_vertices = 6;
  for (int i = 0; i < 5; ++i) cycle.edges.push_back({i, i + 1, 0.2, EdgeKind::good});
  cycle.edges.push_back({0, 5, 1.0, EdgeKind::good});
  const Eigen::MatrixXcd h = build_H(cycle, 2).to_dense();
  const Eigen::MatrixXcd n = normalize(build_H(cycle, 2), degrees(cycle)).to_dense();
  CHECK((n - h / 2.0).cwiseAbs().maxCoeff() < 1e-15);

  ObservationGraph iso = path_graph(3);
  iso.n_vertices = 4;
  const Eigen::MatrixXcd ni = normalize(build_H(iso, 1), degrees(iso)).to_dense();
  CHECK(ni.row(3).cwiseAbs().maxCoeff() == 0.0);
  CHECK(ni.col(3).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("embed on a single edge plus an isolated vertex") {
  ObservationGraph g;
  g.n_vertices = 3;
  g.edges = {{0, 1, 1.1, EdgeKind::good}};
  const FrequencyBlock b = embed(g, 1);
  REQUIRE(b.eigenvalues.size() == 3);
  CHECK(b.eigenvalues[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(b.eigenvalues[1]) < 1e-12);
  CHECK(b.eigenvalues[2] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(b.embedding.cols() == 3);
  CHECK(b.isolated[2]);
  CHECK_FALSE(b.isolated[0]);
  const Affinity a = affinity_k(b, 0, 2);
  CHECK(a.isolated);
  CHECK(a.value == 0.0);
  // All three eigenvectors are kept, so the rows are mutually orthogonal.
  CHECK(affinity_k(b, 0, 1).value < 1e-12);
}

TEST_CASE("clean graph: spectral gap after the top group and orthonormal embedding") {
  const auto& blocks = clean_blocks();
  const FrequencyBlock& b1 = blocks[0];
  const FrequencyBlock& b2 = blocks[1];
  REQUIRE(b1.eigenvalues.size() == 4);
  REQUIRE(b2.eigenvalues.size() == 6);
  CHECK(b1.eigenvalues[2] - b1.eigenvalues[3] > 0.0);
  CHECK(eigenvalue_groups(spectrum_report(clean_graph(frames2000(), 0.95), 2, 13)).front() == 5);
  for (const FrequencyBlock* b : {&b1, &b2}) {
    CHECK(std::is_sorted(b->eigenvalues.rbegin(), b->eigenvalues.rend()));
    const Eigen::MatrixXcd gram = b->embedding.adjoint() * b->embedding;
    CHECK((gram - Eigen::MatrixXcd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("affinities: diagonal, aggregation and G-measures") {
  const auto& blocks = clean_blocks();
  std::mt19937_64 rng(83);
  std::uniform_int_distribution<int> pick(0, 1999);
  for (int t = 0; t < 500; ++t) {
    const int i = pick(rng);
    const int j = pick(rng);
    CHECK(affinity_k(blocks[0], i, i).value == 1.0);
    const double a1 = affinity_k(blocks[0], i, j).value;
    const double a2 = affinity_k(blocks[1], i, j).value;
    CHECK(a1 <= 1.0);
    CHECK(affinity_all(blocks, i, j).value == doctest::Approx(a1 * a2).epsilon(1e-15));
    const std::vector<FrequencyBlock> only(blocks.begin(), blocks.begin() + 1);
    CHECK(affinity_all(only, i, j).value == a1);
    const double g1 = g_affinity(blocks[0], i, j);
    const double g2 = g_affinity(blocks[1], i, j);
    CHECK(g1 == doctest::Approx(2.0 * a1 - 1.0).epsilon(1e-14));
    CHECK(g2 == doctest::Approx(2.0 * std::sqrt(a2) - 1.0).epsilon(1e-14));
    CHECK(g_all(blocks, i, j) == doctest::Approx(0.5 * (g1 + g2)).epsilon(1e-14));
  }
  CHECK(g_affinity(blocks[0], 5, 5) == 1.0);
  CHECK_THROWS_AS(affinity_k(blocks[0], 0, 2000), InvalidArgument);
}

TEST_CASE("limit embedding: G-measures coincide across k and the product has the summed exponent") {
  const FrameSet f = sample_uniform(84, 300);
  std::vector<FrequencyBlock> blocks;
  for (int k = 1; k <= 4; ++k) blocks.push_back(mfca::testing::extrinsic_block(f, k));
  for (int i = 0; i < 300; i += 7) {
    for (int j = 1; j < 300; j += 11) {
      const double c = viewing_direction(f[i]).dot(viewing_direction(f[j]));
      const double base = (c + 1.0) / 2.0;
      // The 1/k root amplifies roundoff near antipodal pairs.
      if (base < 0.05) continue;
      for (const auto& b : blocks) {
        CHECK(std::abs(g_affinity(b, i, j) - (2.0 * affinity_k(blocks[0], i, j).value - 1.0)) < 1e-9);
      }
      CHECK(std::abs(affinity_all(blocks, i, j).value - std::pow(base, 10)) < 1e-10);
    }
  }
}

TEST_CASE("knn: path graph, ties and isolated vertices") {
  const std::vector<FrequencyBlock> path = {embed(path_graph(3), 1)};
  const NeighborLists nl = knn(path, AffinityMethod::single(1), 1);
  REQUIRE(nl.size() == 3);
  CHECK(nl[0].size() == 1);
  // The embedding spans all of C^3, so every pair is orthogonal.
  for (const auto& row : nl) CHECK(row[0].affinity < 1e-12);

  // Three identical rows tie; the lower index wins.
  FrequencyBlock b;
  b.k = 1;
  b.embedding = Eigen::MatrixXcd::Zero(4, 3);
  b.embedding.row(0) << 1, 0, 0;
  b.embedding.row(1) << 1, 0, 0;
  b.embedding.row(2) << 1, 0, 0;
  b.row_norms = {1, 1, 1, 0};
  b.isolated = {0, 0, 0, 1};
  const NeighborLists t = knn({b}, AffinityMethod::single(1), 2);
  CHECK(t[0][0].j == 1);
  CHECK(t[0][1].j == 2);
  CHECK(t[2][0].j == 0);
  CHECK(t[3].empty());
  for (const auto& row : t) {
    for (const Neighbor& nb : row) CHECK(nb.j != 3);
  }
  CHECK_THROWS_AS(knn({b}, AffinityMethod::single(4), 1), InvalidArgument);
}

TEST_CASE("knn matches brute force across chunk boundaries and thread counts") {
  const FrameSet f = sample_uniform(85, 300);
  const auto blocks = embed_all(rewire(clean_graph(f, 0.9), 0.5, 2), 3, 1);
  for (const AffinityMethod& m :
       {AffinityMethod::single(2), AffinityMethod::product(), AffinityMethod::g_mean()}) {
    const NeighborLists one = knn(blocks, m, 7, 1);
    const NeighborLists many = knn(blocks, m, 7, 3);
    for (int i = 0; i < 300; ++i) {
      REQUIRE(one[i].size() == 7);
      std::vector<std::pair<double, int>> brute;
      for (int j = 0; j < 300; ++j) {
        if (j == i) continue;
        double s = 0.0;
        if (m.kind == AffinityKind::single) s = affinity_k(blocks[1], i, j).value;
        if (m.kind == AffinityKind::product) s = affinity_all(blocks, i, j).value;
        if (m.kind == AffinityKind::g_mean) s = g_all(blocks, i, j);
        brute.push_back({-s, j});
      }
      std::sort(brute.begin(), brute.end());
      for (int r = 0; r < 7; ++r) {
        CHECK(one[i][r].j == many[i][r].j);
        CHECK(one[i][r].affinity == many[i][r].affinity);
        CHECK(std::abs(one[i][r].affinity + brute[r].first) < 1e-12);
      }
    }
  }
}

TEST_CASE("knn at p = 1 follows the true-angle ranking") {
  const FrameSet& f = frames2000();
  const NeighborLists nl = knn(clean_blocks(), AffinityMethod::single(1), 50);
  std::vector<int> ranks;
  for (int i = 0; i < 2000; ++i) {
    std::vector<std::pair<double, int>> order;
    for (int j = 0; j < 2000; ++j) {
      if (j != i) order.push_back({-viewing_direction(f[i]).dot(viewing_direction(f[j])), j});
    }
    std::sort(order.begin(), order.end());
    std::vector<int> rank(2000, 0);
    for (int t = 0; t < static_cast<int>(order.size()); ++t) rank[order[t].second] = t;
    for (const Neighbor& nb : nl[i]) ranks.push_back(rank[nb.j]);
  }
  std::sort(ranks.begin(), ranks.end());
  CHECK(ranks[ranks.size() / 2] < 50);
  CHECK(ranks[ranks.size() * 95 / 100] < 100);
}

TEST_CASE("evaluate_neighbors") {
  const FrameSet& f = frames2000();
  const ObservationGraph g = clean_graph(f, 0.95);
  NeighborLists truth(2000);
  for (const Edge& e : g.edges) {
    truth[e.i].push_back({e.j, 1.0});
    truth[e.j].push_back({e.i, 1.0});
  }
  const NeighborMetrics m = evaluate_neighbors(f, truth);
  CHECK(m.pairs == 2 * static_cast<long long>(g.edges.size()));
  CHECK(m.frac_le_20 == 1.0);
  for (int bin = 10; bin < kHistogramBins; ++bin) CHECK(m.histogram[bin] == 0);
  CHECK(m.mean_angle_deg < 19.2);

  std::mt19937_64 rng(86);
  std::uniform_int_distribution<int> pick(0, 1999);
  NeighborLists random(2000);
  for (int i = 0; i < 2000; ++i) {
    while (random[i].size() < 50) {
      const int j = pick(rng);
      if (j != i) random[i].push_back({j, 0.0});
    }
  }
  const NeighborMetrics r = evaluate_neighbors(f, random);
  CHECK(std::abs(r.mean_angle_deg - 90.0) < 2.0);
  long long total = 0;
  for (int c : r.histogram) total += c;
  CHECK(total == r.pairs);

  NeighborLists self(2000);
  self[4].push_back({4, 1.0});
  CHECK_THROWS_AS(evaluate_neighbors(f, self), InvalidArgument);
  CHECK(viewing_angle_deg(f[0], f[0]) == 0.0);
}

TEST_CASE("scatter_data") {
  const auto& blocks = clean_blocks();
  const auto a = scatter_data(blocks[0], frames2000(), 3000, 5);
  const auto b = scatter_data(blocks[0], frames2000(), 3000, 5);
  REQUIRE(a.size() == 3000);
  std::set<std::pair<int, int>> seen;
  for (std::size_t t = 0; t < a.size(); ++t) {
    CHECK(a[t].i == b[t].i);
    CHECK(a[t].j == b[t].j);
    CHECK(a[t].i < a[t].j);
    CHECK(seen.insert({a[t].i, a[t].j}).second);
    const double c = viewing_direction(frames2000()[a[t].i]).dot(viewing_direction(frames2000()[a[t].j]));
    CHECK(a[t].target == doctest::Approx((c + 1.0) / 2.0).epsilon(1e-14));
  }
  // Every pair of a tiny graph: the full enumeration branch.
  FrameSet f;
  const Rotation r = sample_uniform(87, 1)[0];
  f.frames = {r, r * Rotation::in_plane(0.4), r * from_euler({0, kPi, 0})};
  ObservationGraph g;
  g.n_vertices = 3;
  g.edges = {{0, 1, 0.4, EdgeKind::good}};
  const auto all = scatter_data(embed(g, 1), f, 3, 1);
  REQUIRE(all.size() == 3);
  for (const ScatterPoint& p : all) {
    if (p.i == 0 && p.j == 1) {
      CHECK(p.affinity < 1e-12);
      CHECK(p.target == doctest::Approx(1.0).epsilon(1e-12));
    }
    if (p.i == 0 && p.j == 2) CHECK(p.target < 1e-15);
  }
  CHECK_THROWS_AS(scatter_data(embed(g, 1), f, 4, 1), InvalidArgument);
}

TEST_CASE("spectrum_report and eigenvalue grouping") {
  ObservationGraph empty;
  empty.n_vertices = 30;
  const auto zeros = spectrum_report(empty, 2, 19);
  REQUIRE(zeros.size() == 19);
  for (double v : zeros) CHECK(v == 0.0);
  CHECK(eigenvalue_groups({1.0, 0.99, 0.985, 0.9, 0.89, 0.5}) == std::vector<int>{3, 2, 1});
  CHECK(eigenvalue_groups({}).empty());
}

TEST_CASE("embed_all does not depend on the thread count") {
  const auto g = rewire(clean_graph(sample_uniform(88, 600), 0.92), 0.4, 6);
  const auto a = embed_all(g, 4, 1);
  const auto b = embed_all(g, 4, 4);
  for (std::size_t t = 0; t < a.size(); ++t) {
    CHECK(a[t].k == static_cast<int>(t) + 1);
    CHECK(a[t].eigenvalues == b[t].eigenvalues);
    CHECK(a[t].embedding == b[t].embedding);
  }
}
