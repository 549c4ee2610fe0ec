#include "mfca/graph.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <unordered_set>

#include "mfca/angles.hpp"
#include "mfca/csv.hpp"
#include "mfca/error.hpp"

namespace mfca {

namespace {

std::uint64_t edge_key(int i, int j) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32) |
         static_cast<std::uint32_t>(j);
}

}  // namespace

void ObservationGraph::validate() const {
  if (n_vertices < 0) throw InvalidArgument("graph: negative vertex count");
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(edges.size() * 2);
  for (const Edge& e : edges) {
    if (e.i == e.j) throw InvalidArgument("graph: self loop");
    if (e.i > e.j) throw InvalidArgument("graph: edges must be stored with i < j");
    if (e.i < 0 || e.j >= n_vertices) throw InvalidArgument("graph: vertex out of range");
    if (!(e.theta >= 0.0 && e.theta < kTwoPi)) throw InvalidArgument("graph: angle outside [0, 2pi)");
    if (!seen.insert(edge_key(e.i, e.j)).second) throw InvalidArgument("graph: duplicate edge");
  }
}

ObservationGraph clean_graph(const FrameSet& frames, double cos_threshold) {
  if (frames.size() < 2) throw InvalidArgument("clean_graph: need at least two frames");
  if (!(cos_threshold > -1.0 && cos_threshold < 1.0)) {
    throw InvalidArgument("clean_graph: threshold must lie in (-1, 1)");
  }
  const int n = static_cast<int>(frames.size());
  std::vector<Eigen::Vector3d> dirs(n);
  for (int i = 0; i < n; ++i) dirs[i] = viewing_direction(frames[i]);

  ObservationGraph g;
  g.n_vertices = n;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (dirs[i].dot(dirs[j]) > cos_threshold) {
        g.edges.push_back({i, j, alignment_angle(frames[i], frames[j]), EdgeKind::good});
      }
    }
  }
  return g;
}

ObservationGraph rewire(const ObservationGraph& graph, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("rewire: p must lie in [0, 1]");
  graph.validate();
  const int n = graph.n_vertices;
  std::vector<std::set<int>> adj(n);
  for (const Edge& e : graph.edges) {
    adj[e.i].insert(e.j);
    adj[e.j].insert(e.i);
  }

  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> vertex(0, std::max(n - 1, 0));

  ObservationGraph out;
  out.n_vertices = n;
  out.skipped_rewires = graph.skipped_rewires;
  out.edges.reserve(graph.edges.size());
  for (const Edge& e : graph.edges) {
    if (unit(gen) < p) {
      out.edges.push_back(e);
      continue;
    }
    // Rewired from the lower endpoint; the old partner counts as adjacent
    // while the target is drawn.
    const int i = e.i;
    std::set<int>& ni = adj[i];
    if (static_cast<int>(ni.size()) >= n - 1) {
      adj[i].erase(e.j);
      adj[e.j].erase(i);
      ++out.skipped_rewires;
      continue;
    }
    int target = -1;
    do {
      target = vertex(gen);
    } while (target == i || ni.count(target) != 0);
    const double theta = wrap_angle(kTwoPi * unit(gen));
    adj[i].erase(e.j);
    adj[e.j].erase(i);
    adj[i].insert(target);
    adj[target].insert(i);
    out.edges.push_back({std::min(i, target), std::max(i, target), theta, EdgeKind::rewired});
  }
  return out;
}

std::vector<int> degrees(const ObservationGraph& graph) {
  std::vector<int> d(graph.n_vertices, 0);
  for (const Edge& e : graph.edges) {
    ++d[e.i];
    ++d[e.j];
  }
  return d;
}

void write_graph_csv(std::ostream& os, const ObservationGraph& graph, const std::string& comment) {
  if (!comment.empty()) os << "# " << comment << '\n';
  os << "# n_vertices=" << graph.n_vertices << '\n';
  if (graph.skipped_rewires != 0) os << "# skipped_rewires=" << graph.skipped_rewires << '\n';
  os << "i,j,theta,kind\n";
  for (const Edge& e : graph.edges) {
    os << e.i << ',' << e.j << ',' << csv::format(e.theta) << ','
       << (e.kind == EdgeKind::good ? "good" : "rewired") << '\n';
  }
}

ObservationGraph read_graph_csv(std::istream& is, int n_vertices) {
  ObservationGraph g;
  std::string line;
  std::vector<std::string> comments;
  if (!csv::next_record(is, line, &comments)) throw ParseError("graph csv: empty input");
  if (line != "i,j,theta,kind") throw ParseError("graph csv: unexpected header '" + line + "'");
  while (csv::next_record(is, line, &comments)) {
    const auto f = csv::split(line);
    if (f.size() != 4) throw ParseError("graph csv: expected 4 fields");
    Edge e;
    e.i = static_cast<int>(csv::parse_int(f[0]));
    e.j = static_cast<int>(csv::parse_int(f[1]));
    e.theta = csv::parse_double(f[2]);
    if (f[3] == "good") {
      e.kind = EdgeKind::good;
    } else if (f[3] == "rewired") {
      e.kind = EdgeKind::rewired;
    } else {
      throw ParseError("graph csv: unknown edge kind '" + f[3] + "'");
    }
    g.edges.push_back(e);
  }
  g.n_vertices = n_vertices;
  for (const auto& c : comments) {
    if (c.rfind("# n_vertices=", 0) == 0 && n_vertices <= 0) {
      g.n_vertices = static_cast<int>(csv::parse_int(c.substr(13)));
    } else if (c.rfind("# skipped_rewires=", 0) == 0) {
      g.skipped_rewires = static_cast<int>(csv::parse_int(c.substr(18)));
    }
  }
  if (g.n_vertices <= 0) throw ParseError("graph csv: vertex count unknown");
  try {
    g.validate();
  } catch (const InvalidArgument& err) {
    throw ParseError(std::string("graph csv: ") + err.what());
  }
  return g;
}

}  // namespace mfca
