#include "cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "config.hpp"
#include "mfca/angles.hpp"
#include "mfca/csv.hpp"
#include "mfca/error.hpp"
#include "mfca/graph.hpp"
#include "mfca/image.hpp"
#include "mfca/pipeline.hpp"
#include "mfca/so3.hpp"
#include "mfca/spectral.hpp"
#include "mfca/wigner.hpp"

namespace mfca::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kSpectrumCount = 19;
constexpr int kScatterSample = 5000;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 0;
};

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Independent stream seed for (purpose, index) under the experiment seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index) {
  return splitmix(splitmix(splitmix(seed) ^ purpose) ^ index);
}

ExperimentConfig effective_config(const Common& common) {
  ExperimentConfig c = common.config_path.empty() ? ExperimentConfig{} : load_config(common.config_path);
  if (common.seed) c.seed = *common.seed;
  c.validate();
  return c;
}

fs::path output_dir(const Common& common, const std::optional<std::string>& configured) {
  if (!common.out.empty()) return common.out;
  if (configured) return *configured;
  if (const char* env = std::getenv("MFCA_OUT"); env != nullptr && *env != '\0') return env;
  return "mfca_out";
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error("cannot create output directory " + dir.string());
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  os << content;
  if (!os) throw Error("write failed for " + path.string());
}

std::string hash_line(const std::string& hash) { return "config_hash=" + hash; }

json metrics_json(const NeighborMetrics& m) {
  return json{{"pairs", m.pairs},
              {"mean_angle_deg", m.mean_angle_deg},
              {"frac_le_10", m.frac_le_10},
              {"frac_le_20", m.frac_le_20},
              {"frac_le_30", m.frac_le_30},
              {"histogram_bin_deg", 2},
              {"histogram", m.histogram}};
}

FrameSet read_frames_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  return read_frames_csv(in);
}

ObservationGraph read_graph_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  return read_graph_csv(in);
}

// Spectra, scatter samples, neighbor lists and metrics for one graph.
void run_graph(const ObservationGraph& graph, const FrameSet& frames, const ExperimentConfig& c,
               const fs::path& dir, int threads, const std::string& hash, const std::string& label,
               std::ostream& out) {
  if (static_cast<int>(frames.size()) != graph.n_vertices) {
    throw InvalidArgument("graph " + label + " and frames differ in vertex count");
  }
  if (c.knn_k >= graph.n_vertices) throw InvalidArgument("knn_k must be below the vertex count");
  ensure_dir(dir);
  std::vector<FrequencyBlock> blocks;
  try {
    blocks = embed_all(graph, c.k_max, threads);
  } catch (const ConvergenceError& e) {
    throw ConvergenceError("graph " + label + ": " + e.what(), e.best_residual());
  }

  const int n = graph.n_vertices;
  const long long pairs = static_cast<long long>(n) * (n - 1) / 2;
  json residuals = json::array();
  for (const FrequencyBlock& b : blocks) {
    residuals.push_back(b.max_residual);
    std::vector<double> spectrum;
    try {
      spectrum = spectrum_report(graph, b.k, std::min(kSpectrumCount, n));
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("graph " + label + ", k=" + std::to_string(b.k) + ": " + e.what(),
                             e.best_residual());
    }
    std::ostringstream sp;
    sp << "# " << hash_line(hash) << "\nrank,eigenvalue\n";
    for (std::size_t r = 0; r < spectrum.size(); ++r) {
      sp << r + 1 << ',' << csv::format(spectrum[r]) << '\n';
    }
    write_file(dir / ("spectrum_k" + std::to_string(b.k) + ".csv"), sp.str());

    const auto points = scatter_data(b, frames, static_cast<int>(std::min<long long>(kScatterSample, pairs)),
                                     derive_seed(c.seed, 3, b.k));
    std::ostringstream sc;
    sc << "# " << hash_line(hash) << "\ni,j,affinity,target\n";
    for (const auto& pt : points) {
      sc << pt.i << ',' << pt.j << ',' << csv::format(pt.affinity) << ',' << csv::format(pt.target)
         << '\n';
    }
    write_file(dir / ("scatter_k" + std::to_string(b.k) + ".csv"), sc.str());
  }

  std::vector<AffinityMethod> methods;
  for (int k : {1, 5, 10}) {
    if (k <= c.k_max) methods.push_back(AffinityMethod::single(k));
  }
  methods.push_back(AffinityMethod::product());
  methods.push_back(AffinityMethod::g_mean());

  json per_method = json::object();
  for (const auto& m : methods) {
    const NeighborLists lists = knn(blocks, m, c.knn_k, threads);
    const NeighborMetrics metrics = evaluate_neighbors(frames, lists);
    per_method[m.label()] = metrics_json(metrics);
    if (m.kind == AffinityKind::product) {
      std::ostringstream nb;
      nb << "# " << hash_line(hash) << "\n# method=" << m.label()
         << "\ni,rank,j,affinity,true_angle_deg\n";
      for (int i = 0; i < n; ++i) {
        for (std::size_t r = 0; r < lists[i].size(); ++r) {
          const Neighbor& e = lists[i][r];
          nb << i << ',' << r + 1 << ',' << e.j << ',' << csv::format(e.affinity) << ','
             << csv::format(viewing_angle_deg(frames[i], frames[e.j])) << '\n';
        }
      }
      write_file(dir / "neighbors.csv", nb.str());
    }
  }
  json metrics{{"config_hash", hash},          {"graph", label},
               {"n_vertices", n},               {"n_edges", graph.edges.size()},
               {"k_max", c.k_max},              {"knn_k", c.knn_k},
               {"solver_max_residual", residuals}, {"methods", per_method}};
  write_file(dir / "metrics.json", metrics.dump(2) + "\n");
  out << label << ": mean angle (All) " << per_method["All"]["mean_angle_deg"].get<double>()
      << " deg, frac<=30 " << per_method["All"]["frac_le_30"].get<double>() << '\n';
}

void cmd_theory(const std::string& k_spec, const std::string& h_spec, int n_max, const fs::path& dir,
                std::ostream& out) {
  const std::vector<int> ks = parse_int_list(k_spec);
  const std::vector<double> hs = parse_range(h_spec);
  for (int k : ks) {
    if (k < 1 || k > kMaxWignerWeight) throw InvalidArgument("k must lie in [1, 64]");
    if (n_max != 0 && n_max < k) throw InvalidArgument("--n-max must be at least every k");
  }
  for (double h : hs) {
    if (!(h > 0.0 && h <= 2.0)) throw InvalidArgument("h values must lie in (0, 2]");
  }
  const std::string hash =
      fnv_hex(json{{"command", "theory"}, {"k", ks}, {"h", hs}, {"n_max", n_max}}.dump());
  ensure_dir(dir);
  std::ostringstream ev;
  std::ostringstream gp;
  ev << "# " << hash_line(hash) << "\nk,h,n,lambda,multiplicity\n";
  gp << "# " << hash_line(hash)
     << "\nk,h,lambda_top,lambda_second,lambda_third,gap,second_gap,delta_k\n";
  for (int k : ks) {
    for (double h : hs) {
      const EigenvalueTable t = eigenvalue_table(k, h, n_max == 0 ? k + 10 : n_max);
      for (const auto& e : t.values) {
        ev << k << ',' << csv::format(h) << ',' << e.n << ',' << csv::format(e.value) << ','
           << e.multiplicity << '\n';
      }
      gp << k << ',' << csv::format(h) << ',' << csv::format(lambda_top(k, h)) << ','
         << csv::format(lambda_second(k, h)) << ',' << csv::format(lambda_third(k, h)) << ','
         << csv::format(spectral_gap(k, h)) << ',' << csv::format(second_gap(k, h)) << ','
         << csv::format(delta_k(k)) << '\n';
    }
  }
  write_file(dir / "eigenvalues.csv", ev.str());
  write_file(dir / "gaps.csv", gp.str());
  out << "wrote " << (dir / "eigenvalues.csv").string() << " and " << (dir / "gaps.csv").string()
      << '\n';
}

void cmd_wigner(int ell, double phi, double theta, double psi, const fs::path& dir, std::ostream& out) {
  if (ell < 0 || ell > kMaxWignerWeight) throw InvalidArgument("--ell must lie in [0, 64]");
  const Rotation x = from_euler({phi, theta, psi});
  const WignerDMatrix d = wigner_D_matrix(ell, x);
  const std::string hash = fnv_hex(
      json{{"command", "wigner"}, {"ell", ell}, {"phi", phi}, {"theta", theta}, {"psi", psi}}.dump());
  ensure_dir(dir);
  std::ostringstream os;
  os << "# " << hash_line(hash) << "\nm,n,re,im\n";
  for (int m = -ell; m <= ell; ++m) {
    for (int n = -ell; n <= ell; ++n) {
      const auto v = d.at(m, n);
      os << m << ',' << n << ',' << csv::format(v.real()) << ',' << csv::format(v.imag()) << '\n';
    }
  }
  const fs::path path = dir / ("wigner_l" + std::to_string(ell) + ".csv");
  write_file(path, os.str());
  out << "wrote " << path.string() << '\n';
}

void cmd_simulate(const ExperimentConfig& c, const fs::path& dir, std::ostream& out) {
  const std::string hash = config_hash(c);
  ensure_dir(dir);
  const FrameSet frames = sample_uniform(c.seed, c.n_frames);
  std::ostringstream fr;
  write_frames_csv(fr, frames, hash_line(hash));
  write_file(dir / "frames.csv", fr.str());
  const ObservationGraph clean = clean_graph(frames, c.cos_threshold);
  for (std::size_t idx = 0; idx < c.p_values.size(); ++idx) {
    const double p = c.p_values[idx];
    const ObservationGraph g = rewire(clean, p, derive_seed(c.seed, 1, idx));
    std::ostringstream gs;
    write_graph_csv(gs, g, hash_line(hash));
    const fs::path path = dir / ("graph_p" + number_label(p) + ".csv");
    write_file(path, gs.str());
    out << "wrote " << path.string() << " (" << g.edges.size() << " edges)\n";
  }
}

void cmd_run(const ExperimentConfig& c, const std::vector<std::string>& graphs,
             const std::string& frames_path, const fs::path& dir, int threads, std::ostream& out) {
  const std::string hash = config_hash(c);
  const FrameSet frames = read_frames_file(frames_path.empty() ? dir / "frames.csv" : fs::path(frames_path));
  std::vector<fs::path> paths;
  if (graphs.empty()) {
    for (double p : c.p_values) paths.push_back(dir / ("graph_p" + number_label(p) + ".csv"));
  } else {
    paths.assign(graphs.begin(), graphs.end());
  }
  for (const fs::path& path : paths) {
    const ObservationGraph g = read_graph_file(path);
    run_graph(g, frames, c, dir / ("run_" + path.stem().string()), threads, hash,
              path.stem().string(), out);
  }
}

void cmd_images(const ExperimentConfig& c, const fs::path& dir, int threads, std::ostream& out) {
  const std::string hash = config_hash(c);
  const fs::path root = dir / "images";
  ensure_dir(root);
  const FrameSet frames = sample_uniform(c.seed, c.n_frames);
  std::ostringstream fr;
  write_frames_csv(fr, frames, hash_line(hash));
  write_file(root / "frames.csv", fr.str());

  const Phantom phantom = Phantom::standard();
  std::vector<Image> clean;
  clean.reserve(frames.size());
  for (const Rotation& r : frames.frames) clean.push_back(project(phantom, r, c.image_size));

  ImageGraphOptions options;
  options.method = ImageGraphMethod::edge_fraction;
  options.edge_fraction = cap_edge_fraction(c.cos_threshold);
  options.threads = threads;

  for (std::size_t si = 0; si < c.snr_values.size(); ++si) {
    const double snr = c.snr_values[si];
    const fs::path sub = root / ("snr_" + number_label(snr));
    ensure_dir(sub);
    std::vector<Image> images;
    std::vector<ManifestEntry> manifest;
    std::ostringstream bin;
    for (std::size_t i = 0; i < clean.size(); ++i) {
      const std::uint64_t seed = derive_seed(c.seed, 2 + 16 * (si + 1), i);
      images.push_back(add_noise(clean[i], snr, seed));
      manifest.push_back({static_cast<int>(i), seed, snr});
      write_image(bin, images.back());
    }
    write_file(sub / "images.bin", bin.str());
    std::ostringstream mf;
    write_manifest(mf, manifest, hash_line(hash) + " snr_variance=full_frame");
    write_file(sub / "manifest.csv", mf.str());

    const ObservationGraph g = image_graph(images, options);
    std::ostringstream gs;
    write_graph_csv(gs, g, hash_line(hash));
    write_file(sub / "graph.csv", gs.str());
    run_graph(g, frames, c, sub, threads, hash, "snr_" + number_label(snr), out);
  }
}

void cmd_eval(const std::string& frames_path, const std::string& neighbors_path, std::ostream& out) {
  const FrameSet frames = read_frames_file(frames_path);
  std::ifstream in(neighbors_path);
  if (!in) throw Error("cannot read " + neighbors_path);
  std::string line;
  if (!csv::next_record(in, line) || line != "i,rank,j,affinity,true_angle_deg") {
    throw ParseError("neighbors csv: unexpected header");
  }
  NeighborLists lists(frames.size());
  while (csv::next_record(in, line)) {
    const auto f = csv::split(line);
    if (f.size() != 5) throw ParseError("neighbors csv: expected 5 fields");
    const long long i = csv::parse_int(f[0]);
    const long long j = csv::parse_int(f[2]);
    if (i < 0 || i >= static_cast<long long>(frames.size())) {
      throw ParseError("neighbors csv: vertex out of range");
    }
    lists[i].push_back({static_cast<int>(j), csv::parse_double(f[3])});
  }
  out << metrics_json(evaluate_neighbors(frames, lists)).dump(2) << '\n';
}

}  // namespace

std::vector<double> parse_range(const std::string& text) try {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    const auto parts = csv::split(text, ':');
    if (parts.size() != 3) throw InvalidArgument("range must look like start:step:stop");
    const double a = csv::parse_double(parts[0]);
    const double step = csv::parse_double(parts[1]);
    const double b = csv::parse_double(parts[2]);
    if (!(step > 0.0) || !(a <= b)) throw InvalidArgument("range needs step > 0 and start <= stop");
    const auto count = static_cast<long long>(std::floor((b - a) / step + 1e-9)) + 1;
    if (count > 1000000) throw InvalidArgument("range too long");
    for (long long i = 0; i < count; ++i) out.push_back(a + static_cast<double>(i) * step);
  } else {
    for (const auto& part : csv::split(text)) {
      if (part.empty()) continue;
      out.push_back(csv::parse_double(part));
    }
  }
  if (out.empty()) throw InvalidArgument("empty value list");
  return out;
} catch (const ParseError& e) {
  throw InvalidArgument(e.what());
}

std::vector<int> parse_int_list(const std::string& text) try {
  std::vector<int> out;
  for (const auto& part : csv::split(text)) {
    if (part.empty()) continue;
    const long long v = csv::parse_int(part);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
      throw InvalidArgument("integer out of range");
    }
    out.push_back(static_cast<int>(v));
  }
  if (out.empty()) throw InvalidArgument("empty integer list");
  return out;
} catch (const ParseError& e) {
  throw InvalidArgument(e.what());
}

std::string number_label(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-frequency class averaging experiments"};
  // "--h" names the bandwidth list of `theory`, so help is long-form only.
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--config", common.config_path, "JSON experiment configuration");
  app.add_option("--seed", common.seed, "Override the configured seed");
  app.add_option("--out", common.out, "Output directory (fallback: $MFCA_OUT)");
  app.add_option("--threads", common.threads, "Worker threads (0 = all cores)")
      ->check(CLI::NonNegativeNumber);

  auto* theory = app.add_subcommand("theory", "Eigenvalue and spectral-gap tables");
  std::string k_spec = "1,2,3";
  std::string h_spec;
  int n_max = 0;
  theory->add_option("--k", k_spec, "Comma list of frequencies");
  theory->add_option("--h", h_spec, "Bandwidths as start:step:stop or a comma list")->required();
  theory->add_option("--n-max", n_max, "Largest n per table (default k+10)");

  auto* wigner = app.add_subcommand("wigner", "Wigner D-matrix of a rotation");
  int ell = 1;
  double phi = 0.0, theta = 0.0, psi = 0.0;
  wigner->add_option("--ell", ell, "Weight")->required();
  wigner->add_option("--phi", phi, "Euler angle phi (radians)");
  wigner->add_option("--theta", theta, "Euler angle theta (radians)");
  wigner->add_option("--psi", psi, "Euler angle psi (radians)");

  auto* simulate = app.add_subcommand("simulate", "Frames and rewired graphs");

  auto* run_cmd = app.add_subcommand("run", "Spectra, affinities and neighbor metrics");
  std::vector<std::string> graphs;
  std::string frames_path;
  run_cmd->add_option("--graph", graphs, "Graph CSV (repeatable; default: one per p value)");
  run_cmd->add_option("--frames", frames_path, "Frames CSV (default: <out>/frames.csv)");

  auto* images = app.add_subcommand("images", "Projection images, image graphs and metrics");

  auto* eval = app.add_subcommand("eval", "Metrics of a neighbors file");
  std::string eval_frames, eval_neighbors;
  eval->add_option("--frames", eval_frames, "Frames CSV")->required();
  eval->add_option("--neighbors", eval_neighbors, "Neighbors CSV")->required();

  std::vector<const char*> argv{"mfca"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (theory->parsed()) {
      cmd_theory(k_spec, h_spec, n_max, output_dir(common, std::nullopt), out);
    } else if (wigner->parsed()) {
      cmd_wigner(ell, phi, theta, psi, output_dir(common, std::nullopt), out);
    } else if (eval->parsed()) {
      cmd_eval(eval_frames, eval_neighbors, out);
    } else {
      const ExperimentConfig c = effective_config(common);
      const fs::path dir = output_dir(common, c.output_dir);
      if (simulate->parsed()) {
        cmd_simulate(c, dir, out);
      } else if (run_cmd->parsed()) {
        cmd_run(c, graphs, frames_path, dir, common.threads, out);
      } else if (images->parsed()) {
        cmd_images(c, dir, common.threads, out);
      }
    }
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace mfca::cli
