#include "mfca/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <set>

#include <unsupported/Eigen/FFT>

#include "mfca/angles.hpp"
#include "mfca/csv.hpp"
#include "mfca/error.hpp"
#include "mfca/parallel.hpp"

namespace mfca {

namespace {

double bilinear(const Image& img, double s, double t) {
  const int L = img.size();
  const double x = (s + img.extent) / img.spacing();
  const double y = (t + img.extent) / img.spacing();
  if (x < 0.0 || y < 0.0 || x > L - 1 || y > L - 1) return 0.0;
  int c0 = static_cast<int>(std::floor(x));
  int r0 = static_cast<int>(std::floor(y));
  c0 = std::min(c0, L - 2);
  r0 = std::min(r0, L - 2);
  const double fx = x - c0;
  const double fy = y - r0;
  const auto& p = img.pixels;
  return (1 - fy) * ((1 - fx) * p(r0, c0) + fx * p(r0, c0 + 1)) +
         fy * ((1 - fx) * p(r0 + 1, c0) + fx * p(r0 + 1, c0 + 1));
}

void put_u32(std::ostream& os, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(b, 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw ParseError("image: truncated header");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

bool polar_less(const PolarImage& a, const PolarImage& b) {
  const auto& x = a.samples();
  const auto& y = b.samples();
  return std::lexicographical_compare(x.data(), x.data() + x.size(), y.data(), y.data() + y.size());
}

RidResult rid_ordered(const PolarImage& a, const PolarImage& b) {
  const int n = a.n_theta();
  const Eigen::RowVectorXcd cross =
      (a.spectra().array() * b.spectra().conjugate().array()).colwise().sum();
  std::vector<std::complex<double>> spec(cross.data(), cross.data() + n);
  std::vector<std::complex<double>> corr;
  Eigen::FFT<double> fft;
  fft.inv(corr, spec);
  int best = 0;
  for (int s = 1; s < n; ++s) {
    if (corr[s].real() > corr[best].real()) best = s;
  }
  const double d2 = a.energy() + b.energy() - 2.0 * corr[best].real();
  return {std::sqrt(std::max(0.0, d2)), kTwoPi * best / n, best};
}

}  // namespace

void Phantom::validate() const {
  for (const Blob& b : blobs) {
    if (!(b.sigma > 0.0)) throw InvalidArgument("phantom: blob sigma must be positive");
    if (!(b.center.norm() <= kMaxCenterRadius)) {
      throw InvalidArgument("phantom: blob center outside the support ball");
    }
  }
}

Phantom Phantom::standard() {
  Phantom p;
  p.blobs = {
      {{0.35, 0.10, -0.20}, 0.18, 1.0}, {{-0.30, 0.25, 0.15}, 0.14, 0.8},
      {{0.05, -0.40, 0.30}, 0.12, 1.2}, {{-0.15, -0.20, -0.45}, 0.20, 0.6},
      {{0.20, 0.45, 0.35}, 0.10, 0.9},  {{0.00, 0.00, 0.00}, 0.25, 0.5},
  };
  return p;
}

Phantom Phantom::random(std::uint64_t seed, int count) {
  if (count < 0) throw InvalidArgument("phantom: negative blob count");
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  Phantom p;
  for (int i = 0; i < count; ++i) {
    Eigen::Vector3d dir;
    do {
      dir = {normal(gen), normal(gen), normal(gen)};
    } while (dir.norm() < 1e-12);
    const double radius = 0.6 * std::cbrt(unit(gen));
    Blob b;
    b.center = radius * dir.normalized();
    b.sigma = 0.08 + 0.12 * unit(gen);
    b.amplitude = 0.5 + unit(gen);
    p.blobs.push_back(b);
  }
  return p;
}

Image project(const Phantom& phantom, const Rotation& r, int L, double extent) {
  if (L < 3 || L % 2 == 0) throw InvalidArgument("project: image size must be odd and >= 3");
  if (!(extent > 0.0)) throw InvalidArgument("project: extent must be positive");
  phantom.validate();
  Image img;
  img.extent = extent;
  img.pixels = Eigen::MatrixXd::Zero(L, L);
  const Eigen::Vector3d e1 = r.matrix().col(0);
  const Eigen::Vector3d e2 = r.matrix().col(1);
  const double root2pi = std::sqrt(kTwoPi);
  for (const Blob& b : phantom.blobs) {
    const double ms = b.center.dot(e1);
    const double mt = b.center.dot(e2);
    const double scale = b.amplitude * b.sigma * root2pi;
    const double inv = 1.0 / (2.0 * b.sigma * b.sigma);
    for (int row = 0; row < L; ++row) {
      const double dt = img.coordinate(row) - mt;
      for (int col = 0; col < L; ++col) {
        const double ds = img.coordinate(col) - ms;
        img.pixels(row, col) += scale * std::exp(-(ds * ds + dt * dt) * inv);
      }
    }
  }
  return img;
}

Image add_noise(const Image& image, double snr, std::uint64_t seed) {
  if (!(snr > 0.0)) throw InvalidArgument("add_noise: snr must be positive");
  if (std::isinf(snr)) return image;
  const double mean = image.pixels.mean();
  const double var = (image.pixels.array() - mean).square().mean();
  std::normal_distribution<double> noise(0.0, std::sqrt(var / snr));
  std::mt19937_64 gen(seed);
  Image out = image;
  for (int row = 0; row < out.size(); ++row)
    for (int col = 0; col < out.size(); ++col) out.pixels(row, col) += noise(gen);
  return out;
}

PolarImage::PolarImage(const Image& image, int n_theta, int n_r)
    : n_theta_(n_theta), n_r_(n_r == 0 ? image.size() / 2 : n_r) {
  if (n_theta_ < 4) throw InvalidArgument("polar grid: n_theta must be at least 4");
  if (n_r_ < 1) throw InvalidArgument("polar grid: n_r must be positive");
  samples_.resize(n_r_, n_theta_);
  spectra_.resize(n_r_, n_theta_);
  weights_.resize(n_r_);
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> row(n_theta_);
  std::vector<std::complex<double>> freq;
  for (int q = 0; q < n_r_; ++q) {
    const double radius = (q + 0.5) * image.extent / n_r_;
    weights_[q] = radius;
    for (int a = 0; a < n_theta_; ++a) {
      const double phi = kTwoPi * a / n_theta_;
      samples_(q, a) = bilinear(image, radius * std::cos(phi), radius * std::sin(phi));
      row[a] = samples_(q, a);
    }
    fft.fwd(freq, row);
    const double root = std::sqrt(radius);
    for (int f = 0; f < n_theta_; ++f) spectra_(q, f) = root * freq[f];
    energy_ += radius * samples_.row(q).squaredNorm();
  }
}

RidResult rid_distance(const PolarImage& a, const PolarImage& b) {
  if (a.n_theta() != b.n_theta() || a.n_r() != b.n_r()) {
    throw InvalidArgument("rid_distance: polar grids differ");
  }
  if (a.samples() == b.samples()) return {};
  if (!polar_less(b, a)) return rid_ordered(a, b);
  RidResult r = rid_ordered(b, a);
  r.shift = (a.n_theta() - r.shift) % a.n_theta();
  r.theta = kTwoPi * r.shift / a.n_theta();
  return r;
}

RidResult rid_distance(const Image& img_i, const Image& img_j, int n_theta, int n_r) {
  if (img_i.size() != img_j.size() || img_i.extent != img_j.extent) {
    throw InvalidArgument("rid_distance: image dimensions differ");
  }
  return rid_distance(PolarImage(img_i, n_theta, n_r), PolarImage(img_j, n_theta, n_r));
}

std::size_t PairwiseDistances::index(int i, int j) const {
  if (i > j) std::swap(i, j);
  if (i == j || i < 0 || j >= n) throw InvalidArgument("pairwise distance index out of range");
  const std::size_t ii = static_cast<std::size_t>(i);
  return ii * (2 * static_cast<std::size_t>(n) - ii - 1) / 2 + static_cast<std::size_t>(j - i - 1);
}

PairwiseDistances pairwise_rid(const std::vector<Image>& images, int n_theta, int n_r,
                               int threads) {
  const int n = static_cast<int>(images.size());
  if (n < 2) throw InvalidArgument("pairwise_rid: need at least two images");
  for (const Image& img : images) {
    if (img.size() != images.front().size() || img.extent != images.front().extent) {
      throw InvalidArgument("pairwise_rid: image dimensions differ");
    }
  }
  std::vector<PolarImage> polar;
  polar.reserve(n);
  for (const Image& img : images) polar.emplace_back(img, n_theta, n_r);

  PairwiseDistances out;
  out.n = n;
  const std::size_t total = static_cast<std::size_t>(n) * (n - 1) / 2;
  out.distance.resize(total);
  out.theta.resize(total);
  parallel_for(n - 1, threads, [&](int i) {
    for (int j = i + 1; j < n; ++j) {
      const RidResult r = rid_distance(polar[i], polar[j]);
      const std::size_t idx = out.index(i, j);
      out.distance[idx] = r.distance;
      out.theta[idx] = r.theta;
    }
  });
  return out;
}

ObservationGraph graph_from_distances(const PairwiseDistances& d, const ImageGraphOptions& options) {
  const int n = d.n;
  ObservationGraph g;
  g.n_vertices = n;
  auto add = [&](int i, int j) {
    const std::size_t idx = d.index(i, j);
    g.edges.push_back({i, j, d.theta[idx], EdgeKind::good});
  };

  double epsilon = options.epsilon;
  switch (options.method) {
    case ImageGraphMethod::edge_fraction: {
      if (!(options.edge_fraction >= 0.0 && options.edge_fraction <= 1.0)) {
        throw InvalidArgument("image_graph: edge fraction must lie in [0, 1]");
      }
      const auto count = static_cast<std::size_t>(
          std::llround(options.edge_fraction * static_cast<double>(d.distance.size())));
      if (count == 0) return g;
      std::vector<double> sorted = d.distance;
      std::nth_element(sorted.begin(), sorted.begin() + (count - 1), sorted.end());
      epsilon = sorted[count - 1];
      [[fallthrough]];
    }
    case ImageGraphMethod::threshold:
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          if (d.distance[d.index(i, j)] <= epsilon) add(i, j);
        }
      return g;
    case ImageGraphMethod::top_k: {
      if (options.top_k < 1 || options.top_k >= n) {
        throw InvalidArgument("image_graph: need 1 <= top_k < n");
      }
      std::set<std::pair<int, int>> chosen;
      std::vector<int> cand;
      for (int i = 0; i < n; ++i) {
        cand.clear();
        for (int j = 0; j < n; ++j) {
          if (j != i) cand.push_back(j);
        }
        std::partial_sort(cand.begin(), cand.begin() + options.top_k, cand.end(), [&](int a, int b) {
          const double da = d.distance[d.index(i, a)];
          const double db = d.distance[d.index(i, b)];
          return da != db ? da < db : a < b;
        });
        for (int t = 0; t < options.top_k; ++t) {
          chosen.emplace(std::min(i, cand[t]), std::max(i, cand[t]));
        }
      }
      for (const auto& [i, j] : chosen) add(i, j);
      return g;
    }
  }
  return g;
}

ObservationGraph image_graph(const std::vector<Image>& images, const ImageGraphOptions& options) {
  return graph_from_distances(
      pairwise_rid(images, options.n_theta, options.n_r, options.threads), options);
}

void write_image(std::ostream& os, const Image& image) {
  put_u32(os, static_cast<std::uint32_t>(image.pixels.rows()));
  put_u32(os, static_cast<std::uint32_t>(image.pixels.cols()));
  for (int row = 0; row < image.pixels.rows(); ++row) {
    for (int col = 0; col < image.pixels.cols(); ++col) {
      std::uint64_t bits = 0;
      const double v = image.pixels(row, col);
      std::memcpy(&bits, &v, sizeof bits);
      char b[8];
      for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
      os.write(b, 8);
    }
  }
}

Image read_image(std::istream& is, double extent) {
  const std::uint32_t rows = get_u32(is);
  const std::uint32_t cols = get_u32(is);
  if (rows != cols || rows < 3 || rows % 2 == 0 || rows > 1u << 14) {
    throw ParseError("image: expected an odd square size");
  }
  Image img;
  img.extent = extent;
  img.pixels.resize(rows, cols);
  for (std::uint32_t row = 0; row < rows; ++row) {
    for (std::uint32_t col = 0; col < cols; ++col) {
      unsigned char b[8];
      if (!is.read(reinterpret_cast<char*>(b), 8)) throw ParseError("image: truncated pixel data");
      std::uint64_t bits = 0;
      for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
      double v = 0.0;
      std::memcpy(&v, &bits, sizeof v);
      img.pixels(row, col) = v;
    }
  }
  return img;
}

void write_manifest(std::ostream& os, const std::vector<ManifestEntry>& entries,
                    const std::string& comment) {
  if (!comment.empty()) os << "# " << comment << '\n';
  os << "index,seed,snr\n";
  for (const auto& e : entries) {
    os << e.index << ',' << e.seed << ',' << (std::isinf(e.snr) ? "inf" : csv::format(e.snr))
       << '\n';
  }
}

std::vector<ManifestEntry> read_manifest(std::istream& is) {
  std::string line;
  if (!csv::next_record(is, line)) throw ParseError("manifest: empty input");
  if (line != "index,seed,snr") throw ParseError("manifest: unexpected header '" + line + "'");
  std::vector<ManifestEntry> out;
  while (csv::next_record(is, line)) {
    const auto f = csv::split(line);
    if (f.size() != 3) throw ParseError("manifest: expected 3 fields");
    ManifestEntry e;
    e.index = static_cast<int>(csv::parse_int(f[0]));
    e.seed = static_cast<std::uint64_t>(std::stoull(f[1]));
    e.snr = f[2] == "inf" ? std::numeric_limits<double>::infinity() : csv::parse_double(f[2]);
    out.push_back(e);
  }
  return out;
}

}  // namespace mfca
