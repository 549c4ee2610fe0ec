#pragma once

// Simulated projection images: an analytic Gaussian-blob phantom, its exact
// tomographic projections, additive white noise at a target SNR, the
// rotationally invariant distance with its optimal in-plane angle, and the
// observation graph built from all pairwise distances.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mfca/graph.hpp"
#include "mfca/so3.hpp"

namespace mfca {

struct Blob {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double sigma = 0.1;
  double amplitude = 1.0;
};

struct Phantom {
  static constexpr double kMaxCenterRadius = 0.8;

  std::vector<Blob> blobs;

  // Throws InvalidArgument for centers outside the 0.8-ball or σ ≤ 0.
  void validate() const;
  // A fixed asymmetric six-blob phantom.
  static Phantom standard();
  // `count` blobs with centers uniform in the ball of radius 0.6.
  static Phantom random(std::uint64_t seed, int count);
};

// L×L samples of a function on [−extent, extent]². Column c sits at
// s = −extent + c·Δ and row r at t = −extent + r·Δ with Δ = 2·extent/(L−1).
struct Image {
  double extent = 1.0;
  Eigen::MatrixXd pixels;  // pixels(row, col)

  int size() const { return static_cast<int>(pixels.rows()); }
  double spacing() const { return 2.0 * extent / (size() - 1); }
  double coordinate(int index) const { return -extent + index * spacing(); }
};

inline constexpr double kDefaultExtent = 1.2;

// Line integrals along the third column of r, sampled on the (e1, e2) plane
// spanned by its first two columns. L must be odd and ≥ 3.
Image project(const Phantom& phantom, const Rotation& r, int L, double extent = kDefaultExtent);

// Adds i.i.d. N(0, var/snr) noise, var being the population variance of the
// clean pixels over the full grid. snr = +∞ returns the input unchanged.
Image add_noise(const Image& image, double snr, std::uint64_t seed);

// Polar resampling of an image with its per-radius angular spectra, reusable
// across many distance evaluations.
class PolarImage {
 public:
  PolarImage(const Image& image, int n_theta, int n_r);

  int n_theta() const { return n_theta_; }
  int n_r() const { return n_r_; }
  // Radius-weighted energy Σ_q r_q Σ_a P(q, a)².
  double energy() const { return energy_; }
  // Bilinear polar samples, n_r × n_theta.
  const Eigen::MatrixXd& samples() const { return samples_; }
  const Eigen::MatrixXcd& spectra() const { return spectra_; }

 private:
  int n_theta_;
  int n_r_;
  double energy_ = 0.0;
  std::vector<double> weights_;
  Eigen::MatrixXd samples_;
  Eigen::MatrixXcd spectra_;  // radius-weighted DFT of each polar row
};

struct RidResult {
  double distance = 0.0;  // ≥ 0
  double theta = 0.0;     // 2π·shift/n_theta, in [0, 2π)
  int shift = 0;
};

// min over cyclic shifts s of the radius-weighted polar distance between
// img_i and img_j rotated by θ = 2πs/n_theta. The returned θ estimates the
// alignment angle of the frames that produced the images. n_r = 0 selects
// L/2. The result is exactly symmetric: swapping the images keeps the
// distance and negates θ.
RidResult rid_distance(const Image& img_i, const Image& img_j, int n_theta = 360, int n_r = 0);
RidResult rid_distance(const PolarImage& a, const PolarImage& b);

struct PairwiseDistances {
  int n = 0;
  std::vector<double> distance;  // upper triangle, row-major over i < j
  std::vector<double> theta;

  std::size_t index(int i, int j) const;
};

PairwiseDistances pairwise_rid(const std::vector<Image>& images, int n_theta = 360, int n_r = 0,
                               int threads = 0);

enum class ImageGraphMethod { threshold, top_k, edge_fraction };

struct ImageGraphOptions {
  ImageGraphMethod method = ImageGraphMethod::edge_fraction;
  double epsilon = 0.0;         // threshold: edge iff d ≤ ε
  int top_k = 10;               // top_k: union of each vertex's K nearest
  double edge_fraction = 0.05;  // edge_fraction: ε at this quantile of all d
  int n_theta = 360;
  int n_r = 0;
  int threads = 0;
};

ObservationGraph image_graph(const std::vector<Image>& images, const ImageGraphOptions& options);
ObservationGraph graph_from_distances(const PairwiseDistances& d, const ImageGraphOptions& options);

// Fraction of edges of a cap graph with cosine threshold c: (1 − c)/2.
inline double cap_edge_fraction(double cos_threshold) { return 0.5 * (1.0 - cos_threshold); }

// Binary layout: uint32 rows, uint32 cols (little-endian), then row-major
// little-endian float64 pixels.
void write_image(std::ostream& os, const Image& image);
Image read_image(std::istream& is, double extent = kDefaultExtent);

struct ManifestEntry {
  int index = 0;
  std::uint64_t seed = 0;
  double snr = 0.0;  // +∞ for clean images
};

void write_manifest(std::ostream& os, const std::vector<ManifestEntry>& entries,
                    const std::string& comment = {});
std::vector<ManifestEntry> read_manifest(std::istream& is);

}  // namespace mfca
