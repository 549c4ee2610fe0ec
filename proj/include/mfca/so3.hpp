#pragma once

// Rotation-group primitives: the z-x-z Euler parametrization, Haar sampling,
// viewing directions and the frame-alignment (transport) angle.

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mfca {

struct EulerAngles {
  double phi = 0.0;    // [0, 2π)
  double theta = 0.0;  // [0, π]
  double psi = 0.0;    // [0, 2π)

  // Equivalent angles inside the canonical ranges.
  EulerAngles normalized() const;
};

// A 3×3 special-orthogonal matrix. Columns are the frame (e1, e2, e3); e3 is
// the viewing direction.
class Rotation {
 public:
  static constexpr double kTolerance = 1e-12;

  Rotation() : m_(Eigen::Matrix3d::Identity()) {}
  // Throws InvalidArgument unless RᵀR = I and det R = 1 to kTolerance.
  explicit Rotation(const Eigen::Matrix3d& m);

  static Rotation identity() { return Rotation(); }
  // Rotation about e3: the SO(2) element h(α) acting from the right.
  static Rotation in_plane(double alpha);

  const Eigen::Matrix3d& matrix() const { return m_; }
  double operator()(int r, int c) const { return m_(r, c); }

  Rotation inverse() const { return Rotation(m_.transpose(), Unchecked{}); }
  Rotation operator*(const Rotation& o) const { return Rotation(m_ * o.m_, Unchecked{}); }

  static bool is_special_orthogonal(const Eigen::Matrix3d& m, double tol = kTolerance);

 private:
  struct Unchecked {};
  Rotation(const Eigen::Matrix3d& m, Unchecked) : m_(m) {}

  Eigen::Matrix3d m_;
};

struct FrameSet {
  std::vector<Rotation> frames;
  std::uint64_t seed = 0;

  std::size_t size() const { return frames.size(); }
  const Rotation& operator[](std::size_t i) const { return frames[i]; }
};

// Rz(φ)·Rx(ϑ)·Rz(ψ); angles are reduced to their canonical ranges first.
Rotation from_euler(const EulerAngles& angles);

// Inverse of from_euler. At gimbal lock (sinϑ < 1e-12) ψ = 0 and φ carries
// the whole in-plane angle.
EulerAngles to_euler(const Rotation& r);

Eigen::Vector3d viewing_direction(const Rotation& r);

// n Haar-distributed frames; deterministic in seed.
FrameSet sample_uniform(std::uint64_t seed, std::size_t n);

// Angle θ ∈ [0, 2π) minimizing ‖R_i ρ(θ) − R_j‖_F, read off R_iᵀR_j.
// Throws AntipodalError when the viewing directions are antipodal.
double alignment_angle(const Rotation& ri, const Rotation& rj);

// e^{ιkθ} with θ = alignment_angle(ri, rj).
std::complex<double> transport_rep(const Rotation& ri, const Rotation& rj, int k);

// CSV with header `index,r11,...,r33`, values at 17 significant digits.
// Lines starting with '#' are comments.
void write_frames_csv(std::ostream& os, const FrameSet& frames,
                      const std::string& comment = {});
FrameSet read_frames_csv(std::istream& is);

}  // namespace mfca
