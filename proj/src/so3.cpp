#include "mfca/so3.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <random>

#include "mfca/angles.hpp"
#include "mfca/csv.hpp"
#include "mfca/error.hpp"

namespace mfca {

namespace {

constexpr double kGimbalSin = 1e-12;

}  // namespace

EulerAngles EulerAngles::normalized() const {
  double t = wrap_angle(theta);
  double p = phi;
  double s = psi;
  if (t > kPi) {
    // Rx(-ϑ) = Rz(π) Rx(ϑ) Rz(π)
    t = kTwoPi - t;
    p += kPi;
    s += kPi;
  }
  return {wrap_angle(p), t, wrap_angle(s)};
}

Rotation::Rotation(const Eigen::Matrix3d& m) : m_(m) {
  if (!is_special_orthogonal(m)) {
    throw InvalidArgument("matrix is not in SO(3)");
  }
}

bool Rotation::is_special_orthogonal(const Eigen::Matrix3d& m, double tol) {
  if (!m.allFinite()) return false;
  const Eigen::Matrix3d err = m.transpose() * m - Eigen::Matrix3d::Identity();
  if (err.cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(m.determinant() - 1.0) <= tol;
}

Rotation Rotation::in_plane(double alpha) {
  const double c = std::cos(alpha);
  const double s = std::sin(alpha);
  Eigen::Matrix3d m;
  m << c, -s, 0, s, c, 0, 0, 0, 1;
  return Rotation(m, Unchecked{});
}

Rotation from_euler(const EulerAngles& angles) {
  const EulerAngles a = angles.normalized();
  const double cf = std::cos(a.phi), sf = std::sin(a.phi);
  const double ct = std::cos(a.theta), st = std::sin(a.theta);
  const double cp = std::cos(a.psi), sp = std::sin(a.psi);
  Eigen::Matrix3d m;
  m << cf * cp - sf * sp * ct, -cf * sp - sf * cp * ct, sf * st,
       sf * cp + cf * sp * ct, -sf * sp + cf * cp * ct, -cf * st,
       sp * st, cp * st, ct;
  return Rotation(m);
}

EulerAngles to_euler(const Rotation& rot) {
  const Eigen::Matrix3d& r = rot.matrix();
  const double sin_theta = std::hypot(r(0, 2), r(1, 2));
  const double theta = std::atan2(sin_theta, r(2, 2));

  // The 2×2 block determines φ+ψ (upper hemisphere) or φ−ψ (lower) robustly
  // even when sinϑ is tiny.
  const bool upper = r(2, 2) >= 0.0;
  const double combined = upper ? std::atan2(r(1, 0) - r(0, 1), r(0, 0) + r(1, 1))
                                : std::atan2(r(1, 0) + r(0, 1), r(0, 0) - r(1, 1));
  if (sin_theta < kGimbalSin) {
    return {wrap_angle(combined), theta, 0.0};
  }
  const double phi = std::atan2(r(0, 2), -r(1, 2));
  const double psi = upper ? combined - phi : phi - combined;
  return {wrap_angle(phi), theta, wrap_angle(psi)};
}

Eigen::Vector3d viewing_direction(const Rotation& r) { return r.matrix().col(2); }

FrameSet sample_uniform(std::uint64_t seed, std::size_t n) {
  if (n == 0) throw InvalidArgument("sample_uniform: n must be positive");
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  FrameSet out;
  out.seed = seed;
  out.frames.reserve(n);
  while (out.frames.size() < n) {
    Eigen::Matrix3d g;
    for (int c = 0; c < 3; ++c)
      for (int r = 0; r < 3; ++r) g(r, c) = normal(gen);
    Eigen::HouseholderQR<Eigen::Matrix3d> qr(g);
    Eigen::Matrix3d q = qr.householderQ();
    const Eigen::Matrix3d rr = qr.matrixQR().triangularView<Eigen::Upper>();
    bool degenerate = false;
    for (int i = 0; i < 3; ++i) {
      if (rr(i, i) == 0.0) degenerate = true;
      if (rr(i, i) < 0.0) q.col(i) = -q.col(i);
    }
    if (degenerate) continue;
    if (q.determinant() < 0.0) q.col(0) = -q.col(0);
    out.frames.emplace_back(q);
  }
  return out;
}

double alignment_angle(const Rotation& ri, const Rotation& rj) {
  const Eigen::Matrix3d m = ri.matrix().transpose() * rj.matrix();
  const double c = m(0, 0) + m(1, 1);
  const double s = m(1, 0) - m(0, 1);
  // c² + s² = (1 + cosϑ)², so both vanish only for antipodal directions.
  if (std::hypot(c, s) < 1e-12) {
    throw AntipodalError("alignment_angle: antipodal viewing directions");
  }
  return wrap_angle(std::atan2(s, c));
}

std::complex<double> transport_rep(const Rotation& ri, const Rotation& rj, int k) {
  const double theta = alignment_angle(ri, rj);
  return std::polar(1.0, wrap_angle(static_cast<double>(k) * theta));
}

void write_frames_csv(std::ostream& os, const FrameSet& frames, const std::string& comment) {
  if (!comment.empty()) os << "# " << comment << '\n';
  os << "# seed=" << frames.seed << '\n';
  os << "index,r11,r12,r13,r21,r22,r23,r31,r32,r33\n";
  for (std::size_t i = 0; i < frames.size(); ++i) {
    os << i;
    const Eigen::Matrix3d& m = frames[i].matrix();
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) os << ',' << csv::format(m(r, c));
    os << '\n';
  }
}

FrameSet read_frames_csv(std::istream& is) {
  FrameSet out;
  std::string line;
  std::vector<std::string> comments;
  if (!csv::next_record(is, line, &comments)) throw ParseError("frames csv: empty input");
  if (line != "index,r11,r12,r13,r21,r22,r23,r31,r32,r33") {
    throw ParseError("frames csv: unexpected header '" + line + "'");
  }
  while (csv::next_record(is, line, &comments)) {
    const auto f = csv::split(line);
    if (f.size() != 10) throw ParseError("frames csv: expected 10 fields");
    if (csv::parse_int(f[0]) != static_cast<long long>(out.frames.size())) {
      throw ParseError("frames csv: indices must be consecutive from 0");
    }
    Eigen::Matrix3d m;
    for (int k = 0; k < 9; ++k) m(k / 3, k % 3) = csv::parse_double(f[k + 1]);
    out.frames.emplace_back(m);
  }
  for (const auto& c : comments) {
    if (c.rfind("# seed=", 0) == 0) out.seed = std::stoull(c.substr(7));
  }
  return out;
}

}  // namespace mfca
