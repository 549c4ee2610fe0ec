#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mfca/angles.hpp"
#include "mfca/error.hpp"
#include "mfca/so3.hpp"

using namespace mfca;

namespace {

Eigen::Matrix3d rz(double a) {
  Eigen::Matrix3d m;
  m << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return m;
}

Eigen::Matrix3d rx(double a) {
  Eigen::Matrix3d m;
  m << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return m;
}

double max_abs(const Eigen::Matrix3d& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("from_euler: identity, viewing direction and factor product") {
  CHECK(max_abs(from_euler({0, 0, 0}).matrix() - Eigen::Matrix3d::Identity()) == 0.0);

  for (double phi : {0.0, 0.4, 2.5, 5.9}) {
    for (double theta : {0.0, 0.3, 1.5, 3.1}) {
      const Eigen::Vector3d v = viewing_direction(from_euler({phi, theta, 1.7}));
      const Eigen::Vector3d expected(std::sin(phi) * std::sin(theta),
                                     -std::cos(phi) * std::sin(theta), std::cos(theta));
      CHECK((v - expected).cwiseAbs().maxCoeff() < 1e-15);
    }
  }

  const Eigen::Matrix3d product = rz(0.3) * rx(0.7) * rz(1.1);
  CHECK(max_abs(from_euler({0.3, 0.7, 1.1}).matrix() - product) < 1e-15);
}

TEST_CASE("from_euler reduces angles modulo their ranges") {
  const Rotation a = from_euler({0.3 + kTwoPi, 0.7, 1.1 - 3 * kTwoPi});
  CHECK(max_abs(a.matrix() - from_euler({0.3, 0.7, 1.1}).matrix()) < 1e-13);
}

TEST_CASE("to_euler: identity, gimbal lock and round trip") {
  const EulerAngles id = to_euler(Rotation::identity());
  CHECK(id.phi == 0.0);
  CHECK(id.theta == 0.0);
  CHECK(id.psi == 0.0);

  const EulerAngles lock = to_euler(Rotation::in_plane(1.25));
  CHECK(lock.phi == doctest::Approx(1.25).epsilon(1e-14));
  CHECK(lock.theta == 0.0);
  CHECK(lock.psi == 0.0);

  const EulerAngles flip = to_euler(from_euler({0.4, kPi, 0.9}));
  CHECK(flip.psi == 0.0);
  CHECK(max_abs(from_euler(flip).matrix() - from_euler({0.4, kPi, 0.9}).matrix()) < 1e-12);

  const FrameSet f = sample_uniform(9, 1000);
  double worst = 0.0;
  for (const Rotation& r : f.frames) {
    worst = std::max(worst, max_abs(from_euler(to_euler(r)).matrix() - r.matrix()));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("viewing_direction") {
  CHECK((viewing_direction(Rotation::identity()) - Eigen::Vector3d(0, 0, 1)).norm() == 0.0);
  CHECK((viewing_direction(from_euler({0, kPi / 2, 0})) - Eigen::Vector3d(0, -1, 0)).norm() <
        1e-15);
  const FrameSet f = sample_uniform(10, 50);
  for (const Rotation& r : f.frames) {
    CHECK(std::abs(viewing_direction(r).norm() - 1.0) < 1e-12);
    const Eigen::Vector3d moved = viewing_direction(r * Rotation::in_plane(0.77));
    CHECK((moved - viewing_direction(r)).norm() < 1e-15);
  }
}

TEST_CASE("Rotation rejects matrices outside SO(3)") {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(0, 0) = -1.0;
  CHECK_THROWS_AS(Rotation{m}, InvalidArgument);
  m = Eigen::Matrix3d::Identity() * 1.001;
  CHECK_THROWS_AS(Rotation{m}, InvalidArgument);
  CHECK_NOTHROW(Rotation{rz(0.2) * rx(1.0)});
}

TEST_CASE("sample_uniform is deterministic and Haar distributed") {
  const FrameSet a = sample_uniform(123, 1);
  const FrameSet b = sample_uniform(123, 1);
  CHECK(a[0].matrix() == b[0].matrix());
  CHECK(sample_uniform(124, 1)[0].matrix() != a[0].matrix());

  const std::size_t n = 100000;
  const FrameSet f = sample_uniform(2024, n);
  double mean = 0.0;
  bool orthogonal = true;
  std::vector<double> theta;
  theta.reserve(n);
  for (const Rotation& r : f.frames) {
    orthogonal = orthogonal && Rotation::is_special_orthogonal(r.matrix());
    const double c = viewing_direction(r).z();
    mean += c;
    theta.push_back(std::acos(std::clamp(c, -1.0, 1.0)));
  }
  mean /= n;
  CHECK(orthogonal);
  CHECK(std::abs(mean) < 0.01);

  std::sort(theta.begin(), theta.end());
  double d = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double cdf = (1.0 - std::cos(theta[t])) / 2.0;
    d = std::max({d, std::abs(static_cast<double>(t + 1) / n - cdf),
                  std::abs(cdf - static_cast<double>(t) / n)});
  }
  CHECK(d < 1.628 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("alignment_angle: identity, pure in-plane offset and antipodes") {
  const FrameSet f = sample_uniform(11, 20);
  for (const Rotation& r : f.frames) {
    CHECK(std::abs(angle_difference(alignment_angle(r, r), 0.0)) < 1e-14);
    for (double alpha : {0.1, 1.0, 3.0, 6.0}) {
      const double got = alignment_angle(r, r * Rotation::in_plane(alpha));
      CHECK(std::abs(angle_difference(got, alpha)) < 1e-13);
    }
    const Rotation flipped = r * from_euler({0, kPi, 0});
    CHECK_THROWS_AS(alignment_angle(r, flipped), AntipodalError);
    CHECK_THROWS_AS(transport_rep(r, flipped, 2), AntipodalError);
  }
}

TEST_CASE("alignment_angle minimizes the Frobenius misfit (grid-search oracle)") {
  const FrameSet f = sample_uniform(12, 4000);
  const int grid = 1000000;
  const double step = kTwoPi / grid;
  int checked = 0;
  for (std::size_t t = 0; t + 1 < f.size() && checked < 8; t += 2) {
    const Rotation& ri = f[t];
    const Rotation& rj = f[t + 1];
    if (viewing_direction(ri).dot(viewing_direction(rj)) <= 0.95) continue;
    ++checked;
    // ‖R_i ρ(θ) − R_j‖² = 6 − 2 tr(ρ(θ)ᵀ R_iᵀ R_j); only the upper 2×2 block of M varies.
    const Eigen::Matrix3d m = ri.matrix().transpose() * rj.matrix();
    double best = -1e300;
    double best_theta = 0.0;
    for (int s = 0; s < grid; ++s) {
      const double th = s * step;
      const double c = std::cos(th);
      const double sn = std::sin(th);
      const double tr = c * m(0, 0) + sn * m(1, 0) - sn * m(0, 1) + c * m(1, 1);
      if (tr > best) {
        best = tr;
        best_theta = th;
      }
    }
    // The oracle objective must match the matrix form exactly.
    const Eigen::Matrix3d rho = Rotation::in_plane(best_theta).matrix();
    CHECK(std::abs((ri.matrix() * rho - rj.matrix()).squaredNorm() - (6.0 - 2.0 * (best + m(2, 2)))) <
          1e-12);
    CHECK(std::abs(angle_difference(alignment_angle(ri, rj), best_theta)) <= step);
  }
  CHECK(checked == 8);
}

TEST_CASE("transport_rep") {
  const FrameSet f = sample_uniform(13, 200);
  for (std::size_t t = 0; t + 1 < f.size(); t += 2) {
    const Rotation& a = f[t];
    const Rotation& b = f[t + 1];
    if (viewing_direction(a).dot(viewing_direction(b)) < -1.0 + 1e-9) continue;
    CHECK(transport_rep(a, b, 0) == std::complex<double>(1.0, 0.0));
    for (int k : {1, 3, 10}) {
      const auto z = transport_rep(a, b, k);
      CHECK(std::abs(std::abs(z) - 1.0) < 1e-14);
      CHECK(std::abs(z - std::conj(transport_rep(b, a, k))) < 1e-10);
    }
  }
  for (double alpha : {0.3, 2.0}) {
    for (int k : {1, 4}) {
      const auto z = transport_rep(f[0], f[0] * Rotation::in_plane(alpha), k);
      CHECK(std::abs(z - std::polar(1.0, k * alpha)) < 1e-12);
    }
  }
}

TEST_CASE("frames CSV round-trips bit-exactly") {
  const FrameSet f = sample_uniform(14, 25);
  std::stringstream ss;
  write_frames_csv(ss, f, "note");
  const std::string text = ss.str();
  CHECK(text.rfind("# note", 0) == 0);
  CHECK(text.find("index,r11,r12,r13,r21,r22,r23,r31,r32,r33") != std::string::npos);
  const FrameSet g = read_frames_csv(ss);
  REQUIRE(g.size() == f.size());
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(g[i].matrix() == f[i].matrix());

  std::istringstream bad("index,r11,r12,r13,r21,r22,r23,r31,r32,r33\n0,1,0,0,0,1,0,0,0,2\n");
  CHECK_THROWS(read_frames_csv(bad));
}

TEST_CASE("wrap_angle and angle_difference") {
  CHECK(wrap_angle(-0.5) == doctest::Approx(kTwoPi - 0.5));
  CHECK(wrap_angle(kTwoPi) == 0.0);
  CHECK(wrap_angle(7.0) == doctest::Approx(7.0 - kTwoPi));
  CHECK(angle_difference(0.1, kTwoPi - 0.1) == doctest::Approx(0.2));
  CHECK(angle_difference(kPi, 0.0) == doctest::Approx(kPi));
}
