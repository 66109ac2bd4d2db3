#include "rmf/so3.hpp"

#include <cmath>
#include <stdexcept>

namespace rmf {

Mat3 hat(const Vec3& w) {
  Mat3 m;
  m << 0.0, -w.z(), w.y(), w.z(), 0.0, -w.x(), -w.y(), w.x(), 0.0;
  return m;
}

Vec3 vee(const Mat3& m) {
  const Mat3 sym = 0.5 * (m + m.transpose());
  if (sym.norm() > 1e-6) {
    throw std::invalid_argument("vee: input is not skew-symmetric");
  }
  return Vec3(m(2, 1), m(0, 2), m(1, 0));
}

Mat3 skew_part(const Mat3& a) { return 0.5 * (a - a.transpose()); }

Mat3 exp_so3(const Vec3& w) {
  const double theta = w.norm();
  const Mat3 omega = hat(w);
  if (theta < kSmallAngle) {
    return Mat3::Identity() + omega + 0.5 * omega * omega;
  }
  const double a = std::sin(theta) / theta;
  const double b = (1.0 - std::cos(theta)) / (theta * theta);
  return Mat3::Identity() + a * omega + b * omega * omega;
}

Vec3 log_so3(const Mat3& r) {
  const double cos_theta =
      std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
  const double theta = std::acos(cos_theta);
  if (theta < kSmallAngle) {
    return vee(skew_part(r));
  }
  if (theta > M_PI - 1e-6) {
    // Near pi the sin(theta) branch is singular. The axis is the unit
    // eigenvector of (r + I)/2 for its largest diagonal entry.
    const Mat3 b = 0.5 * (r + Mat3::Identity());
    int k = 0;
    b.diagonal().maxCoeff(&k);
    Vec3 axis = b.col(k) / std::sqrt(b(k, k));
    // Fix the sign using the off-diagonal skew part (vanishes exactly at pi).
    const Vec3 s(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
    if (s.dot(axis) < 0.0) axis = -axis;
    return theta * axis;
  }
  // Normalizing the axis (rather than scaling by theta / (2 sin theta))
  // keeps the log norm equal to the acos angle even when sin(theta) is tiny.
  const Vec3 s(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  return theta * s.normalized();
}

double geodesic_distance(const Mat3& r1, const Mat3& r2) {
  const double c = std::clamp(
      0.5 * ((r1.transpose() * r2).trace() - 1.0), -1.0, 1.0);
  return std::acos(c);
}

Mat3 egrad2rgrad(const Mat3& r, const Mat3& g) {
  return r * skew_part(r.transpose() * g);
}

Mat3 right_jacobian_inv(const Vec3& w) {
  const double theta = w.norm();
  const Mat3 omega = hat(w);
  if (theta < kSmallAngle) {
    return Mat3::Identity() + 0.5 * omega + omega * omega / 12.0;
  }
  const double c = 1.0 / (theta * theta) -
                   (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  return Mat3::Identity() + 0.5 * omega + c * omega * omega;
}

bool is_rotation(const Mat3& m, double tol) {
  return (m.transpose() * m - Mat3::Identity()).norm() < tol &&
         std::abs(m.determinant() - 1.0) < tol;
}

Vec4 quat_canonicalize(const Vec4& q) {
  for (int i = 0; i < 4; ++i) {
    if (q[i] > 0.0) return q;
    if (q[i] < 0.0) return -q;
  }
  return q;
}

Vec4 quat_encode(const Mat3& r) {
  const Eigen::Quaterniond q(r);
  return quat_canonicalize(Vec4(q.w(), q.x(), q.y(), q.z()));
}

Mat3 quat_decode(const Vec4& q) {
  const double n = q.norm();
  if (std::abs(n - 1.0) > 1e-6) {
    throw std::invalid_argument("quat_decode: quaternion is not unit norm");
  }
  return Eigen::Quaterniond(q[0], q[1], q[2], q[3]).normalized()
      .toRotationMatrix();
}

Vec4 quat_multiply(const Vec4& a, const Vec4& b) {
  const double aw = a[0], bw = b[0];
  const Vec3 av = a.tail<3>(), bv = b.tail<3>();
  Vec4 out;
  out[0] = aw * bw - av.dot(bv);
  out.tail<3>() = aw * bv + bw * av + av.cross(bv);
  return out;
}

Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec4 q;
  do {
    q = Vec4(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
  } while (q.norm() < 1e-6);
  q.normalize();
  return quat_decode(quat_canonicalize(q));
}

Vec3 random_axial_half_gaussian(std::mt19937_64& rng, double sigma) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec3 axis;
  do {
    axis = Vec3(gauss(rng), gauss(rng), gauss(rng));
  } while (axis.norm() < 1e-6);
  axis.normalize();
  const double angle = std::abs(gauss(rng)) * sigma;
  return angle * axis;
}

}  // namespace rmf
