#pragma once

#include <Eigen/Dense>
#include <random>

namespace rmf {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;

// Angle below which exp/log switch to their second-order series.
inline constexpr double kSmallAngle = 1e-6;

/// Cross-product matrix of an axial vector: hat(w) h = w x h.
Mat3 hat(const Vec3& w);

/// Inverse of hat. Throws std::invalid_argument if the symmetric part of m
/// exceeds 1e-6 in Frobenius norm.
Vec3 vee(const Mat3& m);

/// (A - A^T) / 2
Mat3 skew_part(const Mat3& a);

/// Rodrigues exponential so(3) -> SO(3).
Mat3 exp_so3(const Vec3& w);

/// Principal logarithm SO(3) -> so(3), returned as an axial vector with
/// norm in [0, pi]. The theta = pi case is handled by eigen-axis extraction.
Vec3 log_so3(const Mat3& r);

/// Rotation angle of r1^T r2, clamped into [0, pi].
double geodesic_distance(const Mat3& r1, const Mat3& r2);

/// Projects a Euclidean gradient onto the tangent space at r:
/// r * skew_part(r^T g).
Mat3 egrad2rgrad(const Mat3& r, const Mat3& g);

/// Inverse of the right Jacobian of exp_so3 at w. Maps a right-perturbation
/// d/de log(exp(hat(w)) exp(e hat(u))) = Jr^{-1}(w) u.
Mat3 right_jacobian_inv(const Vec3& w);

/// True if m is orthonormal with det +1 within tol.
bool is_rotation(const Mat3& m, double tol = 1e-9);

// Quaternions are stored (w, x, y, z) and canonicalized so that w >= 0,
// ties broken by the first nonzero component being positive.
Vec4 quat_encode(const Mat3& r);
Mat3 quat_decode(const Vec4& q);
Vec4 quat_canonicalize(const Vec4& q);
Vec4 quat_multiply(const Vec4& a, const Vec4& b);

/// Uniform random rotation (via normalized Gaussian quaternion).
Mat3 random_rotation(std::mt19937_64& rng);

/// Random axial vector with angle |N(0, sigma)| about a uniform axis.
Vec3 random_axial_half_gaussian(std::mt19937_64& rng, double sigma);

}  // namespace rmf
