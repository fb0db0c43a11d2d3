#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "rerope/errors.hpp"
#include "rerope/linalg.hpp"

namespace rerope {

inline Quaternion conjugate(const Quaternion& q) {
  return {q.w, -q.x, -q.y, -q.z};
}

/// Pinhole intrinsics. Units (pixels or normalized) are the caller's
/// convention; fx, fy must be positive so K stays invertible.
class Intrinsics {
 public:
  Intrinsics(double fx, double fy, double cx, double cy, double skew = 0.0)
      : fx_(fx), fy_(fy), cx_(cx), cy_(cy), skew_(skew) {
    if (!(fx > 0.0) || !(fy > 0.0))
      throw ValidationError("intrinsics need positive focal lengths");
  }

  static Intrinsics identity() { return {1.0, 1.0, 0.0, 0.0, 0.0}; }

  double fx() const { return fx_; }
  double fy() const { return fy_; }
  double cx() const { return cx_; }
  double cy() const { return cy_; }
  double skew() const { return skew_; }

  Mat3 matrix() const {
    Mat3 k;
    k(0, 0) = fx_;
    k(0, 1) = skew_;
    k(0, 2) = cx_;
    k(1, 1) = fy_;
    k(1, 2) = cy_;
    k(2, 2) = 1.0;
    return k;
  }

 private:
  double fx_, fy_, cx_, cy_, skew_;
};

/// World-to-camera extrinsics: x_cam = R x_world + t.
struct Pose {
  Mat3 R;
  Vec3 t;

  Pose(const Mat3& R_, const Vec3& t_) : R(R_), t(t_) {
    const Mat3 gram = transpose(R) * R;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) {
        const double expect = (r == c) ? 1.0 : 0.0;
        if (std::abs(gram(r, c) - expect) > 1e-9)
          throw ValidationError("pose rotation is not orthonormal");
      }
    if (std::abs(det(R) - 1.0) > 1e-9)
      throw ValidationError("pose rotation must have determinant +1");
  }

  static Pose identity() { return {Mat3::identity(), Vec3{0.0, 0.0, 0.0}}; }
};

/// 4x4 homogeneous camera matrix [[KR, Kt],[0,1]]. The bottom row is required
/// to be exactly (0,0,0,1) so the affine inverse stays closed-form.
class LiftedProjection {
 public:
  explicit LiftedProjection(const Mat4& m) : m_(m) {
    if (m(3, 0) != 0.0 || m(3, 1) != 0.0 || m(3, 2) != 0.0 || m(3, 3) != 1.0)
      throw ValidationError("lifted projection bottom row must be (0,0,0,1)");
    if (std::abs(det(linear())) <= 1e-12)
      throw SingularMatrixError("lifted projection has singular linear part");
  }

  static LiftedProjection identity() {
    return LiftedProjection(Mat4::identity());
  }

  const Mat4& matrix() const { return m_; }

  Mat3 linear() const {
    Mat3 a;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) a(r, c) = m_(r, c);
    return a;
  }

  Vec3 translation() const { return {m_(0, 3), m_(1, 3), m_(2, 3)}; }

 private:
  Mat4 m_;
};

inline Mat4 affine_mat4(const Mat3& a, const Vec3& b) {
  Mat4 m;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m(r, c) = a(r, c);
    m(r, 3) = b[static_cast<std::size_t>(r)];
  }
  m(3, 3) = 1.0;
  return m;
}

inline LiftedProjection lift_projection(const Intrinsics& K,
                                        const Pose& pose) {
  const Mat3 k = K.matrix();
  return LiftedProjection(affine_mat4(k * pose.R, k * pose.t));
}

/// [[A,b],[0,1]]^-1 = [[A^-1, -A^-1 b],[0,1]].
inline LiftedProjection invert_lifted(const LiftedProjection& p) {
  const Mat3 a_inv = inverse(p.linear());
  return LiftedProjection(affine_mat4(a_inv, scale(a_inv * p.translation(), -1.0)));
}

/// P_c * P_t^-1; the logit-level relative transform between a camera pair.
inline Mat4 relative_projection(const LiftedProjection& p_c,
                                const LiftedProjection& p_t) {
  return p_c.matrix() * invert_lifted(p_t).matrix();
}

// ---------------------------------------------------------------------------
// Trajectories and translation normalization.
// ---------------------------------------------------------------------------

/// One timestamped camera sample. The rotation is kept in quaternion form
/// exactly as supplied (parsers validate unit norm but do not renormalize),
/// which keeps serialize/parse round trips exact.
struct TrajectoryEntry {
  double timestamp = 0.0;
  Quaternion rotation;
  Vec3 translation{0.0, 0.0, 0.0};
};

class Trajectory {
 public:
  Trajectory(std::vector<TrajectoryEntry> entries, Intrinsics intrinsics)
      : entries_(std::move(entries)), intrinsics_(intrinsics) {
    if (entries_.empty())
      throw ValidationError("trajectory needs at least one entry");
    for (std::size_t i = 1; i < entries_.size(); ++i)
      if (!(entries_[i].timestamp > entries_[i - 1].timestamp))
        throw OrderingError("trajectory timestamps must strictly increase");
  }

  explicit Trajectory(std::vector<TrajectoryEntry> entries)
      : Trajectory(std::move(entries), Intrinsics::identity()) {}

  const std::vector<TrajectoryEntry>& entries() const { return entries_; }
  const Intrinsics& intrinsics() const { return intrinsics_; }
  std::size_t size() const { return entries_.size(); }

  /// Rotation-matrix view of entry i; the quaternion is normalized here.
  Pose pose(std::size_t i) const {
    return {entries_[i].rotation.to_mat3(), entries_[i].translation};
  }

 private:
  std::vector<TrajectoryEntry> entries_;
  Intrinsics intrinsics_;
};

inline double max_translation_norm(const Trajectory& traj) {
  double best = 0.0;
  for (const auto& e : traj.entries())
    best = std::max(best, norm(e.translation));
  return best;
}

/// Divides every translation by `divisor`; rotations keep their exact bits.
inline Trajectory scale_translations(const Trajectory& traj, double divisor) {
  std::vector<TrajectoryEntry> entries = traj.entries();
  for (auto& e : entries)
    e.translation = scale(e.translation, 1.0 / divisor);
  return {std::move(entries), traj.intrinsics()};
}

struct NormalizationResult {
  Trajectory trajectory;
  bool degenerate = false;  // all translations zero; input returned unchanged
  double scale = 1.0;       // divisor that was applied
};

/// Scale-invariance normalization: divide by the max translation norm. An
/// all-zero trajectory is returned unchanged with the degenerate flag set.
inline NormalizationResult normalize_translations(const Trajectory& traj) {
  const double m = max_translation_norm(traj);
  if (m == 0.0) return {traj, true, 1.0};
  return {scale_translations(traj, m), false, m};
}

/// Stage 1 of the scale-unification protocol: rescale only when the max
/// translation norm strictly exceeds 1.
inline Trajectory pre_normalize(const Trajectory& traj) {
  const double m = max_translation_norm(traj);
  if (m > 1.0) return scale_translations(traj, m);
  return traj;
}

struct JointNormalizationResult {
  Trajectory source;
  Trajectory target;
  double scale = 0.0;  // the global factor S
};

/// Stage 2: S = max over the union of both trajectories' norms, plus epsilon;
/// both are divided by S, leaving every norm strictly below 1. Inputs must
/// already be pre-normalized (max norm <= 1).
inline JointNormalizationResult joint_normalize(const Trajectory& src,
                                                const Trajectory& tgt,
                                                double epsilon = 1e-8) {
  if (!(epsilon > 0.0))
    throw ConfigError("joint_normalize needs a positive epsilon");
  const double max_src = max_translation_norm(src);
  const double max_tgt = max_translation_norm(tgt);
  if (max_src > 1.0 + 1e-12 || max_tgt > 1.0 + 1e-12)
    throw ConfigError("joint_normalize inputs must be pre-normalized");
  const double S = std::max(max_src, max_tgt) + epsilon;
  return {scale_translations(src, S), scale_translations(tgt, S), S};
}

/// Re-expresses every pose relative to entry 0, which becomes the origin:
/// R_i' = R_i R_0^T, t_i' = t_i - R_i' t_0 (world-to-camera composition with
/// the inverse of the first pose).
inline Trajectory relative_to_first(const Trajectory& traj) {
  const Quaternion q0_inv = conjugate(traj.entries().front().rotation);
  const Vec3 t0 = traj.entries().front().translation;
  std::vector<TrajectoryEntry> entries = traj.entries();
  for (auto& e : entries) {
    e.rotation = e.rotation * q0_inv;
    e.translation = sub(e.translation, e.rotation.to_mat3() * t0);
  }
  return {std::move(entries), traj.intrinsics()};
}

}  // namespace rerope
