#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rerope/camera.hpp"
#include "rerope/errors.hpp"
#include "rerope/linalg.hpp"

namespace rerope {

// ---------------------------------------------------------------------------
// Trajectory text format: one sample per line,
//   timestamp tx ty tz qx qy qz qw
// with '#' comment lines and blank lines skipped. The quaternion must be unit
// within 1e-6; it is stored exactly as parsed so parse/serialize round trips
// are bit-identical.
// ---------------------------------------------------------------------------

namespace detail {

inline double parse_double(std::string_view field, long line) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw ParseError("malformed number '" + std::string(field) + "'", line);
  return value;
}

inline std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline Trajectory parse_trajectory(const std::string& text) {
  std::vector<TrajectoryEntry> entries;
  long line_number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view line(text.data() + pos,
                                (nl == std::string::npos ? text.size() : nl) -
                                    pos);
    pos = (nl == std::string::npos) ? text.size() + 1 : nl + 1;
    ++line_number;

    std::vector<std::string_view> fields;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' ||
                                 line[i] == '\r'))
        ++i;
      std::size_t start = i;
      while (i < line.size() && line[i] != ' ' && line[i] != '\t' &&
             line[i] != '\r')
        ++i;
      if (i > start) fields.push_back(line.substr(start, i - start));
    }
    if (fields.empty() || fields[0].front() == '#') continue;
    if (fields.size() != 8)
      throw ParseError("expected 8 fields (timestamp tx ty tz qx qy qz qw), "
                       "got " + std::to_string(fields.size()),
                       line_number);

    TrajectoryEntry e;
    e.timestamp = detail::parse_double(fields[0], line_number);
    e.translation = {detail::parse_double(fields[1], line_number),
                     detail::parse_double(fields[2], line_number),
                     detail::parse_double(fields[3], line_number)};
    e.rotation.x = detail::parse_double(fields[4], line_number);
    e.rotation.y = detail::parse_double(fields[5], line_number);
    e.rotation.z = detail::parse_double(fields[6], line_number);
    e.rotation.w = detail::parse_double(fields[7], line_number);
    if (std::abs(e.rotation.norm() - 1.0) > 1e-6)
      throw ValidationError("non-unit quaternion at line " +
                            std::to_string(line_number));
    entries.push_back(e);
  }
  return Trajectory(std::move(entries));
}

inline std::string serialize_trajectory(
    const Trajectory& traj, const std::vector<std::string>& comments = {}) {
  std::string out;
  for (const std::string& c : comments) {
    if (c.rfind('#', 0) != 0) out += "# ";
    out += c;
    out += '\n';
  }
  for (const auto& e : traj.entries()) {
    out += detail::format_value(e.timestamp);
    for (double v : {e.translation[0], e.translation[1], e.translation[2],
                     e.rotation.x, e.rotation.y, e.rotation.z, e.rotation.w}) {
      out += ' ';
      out += detail::format_value(v);
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rigid (optionally scaled) alignment and the RRE/RTE/ATE metrics.
// ---------------------------------------------------------------------------

struct RigidAlignment {
  Quaternion rotation;                // applied to the estimate
  Vec3 translation{0.0, 0.0, 0.0};
  double scale = 1.0;
};

class AlignedPair {
 public:
  AlignedPair(Trajectory estimate, Trajectory reference, Trajectory aligned,
              RigidAlignment alignment)
      : estimate_(std::move(estimate)),
        reference_(std::move(reference)),
        aligned_(std::move(aligned)),
        alignment_(alignment) {
    check_compatible(estimate_, reference_);
  }

  /// Treats the estimate as already expressed in the reference frame.
  static AlignedPair identity_aligned(Trajectory estimate,
                                      Trajectory reference) {
    Trajectory aligned = estimate;
    return {std::move(estimate), std::move(reference), std::move(aligned),
            RigidAlignment{}};
  }

  static void check_compatible(const Trajectory& a, const Trajectory& b) {
    if (a.size() != b.size())
      throw ValidationError("trajectories have different lengths");
    for (std::size_t i = 0; i < a.size(); ++i)
      if (std::abs(a.entries()[i].timestamp - b.entries()[i].timestamp) > 1e-6)
        throw ValidationError("trajectory timestamps do not match");
  }

  const Trajectory& estimate() const { return estimate_; }
  const Trajectory& reference() const { return reference_; }
  const Trajectory& aligned() const { return aligned_; }
  const RigidAlignment& alignment() const { return alignment_; }

 private:
  Trajectory estimate_;
  Trajectory reference_;
  Trajectory aligned_;
  RigidAlignment alignment_;
};

namespace detail {

/// Horn's closed-form solution: the unit quaternion maximizing the alignment
/// correlation is the top eigenvector of the 4x4 matrix built from the
/// centered cross-covariance.
inline Quaternion horn_rotation(const std::vector<Vec3>& src_centered,
                                const std::vector<Vec3>& tgt_centered) {
  Mat3 S;  // S(a,b) = sum src_a * tgt_b
  for (std::size_t i = 0; i < src_centered.size(); ++i)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        S(a, b) += src_centered[i][static_cast<std::size_t>(a)] *
                   tgt_centered[i][static_cast<std::size_t>(b)];

  SmallSquare<4> N{};
  N[0][0] = S(0, 0) + S(1, 1) + S(2, 2);
  N[0][1] = N[1][0] = S(1, 2) - S(2, 1);
  N[0][2] = N[2][0] = S(2, 0) - S(0, 2);
  N[0][3] = N[3][0] = S(0, 1) - S(1, 0);
  N[1][1] = S(0, 0) - S(1, 1) - S(2, 2);
  N[1][2] = N[2][1] = S(0, 1) + S(1, 0);
  N[1][3] = N[3][1] = S(2, 0) + S(0, 2);
  N[2][2] = -S(0, 0) + S(1, 1) - S(2, 2);
  N[2][3] = N[3][2] = S(1, 2) + S(2, 1);
  N[3][3] = -S(0, 0) - S(1, 1) + S(2, 2);

  const auto eig = jacobi_eigen<4>(N);
  std::size_t best = 0;
  for (std::size_t i = 1; i < 4; ++i)
    if (eig.values[i] > eig.values[best]) best = i;

  Quaternion q{eig.vectors[0][best], eig.vectors[1][best],
               eig.vectors[2][best], eig.vectors[3][best]};
  if (q.norm() == 0.0) return Quaternion{};  // all-coincident input
  q = q.normalized();
  if (q.w < 0.0) q = {-q.w, -q.x, -q.y, -q.z};
  return q;
}

inline void check_scale_degeneracy(const std::vector<Vec3>& centered,
                                   const char* which) {
  double total = 0.0;
  SmallSquare<3> scatter{};
  for (const Vec3& c : centered) {
    total += squared_norm(c);
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = 0; b < 3; ++b) scatter[a][b] += c[a] * c[b];
  }
  if (total <= 1e-24)
    throw DegeneracyError(std::string(which) +
                          " positions are coincident; scale is undefined");
  auto eig = jacobi_eigen<3>(scatter);
  std::sort(eig.values.begin(), eig.values.end());
  if (eig.values[1] <= std::max(1e-24, 1e-12 * eig.values[2]))
    throw DegeneracyError(std::string(which) +
                          " positions are collinear; rotation for scaled "
                          "alignment is underdetermined");
}

}  // namespace detail

/// Least-squares rigid alignment of the estimate onto the reference:
/// minimizes sum ||s R p_i + t - p_i_ref||^2. Scale mode needs >= 3 samples
/// and a non-degenerate point cloud.
inline AlignedPair align(const Trajectory& estimate,
                         const Trajectory& reference,
                         bool with_scale = false) {
  AlignedPair::check_compatible(estimate, reference);
  const std::size_t n = estimate.size();
  if (with_scale && n < 3)
    throw ValidationError("scaled alignment needs at least 3 samples");

  Vec3 cen_est{0.0, 0.0, 0.0}, cen_ref{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    cen_est = add(cen_est, estimate.entries()[i].translation);
    cen_ref = add(cen_ref, reference.entries()[i].translation);
  }
  cen_est = scale(cen_est, 1.0 / static_cast<double>(n));
  cen_ref = scale(cen_ref, 1.0 / static_cast<double>(n));

  std::vector<Vec3> est_c(n), ref_c(n);
  for (std::size_t i = 0; i < n; ++i) {
    est_c[i] = sub(estimate.entries()[i].translation, cen_est);
    ref_c[i] = sub(reference.entries()[i].translation, cen_ref);
  }

  if (with_scale) {
    detail::check_scale_degeneracy(est_c, "estimate");
    detail::check_scale_degeneracy(ref_c, "reference");
  }

  const Quaternion q = detail::horn_rotation(est_c, ref_c);
  const Mat3 R = q.to_mat3();

  double s = 1.0;
  if (with_scale) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      num += squared_norm(ref_c[i]);
      den += squared_norm(est_c[i]);
    }
    s = std::sqrt(num / den);
  }

  const Vec3 t = sub(cen_ref, scale(R * cen_est, s));

  std::vector<TrajectoryEntry> aligned_entries = estimate.entries();
  for (auto& e : aligned_entries) {
    e.rotation = q * e.rotation;
    e.translation = add(scale(R * e.translation, s), t);
  }
  Trajectory aligned(std::move(aligned_entries), estimate.intrinsics());

  return {estimate, reference, std::move(aligned), RigidAlignment{q, t, s}};
}

struct MetricResult {
  std::optional<double> rre_deg;  // absent for single-sample trajectories
  std::optional<double> rte;
  double ate = 0.0;
};

namespace detail {

inline double geodesic_angle_deg(const Mat3& a, const Mat3& b) {
  const Mat3 rel = transpose(a) * b;
  const double trace = rel(0, 0) + rel(1, 1) + rel(2, 2);
  const double c = std::clamp((trace - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

}  // namespace detail

/// ATE is the RMS positional residual of the aligned estimate against the
/// reference. RRE/RTE average over relative motions between samples `stride`
/// apart: RRE_i compares R_i^T R_{i+s} across trajectories (geodesic angle,
/// degrees), RTE_i compares the body-frame relative translations
/// R_i^T (t_{i+s} - t_i).
inline MetricResult compute_metrics(const AlignedPair& pair,
                                    std::size_t stride = 1) {
  if (stride < 1) throw ConfigError("metric stride must be >= 1");
  const Trajectory& est = pair.aligned();
  const Trajectory& ref = pair.reference();
  const std::size_t n = est.size();

  MetricResult out;
  double sq_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    sq_sum += squared_norm(
        sub(est.entries()[i].translation, ref.entries()[i].translation));
  out.ate = std::sqrt(sq_sum / static_cast<double>(n));

  if (n <= stride) return out;  // relative motions undefined

  double rre_sum = 0.0, rte_sum = 0.0;
  const std::size_t pairs = n - stride;
  for (std::size_t i = 0; i < pairs; ++i) {
    const Mat3 re0 = est.pose(i).R, re1 = est.pose(i + stride).R;
    const Mat3 rr0 = ref.pose(i).R, rr1 = ref.pose(i + stride).R;
    rre_sum += detail::geodesic_angle_deg(transpose(re0) * re1,
                                          transpose(rr0) * rr1);

    const Vec3 dte = transpose(re0) * sub(est.entries()[i + stride].translation,
                                          est.entries()[i].translation);
    const Vec3 dtr = transpose(rr0) * sub(ref.entries()[i + stride].translation,
                                          ref.entries()[i].translation);
    rte_sum += norm(sub(dte, dtr));
  }
  out.rre_deg = rre_sum / static_cast<double>(pairs);
  out.rte = rte_sum / static_cast<double>(pairs);
  return out;
}

}  // namespace rerope
