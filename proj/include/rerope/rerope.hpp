#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rerope/camera.hpp"
#include "rerope/errors.hpp"
#include "rerope/rope.hpp"
#include "rerope/video_rope.hpp"

namespace rerope {

enum class Side { query, key };

/// Direction of the relative transform realized on the camera band:
/// c_from_t puts P_c P_t^-1 into the logit, t_from_c the mirrored
/// P_c^-1 P_t.
enum class RelativeForm { c_from_t, t_from_c };

/// Head-dimension partition [temporal-high, temporal-low(camera), height,
/// width]. The camera band replaces the low-frequency tail of the temporal
/// band, so its width must pack 4x4 blocks.
struct ReRoPELayout {
  std::size_t d_tau_high = 0;
  std::size_t d_tau_low = 0;
  std::size_t d_h = 0;
  std::size_t d_w = 0;

  ReRoPELayout(std::size_t d_tau_high_, std::size_t d_tau_low_,
               std::size_t d_h_, std::size_t d_w_)
      : d_tau_high(d_tau_high_),
        d_tau_low(d_tau_low_),
        d_h(d_h_),
        d_w(d_w_) {
    if (d_tau_high == 0 || d_tau_high % 2 != 0)
      throw ConfigError("d_tau_high must be a positive even width");
    if (d_tau_low == 0 || d_tau_low % 4 != 0)
      throw ConfigError("d_tau_low must be positive and divisible by 4");
    if (d_h == 0 || d_h % 2 != 0 || d_w == 0 || d_w % 2 != 0)
      throw ConfigError("spatial bands must be positive even widths");
  }

  /// Default proportions: high = low = total/6, spatial bands total/3 each.
  static ReRoPELayout standard(std::size_t total) {
    if (total == 0 || total % 24 != 0)
      throw ConfigError(
          "standard layout needs total divisible by 24 so that total/6 packs "
          "4x4 camera blocks");
    return {total / 6, total / 6, total / 3, total / 3};
  }

  std::size_t temporal_width() const { return d_tau_high + d_tau_low; }
  std::size_t total() const { return temporal_width() + d_h + d_w; }

  /// The plain video-RoPE view of this partition.
  BandLayout band_layout() const { return {temporal_width(), d_h, d_w}; }
};

/// A lifted camera matrix repeated across a band, d_tau_low/4 copies.
struct CameraBand {
  LiftedProjection lifted;
  std::size_t copies;

  CameraBand(LiftedProjection lifted_, std::size_t copies_)
      : lifted(std::move(lifted_)), copies(copies_) {
    if (copies == 0) throw ConfigError("camera band needs at least one copy");
  }
};

/// blkdiag(P, ..., P) with d_c/4 copies, no side transform applied.
inline BlockDiagOperator camera_projection_block(const LiftedProjection& p,
                                                 std::size_t d_c) {
  if (d_c < 4 || d_c % 4 != 0)
    throw ConfigError("camera band width must be a positive multiple of 4");
  std::vector<Block> blocks(d_c / 4, Block::matrix(p.matrix()));
  return BlockDiagOperator(std::move(blocks));
}

/// The per-side camera factor. With A on the query side and B on the key
/// side the logit contributes A^T B, so
///   c_from_t: A = P^T,    B = P^-1   ->  A^T B = P_c P_t^-1
///   t_from_c: A = P^-T,   B = P      ->  A^T B = P_c^-1 P_t
inline Mat4 side_matrix(const LiftedProjection& p, Side side,
                        RelativeForm form) {
  switch (form) {
    case RelativeForm::c_from_t:
      return side == Side::query ? transpose(p.matrix())
                                 : invert_lifted(p).matrix();
    case RelativeForm::t_from_c:
      return side == Side::query ? transpose(invert_lifted(p).matrix())
                                 : p.matrix();
  }
  throw ConfigError("unknown relative form");
}

namespace detail {

inline void append_camera_band(std::vector<Block>& blocks,
                               const LiftedProjection& p, std::size_t width,
                               Side side, RelativeForm form) {
  const Mat4 m = side_matrix(p, side, form);
  for (std::size_t i = 0; i < width / 4; ++i)
    blocks.push_back(Block::matrix(m));
}

inline void append_spatial_bands(std::vector<Block>& blocks,
                                 const VideoSchedules& schedules,
                                 const GridCoord& coord) {
  append_rotary_band(blocks, schedules.height, static_cast<double>(coord.h));
  append_rotary_band(blocks, schedules.width, static_cast<double>(coord.w));
}

}  // namespace detail

/// The hybrid operator: the fast half of the temporal ladder stays rotary,
/// the slow half carries the camera, spatial bands are untouched.
///
/// `schedules.temporal` spans the FULL temporal width; the high band keeps
/// planes 0..d_tau_high/2-1 of that ladder (the fastest frequencies), rather
/// than a recomputed ladder over the smaller band.
inline BlockDiagOperator rerope_operator(
    const ReRoPELayout& layout, const VideoSchedules& schedules,
    const GridCoord& coord, const LiftedProjection& camera, Side side,
    RelativeForm form = RelativeForm::c_from_t) {
  detail::check_schedules(layout.band_layout(), schedules);
  std::vector<Block> blocks;
  blocks.reserve(layout.d_tau_high / 2 + layout.d_tau_low / 4 +
                 layout.d_h / 2 + layout.d_w / 2);
  for (std::size_t f = 0; f < layout.d_tau_high / 2; ++f)
    blocks.push_back(Block::rotation(planar_rotation(
        static_cast<double>(coord.tau) * schedules.temporal.omegas[f])));
  detail::append_camera_band(blocks, camera, layout.d_tau_low, side, form);
  detail::append_spatial_bands(blocks, schedules, coord);
  return BlockDiagOperator(std::move(blocks));
}

/// Ablation: the camera band covers the whole temporal width; no temporal
/// rotary planes survive, so temporal position is discarded entirely.
inline BlockDiagOperator full_temporal_replacement_operator(
    const ReRoPELayout& layout, const VideoSchedules& schedules,
    const GridCoord& coord, const LiftedProjection& camera, Side side,
    RelativeForm form = RelativeForm::c_from_t) {
  detail::check_schedules(layout.band_layout(), schedules);
  const std::size_t width = layout.temporal_width();
  if (width % 4 != 0)
    throw ConfigError(
        "full temporal replacement needs a temporal width divisible by 4");
  std::vector<Block> blocks;
  blocks.reserve(width / 4 + layout.d_h / 2 + layout.d_w / 2);
  detail::append_camera_band(blocks, camera, width, side, form);
  detail::append_spatial_bands(blocks, schedules, coord);
  return BlockDiagOperator(std::move(blocks));
}

/// Ablation: temporal features are rotated twice, rotary first and camera
/// second, so each 4-wide chunk is the product side_matrix * blkdiag(rot,
/// rot) over consecutive plane pairs.
inline BlockDiagOperator double_rope_operator(
    const ReRoPELayout& layout, const VideoSchedules& schedules,
    const GridCoord& coord, const LiftedProjection& camera, Side side,
    RelativeForm form = RelativeForm::c_from_t) {
  detail::check_schedules(layout.band_layout(), schedules);
  const std::size_t width = layout.temporal_width();
  if (width % 4 != 0)
    throw ConfigError("double RoPE needs a temporal width divisible by 4");
  const Mat4 cam = side_matrix(camera, side, form);
  std::vector<Block> blocks;
  blocks.reserve(width / 4 + layout.d_h / 2 + layout.d_w / 2);
  for (std::size_t chunk = 0; chunk < width / 4; ++chunk) {
    Mat4 rotary;
    for (std::size_t half = 0; half < 2; ++half) {
      const Rotation2 r = planar_rotation(
          static_cast<double>(coord.tau) *
          schedules.temporal.omegas[2 * chunk + half]);
      const int o = static_cast<int>(2 * half);
      rotary(o, o) = r.c;
      rotary(o, o + 1) = -r.s;
      rotary(o + 1, o) = r.s;
      rotary(o + 1, o + 1) = r.c;
    }
    blocks.push_back(Block::matrix(cam * rotary));
  }
  detail::append_spatial_bands(blocks, schedules, coord);
  return BlockDiagOperator(std::move(blocks));
}

}  // namespace rerope
