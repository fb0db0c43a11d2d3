#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rerope/errors.hpp"
#include "rerope/rope.hpp"

namespace rerope {

/// Partition of the head dimension into [temporal, height, width] bands, in
/// that channel order.
struct BandLayout {
  std::size_t d_tau = 0;
  std::size_t d_h = 0;
  std::size_t d_w = 0;

  BandLayout(std::size_t d_tau_, std::size_t d_h_, std::size_t d_w_)
      : d_tau(d_tau_), d_h(d_h_), d_w(d_w_) {
    auto check = [](std::size_t d, const char* name) {
      if (d == 0 || d % 2 != 0)
        throw ConfigError(std::string("band ") + name +
                          " must be a positive even width");
    };
    check(d_tau, "d_tau");
    check(d_h, "d_h");
    check(d_w, "d_w");
  }

  std::size_t total() const { return d_tau + d_h + d_w; }
};

struct GridCoord {
  long long tau = 0;
  long long h = 0;
  long long w = 0;

  GridCoord(long long tau_, long long h_, long long w_)
      : tau(tau_), h(h_), w(w_) {
    if (tau < 0 || h < 0 || w < 0)
      throw ValidationError("grid coordinates must be non-negative");
  }
};

enum class BandAxis { temporal, height, width, all };

inline std::size_t band_width(const BandLayout& layout, BandAxis axis) {
  switch (axis) {
    case BandAxis::temporal: return layout.d_tau;
    case BandAxis::height: return layout.d_h;
    case BandAxis::width: return layout.d_w;
    case BandAxis::all: break;
  }
  throw ConfigError("band_width is not defined for axis 'all'");
}

/// Half-open plane interval [plane_begin, plane_end) replaced by identity
/// blocks. Range validity against a layout is checked at application time.
struct BandMask {
  BandAxis axis = BandAxis::temporal;
  std::size_t plane_begin = 0;
  std::size_t plane_end = 0;

  /// Planes [band/4, band/2): the slow half of the frequency ladder.
  static BandMask low_half(BandAxis axis, const BandLayout& layout) {
    const std::size_t planes = half_planes(axis, layout);
    return {axis, planes / 2, planes};
  }

  /// Planes [0, band/4): the fast half.
  static BandMask high_half(BandAxis axis, const BandLayout& layout) {
    const std::size_t planes = half_planes(axis, layout);
    return {axis, 0, planes / 2};
  }

 private:
  static std::size_t half_planes(BandAxis axis, const BandLayout& layout) {
    if (axis == BandAxis::all) {
      if (layout.d_tau != layout.d_h || layout.d_h != layout.d_w)
        throw ConfigError(
            "half-band masks across all axes need equal band widths");
      return layout.d_tau / 2;
    }
    return band_width(layout, axis) / 2;
  }
};

/// Per-axis frequency ladders. The same theta is common to all three axes by
/// default but each is independently configurable.
struct VideoSchedules {
  FrequencySchedule temporal;
  FrequencySchedule height;
  FrequencySchedule width;

  static VideoSchedules standard(const BandLayout& layout, double theta_tau,
                                 double theta_h, double theta_w) {
    return {make_frequency_schedule(theta_tau, layout.d_tau),
            make_frequency_schedule(theta_h, layout.d_h),
            make_frequency_schedule(theta_w, layout.d_w)};
  }

  static VideoSchedules standard(const BandLayout& layout,
                                 double theta = 1e4) {
    return standard(layout, theta, theta, theta);
  }
};

namespace detail {

inline void check_schedules(const BandLayout& layout,
                            const VideoSchedules& schedules) {
  if (schedules.temporal.dim != layout.d_tau ||
      schedules.height.dim != layout.d_h ||
      schedules.width.dim != layout.d_w)
    throw ConfigError("schedule dims do not match the band layout");
}

inline void append_rotary_band(std::vector<Block>& blocks,
                               const FrequencySchedule& schedule,
                               double position) {
  for (double omega : schedule.omegas)
    blocks.push_back(Block::rotation(planar_rotation(position * omega)));
}

}  // namespace detail

/// blkdiag(Phi_tau(tau), Phi_h(h), Phi_w(w)) over the layout's band order.
inline BlockDiagOperator video_rope_operator(const BandLayout& layout,
                                             const VideoSchedules& schedules,
                                             const GridCoord& coord) {
  detail::check_schedules(layout, schedules);
  std::vector<Block> blocks;
  blocks.reserve(layout.total() / 2);
  detail::append_rotary_band(blocks, schedules.temporal,
                             static_cast<double>(coord.tau));
  detail::append_rotary_band(blocks, schedules.height,
                             static_cast<double>(coord.h));
  detail::append_rotary_band(blocks, schedules.width,
                             static_cast<double>(coord.w));
  return BlockDiagOperator(std::move(blocks));
}

/// Replaces the masked planes of a per-plane operator with Identity(2).
/// Requires every block to be 2-wide (the video-RoPE block structure), so a
/// second application of the same mask is a no-op.
inline BlockDiagOperator mask_planes(const BlockDiagOperator& op,
                                     const BandLayout& layout,
                                     const BandMask& mask) {
  if (op.dim() != layout.total())
    throw ConfigError("operator dim does not match the band layout");
  for (const Block& b : op.blocks())
    if (b.size() != 2)
      throw ConfigError("band masks apply only to per-plane operators");

  auto band_planes = [&](BandAxis axis) {
    return band_width(layout, axis) / 2;
  };
  auto band_offset = [&](BandAxis axis) -> std::size_t {
    switch (axis) {
      case BandAxis::temporal: return 0;
      case BandAxis::height: return layout.d_tau / 2;
      case BandAxis::width: return layout.d_tau / 2 + layout.d_h / 2;
      case BandAxis::all: break;
    }
    throw ConfigError("no single offset for axis 'all'");
  };

  std::vector<BandAxis> axes;
  if (mask.axis == BandAxis::all)
    axes = {BandAxis::temporal, BandAxis::height, BandAxis::width};
  else
    axes = {mask.axis};

  std::vector<Block> blocks = op.blocks();
  for (BandAxis axis : axes) {
    if (mask.plane_begin > mask.plane_end ||
        mask.plane_end > band_planes(axis))
      throw ConfigError("mask plane interval out of range for band");
    for (std::size_t f = mask.plane_begin; f < mask.plane_end; ++f)
      blocks[band_offset(axis) + f] = Block::identity(2);
  }
  return BlockDiagOperator(std::move(blocks));
}

inline BlockDiagOperator apply_band_mask(const BandLayout& layout,
                                         const VideoSchedules& schedules,
                                         const BandMask& mask,
                                         const GridCoord& coord) {
  return mask_planes(video_rope_operator(layout, schedules, coord), layout,
                     mask);
}

/// Max |full - masked| logit over all temporal pairs (tau_q, tau_k) in
/// [0,T)^2, i.e. over every relative offset in [-(T-1), T-1]. Spatial
/// coordinates held at zero.
inline double masked_logit_deviation(std::size_t T, const BandLayout& layout,
                                     const VideoSchedules& schedules,
                                     const BandMask& mask,
                                     const std::vector<double>& q,
                                     const std::vector<double>& k) {
  if (T == 0) throw ConfigError("masked_logit_deviation needs T >= 1");
  if (q.size() != layout.total() || k.size() != layout.total())
    throw DimensionError("q/k length does not match layout.total");

  std::vector<std::vector<double>> full_q(T), full_k(T), masked_q(T),
      masked_k(T);
  for (std::size_t tau = 0; tau < T; ++tau) {
    const GridCoord c{static_cast<long long>(tau), 0, 0};
    const auto full = video_rope_operator(layout, schedules, c);
    const auto masked = mask_planes(full, layout, mask);
    full_q[tau] = full.apply(q);
    full_k[tau] = full.apply(k);
    masked_q[tau] = masked.apply(q);
    masked_k[tau] = masked.apply(k);
  }

  double max_dev = 0.0;
  for (std::size_t i = 0; i < T; ++i)
    for (std::size_t j = 0; j < T; ++j) {
      const double dev =
          std::abs(dot(full_q[i], full_k[j]) - dot(masked_q[i], masked_k[j]));
      max_dev = std::max(max_dev, dev);
    }
  return max_dev;
}

}  // namespace rerope
