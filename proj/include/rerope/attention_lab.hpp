#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rerope/camera.hpp"
#include "rerope/errors.hpp"
#include "rerope/random.hpp"
#include "rerope/rerope.hpp"
#include "rerope/rope.hpp"
#include "rerope/video_rope.hpp"

namespace rerope {

enum class OperatorFamily { rope3d, rerope, full_temporal, double_rope, masked_rope };

inline const char* family_name(OperatorFamily family) {
  switch (family) {
    case OperatorFamily::rope3d: return "rope3d";
    case OperatorFamily::rerope: return "rerope";
    case OperatorFamily::full_temporal: return "full_temporal";
    case OperatorFamily::double_rope: return "double_rope";
    case OperatorFamily::masked_rope: return "masked_rope";
  }
  return "unknown";
}

/// Latent grid size used for coordinate sampling in the verifiers.
struct GridExtents {
  long long T = 21;
  long long H = 30;
  long long W = 52;
};

/// Shared configuration for logit experiments. The ReRoPE layout doubles as
/// the plain band layout (temporal width = high + low) so every family sees
/// the same head dimension.
struct LabConfig {
  ReRoPELayout layout = ReRoPELayout::standard(96);
  double theta_tau = 1e4;
  double theta_h = 1e4;
  double theta_w = 1e4;
  RelativeForm form = RelativeForm::c_from_t;
  std::optional<BandMask> mask;  // masked_rope; defaults to the temporal low half
  GridExtents extents;

  BandLayout band_layout() const { return layout.band_layout(); }
  std::size_t head_dim() const { return layout.total(); }

  VideoSchedules schedules() const {
    return VideoSchedules::standard(band_layout(), theta_tau, theta_h,
                                    theta_w);
  }

  BandMask effective_mask() const {
    if (mask) return *mask;
    return BandMask::low_half(BandAxis::temporal, band_layout());
  }
};

struct Token {
  GridCoord coord;
  std::size_t camera_index = 0;
  std::vector<double> q;
  std::vector<double> k;
};

class TokenSet {
 public:
  TokenSet(std::vector<Token> tokens, std::size_t head_dim,
           std::vector<LiftedProjection> cameras)
      : tokens_(std::move(tokens)),
        head_dim_(head_dim),
        cameras_(std::move(cameras)) {
    if (tokens_.empty()) throw ValidationError("token set must not be empty");
    for (const Token& t : tokens_) {
      if (t.q.size() != head_dim_ || t.k.size() != head_dim_)
        throw DimensionError("token q/k length does not match head_dim");
      if (t.camera_index >= cameras_.size())
        throw ValidationError("token camera_index out of bounds");
    }
  }

  const std::vector<Token>& tokens() const { return tokens_; }
  std::size_t head_dim() const { return head_dim_; }
  const std::vector<LiftedProjection>& cameras() const { return cameras_; }

 private:
  std::vector<Token> tokens_;
  std::size_t head_dim_;
  std::vector<LiftedProjection> cameras_;
};

struct InvarianceReport {
  std::string name;
  std::size_t trials = 0;
  double max_abs_deviation = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

inline InvarianceReport make_report(std::string name, std::size_t trials,
                                    double max_dev, double tol) {
  return {std::move(name), trials, max_dev, tol, max_dev <= tol};
}

inline bool family_uses_cameras(OperatorFamily family) {
  return family == OperatorFamily::rerope ||
         family == OperatorFamily::full_temporal ||
         family == OperatorFamily::double_rope;
}

/// Dispatch to the family's operator constructor. Rotary-only families
/// ignore the camera.
inline BlockDiagOperator family_operator(OperatorFamily family,
                                         const LabConfig& config,
                                         const GridCoord& coord,
                                         const LiftedProjection& camera,
                                         Side side) {
  switch (family) {
    case OperatorFamily::rope3d:
      return video_rope_operator(config.band_layout(), config.schedules(),
                                 coord);
    case OperatorFamily::masked_rope:
      return apply_band_mask(config.band_layout(), config.schedules(),
                             config.effective_mask(), coord);
    case OperatorFamily::rerope:
      return rerope_operator(config.layout, config.schedules(), coord, camera,
                             side, config.form);
    case OperatorFamily::full_temporal:
      return full_temporal_replacement_operator(config.layout,
                                                config.schedules(), coord,
                                                camera, side, config.form);
    case OperatorFamily::double_rope:
      return double_rope_operator(config.layout, config.schedules(), coord,
                                  camera, side, config.form);
  }
  throw ConfigError("unknown operator family");
}

/// entry[i][j] = <op_q(token_i) q_i, op_k(token_j) k_j>. Encoded vectors are
/// computed once per token, so the table costs 2N operator applications plus
/// N^2 dot products.
inline Matrix pairwise_logits(const TokenSet& tokens, OperatorFamily family,
                              const LabConfig& config) {
  if (tokens.head_dim() != config.head_dim())
    throw ConfigError("token head_dim does not match the lab config");
  const std::size_t n = tokens.tokens().size();
  std::vector<std::vector<double>> eq(n), ek(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Token& t = tokens.tokens()[i];
    const LiftedProjection& cam = tokens.cameras()[t.camera_index];
    eq[i] = family_operator(family, config, t.coord, cam, Side::query)
                .apply(t.q);
    ek[i] = family_operator(family, config, t.coord, cam, Side::key)
                .apply(t.k);
  }
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out(i, j) = dot(eq[i], ek[j]);
  return out;
}

namespace detail {

inline long long sample_index(Rng& rng, long long n) {
  if (n <= 1) return 0;
  const long long i = static_cast<long long>(rng.uniform() * static_cast<double>(n));
  return std::min(i, n - 1);
}

inline std::vector<double> sample_features(Rng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

/// Negative control for shift invariance: re-angle temporal plane 0 to
/// tau*omega_0 + 0.01*tau^2, a nonlinear (absolute-position) injection.
inline BlockDiagOperator inject_absolute_position(
    const BlockDiagOperator& op, const LabConfig& config, long long tau) {
  std::vector<Block> blocks = op.blocks();
  const double t = static_cast<double>(tau);
  const double angle =
      t * config.schedules().temporal.omegas[0] + 0.01 * t * t;
  blocks[0] = Block::rotation(planar_rotation(angle));
  return BlockDiagOperator(std::move(blocks));
}

}  // namespace detail

/// Samples random q, k and coordinate pairs, then compares logits before and
/// after a common random grid shift. Holds for the rotary families by the
/// relative-offset property; the negative control injects absolute position
/// and must fail.
inline InvarianceReport verify_shift_invariance(OperatorFamily family,
                                                const LabConfig& config,
                                                std::size_t trials,
                                                std::uint64_t seed,
                                                bool negative_control = false) {
  if (family != OperatorFamily::rope3d && family != OperatorFamily::masked_rope)
    throw ConfigError("shift invariance applies to rotary families only");
  Rng rng(seed);
  const LiftedProjection no_camera = LiftedProjection::identity();
  const auto extents = config.extents;

  auto operator_at = [&](const GridCoord& c, Side side) {
    BlockDiagOperator op = family_operator(family, config, c, no_camera, side);
    if (negative_control)
      op = detail::inject_absolute_position(op, config, c.tau);
    return op;
  };

  double max_dev = 0.0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    auto half = [](long long e) { return std::max<long long>(1, e / 2); };
    const GridCoord a{detail::sample_index(rng, half(extents.T)),
                      detail::sample_index(rng, half(extents.H)),
                      detail::sample_index(rng, half(extents.W))};
    const GridCoord b{detail::sample_index(rng, half(extents.T)),
                      detail::sample_index(rng, half(extents.H)),
                      detail::sample_index(rng, half(extents.W))};
    const GridCoord d{detail::sample_index(rng, extents.T - half(extents.T) + 1),
                      detail::sample_index(rng, extents.H - half(extents.H) + 1),
                      detail::sample_index(rng, extents.W - half(extents.W) + 1)};
    const auto q = detail::sample_features(rng, config.head_dim());
    const auto k = detail::sample_features(rng, config.head_dim());

    const double before = attention_logit(q, k, operator_at(a, Side::query),
                                          operator_at(b, Side::key));
    const GridCoord a_shift{a.tau + d.tau, a.h + d.h, a.w + d.w};
    const GridCoord b_shift{b.tau + d.tau, b.h + d.h, b.w + d.w};
    const double after =
        attention_logit(q, k, operator_at(a_shift, Side::query),
                        operator_at(b_shift, Side::key));
    max_dev = std::max(max_dev, std::abs(before - after));
  }

  std::string name = std::string("shift-invariance/") + family_name(family);
  if (negative_control) name += "/negative-control";
  return make_report(std::move(name), trials, max_dev, 1e-10);
}

/// Random camera rigs: uniform rotations, translations in [-1,1]^3 scaled by
/// the rig's max norm, lifted with K = I.
inline std::vector<LiftedProjection> random_camera_set(Rng& rng,
                                                       std::size_t count) {
  std::vector<Mat3> rotations;
  std::vector<Vec3> translations;
  double max_norm = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    rotations.push_back(rng.unit_quaternion().to_mat3());
    translations.push_back(rng.vec3(-1.0, 1.0));
    max_norm = std::max(max_norm, norm(translations.back()));
  }
  std::vector<LiftedProjection> cameras;
  cameras.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Vec3 t = max_norm > 0.0 ? scale(translations[i], 1.0 / max_norm)
                                  : translations[i];
    cameras.push_back(
        lift_projection(Intrinsics::identity(), Pose{rotations[i], t}));
  }
  return cameras;
}

/// Right-composes every camera with one random rigid transform per trial and
/// checks that pairwise logits are unchanged. The negative control transforms
/// only the even-indexed cameras, which breaks the pairing.
inline InvarianceReport verify_world_transform_invariance(
    OperatorFamily family, const LabConfig& config, std::size_t trials,
    std::uint64_t seed, bool negative_control = false) {
  if (!family_uses_cameras(family))
    throw ConfigError("world-transform invariance needs a camera family");
  Rng rng(seed);
  const std::size_t num_cameras = 4;
  const std::size_t num_tokens = 6;

  double max_dev = 0.0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const auto cameras = random_camera_set(rng, num_cameras);
    std::vector<Token> toks;
    for (std::size_t i = 0; i < num_tokens; ++i)
      toks.push_back(Token{
          GridCoord{detail::sample_index(rng, config.extents.T),
                    detail::sample_index(rng, config.extents.H),
                    detail::sample_index(rng, config.extents.W)},
          i % num_cameras, detail::sample_features(rng, config.head_dim()),
          detail::sample_features(rng, config.head_dim())});

    const Mat4 g = lift_projection(Intrinsics::identity(),
                                   Pose{rng.unit_quaternion().to_mat3(),
                                        rng.vec3(-1.0, 1.0)})
                       .matrix();
    // G enters on the side the relative form contracts: P_c P_t^-1 absorbs a
    // right factor, the mirrored P_c^-1 P_t a left one.
    const bool right = config.form == RelativeForm::c_from_t;
    std::vector<LiftedProjection> moved;
    for (std::size_t i = 0; i < cameras.size(); ++i) {
      const bool transform = !negative_control || i % 2 == 0;
      moved.push_back(transform
                          ? LiftedProjection(right ? cameras[i].matrix() * g
                                                   : g * cameras[i].matrix())
                          : cameras[i]);
    }

    const Matrix before = pairwise_logits(
        TokenSet(toks, config.head_dim(), cameras), family, config);
    const Matrix after = pairwise_logits(
        TokenSet(toks, config.head_dim(), moved), family, config);
    for (std::size_t i = 0; i < before.rows(); ++i)
      for (std::size_t j = 0; j < before.cols(); ++j)
        max_dev = std::max(max_dev, std::abs(before(i, j) - after(i, j)));
  }

  std::string name =
      std::string("world-transform-invariance/") + family_name(family);
  if (negative_control) name += "/negative-control";
  return make_report(std::move(name), trials, max_dev, 1e-8);
}

/// ReRoPE with identity cameras must coincide with the low-frequency-masked
/// video RoPE operator, element-for-element in the dense realization.
inline InvarianceReport verify_reduction_identity(const LabConfig& config,
                                                  std::size_t trials,
                                                  std::uint64_t seed) {
  Rng rng(seed);
  const LiftedProjection identity = LiftedProjection::identity();
  const BandMask mask{BandAxis::temporal, config.layout.d_tau_high / 2,
                      config.layout.temporal_width() / 2};

  double max_dev = 0.0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const GridCoord c{detail::sample_index(rng, config.extents.T),
                      detail::sample_index(rng, config.extents.H),
                      detail::sample_index(rng, config.extents.W)};
    for (Side side : {Side::query, Side::key}) {
      const Matrix lhs = rerope_operator(config.layout, config.schedules(), c,
                                         identity, side, config.form)
                             .dense();
      const Matrix rhs =
          apply_band_mask(config.band_layout(), config.schedules(), mask, c)
              .dense();
      for (std::size_t r = 0; r < lhs.rows(); ++r)
        for (std::size_t cc = 0; cc < lhs.cols(); ++cc)
          max_dev = std::max(max_dev, std::abs(lhs(r, cc) - rhs(r, cc)));
    }
  }
  return make_report("reduction-identity/rerope-vs-masked", trials, max_dev,
                     1e-15);
}

/// Two structural facts about the ablation operators: the Double-RoPE
/// temporal band factors into camera * rotary as a dense product, and Full
/// Temporal Replacement with identity cameras leaves logits independent of
/// the temporal offset.
inline InvarianceReport verify_ablation_structure(const LabConfig& config,
                                                  std::size_t trials,
                                                  std::uint64_t seed) {
  Rng rng(seed);
  double max_dev = 0.0;

  const std::size_t width = config.layout.temporal_width();
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const auto cameras = random_camera_set(rng, 1);
    const GridCoord c{detail::sample_index(rng, config.extents.T),
                      detail::sample_index(rng, config.extents.H),
                      detail::sample_index(rng, config.extents.W)};
    for (Side side : {Side::query, Side::key}) {
      const Matrix dense =
          double_rope_operator(config.layout, config.schedules(), c,
                               cameras[0], side, config.form)
              .dense();

      // Factor oracle: dense(camera repeat) * dense(temporal rotary).
      const Mat4 cam = side_matrix(cameras[0], side, config.form);
      Matrix camera_factor(width, width);
      for (std::size_t blocki = 0; blocki < width / 4; ++blocki)
        for (std::size_t r = 0; r < 4; ++r)
          for (std::size_t cc = 0; cc < 4; ++cc)
            camera_factor(4 * blocki + r, 4 * blocki + cc) =
                cam(static_cast<int>(r), static_cast<int>(cc));
      Matrix rotary_factor(width, width);
      for (std::size_t f = 0; f < width / 2; ++f) {
        const Rotation2 r = planar_rotation(
            static_cast<double>(c.tau) * config.schedules().temporal.omegas[f]);
        rotary_factor(2 * f, 2 * f) = r.c;
        rotary_factor(2 * f, 2 * f + 1) = -r.s;
        rotary_factor(2 * f + 1, 2 * f) = r.s;
        rotary_factor(2 * f + 1, 2 * f + 1) = r.c;
      }
      const Matrix product = camera_factor * rotary_factor;
      for (std::size_t r = 0; r < width; ++r)
        for (std::size_t cc = 0; cc < width; ++cc)
          max_dev = std::max(max_dev, std::abs(dense(r, cc) - product(r, cc)));
    }
  }

  // Delta-tau independence of Full Temporal Replacement at identity cameras.
  const LiftedProjection identity = LiftedProjection::identity();
  const std::vector<double> q = detail::sample_features(rng, config.head_dim());
  const std::vector<double> k = detail::sample_features(rng, config.head_dim());
  const double base = attention_logit(
      q, k,
      full_temporal_replacement_operator(config.layout, config.schedules(),
                                         GridCoord{0, 2, 3}, identity,
                                         Side::query, config.form),
      full_temporal_replacement_operator(config.layout, config.schedules(),
                                         GridCoord{0, 2, 3}, identity,
                                         Side::key, config.form));
  for (long long tau = 1; tau < config.extents.T; ++tau) {
    const double shifted = attention_logit(
        q, k,
        full_temporal_replacement_operator(config.layout, config.schedules(),
                                           GridCoord{tau, 2, 3}, identity,
                                           Side::query, config.form),
        full_temporal_replacement_operator(config.layout, config.schedules(),
                                           GridCoord{0, 2, 3}, identity,
                                           Side::key, config.form));
    max_dev = std::max(max_dev, std::abs(base - shifted));
  }

  return make_report("ablation-structure", trials, max_dev, 1e-12);
}

// ---------------------------------------------------------------------------
// Frequency-band redundancy.
// ---------------------------------------------------------------------------

struct PlaneRedundancy {
  std::size_t plane = 0;
  double omega = 0.0;              // per-step phase
  double accumulated_phase = 0.0;  // (T-1) * omega
  double logit_deviation = 0.0;    // 2 - 2cos(accumulated_phase)
};

/// Worst-case phase and logit drift per plane over a window of T positions.
/// Rows are ordered by plane index; accumulated phase decreases with f.
inline std::vector<PlaneRedundancy> band_redundancy_report(
    std::size_t T, const FrequencySchedule& schedule) {
  if (T < 2) throw ConfigError("redundancy report needs T >= 2");
  std::vector<PlaneRedundancy> rows;
  rows.reserve(schedule.planes());
  for (std::size_t f = 0; f < schedule.planes(); ++f) {
    const double omega = schedule.omegas[f];
    const double acc = static_cast<double>(T - 1) * omega;
    rows.push_back({f, omega, acc, 2.0 - 2.0 * std::cos(acc)});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Logit sensitivity to camera entries.
// ---------------------------------------------------------------------------

struct SensitivityResult {
  double analytic = 0.0;
  double finite_difference = 0.0;
};

/// Directional derivative of a ReRoPE logit with respect to the 12 free
/// entries of the lifted matrix (the top 3x4 block, row-major), evaluated on
/// the side where the camera enters linearly: the query side for c_from_t,
/// the key side for t_from_c. The other side carries an identity camera.
/// The logit is linear in those entries, so the analytic value follows from
/// bilinearity; the central difference must agree to roundoff.
inline SensitivityResult logit_camera_sensitivity(
    const LabConfig& config, const LiftedProjection& P,
    const std::array<double, 12>& direction, double h) {
  if (h < 1e-12)
    throw PrecisionError("finite-difference step below 1e-12 is untrustworthy");

  Mat4 delta;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c)
      delta(r, c) = direction[static_cast<std::size_t>(4 * r + c)];
  delta(3, 3) = 0.0;

  Rng rng(42);
  const auto q = detail::sample_features(rng, config.head_dim());
  const auto k = detail::sample_features(rng, config.head_dim());
  const GridCoord origin{0, 0, 0};
  const LiftedProjection identity = LiftedProjection::identity();
  const bool camera_on_query = config.form == RelativeForm::c_from_t;

  auto logit_at = [&](double s) {
    Mat4 m = P.matrix();
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 4; ++c) m(r, c) += s * delta(r, c);
    const LiftedProjection cam(m);
    const auto op_q = rerope_operator(config.layout, config.schedules(),
                                      origin, camera_on_query ? cam : identity,
                                      Side::query, config.form);
    const auto op_k = rerope_operator(config.layout, config.schedules(),
                                      origin, camera_on_query ? identity : cam,
                                      Side::key, config.form);
    return attention_logit(q, k, op_q, op_k);
  };

  SensitivityResult out;
  out.finite_difference = (logit_at(h) - logit_at(-h)) / (2.0 * h);

  // d/ds of the camera band contribution, other bands constant in s.
  const auto op_q0 = rerope_operator(config.layout, config.schedules(), origin,
                                     camera_on_query ? P : identity,
                                     Side::query, config.form);
  const auto op_k0 = rerope_operator(config.layout, config.schedules(), origin,
                                     camera_on_query ? identity : P, Side::key,
                                     config.form);
  const auto eq = op_q0.apply(q);
  const auto ek = op_k0.apply(k);
  const std::size_t band_start = config.layout.d_tau_high;
  double analytic = 0.0;
  for (std::size_t copy = 0; copy < config.layout.d_tau_low / 4; ++copy) {
    const std::size_t off = band_start + 4 * copy;
    for (int i = 0; i < 4; ++i) {
      double di = 0.0;
      if (camera_on_query) {
        // query factor (P + s*delta)^T: d/ds <delta^T q_seg, ek_seg>
        for (int r = 0; r < 4; ++r)
          di += delta(r, i) * q[off + static_cast<std::size_t>(r)];
        analytic += di * ek[off + static_cast<std::size_t>(i)];
      } else {
        // key factor (P + s*delta): d/ds <eq_seg, delta k_seg>
        for (int c = 0; c < 4; ++c)
          di += delta(i, c) * k[off + static_cast<std::size_t>(c)];
        analytic += eq[off + static_cast<std::size_t>(i)] * di;
      }
    }
  }
  out.analytic = analytic;
  return out;
}

}  // namespace rerope
