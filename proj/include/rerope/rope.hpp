#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "rerope/errors.hpp"
#include "rerope/linalg.hpp"

namespace rerope {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size())
    throw DimensionError("dot: vectors have different lengths");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

// ---------------------------------------------------------------------------
// Frequency schedules.
// ---------------------------------------------------------------------------

/// Geometric frequency ladder: omegas[f] = theta^(-2f/dim), one entry per
/// channel pair. Consecutive frequencies keep the constant ratio
/// theta^(-2/dim).
struct FrequencySchedule {
  double theta = 0.0;
  std::size_t dim = 0;
  std::vector<double> omegas;

  std::size_t planes() const { return dim / 2; }
};

inline FrequencySchedule make_frequency_schedule(double theta, std::size_t dim) {
  if (!(theta > 1.0))
    throw ConfigError("frequency schedule requires theta > 1");
  if (dim < 2 || dim % 2 != 0)
    throw ConfigError("frequency schedule requires an even dim >= 2");
  FrequencySchedule s;
  s.theta = theta;
  s.dim = dim;
  s.omegas.resize(dim / 2);
  for (std::size_t f = 0; f < dim / 2; ++f)
    s.omegas[f] = std::pow(theta, -2.0 * static_cast<double>(f) /
                                      static_cast<double>(dim));
  return s;
}

// ---------------------------------------------------------------------------
// Blocks and block-diagonal operators.
// ---------------------------------------------------------------------------

struct Rotation2 {
  double c = 1.0;
  double s = 0.0;
};

inline Rotation2 planar_rotation(double angle) {
  return {std::cos(angle), std::sin(angle)};
}

/// One diagonal block: a planar rotation, a dense 4x4, or an identity of
/// arbitrary width. Factories validate; the stored block is always usable.
class Block {
 public:
  enum class Kind { rotation, matrix, identity };

  static Block rotation(Rotation2 r) {
    const double unit = r.c * r.c + r.s * r.s;
    if (std::abs(unit - 1.0) > 1e-12)
      throw ValidationError("rotation block is not orthonormal: c^2+s^2 = " +
                            std::to_string(unit));
    Block b;
    b.kind_ = Kind::rotation;
    b.size_ = 2;
    b.rot_ = r;
    return b;
  }

  static Block matrix(const Mat4& m) {
    if (std::abs(det(m)) <= 1e-12)
      throw SingularMatrixError("4x4 block is singular");
    Block b;
    b.kind_ = Kind::matrix;
    b.size_ = 4;
    b.mat_ = m;
    return b;
  }

  static Block identity(std::size_t size) {
    if (size == 0) throw ConfigError("identity block must have positive size");
    Block b;
    b.kind_ = Kind::identity;
    b.size_ = size;
    return b;
  }

  Kind kind() const { return kind_; }
  std::size_t size() const { return size_; }

  const Rotation2& rotation_value() const { return rot_; }
  const Mat4& matrix_value() const { return mat_; }

  /// In-place action on a contiguous segment of length size().
  void apply(const double* in, double* out) const {
    switch (kind_) {
      case Kind::rotation: {
        const double x = in[0], y = in[1];
        out[0] = rot_.c * x - rot_.s * y;
        out[1] = rot_.s * x + rot_.c * y;
        break;
      }
      case Kind::matrix: {
        Vec4 v{in[0], in[1], in[2], in[3]};
        Vec4 r = mat_ * v;
        for (int i = 0; i < 4; ++i) out[i] = r[static_cast<std::size_t>(i)];
        break;
      }
      case Kind::identity:
        for (std::size_t i = 0; i < size_; ++i) out[i] = in[i];
        break;
    }
  }

 private:
  Block() = default;
  Kind kind_ = Kind::identity;
  std::size_t size_ = 0;
  Rotation2 rot_;
  Mat4 mat_;
};

class BlockDiagOperator {
 public:
  explicit BlockDiagOperator(std::vector<Block> blocks)
      : blocks_(std::move(blocks)) {
    for (const Block& b : blocks_) dim_ += b.size();
    if (dim_ == 0) throw ConfigError("operator needs at least one block");
  }

  std::size_t dim() const { return dim_; }
  const std::vector<Block>& blocks() const { return blocks_; }

  std::vector<double> apply(const std::vector<double>& v) const {
    if (v.size() != dim_)
      throw DimensionError("operator of dim " + std::to_string(dim_) +
                           " applied to vector of length " +
                           std::to_string(v.size()));
    std::vector<double> out(dim_);
    std::size_t offset = 0;
    for (const Block& b : blocks_) {
      b.apply(v.data() + offset, out.data() + offset);
      offset += b.size();
    }
    return out;
  }

  /// Dense realization; off-block entries are exact zeros.
  Matrix dense() const {
    Matrix m(dim_, dim_);
    std::size_t offset = 0;
    for (const Block& b : blocks_) {
      switch (b.kind()) {
        case Block::Kind::rotation:
          m(offset, offset) = b.rotation_value().c;
          m(offset, offset + 1) = -b.rotation_value().s;
          m(offset + 1, offset) = b.rotation_value().s;
          m(offset + 1, offset + 1) = b.rotation_value().c;
          break;
        case Block::Kind::matrix:
          for (std::size_t r = 0; r < 4; ++r)
            for (std::size_t c = 0; c < 4; ++c)
              m(offset + r, offset + c) =
                  b.matrix_value()(static_cast<int>(r), static_cast<int>(c));
          break;
        case Block::Kind::identity:
          for (std::size_t i = 0; i < b.size(); ++i)
            m(offset + i, offset + i) = 1.0;
          break;
      }
      offset += b.size();
    }
    return m;
  }

 private:
  std::vector<Block> blocks_;
  std::size_t dim_ = 0;
};

inline std::vector<double> apply_operator(const BlockDiagOperator& op,
                                          const std::vector<double>& v) {
  return op.apply(v);
}

/// <op_q q, op_k k>. Both operators must share the vectors' dimension.
inline double attention_logit(const std::vector<double>& q,
                              const std::vector<double>& k,
                              const BlockDiagOperator& op_q,
                              const BlockDiagOperator& op_k) {
  return dot(op_q.apply(q), op_k.apply(k));
}

// ---------------------------------------------------------------------------
// 1-D RoPE.
// ---------------------------------------------------------------------------

/// Rotation ladder at a scalar position: plane f turns by position*omegas[f].
inline BlockDiagOperator rope_operator(const FrequencySchedule& schedule,
                                       double position) {
  std::vector<Block> blocks;
  blocks.reserve(schedule.planes());
  for (double omega : schedule.omegas)
    blocks.push_back(Block::rotation(planar_rotation(position * omega)));
  return BlockDiagOperator(std::move(blocks));
}

/// Per-plane logit contributions between all-ones query/key at relative
/// offsets 0..T-1, computed through the operator path. Row delta, column
/// plane; each cell equals 2*cos(delta*omega_f) up to roundoff.
inline Matrix toy_heatmap(std::size_t T, const FrequencySchedule& schedule) {
  if (T == 0) throw ConfigError("toy heatmap needs at least one row");
  const std::size_t planes = schedule.planes();
  Matrix out(T, planes);
  const std::vector<double> ones(schedule.dim, 1.0);
  for (std::size_t delta = 0; delta < T; ++delta) {
    const auto encoded =
        rope_operator(schedule, static_cast<double>(delta)).apply(ones);
    for (std::size_t f = 0; f < planes; ++f)
      out(delta, f) = encoded[2 * f] * ones[2 * f] +
                      encoded[2 * f + 1] * ones[2 * f + 1];
  }
  return out;
}

/// Largest block gain. Rotations and identities contribute exactly 1.
inline double operator_norm(const BlockDiagOperator& op) {
  double best = 0.0;
  for (const Block& b : op.blocks()) {
    double n = 1.0;
    if (b.kind() == Block::Kind::matrix) n = spectral_norm(b.matrix_value());
    best = std::max(best, n);
  }
  return best;
}

}  // namespace rerope
