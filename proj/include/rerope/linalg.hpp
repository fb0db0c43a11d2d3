#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "rerope/errors.hpp"

namespace rerope {

using Vec3 = std::array<double, 3>;
using Vec4 = std::array<double, 4>;

inline double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline Vec3 add(const Vec3& a, const Vec3& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

inline Vec3 sub(const Vec3& a, const Vec3& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

inline Vec3 scale(const Vec3& v, double s) { return {v[0] * s, v[1] * s, v[2] * s}; }

inline double squared_norm(const Vec3& v) { return dot(v, v); }

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

// ---------------------------------------------------------------------------
// Fixed-size square matrices (row-major).
// ---------------------------------------------------------------------------

struct Mat3 {
  std::array<std::array<double, 3>, 3> m{};

  double& operator()(int r, int c) { return m[r][c]; }
  double operator()(int r, int c) const { return m[r][c]; }

  static Mat3 identity() {
    Mat3 out;
    for (int i = 0; i < 3; ++i) out(i, i) = 1.0;
    return out;
  }
};

inline Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 out;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      double acc = 0.0;
      for (int k = 0; k < 3; ++k) acc += a(r, k) * b(k, c);
      out(r, c) = acc;
    }
  return out;
}

inline Vec3 operator*(const Mat3& a, const Vec3& v) {
  Vec3 out{};
  for (int r = 0; r < 3; ++r) out[r] = a(r, 0) * v[0] + a(r, 1) * v[1] + a(r, 2) * v[2];
  return out;
}

inline Mat3 transpose(const Mat3& a) {
  Mat3 out;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out(r, c) = a(c, r);
  return out;
}

inline double det(const Mat3& a) {
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
         a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

/// Adjugate inverse; throws SingularMatrixError when |det| <= 1e-12.
inline Mat3 inverse(const Mat3& a) {
  const double d = det(a);
  if (std::abs(d) <= 1e-12) throw SingularMatrixError("3x3 matrix is singular");
  const double inv_d = 1.0 / d;
  Mat3 out;
  out(0, 0) = (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) * inv_d;
  out(0, 1) = (a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2)) * inv_d;
  out(0, 2) = (a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1)) * inv_d;
  out(1, 0) = (a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2)) * inv_d;
  out(1, 1) = (a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0)) * inv_d;
  out(1, 2) = (a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2)) * inv_d;
  out(2, 0) = (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0)) * inv_d;
  out(2, 1) = (a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1)) * inv_d;
  out(2, 2) = (a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0)) * inv_d;
  return out;
}

struct Mat4 {
  std::array<std::array<double, 4>, 4> m{};

  double& operator()(int r, int c) { return m[r][c]; }
  double operator()(int r, int c) const { return m[r][c]; }

  static Mat4 identity() {
    Mat4 out;
    for (int i = 0; i < 4; ++i) out(i, i) = 1.0;
    return out;
  }
};

inline Mat4 operator*(const Mat4& a, const Mat4& b) {
  Mat4 out;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += a(r, k) * b(k, c);
      out(r, c) = acc;
    }
  return out;
}

inline Vec4 operator*(const Mat4& a, const Vec4& v) {
  Vec4 out{};
  for (int r = 0; r < 4; ++r)
    out[r] = a(r, 0) * v[0] + a(r, 1) * v[1] + a(r, 2) * v[2] + a(r, 3) * v[3];
  return out;
}

inline Mat4 transpose(const Mat4& a) {
  Mat4 out;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) out(r, c) = a(c, r);
  return out;
}

/// Cofactor expansion along the first row.
inline double det(const Mat4& a) {
  double out = 0.0;
  for (int c = 0; c < 4; ++c) {
    Mat3 minor;
    for (int r = 1; r < 4; ++r) {
      int mc = 0;
      for (int k = 0; k < 4; ++k) {
        if (k == c) continue;
        minor(r - 1, mc++) = a(r, k);
      }
    }
    const double term = a(0, c) * det(minor);
    out += (c % 2 == 0) ? term : -term;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Quaternions (Hamilton convention, components w, x, y, z).
// ---------------------------------------------------------------------------

struct Quaternion {
  double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

  Quaternion normalized() const {
    const double n = norm();
    if (n <= 0.0) throw ValidationError("cannot normalize zero quaternion");
    return {w / n, x / n, y / n, z / n};
  }

  /// Rotation matrix of the normalized quaternion.
  Mat3 to_mat3() const {
    const Quaternion q = normalized();
    Mat3 r;
    r(0, 0) = 1.0 - 2.0 * (q.y * q.y + q.z * q.z);
    r(0, 1) = 2.0 * (q.x * q.y - q.w * q.z);
    r(0, 2) = 2.0 * (q.x * q.z + q.w * q.y);
    r(1, 0) = 2.0 * (q.x * q.y + q.w * q.z);
    r(1, 1) = 1.0 - 2.0 * (q.x * q.x + q.z * q.z);
    r(1, 2) = 2.0 * (q.y * q.z - q.w * q.x);
    r(2, 0) = 2.0 * (q.x * q.z - q.w * q.y);
    r(2, 1) = 2.0 * (q.y * q.z + q.w * q.x);
    r(2, 2) = 1.0 - 2.0 * (q.x * q.x + q.y * q.y);
    return r;
  }

  /// Shepperd extraction; result is canonicalized to w >= 0.
  static Quaternion from_mat3(const Mat3& r) {
    Quaternion q;
    const double trace = r(0, 0) + r(1, 1) + r(2, 2);
    if (trace > 0.0) {
      double s = std::sqrt(trace + 1.0) * 2.0;
      q.w = 0.25 * s;
      q.x = (r(2, 1) - r(1, 2)) / s;
      q.y = (r(0, 2) - r(2, 0)) / s;
      q.z = (r(1, 0) - r(0, 1)) / s;
    } else if (r(0, 0) > r(1, 1) && r(0, 0) > r(2, 2)) {
      double s = std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2)) * 2.0;
      q.w = (r(2, 1) - r(1, 2)) / s;
      q.x = 0.25 * s;
      q.y = (r(0, 1) + r(1, 0)) / s;
      q.z = (r(0, 2) + r(2, 0)) / s;
    } else if (r(1, 1) > r(2, 2)) {
      double s = std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2)) * 2.0;
      q.w = (r(0, 2) - r(2, 0)) / s;
      q.x = (r(0, 1) + r(1, 0)) / s;
      q.y = 0.25 * s;
      q.z = (r(1, 2) + r(2, 1)) / s;
    } else {
      double s = std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1)) * 2.0;
      q.w = (r(1, 0) - r(0, 1)) / s;
      q.x = (r(0, 2) + r(2, 0)) / s;
      q.y = (r(1, 2) + r(2, 1)) / s;
      q.z = 0.25 * s;
    }
    if (q.w < 0.0) {
      q.w = -q.w;
      q.x = -q.x;
      q.y = -q.y;
      q.z = -q.z;
    }
    return q;
  }
};

inline Quaternion operator*(const Quaternion& a, const Quaternion& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

inline double quat_dot(const Quaternion& a, const Quaternion& b) {
  return a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
}

// ---------------------------------------------------------------------------
// Dynamic dense matrix (row-major), used for heatmaps, logit tables and
// dense realizations of block-diagonal operators.
// ---------------------------------------------------------------------------

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw DimensionError("matrix product dimension mismatch");
  Matrix out(a.rows(), b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double arz = a(r, k);
      if (arz == 0.0) continue;
      for (std::size_t c = 0; c < b.cols(); ++c) out(r, c) += arz * b(k, c);
    }
  return out;
}

inline Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out(c, r) = a(r, c);
  return out;
}

// ---------------------------------------------------------------------------
// Cyclic Jacobi eigensolver for small symmetric matrices.
// ---------------------------------------------------------------------------

template <std::size_t N>
using SmallSquare = std::array<std::array<double, N>, N>;

template <std::size_t N>
struct SymmetricEigen {
  std::array<double, N> values{};  // unordered
  SmallSquare<N> vectors{};        // vectors[r][c]: component r of eigenvector c
};

template <std::size_t N>
SymmetricEigen<N> jacobi_eigen(SmallSquare<N> a, int max_sweeps = 64) {
  SmallSquare<N> v{};
  for (std::size_t i = 0; i < N; ++i) v[i][i] = 1.0;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < N; ++p)
      for (std::size_t q = p + 1; q < N; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) break;

    for (std::size_t p = 0; p < N; ++p) {
      for (std::size_t q = p + 1; q < N; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = 0.5 * std::atan2(2.0 * a[p][q], a[p][p] - a[q][q]);
        const double c = std::cos(theta);
        const double s = std::sin(theta);

        const double app = a[p][p], aqq = a[q][q], apq = a[p][q];
        a[p][p] = c * c * app + 2.0 * s * c * apq + s * s * aqq;
        a[q][q] = s * s * app - 2.0 * s * c * apq + c * c * aqq;
        a[p][q] = a[q][p] = 0.0;
        for (std::size_t r = 0; r < N; ++r) {
          if (r == p || r == q) continue;
          const double arp = a[r][p], arq = a[r][q];
          a[r][p] = a[p][r] = c * arp + s * arq;
          a[r][q] = a[q][r] = -s * arp + c * arq;
        }
        for (std::size_t r = 0; r < N; ++r) {
          const double vrp = v[r][p], vrq = v[r][q];
          v[r][p] = c * vrp + s * vrq;
          v[r][q] = -s * vrp + c * vrq;
        }
      }
    }
  }

  SymmetricEigen<N> out;
  for (std::size_t i = 0; i < N; ++i) out.values[i] = a[i][i];
  out.vectors = v;
  return out;
}

/// Largest singular value, via the spectrum of AᵀA.
inline double spectral_norm(const Mat4& a) {
  SmallSquare<4> ata{};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += a(k, r) * a(k, c);
      ata[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = acc;
    }
  const auto eig = jacobi_eigen<4>(ata);
  double lambda_max = 0.0;
  for (double lambda : eig.values) lambda_max = std::max(lambda_max, lambda);
  return std::sqrt(lambda_max);
}

}  // namespace rerope
