#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "rerope/camera.hpp"
#include "rerope/random.hpp"
#include "support/oracles.hpp"

using namespace rerope;

namespace {

LiftedProjection random_camera(Rng& rng) {
  return lift_projection(Intrinsics::identity(),
                         Pose{rng.unit_quaternion().to_mat3(),
                              rng.vec3(-1, 1)});
}

Trajectory make_traj(const std::vector<Vec3>& translations) {
  std::vector<TrajectoryEntry> entries;
  for (std::size_t i = 0; i < translations.size(); ++i)
    entries.push_back({static_cast<double>(i), Quaternion{}, translations[i]});
  return Trajectory(std::move(entries));
}

double max_mat4_diff(const Mat4& a, const Mat4& b) {
  double worst = 0.0;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      worst = std::max(worst, std::abs(a(r, c) - b(r, c)));
  return worst;
}

}  // namespace

TEST_CASE("intrinsics validation and matrix form", "[camera]") {
  REQUIRE_THROWS_AS(Intrinsics(0.0, 1.0, 0.0, 0.0), ValidationError);
  REQUIRE_THROWS_AS(Intrinsics(1.0, -2.0, 0.0, 0.0), ValidationError);

  const Intrinsics k(2.0, 3.0, 10.0, 20.0, 0.5);
  const Mat3 m = k.matrix();
  REQUIRE(m(0, 0) == 2.0);
  REQUIRE(m(0, 1) == 0.5);
  REQUIRE(m(0, 2) == 10.0);
  REQUIRE(m(1, 1) == 3.0);
  REQUIRE(m(1, 2) == 20.0);
  REQUIRE(m(1, 0) == 0.0);
  REQUIRE(m(2, 2) == 1.0);
}

TEST_CASE("pose construction rejects non-rotations", "[camera]") {
  Mat3 not_orthonormal = Mat3::identity();
  not_orthonormal(0, 0) = 1.5;
  REQUIRE_THROWS_AS(Pose(not_orthonormal, Vec3{0, 0, 0}), ValidationError);

  Mat3 reflection = Mat3::identity();
  reflection(2, 2) = -1.0;  // orthonormal but det = -1
  REQUIRE_THROWS_AS(Pose(reflection, Vec3{0, 0, 0}), ValidationError);

  REQUIRE_NOTHROW(Pose(oracles::rot_z(33.0), Vec3{1, 2, 3}));
}

TEST_CASE("lift_projection assembles [[KR, Kt],[0,1]]", "[camera]") {
  SECTION("identity intrinsics, pure translation") {
    const auto p = lift_projection(Intrinsics::identity(),
                                   Pose{Mat3::identity(), Vec3{1, 2, 3}});
    const Mat4& m = p.matrix();
    const double expected[4][4] = {
        {1, 0, 0, 1}, {0, 1, 0, 2}, {0, 0, 1, 3}, {0, 0, 0, 1}};
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) REQUIRE(m(r, c) == expected[r][c]);
  }

  SECTION("identity everything lifts to the identity") {
    const auto p = lift_projection(Intrinsics::identity(), Pose::identity());
    REQUIRE(max_mat4_diff(p.matrix(), Mat4::identity()) == 0.0);
  }

  SECTION("focal scaling multiplies the first rows") {
    const auto p = lift_projection(Intrinsics(2.0, 2.0, 0.0, 0.0),
                                   Pose{Mat3::identity(), Vec3{1, 0, 0}});
    const Mat4& m = p.matrix();
    REQUIRE(m(0, 0) == 2.0);
    REQUIRE(m(1, 1) == 2.0);
    REQUIRE(m(2, 2) == 1.0);
    REQUIRE(m(0, 3) == 2.0);  // K t = (2, 0, 0)
    REQUIRE(m(1, 3) == 0.0);
    REQUIRE(m(2, 3) == 0.0);
  }

  SECTION("homogeneous translation of the origin") {
    const auto p = lift_projection(Intrinsics::identity(),
                                   Pose{Mat3::identity(), Vec3{1, 2, 3}});
    const Vec4 out = p.matrix() * Vec4{0, 0, 0, 1};
    REQUIRE(out == Vec4{1, 2, 3, 1});
  }
}

TEST_CASE("lifted projection invariants are enforced", "[camera]") {
  Mat4 bad_bottom = Mat4::identity();
  bad_bottom(3, 0) = 1e-14;  // even tiny deviations are rejected
  REQUIRE_THROWS_AS(LiftedProjection(bad_bottom), ValidationError);

  Mat4 singular_linear = Mat4::identity();
  singular_linear(0, 0) = 0.0;
  singular_linear(1, 1) = 0.0;
  REQUIRE_THROWS_AS(LiftedProjection(singular_linear), SingularMatrixError);
}

TEST_CASE("invert_lifted uses the affine closed form", "[camera]") {
  SECTION("identity and pure translation") {
    const auto id = LiftedProjection::identity();
    REQUIRE(max_mat4_diff(invert_lifted(id).matrix(), Mat4::identity()) == 0.0);

    const auto p = lift_projection(Intrinsics::identity(),
                                   Pose{Mat3::identity(), Vec3{1, 2, 3}});
    const auto inv = invert_lifted(p);
    REQUIRE(inv.translation() == Vec3{-1, -2, -3});
    const Mat3 lin = inv.linear();
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        REQUIRE(lin(r, c) == (r == c ? 1.0 : 0.0));
  }

  SECTION("random cameras against Gaussian elimination") {
    Rng rng(5);
    for (int trial = 0; trial < 25; ++trial) {
      const auto p = random_camera(rng);
      const auto inv = invert_lifted(p);
      REQUIRE(max_mat4_diff(inv.matrix(), oracles::gauss_inverse4(p.matrix())) <=
              1e-12);
      REQUIRE(max_mat4_diff(p.matrix() * inv.matrix(), Mat4::identity()) <=
              1e-10);
      REQUIRE(max_mat4_diff(invert_lifted(inv).matrix(), p.matrix()) <= 1e-10);
    }
  }
}

TEST_CASE("relative projection realizes P_c P_t^-1", "[camera]") {
  Rng rng(6);

  SECTION("a camera relative to itself is the identity") {
    const auto p = random_camera(rng);
    REQUIRE(max_mat4_diff(relative_projection(p, p), Mat4::identity()) <=
            1e-12);
  }

  SECTION("translation relative to identity is that translation") {
    const auto p = lift_projection(Intrinsics::identity(),
                                   Pose{Mat3::identity(), Vec3{1, 0, 0}});
    REQUIRE(max_mat4_diff(relative_projection(p, LiftedProjection::identity()),
                          p.matrix()) == 0.0);
  }

  SECTION("right-composing a common rigid transform changes nothing") {
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const auto p_c = random_camera(rng);
      const auto p_t = random_camera(rng);
      const auto g = random_camera(rng).matrix();
      const Mat4 base = relative_projection(p_c, p_t);
      const Mat4 moved = relative_projection(LiftedProjection(p_c.matrix() * g),
                                             LiftedProjection(p_t.matrix() * g));
      worst = std::max(worst, max_mat4_diff(base, moved));
    }
    REQUIRE(worst <= 1e-10);
  }
}

TEST_CASE("trajectory construction and ordering", "[camera]") {
  REQUIRE_THROWS_AS(Trajectory(std::vector<TrajectoryEntry>{}),
                    ValidationError);
  std::vector<TrajectoryEntry> dup = {{0.0, Quaternion{}, {0, 0, 0}},
                                      {0.0, Quaternion{}, {1, 0, 0}}};
  REQUIRE_THROWS_AS(Trajectory(std::move(dup)), OrderingError);
}

TEST_CASE("normalize_translations divides by the max norm", "[camera]") {
  const auto traj =
      make_traj({Vec3{0.5, 0, 0}, Vec3{0, 2.0, 0}, Vec3{0, 0, 1.0}});
  const auto result = normalize_translations(traj);
  REQUIRE_FALSE(result.degenerate);
  REQUIRE(result.scale == 2.0);
  REQUIRE(result.trajectory.entries()[0].translation[0] == 0.25);
  REQUIRE(result.trajectory.entries()[1].translation[1] == 1.0);
  REQUIRE(result.trajectory.entries()[2].translation[2] == 0.5);
  REQUIRE(std::abs(max_translation_norm(result.trajectory) - 1.0) <= 1e-12);

  SECTION("idempotent up to roundoff") {
    const auto again = normalize_translations(result.trajectory);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t c = 0; c < 3; ++c)
        REQUIRE(std::abs(again.trajectory.entries()[i].translation[c] -
                         result.trajectory.entries()[i].translation[c]) <=
                1e-15);
  }

  SECTION("rotations keep their exact bits") {
    Rng rng(9);
    std::vector<TrajectoryEntry> entries;
    for (int i = 0; i < 4; ++i)
      entries.push_back({static_cast<double>(i), rng.unit_quaternion(),
                         rng.vec3(-5, 5)});
    const Trajectory t(entries);
    const auto normalized = normalize_translations(t).trajectory;
    for (std::size_t i = 0; i < 4; ++i) {
      REQUIRE(normalized.entries()[i].rotation.w == entries[i].rotation.w);
      REQUIRE(normalized.entries()[i].rotation.x == entries[i].rotation.x);
      REQUIRE(normalized.entries()[i].rotation.y == entries[i].rotation.y);
      REQUIRE(normalized.entries()[i].rotation.z == entries[i].rotation.z);
    }
  }
}

TEST_CASE("all-zero translations flag as degenerate", "[camera]") {
  const auto traj = make_traj({Vec3{0, 0, 0}, Vec3{0, 0, 0}});
  const auto result = normalize_translations(traj);
  REQUIRE(result.degenerate);
  REQUIRE(result.scale == 1.0);
  REQUIRE(result.trajectory.entries()[0].translation == Vec3{0, 0, 0});
}

TEST_CASE("single-entry trajectory normalizes to unit norm", "[camera]") {
  const auto result = normalize_translations(make_traj({Vec3{0, 3.0, 0}}));
  REQUIRE(std::abs(norm(result.trajectory.entries()[0].translation) - 1.0) <=
          1e-12);
}

TEST_CASE("pre_normalize only rescales past the unit threshold", "[camera]") {
  SECTION("max 0.8 stays untouched") {
    const auto t = pre_normalize(make_traj({Vec3{0.8, 0, 0}}));
    REQUIRE(t.entries()[0].translation[0] == 0.8);
  }
  SECTION("max exactly 1.0 stays untouched (strict inequality)") {
    const auto t = pre_normalize(make_traj({Vec3{1.0, 0, 0}}));
    REQUIRE(t.entries()[0].translation[0] == 1.0);
  }
  SECTION("max 5.0 rescales everything by 1/5") {
    const auto t =
        pre_normalize(make_traj({Vec3{5.0, 0, 0}, Vec3{0, 1.0, 0}}));
    REQUIRE(t.entries()[0].translation[0] == 1.0);
    REQUIRE(t.entries()[1].translation[1] == 0.2);
  }
}

TEST_CASE("joint_normalize computes S = max + epsilon over the union", "[camera]") {
  SECTION("S from the larger trajectory") {
    const auto src = make_traj({Vec3{1.0, 0, 0}});
    const auto tgt = make_traj({Vec3{0.5, 0, 0}});
    const auto result = joint_normalize(src, tgt, 1e-8);
    REQUIRE(result.scale == 1.0 + 1e-8);
    REQUIRE(max_translation_norm(result.source) < 1.0);
    REQUIRE(max_translation_norm(result.target) < 1.0);
  }

  SECTION("src max 0.3, tgt max 0.9") {
    const auto result = joint_normalize(make_traj({Vec3{0.3, 0, 0}}),
                                        make_traj({Vec3{0, 0.9, 0}}), 1e-8);
    REQUIRE(result.scale == 0.9 + 1e-8);
    REQUIRE(result.source.entries()[0].translation[0] ==
            Catch::Approx(0.3 / (0.9 + 1e-8)).epsilon(1e-15));
  }

  SECTION("all-zero trajectories give S = epsilon and stay zero") {
    const auto result = joint_normalize(make_traj({Vec3{0, 0, 0}}),
                                        make_traj({Vec3{0, 0, 0}}), 1e-8);
    REQUIRE(result.scale == 1e-8);
    REQUIRE(result.source.entries()[0].translation == Vec3{0, 0, 0});
  }

  SECTION("inputs must be pre-normalized") {
    REQUIRE_THROWS_AS(joint_normalize(make_traj({Vec3{2.0, 0, 0}}),
                                      make_traj({Vec3{0.5, 0, 0}}), 1e-8),
                      ConfigError);
  }
}

TEST_CASE("normalization preserves relative rotations", "[camera]") {
  Rng rng(10);
  std::vector<TrajectoryEntry> entries;
  for (int i = 0; i < 5; ++i)
    entries.push_back({static_cast<double>(i), rng.unit_quaternion(),
                       rng.vec3(-3, 3)});
  const Trajectory traj(entries);

  auto relative_rotation = [](const Trajectory& t, std::size_t i,
                              std::size_t j) {
    const auto p_i = lift_projection(Intrinsics::identity(), t.pose(i));
    const auto p_j = lift_projection(Intrinsics::identity(), t.pose(j));
    const Mat4 rel = relative_projection(p_i, p_j);
    Mat3 r;
    for (int rr = 0; rr < 3; ++rr)
      for (int cc = 0; cc < 3; ++cc) r(rr, cc) = rel(rr, cc);
    return r;
  };

  const Mat3 before = relative_rotation(traj, 1, 3);
  for (const Trajectory& t :
       {normalize_translations(traj).trajectory, pre_normalize(traj),
        joint_normalize(pre_normalize(traj), pre_normalize(traj)).source}) {
    const Mat3 after = relative_rotation(t, 1, 3);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        REQUIRE(std::abs(before(r, c) - after(r, c)) <= 1e-12);
  }
}

TEST_CASE("relative_to_first moves the origin onto entry 0", "[camera]") {
  Rng rng(12);
  std::vector<TrajectoryEntry> entries;
  for (int i = 0; i < 4; ++i)
    entries.push_back({static_cast<double>(i), rng.unit_quaternion(),
                       rng.vec3(-2, 2)});
  const Trajectory traj(entries);
  const Trajectory rel = relative_to_first(traj);

  const Pose first = rel.pose(0);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      REQUIRE(std::abs(first.R(r, c) - (r == c ? 1.0 : 0.0)) <= 1e-12);
  REQUIRE(norm(first.t) <= 1e-12);

  // Relative geometry between frames is preserved: P_i P_j^-1 is invariant
  // under right-composition with P_0^-1.
  const auto lift = [](const Pose& p) {
    return lift_projection(Intrinsics::identity(), p);
  };
  const Mat4 before = relative_projection(lift(traj.pose(1)), lift(traj.pose(3)));
  const Mat4 after = relative_projection(lift(rel.pose(1)), lift(rel.pose(3)));
  REQUIRE(max_mat4_diff(before, after) <= 1e-10);
}
