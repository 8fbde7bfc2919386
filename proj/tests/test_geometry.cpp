#include "support.hpp"

#include <registra/error.hpp>
#include <registra/geometry.hpp>

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace registra;

namespace {

constexpr double kTol = 1e-9;

// |a-b| <= 1e-9 * max(1, |a|, |b|) entrywise.
bool near(const Transform& a, const Transform& b) {
    for (int k = 0; k < 16; ++k) {
        const double x = a.matrix()[k], y = b.matrix()[k];
        if (std::abs(x - y) > kTol * std::max({1.0, std::abs(x), std::abs(y)})) return false;
    }
    return true;
}

double angle_at(Point2 o, Point2 a, Point2 b) {
    const double ax = a.x - o.x, ay = a.y - o.y, bx = b.x - o.x, by = b.y - o.y;
    return std::atan2(ax * by - ay * bx, ax * bx + ay * by);
}

}  // namespace

TEST_CASE("from_similarity builds s*R(theta) with translation") {
    const Transform t = from_similarity(3.0, -2.0, 90.0, 2.0);
    CHECK(t(0, 0) == 0.0);
    CHECK(t(0, 1) == -2.0);
    CHECK(t(1, 0) == 2.0);
    CHECK(t(1, 1) == 0.0);
    CHECK(t(0, 3) == 3.0);
    CHECK(t(1, 3) == -2.0);
    CHECK(t(2, 2) == 1.0);
    CHECK(t(3, 3) == 1.0);
    const Point2 p = apply(t, {1.0, 0.0});
    CHECK(p.x == doctest::Approx(3.0));
    CHECK(p.y == doctest::Approx(0.0));
}

TEST_CASE("identity is the default and the neutral element") {
    CHECK(Transform() == identity());
    const Point2 p = apply(identity(), {4.5, -7.25});
    CHECK(p == Point2{4.5, -7.25});
}

TEST_CASE("compose applies the right operand first") {
    const Transform shift = from_similarity(10.0, 0.0, 0.0);
    const Transform rot = from_similarity(0.0, 0.0, 90.0);
    const Point2 p = apply(compose(shift, rot), {1.0, 0.0});   // rotate then shift
    CHECK(p.x == doctest::Approx(10.0));
    CHECK(p.y == doctest::Approx(1.0));
    const Point2 q = apply(compose(rot, shift), {1.0, 0.0});   // shift then rotate
    CHECK(q.x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(q.y == doctest::Approx(11.0));
}

TEST_CASE("invalid construction") {
    CHECK_THROWS_AS((void)from_similarity(0, 0, 0, 0.0), Error);
    CHECK_THROWS_AS((void)from_similarity(0, 0, 0, -1.0), Error);
    CHECK_THROWS_AS((void)from_similarity(0, 0, 0, std::nan("")), Error);
    try {
        (void)from_similarity(0, 0, 0, -2.0);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonPositiveScale);
    }

    std::array<double, 16> shear = identity().matrix();
    shear[1] = 0.5;
    CHECK_FALSE(is_similarity(shear));
    try {
        (void)Transform::from_matrix(shear);
        FAIL("shear accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidTransform);
    }
    std::array<double, 16> reflect = identity().matrix();
    reflect[0] = -1.0;
    CHECK_FALSE(is_similarity(reflect));
    std::array<double, 16> projective = identity().matrix();
    projective[12] = 0.1;
    CHECK_FALSE(is_similarity(projective));

    const Transform ok = Transform::from_matrix(from_similarity(1, 2, 33, 1.5).matrix());
    CHECK(ok == from_similarity(1, 2, 33, 1.5));
}

TEST_CASE("decompose returns normalized parameters") {
    const Similarity s = decompose(from_similarity(5.0, 6.0, 190.0, 0.5));
    CHECK(s.tx == doctest::Approx(5.0));
    CHECK(s.ty == doctest::Approx(6.0));
    CHECK(s.theta_deg == doctest::Approx(-170.0));
    CHECK(s.scale == doctest::Approx(0.5));
    CHECK(normalize_degrees(180.0) == doctest::Approx(-180.0));
    CHECK(normalize_degrees(-180.0) == doctest::Approx(-180.0));
    CHECK(normalize_degrees(540.0) == doctest::Approx(-180.0));
    CHECK(normalize_degrees(-190.0) == doctest::Approx(170.0));
}

TEST_CASE("roi frames") {
    const Roi roi = make_roi({10.0, 20.0}, 30.0, 40.0, 90.0);
    const auto corners = roi_local_corners(roi);
    CHECK(corners[2] == Point2{30.0, 40.0});
    const Point2 p = apply(roi_to_parent(roi), {1.0, 0.0});
    CHECK(p.x == doctest::Approx(10.0));
    CHECK(p.y == doctest::Approx(21.0));
    CHECK(make_roi({0, 0}, 1, 1, 370.0).theta_deg == doctest::Approx(10.0));
    CHECK_THROWS_AS((void)make_roi({0, 0}, 0.0, 1.0), Error);
    CHECK_THROWS_AS((void)make_roi({0, 0}, 1.0, -1.0), Error);
    CHECK_THROWS_AS((void)make_roi({std::nan(""), 0}, 1.0, 1.0), Error);
}

TEST_CASE("transform algebra properties over 1000 random cases") {
    std::mt19937_64 rng(20240611);
    for (int i = 0; i < 1000; ++i) {
        const Transform a = testing::random_similarity(rng);
        const Transform b = testing::random_similarity(rng);
        const Transform c = testing::random_similarity(rng);
        CAPTURE(i);

        // Group laws.
        REQUIRE(near(compose(compose(a, b), c), compose(a, compose(b, c))));
        REQUIRE(near(compose(a, identity()), a));
        REQUIRE(near(compose(identity(), a), a));
        REQUIRE(near(compose(a, invert(a)), identity()));
        REQUIRE(near(compose(invert(a), a), identity()));
        REQUIRE(near(invert(compose(a, b)), compose(invert(b), invert(a))));
        REQUIRE(is_similarity(compose(a, b).matrix()));

        // Decompose round trip.
        const Similarity s = decompose(a);
        REQUIRE(near(from_similarity(s), a));
        REQUIRE(s.theta_deg >= -180.0);
        REQUIRE(s.theta_deg < 180.0);

        // Angles preserved, lengths scaled by s.
        const Point2 p = testing::random_point(rng), q = testing::random_point(rng), r = testing::random_point(rng);
        const Point2 tp = apply(a, p), tq = apply(a, q), tr = apply(a, r);
        const double d = distance(p, q);
        REQUIRE(std::abs(distance(tp, tq) - s.scale * d) <= kTol * std::max(1.0, s.scale * d));
        REQUIRE(std::abs(angle_at(tp, tq, tr) - angle_at(p, q, r)) <= kTol);

        // Point mapping is consistent with composition.
        const Point2 two_step = apply(a, apply(b, p));
        const Point2 one_step = apply(compose(a, b), p);
        REQUIRE(std::abs(two_step.x - one_step.x) <= kTol * std::max(1.0, std::abs(two_step.x)));
        REQUIRE(std::abs(two_step.y - one_step.y) <= kTol * std::max(1.0, std::abs(two_step.y)));
    }
}
