// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "nfrm/error.hpp"
#include "nfrm/geometry.hpp"
#include "oracles.hpp"

using namespace nfrm;
using Catch::Approx;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double kPi = oracle::kPi;

void require_mat(const Mat2& m, double a00, double a01, double a10, double a11, double tol = 1e-12)
{
    CHECK_THAT(m.a00, WithinAbs(a00, tol));
    CHECK_THAT(m.a01, WithinAbs(a01, tol));
    CHECK_THAT(m.a10, WithinAbs(a10, tol));
    CHECK_THAT(m.a11, WithinAbs(a11, tol));
}

bool has_image(const std::vector<ImagePath>& images, Vec2 p)
{
    return std::any_of(images.begin(), images.end(),
                       [&](const ImagePath& i) { return distance(i.image_point, p) < 1e-12; });
}

} // namespace

TEST_CASE("wrap_angle maps into (-pi, pi]")
{
    CHECK(wrap_angle(-kPi) == Approx(kPi));
    CHECK(wrap_angle(kPi) == Approx(kPi));
    CHECK(wrap_angle(3 * kPi / 2) == Approx(-kPi / 2));
    CHECK(wrap_angle(-5 * kPi / 2) == Approx(-kPi / 2));
    CHECK_THAT(wrap_angle(4 * kPi), WithinAbs(0.0, 1e-15));
    CHECK(angle_diff(0.1, 2 * kPi - 0.1) == Approx(0.2));
}

TEST_CASE("reflect_point across axis-aligned lines")
{
    CHECK(reflect_point({5, 3}, Wall{{0, 10}, {20, 10}, true}) == Vec2{5, 17});
    const Vec2 r = reflect_point({2, 1}, Wall{{0, 0}, {0, 10}, true});
    CHECK_THAT(r.x, WithinAbs(-2.0, 1e-15));
    CHECK_THAT(r.y, WithinAbs(1.0, 1e-15));
    CHECK_THROWS_AS(reflect_point({1, 1}, Wall{{1, 1}, {1, 1}, true}), Error);
}

TEST_CASE("reflect_point is an involution and matches the projection oracle")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int i = 0; i < 2000; ++i) {
        const Wall w{{u(rng), u(rng)}, {u(rng), u(rng)}, true};
        if (distance(w.a, w.b) < 1e-3)
            continue;
        const Vec2 p{u(rng), u(rng)};
        const Vec2 twice = reflect_point(reflect_point(p, w), w);
        REQUIRE(distance(twice, p) < 1e-12 * std::max(1.0, norm(p)) * 100);
        const auto o = oracle::mirror(oracle::to_p(p), oracle::to_p(w.a), oracle::to_p(w.b));
        REQUIRE(distance(reflect_point(p, w), {o.x, o.y}) < 1e-9);
    }
}

TEST_CASE("reflection_linear_part realizes the Householder reflection")
{
    SECTION("vertical line x = 0")
    {
        const auto m = reflection_linear_part(Wall{{0, 0}, {0, 5}, true});
        CHECK(m.parity == -1);
        CHECK(m.alpha == Approx(kPi));
        require_mat(m.matrix(), -1, 0, 0, 1);
    }
    SECTION("horizontal line y = 0")
    {
        const auto m = reflection_linear_part(Wall{{0, 0}, {5, 0}, true});
        CHECK(m.parity == -1);
        CHECK_THAT(m.alpha, WithinAbs(0.0, 1e-15));
        require_mat(m.matrix(), 1, 0, 0, -1);
    }
    SECTION("45 degree line through the origin, against reflected basis vectors")
    {
        const Wall w{{0, 0}, {1, 1}, true};
        const auto m = reflection_linear_part(w);
        CHECK(m.parity == -1);
        const auto e1 = oracle::mirror({1, 0}, {0, 0}, {1, 1});
        const auto e2 = oracle::mirror({0, 1}, {0, 0}, {1, 1});
        require_mat(m.matrix(), e1.x, e2.x, e1.y, e2.y);
        require_mat(m.matrix(), 0, 1, 1, 0);
    }
}

TEST_CASE("compose multiplies realized matrices")
{
    const auto mx = reflection_linear_part(Wall{{0, 0}, {0, 1}, true}); // x = 0
    const auto my = reflection_linear_part(Wall{{0, 0}, {1, 0}, true}); // y = 0
    const auto c = compose(my, mx);
    CHECK(c.parity == 1);
    CHECK(std::abs(wrap_angle(c.alpha)) == Approx(kPi));
    require_mat(c.matrix(), -1, 0, 0, -1);

    const OrthoMap2 m{0.7, -1};
    const auto id = compose(OrthoMap2::identity(), m);
    CHECK(id.alpha == Approx(m.alpha));
    CHECK(id.parity == m.parity);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ang(-kPi, kPi);
    for (int i = 0; i < 500; ++i) {
        const OrthoMap2 a{ang(rng), (i % 2) ? 1 : -1};
        const OrthoMap2 b{ang(rng), (i % 3) ? -1 : 1};
        const auto ab = compose(a, b);
        REQUIRE(ab.parity == a.parity * b.parity);
        const Mat2 prod = a.matrix() * b.matrix();
        const Mat2 got = ab.matrix();
        REQUIRE_THAT(got.a00, WithinAbs(prod.a00, 1e-12));
        REQUIRE_THAT(got.a01, WithinAbs(prod.a01, 1e-12));
        REQUIRE_THAT(got.a10, WithinAbs(prod.a10, 1e-12));
        REQUIRE_THAT(got.a11, WithinAbs(prod.a11, 1e-12));
        REQUIRE_THAT(got.det(), WithinAbs(static_cast<double>(ab.parity), 1e-12));
    }
}

TEST_CASE("Room validation and containment")
{
    const Room r = Room::rectangle(0, 0, 20, 10);
    CHECK(r.walls().size() == 4);
    CHECK(r.contains({5, 3}));
    CHECK_FALSE(r.contains({25, 3}));
    CHECK_FALSE(r.contains({0, 3}));
    CHECK_THROWS_AS(Room::from_polygon({{0, 0}, {1, 0}}, {true, true}), Error);
    CHECK_THROWS_AS(Room::from_polygon({{0, 0}, {1, 0}, {1, 0}}, {true, true, true}), Error);
}

TEST_CASE("enumerate_images in a rectangle")
{
    SECTION("all four walls reflective")
    {
        const auto images = enumerate_images(Room::rectangle(0, 0, 20, 10), {5, 3}, 1);
        REQUIRE(images.size() == 5);
        CHECK(images.front().is_los());
        CHECK(images.front().image_point == Vec2{5, 3});
        for (Vec2 p : {Vec2{-5, 3}, Vec2{35, 3}, Vec2{5, -3}, Vec2{5, 17}})
            CHECK(has_image(images, p));
        for (const auto& i : images)
            CHECK(i.map.parity == (i.order() % 2 ? -1 : 1));
    }
    SECTION("three reflective walls")
    {
        const auto images = enumerate_images(Room::rectangle(0, 0, 20, 10, {false, true, true, true}), {5, 3}, 1);
        REQUIRE(images.size() == 4);
        CHECK_FALSE(has_image(images, {5, -3}));
    }
    SECTION("max_order 0 is LOS only")
    {
        const auto images = enumerate_images(Room::rectangle(0, 0, 20, 10), {5, 3}, 0);
        REQUIRE(images.size() == 1);
        CHECK(images[0].map.parity == 1);
        CHECK(images[0].map.alpha == 0.0);
        CHECK(images[0].image_point == Vec2{5, 3});
    }
    SECTION("sequence counts are bounded by w (w - 1)^(k - 1)")
    {
        const auto images = enumerate_images(Room::rectangle(0, 0, 20, 10), {5, 3}, 3);
        std::vector<int> per_order(4, 0);
        for (const auto& i : images) {
            ++per_order[static_cast<std::size_t>(i.order())];
            for (std::size_t j = 1; j < i.wall_sequence.size(); ++j)
                REQUIRE(i.wall_sequence[j] != i.wall_sequence[j - 1]);
        }
        CHECK(per_order[0] == 1);
        CHECK(per_order[1] == 4);
        CHECK(per_order[2] == 12);
        CHECK(per_order[3] == 36);
    }
    SECTION("errors")
    {
        CHECK_THROWS_AS(enumerate_images(Room::rectangle(0, 0, 20, 10), {5, 3}, -1), Error);
        CHECK_THROWS_AS(enumerate_images(Room::rectangle(0, 0, 20, 10), {25, 3}, 1), Error);
    }
}

TEST_CASE("image map agrees with successive mirrors for arbitrary probe points")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const auto walls = oracle::rectangle(0, 0, 20, 10);
    const Vec2 tx_ref{7, 4};
    const auto images = enumerate_images(Room::rectangle(0, 0, 20, 10), tx_ref, 3);
    for (const auto& img : images) {
        for (int i = 0; i < 20; ++i) {
            const Vec2 probe = tx_ref + Vec2{3 * u(rng), 3 * u(rng)};
            const auto o = oracle::mirror_sequence(oracle::to_p(probe), walls, img.wall_sequence);
            REQUIRE(distance(img.image_of(probe, tx_ref), {o.x, o.y}) < 1e-9);
            REQUIRE(distance(mirror_through(Room::rectangle(0, 0, 20, 10), img.wall_sequence, probe), {o.x, o.y}) <
                    1e-9);
        }
    }
}

TEST_CASE("validate_path specular feasibility")
{
    const Room room = Room::rectangle(0, 0, 20, 10);
    SECTION("ceiling bounce")
    {
        const auto v = validate_path(room, {2}, {5, 3}, {15, 4});
        REQUIRE(v.feasible);
        REQUIRE(v.polyline.size() == 3);
        const Vec2 s = v.polyline[1];
        CHECK_THAT(s.y, WithinAbs(10.0, 1e-12));
        CHECK(s.x > 5.0);
        CHECK(s.x < 15.0);
        // equal-angle construction: the specular point lies on the line from the image to the RX
        const double t = (10.0 - 4.0) / (17.0 - 4.0);
        CHECK_THAT(s.x, WithinAbs(15.0 + t * (5.0 - 15.0), 1e-12));
        CHECK_THAT(v.length(), WithinAbs(std::sqrt(269.0), 1e-12));
    }
    SECTION("LOS inside a convex room")
    {
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> ux(0.1, 19.9), uy(0.1, 9.9);
        for (int i = 0; i < 200; ++i)
            REQUIRE(validate_path(room, {}, {ux(rng), uy(rng)}, {ux(rng), uy(rng)}).feasible);
    }
    SECTION("specular point beyond the segment end")
    {
        // An L-shaped room: the short wall x = 4 (y in [0, 2]) cannot serve a
        // bounce between points high above its end.
        const Room l = Room::from_polygon({{0, 0}, {4, 0}, {4, 2}, {10, 2}, {10, 10}, {0, 10}},
                                          {true, true, true, true, true, true}, Vec2{2, 5});
        const auto v = validate_path(l, {1}, {2, 8}, {3, 9});
        CHECK_FALSE(v.feasible);
    }
    SECTION("obstructed leg")
    {
        const Room l = Room::from_polygon({{0, 0}, {4, 0}, {4, 2}, {10, 2}, {10, 10}, {0, 10}},
                                          {true, true, true, true, true, true}, Vec2{2, 5});
        CHECK_FALSE(validate_path(l, {}, {1, 1}, {9, 3}).feasible);
    }
}
