// SPDX-License-Identifier: Apache-2.0
//
// 2-D geometry for the image-source model: points, wall segments, mirror
// images and the orthogonal maps that carry a TX neighbourhood onto its
// reflected image.
#pragma once

#include <array>
#include <complex>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

namespace nfrm {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
    friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
    friend constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
    friend constexpr Vec2 operator*(double s, const Vec2& a) { return {s * a.x, s * a.y}; }
    friend constexpr Vec2 operator*(const Vec2& a, double s) { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(const Vec2&, const Vec2&) = default;

    bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
inline double distance(const Vec2& a, const Vec2& b) { return norm(a - b); }
inline double angle_of(const Vec2& a) { return std::atan2(a.y, a.x); }

/// Unit vector pointing at angle `phi` (radians, counter-clockwise from +x).
inline Vec2 unit(double phi) { return {std::cos(phi), std::sin(phi)}; }

/// Wraps an angle into (-pi, pi].
double wrap_angle(double phi);

/// Signed smallest difference a - b, wrapped into (-pi, pi].
inline double angle_diff(double a, double b) { return wrap_angle(a - b); }

/// Row-major 2x2 matrix.
struct Mat2 {
    double a00 = 1.0, a01 = 0.0, a10 = 0.0, a11 = 1.0;

    Vec2 operator*(const Vec2& v) const { return {a00 * v.x + a01 * v.y, a10 * v.x + a11 * v.y}; }
    Mat2 operator*(const Mat2& o) const {
        return {a00 * o.a00 + a01 * o.a10, a00 * o.a01 + a01 * o.a11,
                a10 * o.a00 + a11 * o.a10, a10 * o.a01 + a11 * o.a11};
    }
    Mat2 transpose() const { return {a00, a10, a01, a11}; }
    double det() const { return a00 * a11 - a01 * a10; }
};

Mat2 rotation(double alpha);

/// Orthogonal map Q = R(alpha) * S, with S = I for parity +1 and
/// S = diag(1, -1) for parity -1. det(Q) equals the parity.
struct OrthoMap2 {
    double alpha = 0.0;
    int parity = 1;

    Mat2 matrix() const;
    Mat2 inverse_matrix() const { return matrix().transpose(); }
    Vec2 apply(const Vec2& v) const { return matrix() * v; }

    static OrthoMap2 identity() { return {}; }
};

/// Realized matrix of outer * inner. Parities multiply.
OrthoMap2 compose(const OrthoMap2& outer, const OrthoMap2& inner);

struct Wall {
    Vec2 a;
    Vec2 b;
    bool reflective = true;

    double length() const { return distance(a, b); }
};

/// Mirror of `p` across the infinite line through the wall.
Vec2 reflect_point(const Vec2& p, const Wall& wall);

/// Linear part of the mirror across the wall's supporting line (parity -1).
OrthoMap2 reflection_linear_part(const Wall& wall);

class Room {
public:
    /// Closed polygon, wall i joins vertices i and i+1. `interior` defaults
    /// to the vertex centroid.
    static Room from_polygon(const std::vector<Vec2>& vertices, const std::vector<bool>& reflective,
                             std::optional<Vec2> interior = std::nullopt);

    /// Axis-aligned rectangle; walls ordered bottom, right, top, left.
    static Room rectangle(double x0, double y0, double x1, double y1,
                          const std::array<bool, 4>& reflective = {true, true, true, true});

    const std::vector<Wall>& walls() const { return walls_; }
    const std::vector<Vec2>& vertices() const { return vertices_; }
    const Vec2& interior_reference() const { return interior_; }

    bool contains(const Vec2& p) const;

private:
    std::vector<Vec2> vertices_;
    std::vector<Wall> walls_;
    Vec2 interior_;
};

struct ImagePath {
    std::vector<int> wall_sequence; // empty = LOS, otherwise bounce order from the TX
    Vec2 image_point;
    OrthoMap2 map;
    std::complex<double> gain{1.0, 0.0};

    int order() const { return static_cast<int>(wall_sequence.size()); }
    bool is_los() const { return wall_sequence.empty(); }

    /// Image of an arbitrary TX point under this path.
    Vec2 image_of(const Vec2& tx, const Vec2& tx_ref) const { return image_point + map.apply(tx - tx_ref); }
};

/// LOS plus every wall sequence up to `max_order` over reflective walls, with
/// immediate repeats pruned. Gains are `reflection_loss^order` (no spreading).
std::vector<ImagePath> enumerate_images(const Room& room, const Vec2& tx_ref, int max_order,
                                        double reflection_loss = 0.7);

struct PathValidation {
    bool feasible = false;
    std::vector<Vec2> polyline; // tx, specular points..., rx

    double length() const;
};

/// Specular feasibility of a wall sequence between tx and rx.
PathValidation validate_path(const Room& room, const std::vector<int>& wall_sequence,
                             const Vec2& tx, const Vec2& rx);

/// Successive explicit mirrors of `p` through the walls of `wall_sequence`.
Vec2 mirror_through(const Room& room, const std::vector<int>& wall_sequence, Vec2 p);

} // namespace nfrm
