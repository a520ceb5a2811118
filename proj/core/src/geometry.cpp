// SPDX-License-Identifier: Apache-2.0
#include "nfrm/geometry.hpp"

#include <algorithm>
#include <string>

#include "nfrm/error.hpp"

namespace nfrm {

namespace {

constexpr double kPi = std::numbers::pi;

void require_nondegenerate(const Wall& wall)
{
    if (!wall.a.finite() || !wall.b.finite() || wall.a == wall.b)
        throw Error(ErrorCode::invalid_geometry, "degenerate wall: endpoints coincide or are not finite");
}

struct Crossing {
    double t; // along the first segment
    double s; // along the second segment
};

// Intersection of p + t*r with q + s*u; nullopt when (nearly) parallel.
std::optional<Crossing> intersect(const Vec2& p, const Vec2& r, const Vec2& q, const Vec2& u)
{
    const double denom = cross(r, u);
    const double scale = norm(r) * norm(u);
    if (std::abs(denom) <= 1e-14 * scale)
        return std::nullopt;
    const Vec2 qp = q - p;
    return Crossing{cross(qp, u) / denom, cross(qp, r) / denom};
}

double point_segment_distance(const Vec2& p, const Wall& w)
{
    const Vec2 d = w.b - w.a;
    const double t = std::clamp(dot(p - w.a, d) / dot(d, d), 0.0, 1.0);
    return distance(p, w.a + t * d);
}

void enumerate_recursive(const Room& room, int max_order, double loss, ImagePath& current,
                         std::vector<ImagePath>& out)
{
    if (current.order() >= max_order)
        return;
    const auto& walls = room.walls();
    for (int w = 0; w < static_cast<int>(walls.size()); ++w) {
        if (!walls[w].reflective)
            continue;
        if (!current.wall_sequence.empty() && current.wall_sequence.back() == w)
            continue;
        ImagePath next = current;
        next.wall_sequence.push_back(w);
        next.image_point = reflect_point(current.image_point, walls[w]);
        next.map = compose(reflection_linear_part(walls[w]), current.map);
        next.gain = current.gain * loss;
        out.push_back(next);
        enumerate_recursive(room, max_order, loss, next, out);
    }
}

} // namespace

double wrap_angle(double phi)
{
    double r = std::remainder(phi, 2.0 * kPi);
    if (r <= -kPi)
        r += 2.0 * kPi;
    return r;
}

Mat2 rotation(double alpha)
{
    const double c = std::cos(alpha);
    const double s = std::sin(alpha);
    return {c, -s, s, c};
}

Mat2 OrthoMap2::matrix() const
{
    Mat2 q = rotation(alpha);
    if (parity < 0) {
        q.a01 = -q.a01;
        q.a11 = -q.a11;
    }
    return q;
}

OrthoMap2 compose(const OrthoMap2& outer, const OrthoMap2& inner)
{
    // S_- R(a) = R(-a) S_-, so an improper outer map reverses the inner rotation.
    return {wrap_angle(outer.alpha + outer.parity * inner.alpha), outer.parity * inner.parity};
}

Vec2 reflect_point(const Vec2& p, const Wall& wall)
{
    require_nondegenerate(wall);
    const Vec2 d = wall.b - wall.a;
    const Vec2 rel = p - wall.a;
    const Vec2 along = (dot(rel, d) / dot(d, d)) * d;
    return wall.a + 2.0 * along - rel;
}

OrthoMap2 reflection_linear_part(const Wall& wall)
{
    require_nondegenerate(wall);
    // Householder mirror across a line at angle beta is R(2 beta) diag(1, -1).
    return {wrap_angle(2.0 * angle_of(wall.b - wall.a)), -1};
}

Room Room::from_polygon(const std::vector<Vec2>& vertices, const std::vector<bool>& reflective,
                        std::optional<Vec2> interior)
{
    if (vertices.size() < 3)
        throw Error(ErrorCode::invalid_geometry, "room needs at least 3 walls");
    if (reflective.size() != vertices.size())
        throw Error(ErrorCode::invalid_geometry, "reflectivity list must have one entry per wall");
    Room room;
    room.vertices_ = vertices;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        Wall w{vertices[i], vertices[(i + 1) % vertices.size()], reflective[i]};
        require_nondegenerate(w);
        room.walls_.push_back(w);
    }
    if (interior) {
        room.interior_ = *interior;
    } else {
        Vec2 c;
        for (const auto& v : vertices)
            c += v;
        room.interior_ = (1.0 / static_cast<double>(vertices.size())) * c;
    }
    if (!room.contains(room.interior_))
        throw Error(ErrorCode::invalid_geometry, "interior reference is not strictly inside the room");
    return room;
}

Room Room::rectangle(double x0, double y0, double x1, double y1, const std::array<bool, 4>& reflective)
{
    return from_polygon({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}},
                        {reflective[0], reflective[1], reflective[2], reflective[3]});
}

bool Room::contains(const Vec2& p) const
{
    if (!p.finite())
        return false;
    for (const auto& w : walls_)
        if (point_segment_distance(p, w) <= 1e-12)
            return false;
    bool inside = false;
    for (const auto& w : walls_) {
        const Vec2& a = w.a;
        const Vec2& b = w.b;
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x_cross)
                inside = !inside;
        }
    }
    return inside;
}

std::vector<ImagePath> enumerate_images(const Room& room, const Vec2& tx_ref, int max_order,
                                        double reflection_loss)
{
    if (max_order < 0)
        throw Error(ErrorCode::invalid_argument, "max_order must be >= 0");
    if (!room.contains(tx_ref))
        throw Error(ErrorCode::invalid_geometry, "tx reference is not strictly inside the room");
    std::vector<ImagePath> out;
    ImagePath los;
    los.image_point = tx_ref;
    out.push_back(los);
    enumerate_recursive(room, max_order, reflection_loss, los, out);
    std::stable_sort(out.begin(), out.end(),
                     [](const ImagePath& a, const ImagePath& b) { return a.order() < b.order(); });
    return out;
}

Vec2 mirror_through(const Room& room, const std::vector<int>& wall_sequence, Vec2 p)
{
    for (int w : wall_sequence)
        p = reflect_point(p, room.walls().at(static_cast<std::size_t>(w)));
    return p;
}

double PathValidation::length() const
{
    double total = 0.0;
    for (std::size_t i = 1; i < polyline.size(); ++i)
        total += distance(polyline[i - 1], polyline[i]);
    return total;
}

PathValidation validate_path(const Room& room, const std::vector<int>& wall_sequence, const Vec2& tx,
                             const Vec2& rx)
{
    const auto& walls = room.walls();
    const std::size_t n = wall_sequence.size();
    PathValidation result;

    std::vector<Vec2> images{tx};
    for (int w : wall_sequence)
        images.push_back(reflect_point(images.back(), walls.at(static_cast<std::size_t>(w))));

    // Unfold backwards from the receiver: the last leg aims at the last image.
    std::vector<Vec2> specular(n);
    Vec2 target = rx;
    for (std::size_t j = n; j-- > 0;) {
        const Wall& w = walls[static_cast<std::size_t>(wall_sequence[j])];
        const Vec2 ray = images[j + 1] - target;
        const auto hit = intersect(target, ray, w.a, w.b - w.a);
        if (!hit || hit->t <= 1e-12 || hit->t >= 1.0 - 1e-12 || hit->s < 0.0 || hit->s > 1.0)
            return result;
        specular[j] = target + hit->t * ray;
        target = specular[j];
    }

    result.polyline.push_back(tx);
    result.polyline.insert(result.polyline.end(), specular.begin(), specular.end());
    result.polyline.push_back(rx);

    // Each leg must stay clear of every wall other than the ones it touches.
    for (std::size_t leg = 0; leg + 1 < result.polyline.size(); ++leg) {
        const Vec2& p = result.polyline[leg];
        const Vec2 r = result.polyline[leg + 1] - p;
        for (std::size_t wi = 0; wi < walls.size(); ++wi) {
            const bool starts_on = leg > 0 && static_cast<std::size_t>(wall_sequence[leg - 1]) == wi;
            const bool ends_on = leg < n && static_cast<std::size_t>(wall_sequence[leg]) == wi;
            if (starts_on || ends_on)
                continue;
            const auto hit = intersect(p, r, walls[wi].a, walls[wi].b - walls[wi].a);
            if (hit && hit->t > 1e-9 && hit->t < 1.0 - 1e-9 && hit->s >= -1e-12 && hit->s <= 1.0 + 1e-12) {
                result.polyline.clear();
                return result;
            }
        }
    }
    result.feasible = true;
    return result;
}

} // namespace nfrm
