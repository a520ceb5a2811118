// SPDX-License-Identifier: Apache-2.0
//
// Independent reference computations used as test oracles. Nothing here calls
// into the library's geometry or channel code.
#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "nfrm/geometry.hpp"

namespace oracle {

inline constexpr double kC = 299'792'458.0;
inline constexpr double kPi = std::numbers::pi;

struct P {
    double x, y;
};

inline P to_p(const nfrm::Vec2& v) { return {v.x, v.y}; }

/// Mirror of p across the infinite line through a and b.
inline P mirror(P p, P a, P b)
{
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / (dx * dx + dy * dy);
    const double fx = a.x + t * dx, fy = a.y + t * dy;
    return {2.0 * fx - p.x, 2.0 * fy - p.y};
}

inline double dist(P a, P b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Rectangle walls in bottom, right, top, left order.
inline std::vector<std::pair<P, P>> rectangle(double x0, double y0, double x1, double y1)
{
    return {{{x0, y0}, {x1, y0}}, {{x1, y0}, {x1, y1}}, {{x1, y1}, {x0, y1}}, {{x0, y1}, {x0, y0}}};
}

/// Mirror p successively through walls[seq[0]], walls[seq[1]], ...
inline P mirror_sequence(P p, const std::vector<std::pair<P, P>>& walls, const std::vector<int>& seq)
{
    for (int w : seq)
        p = mirror(p, walls[static_cast<std::size_t>(w)].first, walls[static_cast<std::size_t>(w)].second);
    return p;
}

/// Direct DFT of a complex vector: out[q] = sum_i x[i] exp(+j 2 pi i q / n) / sqrt(n).
inline std::vector<std::complex<double>> unitary_idft(const std::vector<std::complex<double>>& x)
{
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t q = 0; q < n; ++q) {
        std::complex<double> acc{};
        for (std::size_t i = 0; i < n; ++i)
            acc += x[i] * std::polar(1.0, 2.0 * kPi * static_cast<double>((i * q) % n) / static_cast<double>(n));
        out[q] = acc / std::sqrt(static_cast<double>(n));
    }
    return out;
}

/// Point minimizing the sum of squared perpendicular distances to the lines
/// (p_j, phi_j), found by dense grid search then local refinement.
inline P grid_triangulate(const std::vector<P>& pos, const std::vector<double>& ang, P lo, P hi)
{
    auto cost = [&](double x, double y) {
        double c = 0.0;
        for (std::size_t j = 0; j < pos.size(); ++j) {
            const double d = -(x - pos[j].x) * std::sin(ang[j]) + (y - pos[j].y) * std::cos(ang[j]);
            c += d * d;
        }
        return c;
    };
    P best{lo.x, lo.y};
    double best_c = cost(lo.x, lo.y);
    for (int pass = 0; pass < 6; ++pass) {
        const int n = 200;
        const double sx = (hi.x - lo.x) / n, sy = (hi.y - lo.y) / n;
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n; ++j) {
                const double x = lo.x + i * sx, y = lo.y + j * sy;
                const double c = cost(x, y);
                if (c < best_c) {
                    best_c = c;
                    best = {x, y};
                }
            }
        lo = {best.x - 2 * sx, best.y - 2 * sy};
        hi = {best.x + 2 * sx, best.y + 2 * sy};
    }
    return best;
}

} // namespace oracle
