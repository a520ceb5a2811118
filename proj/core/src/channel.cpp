// SPDX-License-Identifier: Apache-2.0
#include "nfrm/channel.hpp"

#include <numbers>

#include "nfrm/error.hpp"

namespace nfrm {

namespace {
constexpr double kPi = std::numbers::pi;
}

void FrequencyGrid::validate() const
{
    if (!(bandwidth > 0.0) || !(center > 0.5 * bandwidth) || !std::isfinite(center))
        throw Error(ErrorCode::invalid_argument, "frequency grid needs center > bandwidth/2 > 0");
    if (num_tones < 2)
        throw Error(ErrorCode::invalid_argument, "frequency grid needs at least 2 tones");
}

std::vector<double> FrequencyGrid::tones() const
{
    std::vector<double> out(static_cast<std::size_t>(num_tones));
    for (int i = 0; i < num_tones; ++i)
        out[static_cast<std::size_t>(i)] = tone(i);
    return out;
}

double PwaPathParams::energy() const
{
    double e = 0.0;
    for (const auto& g : gains)
        e += std::norm(g);
    return e;
}

double ChannelResponse::energy() const
{
    double e = 0.0;
    for (const auto& v : data_)
        e += std::norm(v);
    return e;
}

double aod_from_aoa(double aoa, double alpha, int parity)
{
    return wrap_angle(aoa + alpha + (parity + 1) * kPi / 2.0);
}

OrthoMap2 RmPathParams::map() const
{
    // The unique orthogonal map of this parity that sends u(aod) to -u(aoa).
    return {wrap_angle(aoa + kPi - parity * aod), parity};
}

RmPathParams make_rm_params(cdouble gain, double tau, double aoa, double aod, int parity)
{
    RmPathParams p;
    p.gain = gain;
    p.tau = tau;
    p.aoa = wrap_angle(aoa);
    p.aod = wrap_angle(aod);
    p.parity = parity;
    p.alpha = wrap_angle(aod - aoa - (parity + 1) * kPi / 2.0);
    return p;
}

RmPathParams image_to_rm_params(const ImagePath& path, const Vec2& tx_ref, const Vec2& rx_ref)
{
    (void)tx_ref;
    const Vec2 d = path.image_point - rx_ref;
    const double range = norm(d);
    if (!(range > 0.0))
        throw Error(ErrorCode::singular_geometry, "image point coincides with the rx reference");
    const double aoa = angle_of(d);
    const Vec2 u_t = -(path.map.inverse_matrix() * unit(aoa));
    return make_rm_params(path.gain, range / kSpeedOfLight, aoa, angle_of(u_t), path.map.parity);
}

RmPathParams rebase_rx_reference(const RmPathParams& p, const Vec2& from, const Vec2& to)
{
    const Vec2 image = from + (kSpeedOfLight * p.tau) * unit(p.aoa);
    const Vec2 d = image - to;
    const double range = norm(d);
    if (!(range > 0.0))
        throw Error(ErrorCode::singular_geometry, "image point coincides with the rx reference");
    const double aoa = angle_of(d);
    const Vec2 u_t = -(p.map().inverse_matrix() * unit(aoa));
    return make_rm_params(p.gain, range / kSpeedOfLight, aoa, angle_of(u_t), p.parity);
}

double path_distance_rm(const RmPathParams& p, const Vec2& x_r, const Vec2& x_t, const References& refs)
{
    const Vec2 v = x_r - refs.rx - (kSpeedOfLight * p.tau) * unit(p.aoa) - p.map().apply(x_t - refs.tx);
    return norm(v);
}

double path_distance_tx_form(const RmPathParams& p, const Vec2& x_r, const Vec2& x_t, const References& refs)
{
    const Vec2 v = x_t - refs.tx - (kSpeedOfLight * p.tau) * unit(p.aod) - p.map().inverse_matrix() * (x_r - refs.rx);
    return norm(v);
}

double path_distance_pwa(const RmPathParams& p, const Vec2& x_r, const Vec2& x_t, const References& refs)
{
    return kSpeedOfLight * p.tau - dot(unit(p.aoa), x_r - refs.rx) - dot(unit(p.aod), x_t - refs.tx);
}

ChannelResponse synth_channel(std::span<const RmPathParams> paths, std::span<const Vec2> tx_positions,
                              std::span<const Vec2> rx_positions, const FrequencyGrid& grid,
                              const References& refs)
{
    if (paths.empty())
        throw Error(ErrorCode::empty_channel, "cannot synthesize a channel without paths");
    if (tx_positions.empty() || rx_positions.empty())
        throw Error(ErrorCode::invalid_argument, "need at least one tx and one rx position");
    grid.validate();

    const auto tones = grid.tones();
    ChannelResponse h(rx_positions.size(), tx_positions.size(), tones.size());
    for (std::size_t m = 0; m < rx_positions.size(); ++m) {
        for (std::size_t n = 0; n < tx_positions.size(); ++n) {
            auto out = h.tones(m, n);
            for (const auto& p : paths) {
                const double d = path_distance_rm(p, rx_positions[m], tx_positions[n], refs);
                for (std::size_t f = 0; f < tones.size(); ++f)
                    out[f] += p.gain * std::polar(1.0, -2.0 * kPi * tones[f] * d / kSpeedOfLight);
            }
        }
    }
    return h;
}

double rayleigh_distance(double aperture, double wavelength)
{
    if (!(aperture >= 0.0) || !(wavelength > 0.0))
        throw Error(ErrorCode::invalid_argument, "rayleigh distance needs aperture >= 0 and wavelength > 0");
    return 2.0 * aperture * aperture / wavelength;
}

std::vector<RmPathParams> geometric_paths(const Room& room, const Vec2& tx_ref, const Vec2& rx_ref, int max_order,
                                          double reflection_loss, std::vector<ImagePath>* images)
{
    std::vector<RmPathParams> out;
    if (images)
        images->clear();
    for (auto path : enumerate_images(room, tx_ref, max_order, reflection_loss)) {
        if (!validate_path(room, path.wall_sequence, tx_ref, rx_ref).feasible)
            continue;
        path.gain /= distance(path.image_point, rx_ref);
        out.push_back(image_to_rm_params(path, tx_ref, rx_ref));
        if (images)
            images->push_back(path);
    }
    return out;
}

} // namespace nfrm
