// SPDX-License-Identifier: Apache-2.0
//
// Reflection-model (RM) and plane-wave (PWA) path parametrizations, their
// distance functions, and wideband MIMO channel synthesis.
//
// Phase convention: H = sum_l g_l exp(-j 2 pi f d_l / c). The opposite sign is
// a global conjugation and changes no magnitude, PDP or parameter estimate.
#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "nfrm/geometry.hpp"

namespace nfrm {

using cdouble = std::complex<double>;

inline constexpr double kSpeedOfLight = 299'792'458.0;

/// Tones f_i = center - bandwidth/2 + i * bandwidth/num_tones, i = 0..num_tones-1,
/// so that the inverse DFT has delay spacing exactly 1/bandwidth.
struct FrequencyGrid {
    double center = 10e9;
    double bandwidth = 500e6;
    int num_tones = 128;

    void validate() const;
    double spacing() const { return bandwidth / num_tones; }
    double tone(int i) const { return center - 0.5 * bandwidth + i * spacing(); }
    std::vector<double> tones() const;
    double wavelength() const { return kSpeedOfLight / center; }

    friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;
};

struct RmPathParams {
    cdouble gain{1.0, 0.0};
    double tau = 0.0;   // absolute time of flight, s
    double aoa = 0.0;   // rad
    double aod = 0.0;   // rad
    double alpha = 0.0; // rad
    int parity = 1;

    /// Realized image map, fixed by (aoa, aod, parity): it sends u(aod) to -u(aoa).
    OrthoMap2 map() const;
};

/// Fills alpha from aod = aoa + alpha + (parity + 1) pi / 2.
RmPathParams make_rm_params(cdouble gain, double tau, double aoa, double aod, int parity);

struct PwaPathParams {
    std::vector<cdouble> gains; // one per measurement
    double delta = 0.0;         // delay relative to the earliest path, s
    double aoa = 0.0;
    double aod = 0.0;

    double energy() const;
};

struct References {
    Vec2 tx;
    Vec2 rx;
};

/// H[m][n][f] for one array placement, stored row-major in (m, n, f).
class ChannelResponse {
public:
    ChannelResponse() = default;
    ChannelResponse(std::size_t m, std::size_t n, std::size_t f)
        : m_(m), n_(n), f_(f), data_(m * n * f) {}

    std::size_t rx_count() const { return m_; }
    std::size_t tx_count() const { return n_; }
    std::size_t tone_count() const { return f_; }

    cdouble& operator()(std::size_t m, std::size_t n, std::size_t f) { return data_[(m * n_ + n) * f_ + f]; }
    const cdouble& operator()(std::size_t m, std::size_t n, std::size_t f) const { return data_[(m * n_ + n) * f_ + f]; }

    std::span<cdouble> tones(std::size_t m, std::size_t n) { return {data_.data() + (m * n_ + n) * f_, f_}; }
    std::span<const cdouble> tones(std::size_t m, std::size_t n) const { return {data_.data() + (m * n_ + n) * f_, f_}; }

    std::vector<cdouble>& data() { return data_; }
    const std::vector<cdouble>& data() const { return data_; }

    double energy() const;

    friend bool operator==(const ChannelResponse&, const ChannelResponse&) = default;

private:
    std::size_t m_ = 0, n_ = 0, f_ = 0;
    std::vector<cdouble> data_;
};

/// Absolute ToF, AoA and AoD of a geometric image path seen from the references.
RmPathParams image_to_rm_params(const ImagePath& path, const Vec2& tx_ref, const Vec2& rx_ref);

/// Same physical path re-parametrized about another RX reference point.
RmPathParams rebase_rx_reference(const RmPathParams& p, const Vec2& from, const Vec2& to);

/// Exact RX-side distance ||x_r - x_r0 - c tau u(aoa) - Q (x_t - x_t0)||.
double path_distance_rm(const RmPathParams& p, const Vec2& x_r, const Vec2& x_t, const References& refs);

/// Same distance written from the TX side with u(aod) and Q^-1.
double path_distance_tx_form(const RmPathParams& p, const Vec2& x_r, const Vec2& x_t, const References& refs);

/// First-order (plane-wave) expansion of the distance about the references.
double path_distance_pwa(const RmPathParams& p, const Vec2& x_r, const Vec2& x_t, const References& refs);

/// Wideband MIMO response from the exact RM distance of every path.
ChannelResponse synth_channel(std::span<const RmPathParams> paths, std::span<const Vec2> tx_positions,
                              std::span<const Vec2> rx_positions, const FrequencyGrid& grid,
                              const References& refs);

/// 2 D^2 / lambda.
double rayleigh_distance(double aperture, double wavelength);

/// aoa + alpha + (parity + 1) pi / 2, wrapped into (-pi, pi].
double aod_from_aoa(double aoa, double alpha, int parity);

/// Image-source ground truth: every path from enumerate_images that is
/// specularly feasible between the references, with free-space 1/d amplitude
/// times the per-bounce loss.
std::vector<RmPathParams> geometric_paths(const Room& room, const Vec2& tx_ref, const Vec2& rx_ref, int max_order,
                                          double reflection_loss, std::vector<ImagePath>* images = nullptr);

} // namespace nfrm
