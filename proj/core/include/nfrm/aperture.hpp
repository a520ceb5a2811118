// SPDX-License-Identifier: Apache-2.0
//
// Synthetic-aperture measurement campaigns: antenna placements, non-coherent
// noisy channel measurements, and power delay profiles.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "nfrm/channel.hpp"

namespace nfrm {

struct Placement {
    std::vector<Vec2> tx_positions;
    std::vector<Vec2> rx_positions;
};

struct MeasurementPlan {
    Vec2 tx_ref;
    Vec2 rx_ref;
    std::vector<Placement> placements;

    std::size_t measurement_count() const { return placements.size(); }
    std::size_t rx_count() const { return placements.empty() ? 0 : placements.front().rx_positions.size(); }
    std::size_t tx_count() const { return placements.empty() ? 0 : placements.front().tx_positions.size(); }

    References references() const { return {tx_ref, rx_ref}; }

    /// Throws Error(dimension) unless K >= 1, N, M >= 1 constant across k, all finite.
    void validate() const;

    /// Mean of every RX element position over every placement.
    Vec2 rx_centroid() const;
};

struct MeasurementSet {
    MeasurementPlan plan;
    FrequencyGrid grid;
    std::vector<ChannelResponse> responses; // one M x N x F block per placement
    std::optional<double> snr_db;           // nullopt = noiseless
    std::uint64_t seed = 0;
    bool coherent = true;

    void validate() const;
    double energy() const;
};

/// Two RX elements at rx_ref + (o +- a/2, 0) for every (offset o, spacing a);
/// offsets vary slowest. TX positions are shared by every placement.
MeasurementPlan plan_linear_track(const Vec2& rx_ref, std::span<const double> offsets,
                                  std::span<const double> spacings, const Vec2& tx_ref,
                                  std::span<const Vec2> tx_positions);

/// Counter-based generator: the value at (seed, stream, counter) is a pure
/// hash, so substream k can be drawn in any order or on any thread.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    std::uint64_t next_u64();
    double uniform(); // [0, 1)
    double normal();  // standard normal, Box-Muller

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    std::optional<double> spare_;
};

/// r_kmn(f) = exp(j theta_k) H_mn(f; placement k) + circular Gaussian noise.
/// theta_k is 0 when coherent, else uniform on [0, 2 pi) drawn first from
/// substream k. Noise variance is max_l |g_l|^2 / 10^(snr_db / 10).
MeasurementSet simulate_campaign(std::span<const RmPathParams> paths, const MeasurementPlan& plan,
                                 const FrequencyGrid& grid, std::optional<double> snr_db, bool coherent,
                                 std::uint64_t seed);

/// Copy of `set` restricted to the given measurements, in the given order.
MeasurementSet subset(const MeasurementSet& set, std::span<const std::size_t> indices);

/// Copy of `set` whose RX reference point is moved; positions are absolute so
/// only the parametrization changes.
MeasurementSet with_rx_reference(const MeasurementSet& set, const Vec2& rx_ref);

enum class Window { rectangular, hann };

struct Pdp {
    std::vector<double> delay_bins; // s, spacing 1/bandwidth
    std::vector<double> magnitudes;
};

/// Unitary inverse DFT of the (windowed) frequency response, |.| per bin.
Pdp compute_pdp(std::span<const cdouble> response, const FrequencyGrid& grid, Window window = Window::rectangular);

} // namespace nfrm
