// SPDX-License-Identifier: Apache-2.0
#include "nfrm/aperture.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fft.hpp"
#include "nfrm/error.hpp"

namespace nfrm {

namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t splitmix(std::uint64_t z)
{
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace

void MeasurementPlan::validate() const
{
    if (placements.empty())
        throw Error(ErrorCode::dimension, "measurement plan needs K >= 1 placements");
    const std::size_t m = rx_count();
    const std::size_t n = tx_count();
    if (m == 0 || n == 0)
        throw Error(ErrorCode::dimension, "measurement plan needs M, N >= 1");
    if (!tx_ref.finite() || !rx_ref.finite())
        throw Error(ErrorCode::dimension, "references must be finite");
    for (const auto& p : placements) {
        if (p.rx_positions.size() != m || p.tx_positions.size() != n)
            throw Error(ErrorCode::dimension, "M and N must be constant across placements");
        for (const auto& v : p.rx_positions)
            if (!v.finite())
                throw Error(ErrorCode::dimension, "rx position not finite");
        for (const auto& v : p.tx_positions)
            if (!v.finite())
                throw Error(ErrorCode::dimension, "tx position not finite");
    }
}

Vec2 MeasurementPlan::rx_centroid() const
{
    Vec2 c;
    std::size_t count = 0;
    for (const auto& p : placements)
        for (const auto& v : p.rx_positions) {
            c += v;
            ++count;
        }
    return count ? (1.0 / static_cast<double>(count)) * c : rx_ref;
}

void MeasurementSet::validate() const
{
    plan.validate();
    grid.validate();
    if (responses.size() != plan.measurement_count())
        throw Error(ErrorCode::dimension, "response count does not match plan");
    for (const auto& r : responses)
        if (r.rx_count() != plan.rx_count() || r.tx_count() != plan.tx_count() ||
            r.tone_count() != static_cast<std::size_t>(grid.num_tones))
            throw Error(ErrorCode::dimension, "response block dimensions do not match plan and grid");
}

double MeasurementSet::energy() const
{
    double e = 0.0;
    for (const auto& r : responses)
        e += r.energy();
    return e;
}

MeasurementPlan plan_linear_track(const Vec2& rx_ref, std::span<const double> offsets,
                                  std::span<const double> spacings, const Vec2& tx_ref,
                                  std::span<const Vec2> tx_positions)
{
    if (offsets.empty() || spacings.empty())
        throw Error(ErrorCode::invalid_argument, "linear track needs at least one offset and one spacing");
    if (tx_positions.empty())
        throw Error(ErrorCode::invalid_argument, "linear track needs at least one tx position");
    for (double a : spacings)
        if (!(a > 0.0))
            throw Error(ErrorCode::invalid_argument, "antenna spacings must be positive");

    MeasurementPlan plan;
    plan.tx_ref = tx_ref;
    plan.rx_ref = rx_ref;
    for (double o : offsets) {
        for (double a : spacings) {
            Placement p;
            p.tx_positions.assign(tx_positions.begin(), tx_positions.end());
            p.rx_positions = {rx_ref + Vec2{o - 0.5 * a, 0.0}, rx_ref + Vec2{o + 0.5 * a, 0.0}};
            plan.placements.push_back(std::move(p));
        }
    }
    return plan;
}

std::uint64_t CounterRng::next_u64()
{
    return splitmix(seed_ ^ splitmix(stream_ ^ splitmix(counter_++)));
}

double CounterRng::uniform()
{
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::normal()
{
    if (spare_) {
        const double v = *spare_;
        spare_.reset();
        return v;
    }
    const double u1 = 1.0 - uniform(); // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    return r * std::cos(2.0 * kPi * u2);
}

MeasurementSet simulate_campaign(std::span<const RmPathParams> paths, const MeasurementPlan& plan,
                                 const FrequencyGrid& grid, std::optional<double> snr_db, bool coherent,
                                 std::uint64_t seed)
{
    plan.validate();
    grid.validate();
    if (paths.empty())
        throw Error(ErrorCode::empty_channel, "cannot simulate a campaign without paths");

    double strongest = 0.0;
    for (const auto& p : paths)
        strongest = std::max(strongest, std::norm(p.gain));
    const double noise_var = snr_db ? strongest / std::pow(10.0, *snr_db / 10.0) : 0.0;
    const double sigma = std::sqrt(0.5 * noise_var);

    MeasurementSet set;
    set.plan = plan;
    set.grid = grid;
    set.snr_db = snr_db;
    set.seed = seed;
    set.coherent = coherent;
    set.responses.reserve(plan.measurement_count());

    const References refs = plan.references();
    for (std::size_t k = 0; k < plan.measurement_count(); ++k) {
        const auto& pl = plan.placements[k];
        ChannelResponse h = synth_channel(paths, pl.tx_positions, pl.rx_positions, grid, refs);
        CounterRng rng(seed, k);
        const double theta = 2.0 * kPi * rng.uniform(); // drawn even when coherent to keep streams aligned
        if (!coherent) {
            const cdouble rot = std::polar(1.0, theta);
            for (auto& v : h.data())
                v *= rot;
        }
        if (snr_db) {
            for (auto& v : h.data()) {
                const double re = rng.normal();
                const double im = rng.normal();
                v += cdouble(sigma * re, sigma * im);
            }
        }
        set.responses.push_back(std::move(h));
    }
    return set;
}

MeasurementSet subset(const MeasurementSet& set, std::span<const std::size_t> indices)
{
    MeasurementSet out;
    out.plan.tx_ref = set.plan.tx_ref;
    out.plan.rx_ref = set.plan.rx_ref;
    out.grid = set.grid;
    out.snr_db = set.snr_db;
    out.seed = set.seed;
    out.coherent = set.coherent;
    for (std::size_t k : indices) {
        if (k >= set.responses.size())
            throw Error(ErrorCode::invalid_argument, "subset index out of range");
        out.plan.placements.push_back(set.plan.placements[k]);
        out.responses.push_back(set.responses[k]);
    }
    return out;
}

MeasurementSet with_rx_reference(const MeasurementSet& set, const Vec2& rx_ref)
{
    MeasurementSet out = set;
    out.plan.rx_ref = rx_ref;
    return out;
}

Pdp compute_pdp(std::span<const cdouble> response, const FrequencyGrid& grid, Window window)
{
    const std::size_t f = response.size();
    if (f < 2)
        throw Error(ErrorCode::invalid_argument, "pdp needs at least 2 tones");

    detail::FftPlan plan(f, 1, detail::FftPlan::Direction::backward);
    auto* buf = plan.data();
    for (std::size_t i = 0; i < f; ++i) {
        double w = 1.0;
        if (window == Window::hann)
            w = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(f));
        buf[i] = w * response[i];
    }
    plan.execute();

    Pdp pdp;
    pdp.delay_bins.resize(f);
    pdp.magnitudes.resize(f);
    const double scale = 1.0 / std::sqrt(static_cast<double>(f));
    const double step = 1.0 / (grid.spacing() * static_cast<double>(f));
    for (std::size_t q = 0; q < f; ++q) {
        pdp.delay_bins[q] = step * static_cast<double>(q);
        pdp.magnitudes[q] = std::abs(buf[q]) * scale;
    }
    return pdp;
}

} // namespace nfrm
