// SPDX-License-Identifier: Apache-2.0
//
// Parameter recovery from non-coherent synthetic-aperture measurements:
// block-OMP over an (AoA, AoD, delay) dictionary with one free complex gain
// per measurement, bearing triangulation, absolute ToF recovery and
// reflection-parity selection.
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "nfrm/aperture.hpp"
#include "nfrm/channel.hpp"

namespace nfrm {

/// Arithmetic sequence start, start + step, ... up to stop (inclusive within step * 1e-9).
std::vector<double> uniform_grid(double start, double stop, double step);

struct DictionaryGrid {
    std::vector<double> aoa;   // rad, strictly increasing
    std::vector<double> aod;   // rad, strictly increasing
    std::vector<double> delay; // s, strictly increasing

    void validate() const;
    std::size_t size() const { return aoa.size() * aod.size() * delay.size(); }
};

struct AtomIndex {
    std::size_t aoa = 0;
    std::size_t aod = 0;
    std::size_t delay = 0;

    friend bool operator==(const AtomIndex&, const AtomIndex&) = default;
};

struct ExtractionResult {
    std::vector<PwaPathParams> paths; // sorted by sum_k |g_lk|^2, descending
    std::vector<AtomIndex> atoms;     // grid atom per path (empty after refinement)
    double delay_reference = 0.0;     // absolute delay of the earliest path; delta = abs - reference
    double initial_energy = 0.0;
    double residual_energy = 0.0;
    std::vector<double> residual_history; // after each iteration
    int iterations = 0;

    double absolute_delay(std::size_t l) const { return paths[l].delta + delay_reference; }
};

/// PWA dictionary atom entry exp(-j 2 pi f [delay - u(aoa).(x_r - x_r0)/c - u(aod).(x_t - x_t0)/c]).
cdouble steering_phase(double aoa, double aod, double delay, const Vec2& x_r, const Vec2& x_t,
                       const References& refs, double frequency);

/// One atom over placement k of `set`, M x N x F.
ChannelResponse atom_response(const MeasurementSet& set, std::size_t k, double aoa, double aod, double delay);

/// Score of a single atom against `data` (defaults to the set's own
/// responses): sum_k |<a_k, r_k>|^2 / ||a_k||^2.
double atom_score(const MeasurementSet& set, double aoa, double aod, double delay,
                  const std::vector<ChannelResponse>* data = nullptr);

/// Greedy block-OMP. Ties go to the lowest (aoa, aod, delay) grid index.
ExtractionResult omp_extract(const MeasurementSet& set, const DictionaryGrid& grid, int l_max,
                             double stop_fraction);

struct RefineOptions {
    double aoa_halfwidth = 0.0; // rad; search bracket around each start value
    double aod_halfwidth = 0.0;
    double delay_halfwidth = 0.0; // s
    int sweeps = 4;
};

/// Cyclic off-grid refinement: each path's (aoa, aod, delay) is re-optimized
/// against the data minus the other paths, then all gains are jointly refit.
ExtractionResult refine_extraction(const MeasurementSet& set, const ExtractionResult& start,
                                   const RefineOptions& options);

/// Sum of all model paths except `skip`, per placement.
std::vector<ChannelResponse> model_responses(const MeasurementSet& set, const ExtractionResult& result,
                                             std::optional<std::size_t> skip = std::nullopt);

/// Local maxima within threshold_db (amplitude dB) of the global peak, pruned
/// strongest-first to min_separation_bins. Returned in ascending bin order.
std::vector<std::size_t> detect_paths_pdp(const Pdp& pdp, double threshold_db, int min_separation_bins);

struct Bearing {
    Vec2 position;
    double angle = 0.0;
    double weight = 1.0;
};

struct Triangulation {
    Vec2 point;
    double residual = 0.0;      // sum_j w_j * perpendicular distance^2, m^2
    bool behind_bearing = false; // solution lies behind at least one observer
};

Triangulation triangulate(std::span<const Bearing> bearings);

struct Region {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

    friend bool operator==(const Region&, const Region&) = default;
};

struct Heatmap {
    Vec2 origin;
    double cell = 0.0;
    std::size_t nx = 0, ny = 0;
    std::vector<double> scores; // row-major, row = y index

    double at(std::size_t ix, std::size_t iy) const { return scores[iy * nx + ix]; }
    Vec2 cell_center(std::size_t ix, std::size_t iy) const
    {
        return origin + Vec2{(static_cast<double>(ix) + 0.5) * cell, (static_cast<double>(iy) + 0.5) * cell};
    }
    Vec2 argmax() const;
};

/// score(z) proportional to exp(-concentration * sum_j w_j angdiff(angle(z - p_j), phi_j)^2), sums to 1.
Heatmap localization_heatmap(std::span<const Bearing> bearings, const Region& region, double cell,
                             double concentration);

/// tau_l = tau_anchor + delta_l - delta_anchor.
std::vector<double> recover_abs_delays(double tau_anchor, double delta_anchor, std::span<const double> deltas);

/// rx_ref + c tau u(aoa).
Vec2 image_from_polar(const Vec2& rx_ref, double aoa, double tau);

struct ParityEstimate {
    int parity = 1;
    double alpha = 0.0;
    double residual_even = 0.0; // s = +1
    double residual_odd = 0.0;  // s = -1
    bool ambiguous = false;
};

/// Fits the exact RM response of one path under both parities, with a free
/// gain per measurement, and keeps the one with lower residual.
ParityEstimate estimate_parity(const MeasurementSet& set, const PwaPathParams& path, double tau,
                               const std::vector<ChannelResponse>* data = nullptr);

/// Full RM parameters from a PWA extraction, an anchor ToF and per-path parities.
std::vector<RmPathParams> assemble_rm(const ExtractionResult& pwa, double anchor_tau, std::size_t anchor_index,
                                      std::span<const int> parities, std::span<const double> alphas);

} // namespace nfrm
