// SPDX-License-Identifier: Apache-2.0
//
// End-to-end processing: simulate a scenario, extract PWA paths over the full
// synthetic aperture, triangulate the strongest path from per-position
// subsets, then recover absolute delays, image points and RM parameters.
#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "nfrm/aperture.hpp"
#include "nfrm/estimation.hpp"
#include "nfrm/scenario.hpp"

namespace nfrm {

struct EstimationOptions {
    DictionaryGrid angles;            // delay grid is derived from the data
    std::optional<double> delay_step; // nullopt = 1 / (2 bandwidth)
    double support_db = 30.0;
    int l_max = 4;
    double stop_fraction = 1e-4;
    bool refine = true;
    std::vector<std::vector<std::size_t>> subsets; // empty = auto_subsets
    double subset_window = std::numbers::pi / 36.0; // rad around each full-aperture angle
    int subset_delay_oversample = 4;                // subset delay grid step = delay step / this
};

EstimationOptions estimation_options(const ScenarioConfig& config);

/// Delay dictionary spanning the bins whose summed Hann-windowed PDP power is
/// within support_db of the peak, padded by four bins on each side.
std::vector<double> delay_grid_from_pdp(const MeasurementSet& set, double step, double support_db);

/// One subset per distinct placement RX centroid, in order of first appearance.
std::vector<std::vector<std::size_t>> auto_subsets(const MeasurementPlan& plan);

struct SubsetEstimate {
    std::vector<std::size_t> measurements;
    Vec2 reference; // RX centroid of the subset
    ExtractionResult extraction;
    std::optional<std::size_t> anchor_match;
};

struct Estimate {
    Vec2 rx_reference; // full-aperture centroid; extraction angles and delays refer to it
    std::vector<double> delay_grid;
    ExtractionResult extraction;
    std::vector<SubsetEstimate> subsets;
    std::size_t anchor = 0;
    std::vector<Bearing> bearings;
    Triangulation fix;
    std::vector<double> taus;         // absolute ToF about rx_reference
    std::vector<Vec2> image_points;
    std::vector<ParityEstimate> parities;
    std::vector<RmPathParams> rm; // about the measurement set's own rx_ref
};

Estimate estimate(const MeasurementSet& set, const EstimationOptions& options);

struct Truth {
    std::vector<RmPathParams> paths; // about the scenario rx_ref
    std::vector<ImagePath> images;
};

Truth scenario_truth(const ScenarioConfig& config);
MeasurementSet simulate_scenario(const ScenarioConfig& config);

struct PathError {
    std::size_t truth_index = 0;
    double delay_ns = 0.0;
    double aoa_deg = 0.0;
    double aod_deg = 0.0;
    double image_m = 0.0;
    bool parity_correct = false;
};

struct RunReport {
    std::string scenario;
    std::optional<Truth> truth;
    Estimate estimate;
    std::vector<std::optional<PathError>> errors; // per estimated path, when truth exists
    std::optional<double> los_error_m;             // LOS TX localization error
    std::optional<double> elapsed_s;
};

/// Greedy nearest-image assignment of estimated paths to ground truth.
std::vector<std::optional<PathError>> match_paths(const Estimate& est, const Truth& truth);

RunReport evaluate(const ScenarioConfig& config);

struct SweepRow {
    double value = 0.0;
    int run = 0;
    std::uint64_t seed = 0;
    std::optional<double> los_error_m;
    std::optional<double> mean_image_error_m;
    std::size_t paths = 0;
};

/// Repeats evaluate with `parameter` set to each value; run r at value index i
/// uses a seed derived from (config.seed, i, r).
std::vector<SweepRow> sweep(const ScenarioConfig& config, const std::string& parameter,
                            const std::vector<double>& values, int runs);

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b);

} // namespace nfrm
