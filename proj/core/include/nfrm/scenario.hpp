// SPDX-License-Identifier: Apache-2.0
//
// Scenario description: a line-oriented text format with [section] headers
// and `key = value` entries. Values are numbers, booleans, `none`, `auto`,
// quoted strings, tuples `(a, b, ...)` and lists `[v, v, ...]`. `#` starts a
// comment. See docs/scenario-format.md for the full key reference.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nfrm/aperture.hpp"
#include "nfrm/estimation.hpp"
#include "nfrm/geometry.hpp"

namespace nfrm {

struct AngleRange {
    double start_deg = 0.0;
    double stop_deg = 0.0;
    double step_deg = 1.0;

    std::vector<double> radians() const;
    friend bool operator==(const AngleRange&, const AngleRange&) = default;
};

struct ScenarioConfig {
    std::string name = "custom";

    // [room]
    std::vector<Vec2> room_vertices;
    std::vector<bool> room_reflective;
    double reflection_loss = 0.7;
    int max_order = 1;

    // [transmitter]
    Vec2 tx_ref;
    std::vector<Vec2> tx_array{{0.0, 0.0}}; // element offsets from tx_ref

    // [receiver]
    Vec2 rx_ref;
    std::vector<double> offsets;              // m, along +x
    std::vector<double> spacings_wavelengths; // RX pair spacing in wavelengths
    std::vector<std::vector<Vec2>> placements; // explicit RX positions; replaces offsets/spacings

    // [frequency]
    FrequencyGrid grid;

    // [simulation]
    std::optional<double> snr_db;
    bool coherent = false;
    std::uint64_t seed = 1;

    // [estimation]
    AngleRange aoa_grid{-179.0, 180.0, 1.0};
    AngleRange aod_grid{-179.0, 180.0, 1.0};
    std::optional<double> delay_step; // s; nullopt = 1 / (2 bandwidth)
    double support_db = 30.0;
    int l_max = 4;
    double stop_fraction = 1e-4;
    bool refine = true;
    std::vector<std::vector<std::size_t>> subsets; // empty = one subset per distinct track position

    // [heatmap]
    Region region;
    double cell = 0.05;
    std::optional<double> concentration; // nullopt = 1 / (2 (0.5 deg)^2)

    // [output]
    std::string output_dir; // empty = $NFCM_OUTPUT_DIR or "."

    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;

    Room room() const;
    MeasurementPlan plan() const;
    std::vector<Vec2> tx_positions() const;
    DictionaryGrid dictionary_angles() const; // delay left empty
    double heatmap_concentration() const;
    std::string resolved_output_dir() const;
};

/// Throws ParseError(syntax | semantic | unknown_key) with the offending line.
ScenarioConfig parse_scenario(std::string_view text);

/// Canonical text form; parse_scenario(serialize_scenario(c)) == c.
std::string serialize_scenario(const ScenarioConfig& config);

ScenarioConfig load_scenario(const std::string& path_or_preset);

std::vector<std::string> preset_names();
std::optional<std::string> preset_text(std::string_view name);

} // namespace nfrm
