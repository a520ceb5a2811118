// SPDX-License-Identifier: Apache-2.0
//
// Plot data and reports: CSV for PDPs, heatmaps and sweeps, JSON for run
// reports. Angles are written in degrees, delays in nanoseconds.
#pragma once

#include <string>
#include <vector>

#include "nfrm/aperture.hpp"
#include "nfrm/estimation.hpp"
#include "nfrm/pipeline.hpp"

namespace nfrm {

/// Written for bins whose magnitude is exactly zero.
inline constexpr double kPdpZeroDb = -400.0;

/// `delay_ns,magnitude_db` rows, normalized to the peak bin.
std::string pdp_csv(const Pdp& pdp);

/// `# origin_x=..,origin_y=..,cell=..,nx=..,ny=..` then one row per y index.
std::string heatmap_csv(const Heatmap& heatmap);

std::string report_json(const RunReport& report, bool include_timing = false);

std::string sweep_csv(const std::string& parameter, const std::vector<SweepRow>& rows);

/// Per-value summary: median and mean LOS error, with failed runs counted as unlocalized.
std::string sweep_summary_csv(const std::string& parameter, const std::vector<SweepRow>& rows);

void write_text(const std::string& path, const std::string& text);

void emit_pdp_csv(const Pdp& pdp, const std::string& path);
void emit_heatmap_grid(const Heatmap& heatmap, const std::string& path);
void emit_report(const RunReport& report, const std::string& path, bool include_timing = false);

} // namespace nfrm
