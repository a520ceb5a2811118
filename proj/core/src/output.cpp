// SPDX-License-Identifier: Apache-2.0
#include "nfrm/output.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "nfrm/error.hpp"

namespace nfrm {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::string num(double d)
{
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), d);
    return std::string(buf.data(), res.ptr);
}

std::string opt(const std::optional<double>& d) { return d ? num(*d) : std::string(); }

nlohmann::json point(const Vec2& p) { return nlohmann::json::array({p.x, p.y}); }

nlohmann::json complex_json(const cdouble& c) { return nlohmann::json::array({c.real(), c.imag()}); }

nlohmann::json rm_json(const RmPathParams& p)
{
    return {{"gain", complex_json(p.gain)},
            {"tau_ns", p.tau * 1e9},
            {"aoa_deg", p.aoa / kDeg},
            {"aod_deg", p.aod / kDeg},
            {"alpha_deg", p.alpha / kDeg},
            {"parity", p.parity}};
}

nlohmann::json pwa_json(const PwaPathParams& p)
{
    nlohmann::json gains = nlohmann::json::array();
    for (const auto& g : p.gains)
        gains.push_back(complex_json(g));
    return {{"delta_ns", p.delta * 1e9}, {"aoa_deg", p.aoa / kDeg}, {"aod_deg", p.aod / kDeg}, {"gains", gains}};
}

nlohmann::json extraction_json(const ExtractionResult& r)
{
    nlohmann::json paths = nlohmann::json::array();
    for (const auto& p : r.paths)
        paths.push_back(pwa_json(p));
    return {{"paths", paths},
            {"delay_reference_ns", r.delay_reference * 1e9},
            {"initial_energy", r.initial_energy},
            {"residual_energy", r.residual_energy},
            {"residual_history", r.residual_history},
            {"iterations", r.iterations}};
}

double median(std::vector<double> v)
{
    if (v.empty())
        return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

std::string pdp_csv(const Pdp& pdp)
{
    const double peak =
        pdp.magnitudes.empty() ? 0.0 : *std::max_element(pdp.magnitudes.begin(), pdp.magnitudes.end());
    std::string out = "delay_ns,magnitude_db\n";
    for (std::size_t q = 0; q < pdp.magnitudes.size(); ++q) {
        const double m = pdp.magnitudes[q];
        const double db = (m > 0.0 && peak > 0.0) ? 20.0 * std::log10(m / peak) : kPdpZeroDb;
        out += num(pdp.delay_bins[q] * 1e9) + "," + num(db) + "\n";
    }
    return out;
}

std::string heatmap_csv(const Heatmap& h)
{
    std::string out = "# origin_x=" + num(h.origin.x) + ",origin_y=" + num(h.origin.y) + ",cell=" + num(h.cell) +
                      ",nx=" + std::to_string(h.nx) + ",ny=" + std::to_string(h.ny) + "\n";
    for (std::size_t iy = 0; iy < h.ny; ++iy) {
        for (std::size_t ix = 0; ix < h.nx; ++ix) {
            if (ix)
                out += ',';
            out += num(h.at(ix, iy));
        }
        out += '\n';
    }
    return out;
}

std::string report_json(const RunReport& report, bool include_timing)
{
    const Estimate& est = report.estimate;
    nlohmann::json j;
    j["scenario"] = report.scenario;
    j["units"] = {{"delay", "ns"}, {"angle", "deg"}, {"position", "m"}};

    if (report.truth) {
        nlohmann::json truth = nlohmann::json::array();
        for (std::size_t t = 0; t < report.truth->paths.size(); ++t) {
            nlohmann::json p = rm_json(report.truth->paths[t]);
            p["image_point"] = point(report.truth->images[t].image_point);
            p["walls"] = report.truth->images[t].wall_sequence;
            truth.push_back(p);
        }
        j["true_paths"] = truth;
    }

    j["rx_reference"] = point(est.rx_reference);
    j["extraction"] = extraction_json(est.extraction);

    nlohmann::json subsets = nlohmann::json::array();
    for (const auto& s : est.subsets) {
        nlohmann::json sj = {{"measurements", s.measurements},
                             {"reference", point(s.reference)},
                             {"extraction", extraction_json(s.extraction)}};
        sj["anchor_match"] = s.anchor_match ? nlohmann::json(*s.anchor_match) : nlohmann::json(nullptr);
        subsets.push_back(sj);
    }
    j["subsets"] = subsets;

    nlohmann::json bearings = nlohmann::json::array();
    for (const auto& b : est.bearings)
        bearings.push_back({{"position", point(b.position)}, {"angle_deg", b.angle / kDeg}, {"weight", b.weight}});
    j["bearings"] = bearings;
    j["triangulation"] = {{"point", point(est.fix.point)},
                          {"residual_m2", est.fix.residual},
                          {"behind_bearing", est.fix.behind_bearing}};
    j["anchor"] = est.anchor;

    nlohmann::json paths = nlohmann::json::array();
    for (std::size_t l = 0; l < est.rm.size(); ++l) {
        nlohmann::json p;
        p["pwa"] = pwa_json(est.extraction.paths[l]);
        p["rm"] = rm_json(est.rm[l]);
        p["image_point"] = point(est.image_points[l]);
        const auto& par = est.parities[l];
        p["parity"] = {{"selected", par.parity},
                       {"residual_even", par.residual_even},
                       {"residual_odd", par.residual_odd},
                       {"ambiguous", par.ambiguous}};
        if (report.truth && l < report.errors.size() && report.errors[l]) {
            const auto& e = *report.errors[l];
            p["error"] = {{"truth_index", e.truth_index},
                          {"delay_ns", e.delay_ns},
                          {"aoa_deg", e.aoa_deg},
                          {"aod_deg", e.aod_deg},
                          {"image_m", e.image_m},
                          {"parity_correct", e.parity_correct}};
        }
        paths.push_back(p);
    }
    j["estimated_paths"] = paths;
    j["residual_energy"] = est.extraction.residual_energy;
    if (report.los_error_m)
        j["los_error_m"] = *report.los_error_m;
    if (include_timing && report.elapsed_s)
        j["elapsed_s"] = *report.elapsed_s;
    return j.dump(2) + "\n";
}

std::string sweep_csv(const std::string& parameter, const std::vector<SweepRow>& rows)
{
    std::string out = parameter + ",run,seed,los_error_m,mean_image_error_m,paths\n";
    for (const auto& r : rows)
        out += num(r.value) + "," + std::to_string(r.run) + "," + std::to_string(r.seed) + "," +
               opt(r.los_error_m) + "," + opt(r.mean_image_error_m) + "," + std::to_string(r.paths) + "\n";
    return out;
}

std::string sweep_summary_csv(const std::string& parameter, const std::vector<SweepRow>& rows)
{
    std::map<double, std::vector<double>> by_value;
    std::vector<double> order;
    for (const auto& r : rows) {
        if (!by_value.contains(r.value))
            order.push_back(r.value);
        by_value[r.value].push_back(r.los_error_m.value_or(std::numeric_limits<double>::infinity()));
    }
    std::string out = parameter + ",runs,localized,median_los_error_m,mean_los_error_m\n";
    for (double v : order) {
        const auto& errs = by_value[v];
        double sum = 0.0;
        std::size_t ok = 0;
        for (double e : errs)
            if (std::isfinite(e)) {
                sum += e;
                ++ok;
            }
        out += num(v) + "," + std::to_string(errs.size()) + "," + std::to_string(ok) + "," + num(median(errs)) + "," +
               (ok ? num(sum / static_cast<double>(ok)) : std::string()) + "\n";
    }
    return out;
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::io, "cannot open '" + path + "' for writing");
    out << text;
    if (!out)
        throw Error(ErrorCode::io, "failed writing '" + path + "'");
}

void emit_pdp_csv(const Pdp& pdp, const std::string& path) { write_text(path, pdp_csv(pdp)); }

void emit_heatmap_grid(const Heatmap& heatmap, const std::string& path) { write_text(path, heatmap_csv(heatmap)); }

void emit_report(const RunReport& report, const std::string& path, bool include_timing)
{
    write_text(path, report_json(report, include_timing));
}

} // namespace nfrm
