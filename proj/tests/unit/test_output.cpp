// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "json.hpp"

#include "nfrm/output.hpp"
#include "nfrm/scenario.hpp"

using namespace nfrm;
using Catch::Approx;

namespace {

std::vector<std::string> lines(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);)
        out.push_back(l);
    return out;
}

} // namespace

TEST_CASE("pdp_csv normalizes to the peak")
{
    const std::vector<cdouble> flat(8, cdouble{1, 0});
    const auto csv = pdp_csv(compute_pdp(flat, FrequencyGrid{10e9, 500e6, 8}));
    const auto l = lines(csv);
    REQUIRE(l.size() == 9);
    CHECK(l[0] == "delay_ns,magnitude_db");
    CHECK(l[1] == "0,0");
    CHECK(l[2].rfind("2,", 0) == 0);
    for (std::size_t i = 2; i < l.size(); ++i)
        CHECK(std::stod(l[i].substr(l[i].find(',') + 1)) < -200.0);
}

TEST_CASE("heatmap_csv header and values")
{
    const std::vector<Bearing> b{{{0, 0}, 0.5, 1.0}, {{1, 0}, 0.6, 1.0}};
    const auto h = localization_heatmap(b, Region{0, 0, 2, 1}, 0.5, 10.0);
    const auto l = lines(heatmap_csv(h));
    REQUIRE(l.size() == 1 + h.ny);
    CHECK(l[0] == "# origin_x=0,origin_y=0,cell=0.5,nx=4,ny=2");
    double sum = 0.0;
    for (std::size_t i = 1; i < l.size(); ++i) {
        std::istringstream row(l[i]);
        std::size_t n = 0;
        for (std::string v; std::getline(row, v, ',');) {
            sum += std::stod(v);
            ++n;
        }
        CHECK(n == h.nx);
    }
    CHECK(sum == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sweep csv and summary")
{
    std::vector<SweepRow> rows{{10, 0, 5, 0.1, 0.2, 4}, {10, 1, 6, 0.3, 0.4, 4}, {10, 2, 7, std::nullopt, std::nullopt, 0},
                               {20, 0, 8, 0.05, 0.1, 4}};
    const auto l = lines(sweep_csv("snr_db", rows));
    REQUIRE(l.size() == 5);
    CHECK(l[0] == "snr_db,run,seed,los_error_m,mean_image_error_m,paths");
    CHECK(l[3] == "10,2,7,,,0");
    const auto s = lines(sweep_summary_csv("snr_db", rows));
    REQUIRE(s.size() == 3);
    CHECK(s[1] == "10,3,2,0.3,0.2");
    CHECK(s[2] == "20,1,1,0.05,0.05");
}

TEST_CASE("report_json of a small end-to-end run")
{
    auto cfg = load_scenario("paper-room");
    cfg.grid.num_tones = 64;
    cfg.aoa_grid = {0, 180, 2};
    cfg.aod_grid = {-176, 180, 4};
    const auto report = evaluate(cfg);
    const auto j = nlohmann::json::parse(report_json(report));
    CHECK(j["scenario"] == "paper-room");
    CHECK(j["true_paths"].size() == 4);
    CHECK(j["estimated_paths"].size() == 4);
    CHECK(j.contains("triangulation"));
    CHECK(j.contains("los_error_m"));
    CHECK_FALSE(j.contains("elapsed_s"));
    for (const auto& p : j["estimated_paths"]) {
        CHECK(p.contains("rm"));
        CHECK(p.contains("error"));
        CHECK(p["image_point"].size() == 2);
    }
    CHECK(report_json(report) == report_json(report));
    CHECK(nlohmann::json::parse(report_json(report, true)).contains("elapsed_s"));
}
