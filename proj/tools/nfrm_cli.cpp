// SPDX-License-Identifier: Apache-2.0
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "nfrm/dataset.hpp"
#include "nfrm/error.hpp"
#include "nfrm/output.hpp"
#include "nfrm/pipeline.hpp"
#include "nfrm/scenario.hpp"

namespace {

std::string in_output_dir(const nfrm::ScenarioConfig& config, const std::string& path, const std::string& fallback)
{
    if (!path.empty())
        return path;
    const std::filesystem::path dir = config.resolved_output_dir();
    std::filesystem::create_directories(dir);
    return (dir / fallback).string();
}

std::vector<double> parse_ladder(const std::string& ladder, std::string& parameter)
{
    const auto eq = ladder.find('=');
    if (eq == std::string::npos)
        throw nfrm::Error(nfrm::ErrorCode::invalid_argument, "--vary expects name=start:step:stop");
    parameter = ladder.substr(0, eq);
    const std::string range = ladder.substr(eq + 1);
    const auto c1 = range.find(':');
    const auto c2 = c1 == std::string::npos ? std::string::npos : range.find(':', c1 + 1);
    try {
        if (c1 == std::string::npos)
            return {std::stod(range)};
        if (c2 == std::string::npos)
            throw nfrm::Error(nfrm::ErrorCode::invalid_argument, "--vary expects name=start:step:stop");
        const double start = std::stod(range.substr(0, c1));
        const double step = std::stod(range.substr(c1 + 1, c2 - c1 - 1));
        const double stop = std::stod(range.substr(c2 + 1));
        return nfrm::uniform_grid(start, stop, step);
    } catch (const std::logic_error&) {
        throw nfrm::Error(nfrm::ErrorCode::invalid_argument, "--vary has a malformed number in '" + range + "'");
    }
}

nfrm::Pdp first_pdp(const nfrm::MeasurementSet& set)
{
    return nfrm::compute_pdp(set.responses.front().tones(0, 0), set.grid);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Near-field reflection-model channel estimation from synthetic-aperture measurements"};
    app.require_subcommand(1);

    std::string scenario = "paper-room";
    std::string data_path;
    std::string out_path;
    std::string pdp_path;
    std::optional<double> snr;
    bool noiseless = false;
    std::optional<std::uint64_t> seed;
    bool timing = false;
    std::string vary;
    int runs = 10;
    std::string summary_path;

    auto* synth = app.add_subcommand("synth", "Simulate a scenario and write an NFCM dataset");
    synth->add_option("--scenario", scenario, "Scenario file or preset name")->capture_default_str();
    synth->add_option("--out", out_path, "Dataset path (default <output dir>/dataset.nfcm)");
    auto* snr_opt = synth->add_option("--snr", snr, "Override SNR in dB");
    synth->add_flag("--noiseless", noiseless, "Override SNR to noiseless")->excludes(snr_opt);
    synth->add_option("--seed", seed, "Override the seed");

    auto* est = app.add_subcommand("estimate", "Extract paths, triangulate and assemble RM parameters");
    est->add_option("--data", data_path, "NFCM dataset")->required();
    est->add_option("--scenario", scenario, "Scenario supplying estimation settings")->capture_default_str();
    est->add_option("--out", out_path, "Report path (default <output dir>/report.json)");
    est->add_option("--pdp", pdp_path, "Also write the PDP of the first measurement's first antenna pair");
    est->add_flag("--timing", timing, "Include wall-clock time in the report");

    auto* eval = app.add_subcommand("evaluate", "Simulate, estimate and compare with ground truth");
    eval->add_option("--scenario", scenario, "Scenario file or preset name")->capture_default_str();
    eval->add_option("--out", out_path, "Report path (default <output dir>/report.json)");
    eval->add_option("--pdp", pdp_path, "Also write the PDP of the first measurement's first antenna pair");
    auto* eval_snr = eval->add_option("--snr", snr, "Override SNR in dB");
    eval->add_flag("--noiseless", noiseless, "Override SNR to noiseless")->excludes(eval_snr);
    eval->add_option("--seed", seed, "Override the seed");
    eval->add_flag("--timing", timing, "Include wall-clock time in the report");

    auto* heat = app.add_subcommand("heatmap", "Write the localization heatmap of the strongest path");
    heat->add_option("--scenario", scenario, "Scenario file or preset name")->capture_default_str();
    heat->add_option("--data", data_path, "NFCM dataset (default: simulate the scenario)");
    heat->add_option("--out", out_path, "CSV path (default <output dir>/heatmap.csv)");

    auto* sw = app.add_subcommand("sweep", "Repeat evaluate over a parameter ladder");
    sw->add_option("--scenario", scenario, "Scenario file or preset name")->capture_default_str();
    sw->add_option("--vary", vary, "Ladder, e.g. snr=0:5:40 (start:step:stop)")->required();
    sw->add_option("--runs", runs, "Runs per value")->capture_default_str()->check(CLI::PositiveNumber);
    sw->add_option("--out", out_path, "Per-run CSV (default <output dir>/sweep.csv)");
    sw->add_option("--summary", summary_path, "Per-value CSV (default <output dir>/sweep_summary.csv)");

    auto* show = app.add_subcommand("scenario", "Print a scenario in canonical form");
    show->add_option("name", scenario, "Scenario file or preset name")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::string msg = e.what();
        for (auto& c : msg)
            if (c == '\n')
                c = ' ';
        std::fprintf(stderr, "error: usage: %s\n", msg.c_str());
        return 64;
    }

    try {
        nfrm::ScenarioConfig config = nfrm::load_scenario(scenario);
        if (snr)
            config.snr_db = *snr;
        if (noiseless)
            config.snr_db.reset();
        if (seed)
            config.seed = *seed;

        if (*synth) {
            const auto set = nfrm::simulate_scenario(config);
            nfrm::write_dataset(set, in_output_dir(config, out_path, "dataset.nfcm"));
        } else if (*est) {
            const auto set = nfrm::read_dataset(data_path);
            nfrm::RunReport report;
            report.scenario = config.name;
            const auto t0 = std::chrono::steady_clock::now();
            report.estimate = nfrm::estimate(set, nfrm::estimation_options(config));
            report.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            nfrm::emit_report(report, in_output_dir(config, out_path, "report.json"), timing);
            if (!pdp_path.empty())
                nfrm::emit_pdp_csv(first_pdp(set), pdp_path);
        } else if (*eval) {
            const auto report = nfrm::evaluate(config);
            nfrm::emit_report(report, in_output_dir(config, out_path, "report.json"), timing);
            if (!pdp_path.empty())
                nfrm::emit_pdp_csv(first_pdp(nfrm::simulate_scenario(config)), pdp_path);
        } else if (*heat) {
            const auto set = data_path.empty() ? nfrm::simulate_scenario(config) : nfrm::read_dataset(data_path);
            const auto e = nfrm::estimate(set, nfrm::estimation_options(config));
            const auto map = nfrm::localization_heatmap(e.bearings, config.region, config.cell,
                                                        config.heatmap_concentration());
            nfrm::emit_heatmap_grid(map, in_output_dir(config, out_path, "heatmap.csv"));
        } else if (*sw) {
            std::string parameter;
            const auto values = parse_ladder(vary, parameter);
            const auto rows = nfrm::sweep(config, parameter, values, runs);
            nfrm::write_text(in_output_dir(config, out_path, "sweep.csv"), nfrm::sweep_csv(parameter, rows));
            nfrm::write_text(in_output_dir(config, summary_path, "sweep_summary.csv"),
                             nfrm::sweep_summary_csv(parameter, rows));
        } else if (*show) {
            std::cout << nfrm::serialize_scenario(config);
        }
    } catch (const nfrm::Error& e) {
        std::fprintf(stderr, "error: %s: %s\n", std::string(nfrm::to_string(e.code())).c_str(), e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: internal: %s\n", e.what());
        return 1;
    }
    return 0;
}
