// SPDX-License-Identifier: Apache-2.0
#include "nfrm/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "nfrm/error.hpp"

namespace nfrm {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double grid_step(const std::vector<double>& g) { return g.size() > 1 ? g[1] - g[0] : 0.0; }

std::vector<double> window_points(const std::vector<double>& grid, const std::vector<double>& centers,
                                  double halfwidth)
{
    std::vector<double> out;
    for (double g : grid)
        for (double c : centers)
            if (std::abs(angle_diff(g, c)) <= halfwidth + 1e-12) {
                out.push_back(g);
                break;
            }
    return out;
}

} // namespace

EstimationOptions estimation_options(const ScenarioConfig& config)
{
    EstimationOptions o;
    o.angles = config.dictionary_angles();
    o.delay_step = config.delay_step;
    o.support_db = config.support_db;
    o.l_max = config.l_max;
    o.stop_fraction = config.stop_fraction;
    o.refine = config.refine;
    o.subsets = config.subsets;
    return o;
}

std::vector<double> delay_grid_from_pdp(const MeasurementSet& set, double step, double support_db)
{
    if (!(step > 0.0) || !(support_db > 0.0))
        throw Error(ErrorCode::invalid_argument, "delay step and support must be positive");
    const auto f = static_cast<std::size_t>(set.grid.num_tones);
    std::vector<double> power(f, 0.0);
    for (const auto& r : set.responses)
        for (std::size_t m = 0; m < r.rx_count(); ++m)
            for (std::size_t n = 0; n < r.tx_count(); ++n) {
                const Pdp pdp = compute_pdp(r.tones(m, n), set.grid, Window::hann);
                for (std::size_t q = 0; q < f; ++q)
                    power[q] += pdp.magnitudes[q] * pdp.magnitudes[q];
            }
    const double peak = *std::max_element(power.begin(), power.end());
    if (!(peak > 0.0))
        throw Error(ErrorCode::empty_channel, "measurements carry no energy");
    const double floor = peak * std::pow(10.0, -support_db / 10.0);

    // The support is the complement of the longest circular run of quiet bins.
    std::size_t best_len = 0, best_start = 0;
    for (std::size_t s = 0; s < f; ++s) {
        if (power[s] >= floor || power[(s + f - 1) % f] < floor)
            continue;
        std::size_t len = 0;
        while (len < f && power[(s + len) % f] < floor)
            ++len;
        if (len > best_len) {
            best_len = len;
            best_start = s;
        }
    }
    long lo = 0;
    long hi = static_cast<long>(f) - 1;
    if (best_len > 0) {
        lo = static_cast<long>(best_start + best_len);
        hi = static_cast<long>(best_start + f) - 1;
        if (lo >= static_cast<long>(f)) {
            lo -= static_cast<long>(f);
            hi -= static_cast<long>(f);
        }
    }
    const long pad = 4;
    const double bin = 1.0 / set.grid.bandwidth;
    const double start = static_cast<double>(lo - pad) * bin;
    const double stop = static_cast<double>(hi + pad) * bin;
    const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    std::vector<double> out;
    for (long i = 0; i <= count; ++i)
        out.push_back(start + static_cast<double>(i) * step);
    return out;
}

std::vector<std::vector<std::size_t>> auto_subsets(const MeasurementPlan& plan)
{
    std::vector<Vec2> centers;
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t k = 0; k < plan.placements.size(); ++k) {
        Vec2 c;
        for (const auto& p : plan.placements[k].rx_positions)
            c += p;
        c = (1.0 / static_cast<double>(plan.placements[k].rx_positions.size())) * c;
        std::size_t g = 0;
        while (g < centers.size() && distance(centers[g], c) > 1e-9)
            ++g;
        if (g == centers.size()) {
            centers.push_back(c);
            groups.emplace_back();
        }
        groups[g].push_back(k);
    }
    return groups;
}

Estimate estimate(const MeasurementSet& set, const EstimationOptions& options)
{
    set.validate();

    Estimate est;
    est.rx_reference = set.plan.rx_centroid();
    const MeasurementSet full = with_rx_reference(set, est.rx_reference);
    const double step = options.delay_step.value_or(0.5 / set.grid.bandwidth);
    est.delay_grid = delay_grid_from_pdp(full, step, options.support_db);

    DictionaryGrid grid = options.angles;
    grid.delay = est.delay_grid;
    const RefineOptions refine{grid_step(grid.aoa), grid_step(grid.aod), step, 4};

    est.extraction = omp_extract(full, grid, options.l_max, options.stop_fraction);
    if (est.extraction.paths.empty())
        throw Error(ErrorCode::empty_channel, "no paths were extracted");
    if (options.refine)
        est.extraction = refine_extraction(full, est.extraction, refine);
    const auto& paths = est.extraction.paths;
    est.anchor = 0;
    const PwaPathParams& anchor = paths[est.anchor];
    const double anchor_abs = est.extraction.absolute_delay(est.anchor);

    std::vector<double> aoas, aods;
    for (const auto& p : paths) {
        aoas.push_back(p.aoa);
        aods.push_back(p.aod);
    }
    DictionaryGrid guided;
    guided.aoa = window_points(options.angles.aoa, aoas, options.subset_window);
    guided.aod = window_points(options.angles.aod, aods, options.subset_window);
    const double sub_step = step / options.subset_delay_oversample;
    guided.delay = uniform_grid(est.delay_grid.front(), est.delay_grid.back(), sub_step);
    const RefineOptions sub_refine{refine.aoa_halfwidth, refine.aod_halfwidth, sub_step, refine.sweeps};

    const auto groups = options.subsets.empty() ? auto_subsets(set.plan) : options.subsets;
    for (const auto& g : groups) {
        SubsetEstimate s;
        s.measurements = g;
        MeasurementSet part = subset(set, g);
        s.reference = part.plan.rx_centroid();
        part = with_rx_reference(part, s.reference);
        if (guided.aoa.empty() || guided.aod.empty()) {
            est.subsets.push_back(std::move(s));
            continue;
        }
        s.extraction = omp_extract(part, guided, options.l_max, options.stop_fraction);
        if (options.refine && !s.extraction.paths.empty())
            s.extraction = refine_extraction(part, s.extraction, sub_refine);

        const double predicted =
            anchor_abs - dot(unit(anchor.aoa), s.reference - est.rx_reference) / kSpeedOfLight;
        const double delay_tol = 4.0 * step;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < s.extraction.paths.size(); ++j) {
            const double da = std::abs(angle_diff(s.extraction.paths[j].aoa, anchor.aoa));
            const double dd = std::abs(s.extraction.absolute_delay(j) - predicted);
            if (da > options.subset_window || dd > delay_tol)
                continue;
            const double cost = da / options.subset_window + dd / delay_tol;
            if (cost < best) {
                best = cost;
                s.anchor_match = j;
            }
        }
        if (s.anchor_match)
            est.bearings.push_back({s.reference, s.extraction.paths[*s.anchor_match].aoa, 1.0});
        est.subsets.push_back(std::move(s));
    }

    est.fix = triangulate(est.bearings);
    const double tau_anchor = distance(est.fix.point, est.rx_reference) / kSpeedOfLight;
    std::vector<double> deltas;
    for (const auto& p : paths)
        deltas.push_back(p.delta);
    est.taus = recover_abs_delays(tau_anchor, anchor.delta, deltas);

    std::vector<int> parities;
    std::vector<double> alphas;
    for (std::size_t l = 0; l < paths.size(); ++l) {
        est.image_points.push_back(l == est.anchor ? est.fix.point
                                                   : image_from_polar(est.rx_reference, paths[l].aoa, est.taus[l]));
        auto data = full.responses;
        const auto others = model_responses(full, est.extraction, l);
        for (std::size_t k = 0; k < data.size(); ++k)
            for (std::size_t i = 0; i < data[k].data().size(); ++i)
                data[k].data()[i] -= others[k].data()[i];
        est.parities.push_back(estimate_parity(full, paths[l], est.taus[l], &data));
        parities.push_back(est.parities.back().parity);
        alphas.push_back(est.parities.back().alpha);
    }
    for (const auto& rm : assemble_rm(est.extraction, tau_anchor, est.anchor, parities, alphas))
        est.rm.push_back(rebase_rx_reference(rm, est.rx_reference, set.plan.rx_ref));
    return est;
}

Truth scenario_truth(const ScenarioConfig& config)
{
    Truth t;
    t.paths = geometric_paths(config.room(), config.tx_ref, config.rx_ref, config.max_order, config.reflection_loss,
                              &t.images);
    return t;
}

MeasurementSet simulate_scenario(const ScenarioConfig& config)
{
    const Truth truth = scenario_truth(config);
    return simulate_campaign(truth.paths, config.plan(), config.grid, config.snr_db, config.coherent, config.seed);
}

std::vector<std::optional<PathError>> match_paths(const Estimate& est, const Truth& truth)
{
    struct Pair {
        double dist;
        std::size_t e, t;
    };
    std::vector<Pair> pairs;
    for (std::size_t e = 0; e < est.image_points.size(); ++e)
        for (std::size_t t = 0; t < truth.images.size(); ++t)
            pairs.push_back({distance(est.image_points[e], truth.images[t].image_point), e, t});
    std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.dist < b.dist; });

    std::vector<std::optional<PathError>> out(est.image_points.size());
    std::vector<bool> used(truth.images.size(), false);
    for (const auto& p : pairs) {
        if (out[p.e] || used[p.t])
            continue;
        used[p.t] = true;
        const RmPathParams& r = est.rm[p.e];
        const RmPathParams& g = truth.paths[p.t];
        PathError err;
        err.truth_index = p.t;
        err.delay_ns = (r.tau - g.tau) * 1e9;
        err.aoa_deg = angle_diff(r.aoa, g.aoa) / kDeg;
        err.aod_deg = angle_diff(r.aod, g.aod) / kDeg;
        err.image_m = p.dist;
        err.parity_correct = r.parity == g.parity;
        out[p.e] = err;
    }
    return out;
}

RunReport evaluate(const ScenarioConfig& config)
{
    const auto t0 = std::chrono::steady_clock::now();
    RunReport report;
    report.scenario = config.name;
    report.truth = scenario_truth(config);
    const MeasurementSet set =
        simulate_campaign(report.truth->paths, config.plan(), config.grid, config.snr_db, config.coherent, config.seed);
    report.estimate = estimate(set, estimation_options(config));
    report.errors = match_paths(report.estimate, *report.truth);
    for (const auto& e : report.errors)
        if (e && report.truth->images[e->truth_index].is_los())
            report.los_error_m = e->image_m;
    report.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b)
{
    CounterRng rng(master, (a << 32) ^ b);
    return rng.next_u64();
}

std::vector<SweepRow> sweep(const ScenarioConfig& config, const std::string& parameter,
                            const std::vector<double>& values, int runs)
{
    if (parameter != "snr" && parameter != "snr_db")
        throw Error(ErrorCode::invalid_argument, "cannot sweep '" + parameter + "' (supported: snr)");
    if (runs < 1)
        throw Error(ErrorCode::invalid_argument, "sweep needs at least one run per value");
    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < values.size(); ++i)
        for (int r = 0; r < runs; ++r) {
            ScenarioConfig c = config;
            c.snr_db = values[i];
            c.seed = derive_seed(config.seed, i, static_cast<std::uint64_t>(r));
            SweepRow row;
            row.value = values[i];
            row.run = r;
            row.seed = c.seed;
            try {
                const RunReport rep = evaluate(c);
                row.los_error_m = rep.los_error_m;
                row.paths = rep.estimate.extraction.paths.size();
                double sum = 0.0;
                std::size_t n = 0;
                for (const auto& e : rep.errors)
                    if (e) {
                        sum += e->image_m;
                        ++n;
                    }
                if (n)
                    row.mean_image_error_m = sum / static_cast<double>(n);
            } catch (const Error&) {
                // A failed run keeps empty error fields and counts as unlocalized.
            }
            rows.push_back(row);
        }
    return rows;
}

} // namespace nfrm
