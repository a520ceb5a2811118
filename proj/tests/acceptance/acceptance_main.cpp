// SPDX-License-Identifier: Apache-2.0
//
// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "nfrm/channel.hpp"
#include "nfrm/dataset.hpp"
#include "nfrm/estimation.hpp"
#include "nfrm/geometry.hpp"
#include "nfrm/output.hpp"
#include "nfrm/pipeline.hpp"
#include "nfrm/scenario.hpp"
#include "oracles.hpp"

using namespace nfrm;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Random convex polygon around the origin and a point strictly inside it.
Room random_room(std::mt19937_64& rng, std::vector<std::pair<oracle::P, oracle::P>>& walls)
{
    std::uniform_int_distribution<int> nv(3, 7);
    std::uniform_real_distribution<double> r(4.0, 15.0);
    std::uniform_real_distribution<double> jitter(0.0, 1.0);
    const int n = nv(rng);
    std::vector<Vec2> v;
    for (int i = 0; i < n; ++i) {
        const double a = 2 * kPi * (i + 0.3 * jitter(rng)) / n;
        const double rad = r(rng);
        v.push_back({rad * std::cos(a), rad * std::sin(a)});
    }
    std::vector<bool> refl(static_cast<std::size_t>(n), true);
    walls.clear();
    for (std::size_t i = 0; i < v.size(); ++i)
        walls.push_back({oracle::to_p(v[i]), oracle::to_p(v[(i + 1) % v.size()])});
    return Room::from_polygon(v, refl, Vec2{0, 0});
}

Vec2 random_inside(const Room& room, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    for (;;) {
        const Vec2 p{u(rng), u(rng)};
        if (room.contains(p))
            return p;
    }
}

// 1 ---------------------------------------------------------------------------
Outcome image_map_correctness()
{
    const auto t0 = Clock::now();
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> d(-1.5, 1.5);
    std::uniform_int_distribution<int> order(0, 3);
    double worst = 0.0;
    std::size_t checks = 0;
    std::vector<std::pair<oracle::P, oracle::P>> walls;
    for (int trial = 0; trial < 1000; ++trial) {
        const Room room = random_room(rng, walls);
        const Vec2 tx = random_inside(room, rng);
        const Vec2 probe = tx + Vec2{d(rng), d(rng)};
        for (const auto& img : enumerate_images(room, tx, order(rng))) {
            const auto o = oracle::mirror_sequence(oracle::to_p(probe), walls, img.wall_sequence);
            worst = std::max(worst, distance(img.image_of(probe, tx), {o.x, o.y}));
            ++checks;
        }
    }
    const double t = seconds_since(t0);
    return {worst <= 1e-9 && t < 10.0, fmt("%zu images over 1000 rooms, max error %.3g m, %.2f s", checks, worst, t)};
}

// 2 ---------------------------------------------------------------------------
Outcome distance_equivalence()
{
    const auto cfg = load_scenario("paper-room");
    const Room room = cfg.room();
    const References refs{cfg.tx_ref, cfg.rx_ref};
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> d(-0.5, 0.5);

    double worst_unfold = 0.0;
    std::size_t unfolded = 0;
    for (const auto& img : enumerate_images(room, cfg.tx_ref, 3, cfg.reflection_loss)) {
        if (!validate_path(room, img.wall_sequence, cfg.tx_ref, cfg.rx_ref).feasible)
            continue;
        const auto p = image_to_rm_params(img, cfg.tx_ref, cfg.rx_ref);
        for (int i = 0; i < 50; ++i) {
            const Vec2 xr = cfg.rx_ref + Vec2{d(rng), std::abs(d(rng))};
            const Vec2 xt = cfg.tx_ref + Vec2{d(rng), d(rng)};
            const auto v = validate_path(room, img.wall_sequence, xt, xr);
            if (!v.feasible)
                continue;
            worst_unfold = std::max(worst_unfold, std::abs(path_distance_rm(p, xr, xt, refs) - v.length()));
            ++unfolded;
        }
    }

    std::uniform_real_distribution<double> ang(-kPi, kPi), pos(-10.0, 10.0), tau(5e-9, 2e-7);
    double worst_forms = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const auto p = make_rm_params({1, 0}, tau(rng), ang(rng), ang(rng), i % 2 ? 1 : -1);
        const References r{{pos(rng), pos(rng)}, {pos(rng), pos(rng)}};
        const Vec2 xr = r.rx + Vec2{d(rng), d(rng)}, xt = r.tx + Vec2{d(rng), d(rng)};
        worst_forms = std::max(worst_forms, std::abs(path_distance_rm(p, xr, xt, r) - path_distance_tx_form(p, xr, xt, r)));
    }
    return {unfolded > 0 && worst_unfold <= 1e-9 && worst_forms <= 1e-10,
            fmt("%zu unfolded checks max %.3g m; RX/TX forms over 10000 inputs max %.3g m", unfolded, worst_unfold,
                worst_forms)};
}

// 3 ---------------------------------------------------------------------------
Outcome pwa_second_order()
{
    const auto cfg = load_scenario("paper-room");
    const auto truth = scenario_truth(cfg);
    std::size_t los = 0;
    while (!truth.images[los].is_los())
        ++los;
    const auto& p = truth.paths[los];
    const References refs{cfg.tx_ref, cfg.rx_ref};
    const Vec2 dr = unit(0.7), dt = unit(-2.1);
    auto err = [&](double e) {
        const Vec2 xr = refs.rx + e * dr, xt = refs.tx + e * dt;
        return std::abs(path_distance_pwa(p, xr, xt, refs) - path_distance_rm(p, xr, xt, refs));
    };
    bool ok = err(0.0) == 0.0;
    std::string detail = fmt("error at references %.3g m; ratios", err(0.0));
    for (double e : {0.01, 0.02, 0.04}) {
        const double ratio = err(2 * e) / err(e);
        ok = ok && ratio >= 3.8 && ratio <= 4.2;
        detail += fmt(" %.4f", ratio);
    }
    return {ok, detail};
}

// 4 ---------------------------------------------------------------------------
Outcome paper_room_round_trip()
{
    const auto t0 = Clock::now();
    const auto cfg = load_scenario("paper-room");
    const auto truth = scenario_truth(cfg);
    const auto set = simulate_scenario(cfg);

    // Grid extraction about the full-aperture centroid, as the pipeline runs it.
    const Vec2 centroid = set.plan.rx_centroid();
    const auto full = with_rx_reference(set, centroid);
    const auto opts = estimation_options(cfg);
    const double step = 0.5 / cfg.grid.bandwidth;
    DictionaryGrid grid = opts.angles;
    grid.delay = delay_grid_from_pdp(full, step, opts.support_db);
    const auto ext = omp_extract(full, grid, opts.l_max, opts.stop_fraction);

    bool ok = ext.paths.size() == truth.paths.size() && truth.paths.size() == 4;
    double worst_delay = 0.0, worst_aoa = 0.0, worst_aod = 0.0;
    std::vector<bool> used(truth.paths.size(), false);
    for (std::size_t l = 0; l < ext.paths.size(); ++l) {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < truth.paths.size(); ++t) {
            const auto tr = rebase_rx_reference(truth.paths[t], cfg.rx_ref, centroid);
            const double d = std::abs(ext.absolute_delay(l) - tr.tau);
            if (!used[t] && d < best_d) {
                best_d = d;
                best = t;
            }
        }
        if (!std::isfinite(best_d)) {
            ok = false;
            break;
        }
        used[best] = true;
        const auto tr = rebase_rx_reference(truth.paths[best], cfg.rx_ref, centroid);
        worst_delay = std::max(worst_delay, best_d);
        worst_aoa = std::max(worst_aoa, std::abs(angle_diff(ext.paths[l].aoa, tr.aoa)));
        worst_aod = std::max(worst_aod, std::abs(angle_diff(ext.paths[l].aod, tr.aod)));
    }
    ok = ok && worst_delay <= step + 1e-15 && worst_aoa <= 1.0 * kDeg + 1e-12 && worst_aod <= 1.0 * kDeg + 1e-12;

    const auto report = evaluate(cfg);
    double worst_image = 0.0;
    std::size_t matched = 0;
    for (const auto& e : report.errors)
        if (e) {
            worst_image = std::max(worst_image, e->image_m);
            ++matched;
        }
    const double t = seconds_since(t0);
    ok = ok && matched == 4 && worst_image <= 0.15 && t < 60.0;
    return {ok, fmt("%zu paths; grid errors delay %.3f ns, aoa %.3f deg, aod %.3f deg; %zu images within %.4f m; %.1f s",
                    ext.paths.size(), worst_delay * 1e9, worst_aoa / kDeg, worst_aod / kDeg, matched, worst_image, t)};
}

// 5 ---------------------------------------------------------------------------
Outcome noncoherence_invariance()
{
    const auto cfg = load_scenario("paper-room");
    const auto set = simulate_scenario(cfg);
    auto rotated = set;
    CounterRng rng(505, 0);
    for (auto& block : rotated.responses) {
        const cdouble ph = std::polar(1.0, 2 * kPi * rng.uniform());
        for (auto& v : block.data())
            v *= ph;
    }

    auto opts = estimation_options(cfg);
    opts.refine = false;
    const auto a = estimate(set, opts);
    const auto b = estimate(rotated, opts);
    bool same = a.extraction.atoms == b.extraction.atoms && a.subsets.size() == b.subsets.size();
    for (std::size_t l = 0; same && l < a.extraction.paths.size(); ++l)
        same = a.extraction.paths[l].aoa == b.extraction.paths[l].aoa &&
               a.extraction.paths[l].aod == b.extraction.paths[l].aod &&
               a.extraction.paths[l].delta == b.extraction.paths[l].delta;
    for (std::size_t s = 0; same && s < a.subsets.size(); ++s)
        same = a.subsets[s].extraction.atoms == b.subsets[s].extraction.atoms &&
               a.subsets[s].anchor_match == b.subsets[s].anchor_match;
    same = same && a.fix.point == b.fix.point && a.image_points == b.image_points;

    opts.refine = true;
    const auto ra = estimate(set, opts);
    const auto rb = estimate(rotated, opts);
    double drift = 0.0;
    for (std::size_t l = 0; l < ra.image_points.size() && l < rb.image_points.size(); ++l)
        drift = std::max(drift, distance(ra.image_points[l], rb.image_points[l]));
    const bool refined_ok = ra.image_points.size() == rb.image_points.size() && drift <= 1e-6;
    return {same && refined_ok,
            fmt("grid selections and fix %s; refined image points differ by %.3g m", same ? "bit-identical" : "DIFFER",
                drift)};
}

// 6 ---------------------------------------------------------------------------
Outcome snr_monotonicity()
{
    auto cfg = load_scenario("paper-room");
    cfg.aoa_grid = {0, 180, 2};
    cfg.aod_grid = {-176, 180, 4};
    cfg.seed = 606;
    const std::vector<double> snrs{0, 10, 20, 30};
    const auto rows = sweep(cfg, "snr_db", snrs, 50);
    std::vector<double> med;
    for (double s : snrs) {
        std::vector<double> e;
        for (const auto& r : rows)
            if (r.value == s)
                e.push_back(r.los_error_m.value_or(std::numeric_limits<double>::infinity()));
        med.push_back(median(e));
    }
    bool ok = med.back() <= 0.15;
    for (std::size_t i = 1; i < med.size(); ++i)
        ok = ok && med[i] <= med[i - 1];
    return {ok, fmt("median LOS error 0/10/20/30 dB: %.4f %.4f %.4f %.4f m", med[0], med[1], med[2], med[3])};
}

// 7 ---------------------------------------------------------------------------
Outcome omp_oracle_equivalence()
{
    std::mt19937_64 rng(707);
    std::uniform_real_distribution<double> ux(1.0, 19.0), uy(1.5, 9.0);
    int agree = 0;
    for (int trial = 0; trial < 20; ++trial) {
        auto cfg = load_scenario("paper-room");
        cfg.room_vertices = {{0, 0}, {20, 0}, {20, 10}, {0, 10}};
        cfg.rx_ref = {ux(rng) * 0.5, 0.5};
        cfg.tx_ref = {ux(rng), uy(rng)};
        cfg.grid.num_tones = 32;
        cfg.snr_db = 10.0;
        cfg.seed = static_cast<std::uint64_t>(trial) + 1;
        const auto set = with_rx_reference(simulate_scenario(cfg), cfg.plan().rx_centroid());
        const DictionaryGrid grid{uniform_grid(0.0, kPi, 4 * kDeg), uniform_grid(-176 * kDeg, kPi, 8 * kDeg),
                                  delay_grid_from_pdp(set, 1e-9, 30.0)};
        double best = -1.0;
        AtomIndex arg;
        for (std::size_t i = 0; i < grid.aoa.size(); ++i)
            for (std::size_t j = 0; j < grid.aod.size(); ++j)
                for (std::size_t d = 0; d < grid.delay.size(); ++d) {
                    const double s = atom_score(set, grid.aoa[i], grid.aod[j], grid.delay[d]);
                    if (s > best) {
                        best = s;
                        arg = {i, j, d};
                    }
                }
        const auto r = omp_extract(set, grid, 1, 0.0);
        if (r.atoms.size() == 1 && r.atoms[0] == arg)
            ++agree;
    }
    return {agree == 20, fmt("%d of 20 scenarios select the exhaustive-search atom", agree)};
}

// 8 ---------------------------------------------------------------------------
struct ParityTally {
    int odd = 0;
    int wrong = 0;
    int ambiguous = 0;
};

ParityTally parity_ensemble(std::optional<double> snr_db)
{
    std::mt19937_64 rng(808);
    std::uniform_real_distribution<double> ux(3.0, 17.0), uy(3.0, 8.0), side(0.0, 1.0);
    ParityTally tally;
    const FrequencyGrid grid{10e9, 500e6, 64};
    const double lam = grid.wavelength();
    for (int trial = 0; trial < 100; ++trial) {
        const Room room = Room::rectangle(0, 0, 20, 10);
        const Vec2 tx{ux(rng), uy(rng)};
        const Vec2 rx{ux(rng) - 0.15, 1.0};
        const double tilt = 2 * kPi * side(rng);
        // 10 lambda RX track and a 2 lambda TX triangle
        const std::vector<double> offsets{0.0, 5 * lam, 10 * lam}, spacings{0.5 * lam, lam};
        std::vector<Vec2> txp;
        for (int i = 0; i < 3; ++i)
            txp.push_back(tx + (2.0 * lam / std::sqrt(3.0)) * unit(tilt + 2 * kPi * i / 3));
        const auto plan = plan_linear_track(rx, offsets, spacings, tx, txp);

        std::vector<ImagePath> images;
        const auto paths = geometric_paths(room, tx, rx, 1, 0.7, &images);
        std::vector<std::size_t> single;
        for (std::size_t l = 0; l < paths.size(); ++l)
            if (images[l].order() == 1)
                single.push_back(l);
        const std::size_t pick = single[static_cast<std::size_t>(trial) % single.size()];
        const auto& path = paths[pick];
        const auto set = simulate_campaign(std::span(&path, 1), plan, grid, snr_db, false,
                                           derive_seed(808, static_cast<std::uint64_t>(trial), 0));
        PwaPathParams pwa;
        pwa.aoa = path.aoa;
        pwa.aod = path.aod;
        const auto est = estimate_parity(set, pwa, path.tau);
        if (est.ambiguous)
            ++tally.ambiguous;
        else if (est.parity == -1)
            ++tally.odd;
        else
            ++tally.wrong;
    }
    return tally;
}

Outcome parity_estimation()
{
    const auto noisy = parity_ensemble(20.0);
    const auto clean = parity_ensemble(std::nullopt);
    return {noisy.odd >= 95 && clean.wrong == 0 && clean.ambiguous == 0,
            fmt("20 dB: %d of 100 select s = -1 (%d wrong, %d ambiguous); noiseless: %d wrong, %d ambiguous", noisy.odd,
                noisy.wrong, noisy.ambiguous, clean.wrong, clean.ambiguous)};
}

// 9 ---------------------------------------------------------------------------
Outcome determinism_and_formats()
{
    auto cfg = load_scenario("paper-room");
    cfg.snr_db = 12.0;
    cfg.seed = 909;
    const auto a = simulate_scenario(cfg);
    const auto b = simulate_scenario(cfg);
    const auto bytes = encode_dataset(a);
    const bool same_seed = bytes == encode_dataset(b);
    const auto back = decode_dataset(bytes);
    const bool round_trip = back.responses == a.responses && encode_dataset(back) == bytes;

    cfg.snr_db.reset();
    const auto clean = simulate_scenario(cfg);
    double worst = 0.0;
    for (const auto& block : clean.responses)
        for (std::size_t m = 0; m < block.rx_count(); ++m)
            for (std::size_t n = 0; n < block.tx_count(); ++n) {
                const auto r = block.tones(m, n);
                const auto pdp = compute_pdp(r, clean.grid, Window::rectangular);
                double ef = 0.0, et = 0.0;
                for (const auto& v : r)
                    ef += std::norm(v);
                for (double v : pdp.magnitudes)
                    et += v * v;
                worst = std::max(worst, std::abs(et - ef) / ef);
            }

    auto small = load_scenario("paper-room");
    small.aoa_grid = {0, 180, 3};
    small.aod_grid = {-177, 180, 6};
    small.snr_db = 20.0;
    const bool same_report = report_json(evaluate(small)) == report_json(evaluate(small));
    return {same_seed && round_trip && worst <= 1e-9 && same_report,
            fmt("dataset round trip %s; same-seed datasets %s; reports %s; Parseval max relative error %.3g",
                round_trip ? "bit-exact" : "DIFFERS", same_seed ? "byte-identical" : "DIFFER",
                same_report ? "byte-identical" : "DIFFER", worst)};
}

} // namespace

int main(int argc, char** argv)
{
    // Optional arguments select criteria by number.
    std::vector<bool> run(10, argc == 1);
    for (int a = 1; a < argc; ++a) {
        const int n = std::atoi(argv[a]);
        if (n >= 1 && n <= 9)
            run[static_cast<std::size_t>(n)] = true;
    }
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"image-map correctness", image_map_correctness},
        {"distance equivalence", distance_equivalence},
        {"PWA second-order error", pwa_second_order},
        {"paper-room round trip", paper_room_round_trip},
        {"non-coherence invariance", noncoherence_invariance},
        {"SNR monotonicity", snr_monotonicity},
        {"OMP oracle equivalence", omp_oracle_equivalence},
        {"parity estimation", parity_estimation},
        {"determinism and formats", determinism_and_formats},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!run[i + 1])
            continue;
        Outcome o;
        const auto t0 = Clock::now();
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s %zu %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(),
                    seconds_since(t0));
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
