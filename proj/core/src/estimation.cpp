// SPDX-License-Identifier: Apache-2.0
#include "nfrm/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

#include "fft.hpp"
#include "nfrm/error.hpp"

namespace nfrm {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_strictly_increasing(const std::vector<double>& v, const char* what)
{
    if (v.empty())
        throw Error(ErrorCode::invalid_argument, std::string("dictionary grid '") + what + "' is empty");
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] > v[i - 1]))
            throw Error(ErrorCode::invalid_argument, std::string("dictionary grid '") + what + "' is not increasing");
}

void require_measurements(const MeasurementSet& set)
{
    if (set.responses.empty())
        throw Error(ErrorCode::invalid_argument, "measurement set is empty");
    set.validate();
}

// Maps a delay grid onto the bins of a zero-padded inverse FFT when every
// delay is an integer multiple of 1 / (P * bandwidth).
struct FftDelayMap {
    std::size_t length = 0;
    std::vector<std::size_t> bins;
};

std::optional<FftDelayMap> fft_delay_map(const std::vector<double>& delays, const FrequencyGrid& grid)
{
    const double bandwidth = grid.bandwidth;
    const double step = delays.size() > 1 ? delays[1] - delays[0] : 1.0 / bandwidth;
    const double p_real = 1.0 / (step * bandwidth);
    const long p = std::lround(p_real);
    if (p < 1 || p > 64 || std::abs(p_real - static_cast<double>(p)) > 1e-6)
        return std::nullopt;
    FftDelayMap map;
    map.length = static_cast<std::size_t>(p) * static_cast<std::size_t>(grid.num_tones);
    const long len = static_cast<long>(map.length);
    for (double d : delays) {
        const double x = d * static_cast<double>(p) * bandwidth;
        const double r = std::round(x);
        if (std::abs(x - r) > 1e-6)
            return std::nullopt;
        long q = static_cast<long>(r) % len;
        if (q < 0)
            q += len;
        map.bins.push_back(static_cast<std::size_t>(q));
    }
    return map;
}

struct Dims {
    std::size_t k, m, n, f;
};

Dims dims_of(const MeasurementSet& set)
{
    return {set.responses.size(), set.plan.rx_count(), set.plan.tx_count(),
            static_cast<std::size_t>(set.grid.num_tones)};
}

// Per-placement least-squares gains for a fixed set of atoms, and the residual.
struct Fit {
    std::vector<std::vector<cdouble>> gains; // [path][k]
    std::vector<ChannelResponse> residual;
    double residual_energy = 0.0;
};

Fit fit_gains(const MeasurementSet& set, const std::vector<std::vector<ChannelResponse>>& atoms)
{
    const Dims d = dims_of(set);
    const std::size_t rows = d.m * d.n * d.f;
    const std::size_t cols = atoms.size();
    Fit fit;
    fit.gains.assign(cols, std::vector<cdouble>(d.k));
    fit.residual = set.responses;
    for (std::size_t k = 0; k < d.k; ++k) {
        Eigen::MatrixXcd a(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (std::size_t l = 0; l < cols; ++l)
            for (std::size_t i = 0; i < rows; ++i)
                a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) = atoms[l][k].data()[i];
        const Eigen::Map<const Eigen::VectorXcd> r(set.responses[k].data().data(), static_cast<Eigen::Index>(rows));
        const Eigen::VectorXcd g = a.colPivHouseholderQr().solve(r);
        Eigen::Map<Eigen::VectorXcd> res(fit.residual[k].data().data(), static_cast<Eigen::Index>(rows));
        res = r - a * g;
        for (std::size_t l = 0; l < cols; ++l)
            fit.gains[l][k] = g(static_cast<Eigen::Index>(l));
        fit.residual_energy += res.squaredNorm();
    }
    return fit;
}

std::vector<ChannelResponse> atom_responses(const MeasurementSet& set, double aoa, double aod, double delay)
{
    std::vector<ChannelResponse> out;
    out.reserve(set.responses.size());
    for (std::size_t k = 0; k < set.responses.size(); ++k)
        out.push_back(atom_response(set, k, aoa, aod, delay));
    return out;
}

// Sorts paths by energy and shifts delays so the earliest sits at zero.
ExtractionResult finalize(std::vector<PwaPathParams> paths, std::vector<AtomIndex> atoms, double initial_energy,
                          double residual_energy, std::vector<double> history)
{
    ExtractionResult result;
    std::vector<std::size_t> order(paths.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return paths[a].energy() > paths[b].energy(); });
    double earliest = std::numeric_limits<double>::infinity();
    for (const auto& p : paths)
        earliest = std::min(earliest, p.delta);
    if (paths.empty())
        earliest = 0.0;
    for (std::size_t i : order) {
        PwaPathParams p = paths[i];
        p.delta -= earliest;
        result.paths.push_back(std::move(p));
        if (!atoms.empty())
            result.atoms.push_back(atoms[i]);
    }
    result.delay_reference = earliest;
    result.initial_energy = initial_energy;
    result.residual_energy = residual_energy;
    result.iterations = static_cast<int>(history.size());
    result.residual_history = std::move(history);
    return result;
}

} // namespace

std::vector<double> uniform_grid(double start, double stop, double step)
{
    if (!(step > 0.0) || !(stop >= start))
        throw Error(ErrorCode::invalid_argument, "uniform grid needs step > 0 and stop >= start");
    std::vector<double> out;
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(start + static_cast<double>(i) * step);
    return out;
}

void DictionaryGrid::validate() const
{
    require_strictly_increasing(aoa, "aoa");
    require_strictly_increasing(aod, "aod");
    require_strictly_increasing(delay, "delay");
}

cdouble steering_phase(double aoa, double aod, double delay, const Vec2& x_r, const Vec2& x_t,
                       const References& refs, double frequency)
{
    const double excess = delay - dot(unit(aoa), x_r - refs.rx) / kSpeedOfLight -
                          dot(unit(aod), x_t - refs.tx) / kSpeedOfLight;
    return std::polar(1.0, -kTwoPi * frequency * excess);
}

ChannelResponse atom_response(const MeasurementSet& set, std::size_t k, double aoa, double aod, double delay)
{
    const auto& pl = set.plan.placements.at(k);
    const References refs = set.plan.references();
    const auto tones = set.grid.tones();
    ChannelResponse a(pl.rx_positions.size(), pl.tx_positions.size(), tones.size());
    for (std::size_t m = 0; m < pl.rx_positions.size(); ++m)
        for (std::size_t n = 0; n < pl.tx_positions.size(); ++n) {
            auto out = a.tones(m, n);
            for (std::size_t f = 0; f < tones.size(); ++f)
                out[f] = steering_phase(aoa, aod, delay, pl.rx_positions[m], pl.tx_positions[n], refs, tones[f]);
        }
    return a;
}

double atom_score(const MeasurementSet& set, double aoa, double aod, double delay,
                  const std::vector<ChannelResponse>* data)
{
    const auto& r = data ? *data : set.responses;
    const Dims d = dims_of(set);
    const References refs = set.plan.references();
    const Vec2 ur = unit(aoa);
    const Vec2 ut = unit(aod);
    const double f0 = set.grid.tone(0);
    const double df = set.grid.spacing();
    double score = 0.0;
    for (std::size_t k = 0; k < d.k; ++k) {
        const auto& pl = set.plan.placements[k];
        cdouble corr{0.0, 0.0};
        for (std::size_t m = 0; m < d.m; ++m) {
            const double pr = dot(ur, pl.rx_positions[m] - refs.rx) / kSpeedOfLight;
            for (std::size_t n = 0; n < d.n; ++n) {
                const double excess = delay - pr - dot(ut, pl.tx_positions[n] - refs.tx) / kSpeedOfLight;
                // conj(atom) = exp(+j 2 pi f excess), advanced tone by tone
                cdouble w = std::polar(1.0, kTwoPi * f0 * excess);
                const cdouble step = std::polar(1.0, kTwoPi * df * excess);
                const auto tones = r[k].tones(m, n);
                cdouble acc{0.0, 0.0};
                for (std::size_t f = 0; f < d.f; ++f) {
                    acc += w * tones[f];
                    w *= step;
                }
                corr += acc;
            }
        }
        score += std::norm(corr);
    }
    return score / static_cast<double>(d.m * d.n * d.f);
}

ExtractionResult omp_extract(const MeasurementSet& set, const DictionaryGrid& grid, int l_max, double stop_fraction)
{
    require_measurements(set);
    grid.validate();
    if (l_max < 1)
        throw Error(ErrorCode::invalid_argument, "l_max must be >= 1");
    if (!(stop_fraction >= 0.0 && stop_fraction < 1.0))
        throw Error(ErrorCode::invalid_argument, "stop_fraction must lie in [0, 1)");

    const Dims d = dims_of(set);
    const std::size_t na = grid.aoa.size();
    const std::size_t nd = grid.aod.size();
    const std::size_t nj = grid.delay.size();
    const References refs = set.plan.references();
    const auto tones = set.grid.tones();
    const double atom_norm = static_cast<double>(d.m * d.n * d.f);

    // Spatial phase tables: wr[k][a][m][f], wt[k][d][n][f].
    std::vector<cdouble> wr(d.k * na * d.m * d.f);
    std::vector<cdouble> wt(d.k * nd * d.n * d.f);
    for (std::size_t k = 0; k < d.k; ++k) {
        const auto& pl = set.plan.placements[k];
        for (std::size_t a = 0; a < na; ++a) {
            const Vec2 u = unit(grid.aoa[a]);
            for (std::size_t m = 0; m < d.m; ++m) {
                const double proj = dot(u, pl.rx_positions[m] - refs.rx) / kSpeedOfLight;
                cdouble* row = &wr[((k * na + a) * d.m + m) * d.f];
                for (std::size_t f = 0; f < d.f; ++f)
                    row[f] = std::polar(1.0, -kTwoPi * tones[f] * proj);
            }
        }
        for (std::size_t b = 0; b < nd; ++b) {
            const Vec2 u = unit(grid.aod[b]);
            for (std::size_t n = 0; n < d.n; ++n) {
                const double proj = dot(u, pl.tx_positions[n] - refs.tx) / kSpeedOfLight;
                cdouble* row = &wt[((k * nd + b) * d.n + n) * d.f];
                for (std::size_t f = 0; f < d.f; ++f)
                    row[f] = std::polar(1.0, -kTwoPi * tones[f] * proj);
            }
        }
    }

    // Delay correlation: FFT bins when the grid aligns, otherwise a dense DFT matrix.
    const auto fft_map = fft_delay_map(grid.delay, set.grid);
    const std::size_t row_len = fft_map ? fft_map->length : d.f;
    const std::size_t chunk_d = std::clamp<std::size_t>((std::size_t{1} << 21) / std::max<std::size_t>(1, d.k * row_len), 1, nd);
    std::optional<detail::FftPlan> plan;
    if (fft_map)
        plan.emplace(row_len, chunk_d * d.k, detail::FftPlan::Direction::backward);
    Eigen::MatrixXcd dft;
    std::vector<cdouble> dense_rows;
    if (!fft_map) {
        dft.resize(static_cast<Eigen::Index>(d.f), static_cast<Eigen::Index>(nj));
        for (std::size_t j = 0; j < nj; ++j)
            for (std::size_t f = 0; f < d.f; ++f)
                dft(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(j)) =
                    std::polar(1.0, kTwoPi * tones[f] * grid.delay[j]);
        dense_rows.resize(chunk_d * d.k * d.f);
    }

    Fit fit;
    fit.residual = set.responses;
    const double initial_energy = set.energy();
    fit.residual_energy = initial_energy;

    std::vector<AtomIndex> selected;
    std::vector<std::vector<ChannelResponse>> selected_atoms;
    std::vector<double> history;
    std::vector<cdouble> y(d.k * d.n * d.f);
    std::vector<double> scores(chunk_d * nj);

    while (static_cast<int>(selected.size()) < l_max) {
        if (initial_energy <= 0.0 || fit.residual_energy <= stop_fraction * initial_energy)
            break;

        double best = -1.0;
        AtomIndex best_atom;
        for (std::size_t a = 0; a < na; ++a) {
            // Combine RX elements for this AoA: y[k][n][f].
            for (std::size_t k = 0; k < d.k; ++k)
                for (std::size_t n = 0; n < d.n; ++n) {
                    cdouble* out = &y[(k * d.n + n) * d.f];
                    std::fill(out, out + d.f, cdouble{});
                    for (std::size_t m = 0; m < d.m; ++m) {
                        const cdouble* w = &wr[((k * na + a) * d.m + m) * d.f];
                        const auto r = fit.residual[k].tones(m, n);
                        for (std::size_t f = 0; f < d.f; ++f)
                            out[f] += w[f] * r[f];
                    }
                }

            for (std::size_t b0 = 0; b0 < nd; b0 += chunk_d) {
                const std::size_t nb = std::min(chunk_d, nd - b0);
                cdouble* rows = fft_map ? plan->data() : dense_rows.data();
                for (std::size_t bb = 0; bb < nb; ++bb)
                    for (std::size_t k = 0; k < d.k; ++k) {
                        cdouble* z = rows + (bb * d.k + k) * row_len;
                        std::fill(z, z + row_len, cdouble{});
                        for (std::size_t n = 0; n < d.n; ++n) {
                            const cdouble* w = &wt[((k * nd + b0 + bb) * d.n + n) * d.f];
                            const cdouble* yy = &y[(k * d.n + n) * d.f];
                            for (std::size_t f = 0; f < d.f; ++f)
                                z[f] += w[f] * yy[f];
                        }
                    }

                std::fill(scores.begin(), scores.end(), 0.0);
                if (fft_map) {
                    plan->execute();
                    for (std::size_t bb = 0; bb < nb; ++bb)
                        for (std::size_t k = 0; k < d.k; ++k) {
                            const cdouble* z = rows + (bb * d.k + k) * row_len;
                            for (std::size_t j = 0; j < nj; ++j)
                                scores[bb * nj + j] += std::norm(z[fft_map->bins[j]]);
                        }
                } else {
                    const Eigen::Map<const Eigen::Matrix<cdouble, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> zm(
                        rows, static_cast<Eigen::Index>(nb * d.k), static_cast<Eigen::Index>(d.f));
                    const Eigen::MatrixXcd c = zm * dft;
                    for (std::size_t bb = 0; bb < nb; ++bb)
                        for (std::size_t k = 0; k < d.k; ++k)
                            for (std::size_t j = 0; j < nj; ++j)
                                scores[bb * nj + j] += std::norm(
                                    c(static_cast<Eigen::Index>(bb * d.k + k), static_cast<Eigen::Index>(j)));
                }

                for (std::size_t bb = 0; bb < nb; ++bb)
                    for (std::size_t j = 0; j < nj; ++j) {
                        const double s = scores[bb * nj + j] / atom_norm;
                        if (s > best) {
                            const AtomIndex cand{a, b0 + bb, j};
                            if (std::find(selected.begin(), selected.end(), cand) != selected.end())
                                continue;
                            best = s;
                            best_atom = cand;
                        }
                    }
            }
        }
        if (!(best > 0.0))
            break;

        selected.push_back(best_atom);
        selected_atoms.push_back(atom_responses(set, grid.aoa[best_atom.aoa], grid.aod[best_atom.aod],
                                                grid.delay[best_atom.delay]));
        fit = fit_gains(set, selected_atoms);
        history.push_back(fit.residual_energy);
    }

    std::vector<PwaPathParams> paths;
    for (std::size_t l = 0; l < selected.size(); ++l) {
        PwaPathParams p;
        p.gains = fit.gains[l];
        p.delta = grid.delay[selected[l].delay];
        p.aoa = grid.aoa[selected[l].aoa];
        p.aod = grid.aod[selected[l].aod];
        paths.push_back(std::move(p));
    }
    return finalize(std::move(paths), std::move(selected), initial_energy, fit.residual_energy, std::move(history));
}

std::vector<ChannelResponse> model_responses(const MeasurementSet& set, const ExtractionResult& result,
                                             std::optional<std::size_t> skip)
{
    std::vector<ChannelResponse> out;
    const Dims d = dims_of(set);
    for (std::size_t k = 0; k < d.k; ++k)
        out.emplace_back(d.m, d.n, d.f);
    for (std::size_t l = 0; l < result.paths.size(); ++l) {
        if (skip && *skip == l)
            continue;
        const auto& p = result.paths[l];
        for (std::size_t k = 0; k < d.k; ++k) {
            const ChannelResponse a = atom_response(set, k, p.aoa, p.aod, result.absolute_delay(l));
            auto& o = out[k].data();
            for (std::size_t i = 0; i < o.size(); ++i)
                o[i] += p.gains[k] * a.data()[i];
        }
    }
    return out;
}

ExtractionResult refine_extraction(const MeasurementSet& set, const ExtractionResult& start,
                                   const RefineOptions& options)
{
    require_measurements(set);
    const std::size_t np = start.paths.size();
    if (np == 0)
        return start;

    struct State {
        double aoa, aod, delay_ns;
    };
    std::vector<State> state;
    for (std::size_t l = 0; l < np; ++l)
        state.push_back({start.paths[l].aoa, start.paths[l].aod, start.absolute_delay(l) * 1e9});

    std::vector<std::vector<ChannelResponse>> atoms;
    for (const auto& s : state)
        atoms.push_back(atom_responses(set, s.aoa, s.aod, s.delay_ns * 1e-9));
    Fit fit = fit_gains(set, atoms);
    std::vector<double> history = start.residual_history;

    const int bits = 40;
    for (int sweep = 0; sweep < options.sweeps; ++sweep) {
        double moved = 0.0;
        for (std::size_t l = 0; l < np; ++l) {
            // Data explained by everything except path l.
            std::vector<ChannelResponse> isolated = fit.residual;
            for (std::size_t k = 0; k < isolated.size(); ++k) {
                auto& v = isolated[k].data();
                const auto& a = atoms[l][k].data();
                for (std::size_t i = 0; i < v.size(); ++i)
                    v[i] += fit.gains[l][k] * a[i];
            }
            State& s = state[l];
            const State before = s;
            auto optimize = [&](double& x, double halfwidth, auto&& score_at) {
                if (!(halfwidth > 0.0))
                    return;
                const double x0 = x;
                const auto res = boost::math::tools::brent_find_minima(
                    [&](double v) { return -score_at(v); }, x0 - halfwidth, x0 + halfwidth, bits);
                if (-res.second >= score_at(x0))
                    x = res.first;
            };
            optimize(s.aoa, options.aoa_halfwidth,
                     [&](double v) { return atom_score(set, v, s.aod, s.delay_ns * 1e-9, &isolated); });
            optimize(s.aod, options.aod_halfwidth,
                     [&](double v) { return atom_score(set, s.aoa, v, s.delay_ns * 1e-9, &isolated); });
            optimize(s.delay_ns, options.delay_halfwidth * 1e9,
                     [&](double v) { return atom_score(set, s.aoa, s.aod, v * 1e-9, &isolated); });
            moved = std::max({moved, std::abs(s.aoa - before.aoa), std::abs(s.aod - before.aod),
                              std::abs(s.delay_ns - before.delay_ns) * 1e-3});
            atoms[l] = atom_responses(set, s.aoa, s.aod, s.delay_ns * 1e-9);
            fit = fit_gains(set, atoms);
        }
        history.push_back(fit.residual_energy);
        if (moved < 1e-10)
            break;
    }

    std::vector<PwaPathParams> paths;
    for (std::size_t l = 0; l < np; ++l) {
        PwaPathParams p;
        p.gains = fit.gains[l];
        p.aoa = wrap_angle(state[l].aoa);
        p.aod = wrap_angle(state[l].aod);
        p.delta = state[l].delay_ns * 1e-9;
        paths.push_back(std::move(p));
    }
    return finalize(std::move(paths), {}, start.initial_energy, fit.residual_energy, std::move(history));
}

std::vector<std::size_t> detect_paths_pdp(const Pdp& pdp, double threshold_db, int min_separation_bins)
{
    if (!(threshold_db > 0.0))
        throw Error(ErrorCode::invalid_argument, "threshold_db must be positive");
    const auto& mag = pdp.magnitudes;
    const double peak = mag.empty() ? 0.0 : *std::max_element(mag.begin(), mag.end());
    if (!(peak > 0.0))
        return {};
    const double floor = peak * std::pow(10.0, -threshold_db / 20.0);

    std::vector<std::size_t> candidates;
    for (std::size_t q = 0; q < mag.size(); ++q) {
        const bool left = q == 0 || mag[q] >= mag[q - 1];
        const bool right = q + 1 == mag.size() || mag[q] >= mag[q + 1];
        if (left && right && mag[q] > 0.0 && mag[q] >= floor)
            candidates.push_back(q);
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](std::size_t a, std::size_t b) { return mag[a] > mag[b]; });

    std::vector<std::size_t> kept;
    for (std::size_t q : candidates) {
        const bool clear = std::all_of(kept.begin(), kept.end(), [&](std::size_t p) {
            const auto gap = q > p ? q - p : p - q;
            return gap >= static_cast<std::size_t>(std::max(min_separation_bins, 0));
        });
        if (clear)
            kept.push_back(q);
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

Triangulation triangulate(std::span<const Bearing> bearings)
{
    if (bearings.size() < 2)
        throw Error(ErrorCode::degenerate_triangulation, "triangulation needs at least 2 bearings");
    bool all_parallel = true;
    for (const auto& b : bearings)
        if (std::abs(std::sin(b.angle - bearings.front().angle)) > std::sin(1e-6))
            all_parallel = false;
    if (all_parallel)
        throw Error(ErrorCode::degenerate_triangulation, "all bearings are parallel");

    Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
    Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
    for (const auto& b : bearings) {
        const Eigen::Vector2d n(-std::sin(b.angle), std::cos(b.angle));
        const Eigen::Vector2d p(b.position.x, b.position.y);
        const Eigen::Matrix2d nn = b.weight * n * n.transpose();
        a += nn;
        rhs += nn * p;
    }
    if (std::abs(a.determinant()) <= 1e-300)
        throw Error(ErrorCode::degenerate_triangulation, "triangulation normal matrix is singular");
    const Eigen::Vector2d z = a.ldlt().solve(rhs);

    Triangulation t;
    t.point = {z.x(), z.y()};
    for (const auto& b : bearings) {
        const Vec2 rel = t.point - b.position;
        const double perp = cross(unit(b.angle), rel);
        t.residual += b.weight * perp * perp;
        if (dot(unit(b.angle), rel) < 0.0)
            t.behind_bearing = true;
    }
    return t;
}

Vec2 Heatmap::argmax() const
{
    const auto it = std::max_element(scores.begin(), scores.end());
    const auto idx = static_cast<std::size_t>(std::distance(scores.begin(), it));
    return cell_center(idx % nx, idx / nx);
}

Heatmap localization_heatmap(std::span<const Bearing> bearings, const Region& region, double cell,
                             double concentration)
{
    if (!(cell > 0.0) || !(region.x1 > region.x0) || !(region.y1 > region.y0))
        throw Error(ErrorCode::invalid_argument, "heatmap needs positive region area and cell size");
    if (!(concentration > 0.0))
        throw Error(ErrorCode::invalid_argument, "heatmap concentration must be positive");

    Heatmap h;
    h.origin = {region.x0, region.y0};
    h.cell = cell;
    h.nx = static_cast<std::size_t>(std::ceil((region.x1 - region.x0) / cell - 1e-9));
    h.ny = static_cast<std::size_t>(std::ceil((region.y1 - region.y0) / cell - 1e-9));
    h.scores.resize(h.nx * h.ny);

    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t iy = 0; iy < h.ny; ++iy)
        for (std::size_t ix = 0; ix < h.nx; ++ix) {
            const Vec2 z = h.cell_center(ix, iy);
            double cost = 0.0;
            for (const auto& b : bearings) {
                const double e = angle_diff(angle_of(z - b.position), b.angle);
                cost += b.weight * e * e;
            }
            const double log_score = -concentration * cost;
            h.scores[iy * h.nx + ix] = log_score;
            best = std::max(best, log_score);
        }
    double total = 0.0;
    for (auto& s : h.scores) {
        s = std::exp(s - best);
        total += s;
    }
    for (auto& s : h.scores)
        s /= total;
    return h;
}

std::vector<double> recover_abs_delays(double tau_anchor, double delta_anchor, std::span<const double> deltas)
{
    if (!(tau_anchor > 0.0))
        throw Error(ErrorCode::invalid_argument, "anchor time of flight must be positive");
    std::vector<double> out;
    out.reserve(deltas.size());
    for (double delta : deltas) {
        const double tau = tau_anchor + delta - delta_anchor;
        if (!(tau > 0.0))
            throw Error(ErrorCode::inconsistent_anchor, "anchor implies a non-positive time of flight");
        out.push_back(tau);
    }
    return out;
}

Vec2 image_from_polar(const Vec2& rx_ref, double aoa, double tau)
{
    if (!(tau > 0.0))
        throw Error(ErrorCode::invalid_argument, "time of flight must be positive");
    return rx_ref + (kSpeedOfLight * tau) * unit(aoa);
}

ParityEstimate estimate_parity(const MeasurementSet& set, const PwaPathParams& path, double tau,
                               const std::vector<ChannelResponse>* data)
{
    require_measurements(set);
    if (!(tau > 0.0))
        throw Error(ErrorCode::invalid_argument, "time of flight must be positive");
    const auto& r = data ? *data : set.responses;
    const References refs = set.plan.references();
    const auto tones = set.grid.tones();

    double data_energy = 0.0;
    for (const auto& block : r)
        data_energy += block.energy();

    auto residual_for = [&](int parity) {
        const RmPathParams p = make_rm_params({1.0, 0.0}, tau, path.aoa, path.aod, parity);
        double residual = 0.0;
        for (std::size_t k = 0; k < r.size(); ++k) {
            const auto& pl = set.plan.placements[k];
            cdouble corr{0.0, 0.0};
            double model_energy = 0.0;
            for (std::size_t m = 0; m < pl.rx_positions.size(); ++m)
                for (std::size_t n = 0; n < pl.tx_positions.size(); ++n) {
                    const double dist = path_distance_rm(p, pl.rx_positions[m], pl.tx_positions[n], refs);
                    const auto obs = r[k].tones(m, n);
                    for (std::size_t f = 0; f < tones.size(); ++f) {
                        const cdouble h = std::polar(1.0, -kTwoPi * tones[f] * dist / kSpeedOfLight);
                        corr += std::conj(h) * obs[f];
                        model_energy += 1.0;
                    }
                }
            residual += r[k].energy() - std::norm(corr) / model_energy;
        }
        return residual;
    };

    ParityEstimate est;
    est.residual_even = residual_for(+1);
    est.residual_odd = residual_for(-1);
    est.ambiguous = std::abs(est.residual_even - est.residual_odd) <= 1e-12 * std::max(data_energy, 1e-300);
    est.parity = est.residual_odd < est.residual_even ? -1 : 1;
    est.alpha = wrap_angle(path.aod - path.aoa - (est.parity + 1) * kPi / 2.0);
    return est;
}

std::vector<RmPathParams> assemble_rm(const ExtractionResult& pwa, double anchor_tau, std::size_t anchor_index,
                                      std::span<const int> parities, std::span<const double> alphas)
{
    const std::size_t np = pwa.paths.size();
    if (anchor_index >= np)
        throw Error(ErrorCode::invalid_argument, "anchor index out of range");
    if (parities.size() != np || alphas.size() != np)
        throw Error(ErrorCode::invalid_argument, "need one parity and one alpha per path");

    std::vector<double> deltas;
    for (const auto& p : pwa.paths)
        deltas.push_back(p.delta);
    const auto taus = recover_abs_delays(anchor_tau, pwa.paths[anchor_index].delta, deltas);

    std::vector<RmPathParams> out;
    for (std::size_t l = 0; l < np; ++l) {
        const auto& p = pwa.paths[l];
        double w = 0.0;
        double acc = 0.0;
        for (const auto& g : p.gains) {
            w += std::norm(g);
            acc += std::norm(g) * std::abs(g);
        }
        const double magnitude = w > 0.0 ? acc / w : 0.0;
        const double phase = p.gains.empty() ? 0.0 : std::arg(p.gains.front());
        if (parities[l] != 1 && parities[l] != -1)
            throw Error(ErrorCode::invalid_argument, "parity must be +1 or -1");
        RmPathParams rm = make_rm_params(std::polar(magnitude, phase), taus[l], p.aoa, p.aod, parities[l]);
        if (std::abs(angle_diff(rm.alpha, alphas[l])) > 1e-9)
            throw Error(ErrorCode::invalid_argument, "alpha is inconsistent with aoa, aod and parity");
        out.push_back(rm);
    }
    return out;
}

} // namespace nfrm
