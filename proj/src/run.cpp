#include "laneform/run.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <thread>

#include "laneform/common.hpp"
#include "laneform/diagnostics.hpp"
#include "laneform/implicit.hpp"
#include "laneform/io.hpp"
#include "laneform/lattice.hpp"
#include "laneform/pde.hpp"
#include "laneform/stationary.hpp"

namespace laneform {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

SeriesRow probe(const State& s, const Grid& g, const ModelParams& p) {
    SeriesRow w;
    w.t = s.t;
    w.mass_r = s.mass_r(g);
    w.mass_b = s.mass_b(g);
    w.entropy = entropy_functional(s, g, p).total;
    const DissipationPair d = dissipation(s, g, p);
    w.d0 = d.d0;
    w.d1 = d.d1;
    w.min_r = s.r.min();
    w.min_b = s.b.min();
    double mq = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) mq = std::max(mq, s.r.at(i, j) + s.b.at(i, j));
    w.max_rho = mq;
    return w;
}

// Record times after t = 0: multiples of the cadence, then t_end.
std::vector<double> cadence_targets(double t_end, double output_every) {
    std::vector<double> targets;
    if (output_every > 0.0) {
        for (double t = output_every; t < t_end * (1.0 - 1e-12); t += output_every)
            targets.push_back(t);
    }
    targets.push_back(t_end);
    return targets;
}

// Flat-state deviation in the sup norm, measured against the conserved mean.
json relaxation_report(const State& s0, const State& s1, const Grid& g) {
    auto dev = [&](const Field2D& f) {
        const double mean = f.sum() / static_cast<double>(g.cells());
        double d = 0.0;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) d = std::max(d, std::abs(f.at(i, j) - mean));
        return d;
    };
    const double r0 = dev(s0.r), b0 = dev(s0.b), r1 = dev(s1.r), b1 = dev(s1.b);
    json j;
    j["dev_r_initial"] = r0;
    j["dev_b_initial"] = b0;
    j["dev_r_final"] = r1;
    j["dev_b_final"] = b1;
    j["ratio_r"] = r0 > 0.0 ? r1 / r0 : 0.0;
    j["ratio_b"] = b0 > 0.0 ? b1 / b0 : 0.0;
    return j;
}

json lane_report_json(const LaneReport& lr) {
    json j;
    j["kind"] = lane_kind_name(lr.kind);
    j["red_down"] = lr.red_down;
    if (std::isfinite(lr.crossing_y))
        j["crossing_y"] = lr.crossing_y;
    else
        j["crossing_y"] = nullptr;
    j["sign_changes"] = lr.sign_changes;
    j["mono_defect_down"] = lr.mono_defect_down;
    j["mono_defect_up"] = lr.mono_defect_up;
    return j;
}

json growth_report_json(const GrowthCheck& gc) {
    json j;
    j["max_statistic"] = gc.max_statistic;
    j["fitted_constant"] = gc.fitted_constant;
    j["bounded"] = gc.bounded;
    j["dissipation_nonneg"] = gc.dissipation_nonneg;
    return j;
}

json growth_from_series(const std::vector<SeriesRow>& rows) {
    std::vector<double> t, e, d1;
    t.reserve(rows.size());
    for (const auto& w : rows) {
        if (!t.empty() && !(w.t > t.back())) continue;  // collapse repeated times
        t.push_back(w.t);
        e.push_back(w.entropy);
        d1.push_back(w.d1);
    }
    if (t.size() < 3) return nullptr;  // too few samples to fit a trend
    return growth_report_json(entropy_growth_check(t, e, d1));
}

// Outflow capacity of the final state: sum of (1 - rho) * species * dA.
double throughput(const Field2D& f, const State& s, const Grid& g) {
    double acc = 0.0, comp = 0.0;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double vac = 1.0 - s.r.at(i, j) - s.b.at(i, j);
            const double term = vac * f.at(i, j) - comp;
            const double next = acc + term;
            comp = (next - acc) - term;
            acc = next;
        }
    }
    return acc * g.cell_area();
}

// Shared tail of the macroscopic and lattice drivers.
json finalize_run(const Config& c, const RunContext& ctx, const State& s0, const State& s1,
                  const std::vector<SeriesRow>& series, json extra, Clock::time_point t0) {
    const Grid& g = c.grid;
    write_state_csv(ctx.outdir / "final_state.csv", g, s1);
    write_series_csv(ctx.outdir / "series.csv", series);

    Manifest m;
    m.command = ctx.command;
    m.config = config_to_json(c);
    m.seed = c.seed;
    m.files = {"initial_state.csv", "final_state.csv", "series.csv", "summary.json"};

    json summary = std::move(extra);
    summary["run_id"] = m.run_id();
    summary["t_final"] = s1.t;
    summary["mass_r_initial"] = s0.mass_r(g);
    summary["mass_b_initial"] = s0.mass_b(g);
    summary["mass_r_final"] = s1.mass_r(g);
    summary["mass_b_final"] = s1.mass_b(g);
    summary["entropy_initial"] = series.front().entropy;
    summary["entropy_final"] = series.back().entropy;
    summary["throughput_r"] = throughput(s1.r, s1, g);
    summary["throughput_b"] = throughput(s1.b, s1, g);
    summary["relaxation"] = relaxation_report(s0, s1, g);
    summary["lanes"] = lane_report_json(classify_lanes(s1, g, c.model));
    summary["growth"] = growth_from_series(series);
    summary["wall_seconds"] = seconds_since(t0);

    write_json(ctx.outdir / "summary.json", summary);
    m.wall_seconds = summary["wall_seconds"].get<double>();
    write_manifest(ctx.outdir, m);
    return summary;
}

void run_workers(int workers, const std::function<void(int)>& body) {
    workers = std::max(1, workers);
    if (workers == 1) {
        body(0);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                body(w);
            } catch (...) {
                errs[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

}  // namespace

json run_pde(const Config& c, const RunContext& ctx) {
    const auto t0 = Clock::now();
    ensure_dir(ctx.outdir);
    const Grid& g = c.grid;
    State s = build_initial(c);
    const State s_init = s;
    write_state_csv(ctx.outdir / "initial_state.csv", g, s);

    std::vector<SeriesRow> series;
    series.push_back(probe(s, g, c.model));
    const auto targets = cadence_targets(c.time.t_end, c.time.output_every);

    json extra;
    extra["scheme"] = c.scheme.type;
    if (c.scheme.type == "explicit") {
        StepperOptions opt;
        opt.cfl_safety = c.scheme.cfl_safety;
        ExplicitStepper stepper(g, c.model, c.scheme.variant, opt);
        extra["variant"] = variant_name(c.scheme.variant);
        extra["max_dt"] = stepper.max_dt();
        for (double target : targets) {
            stepper.advance_to(s, target, c.scheme.dt);
            series.push_back(probe(s, g, c.model));
        }
    } else {
        ImplicitOptions opt;
        opt.fp_tol = c.scheme.fp_tol;
        opt.fp_maxiter = c.scheme.fp_maxiter;
        opt.clip_eps = c.scheme.clip_eps;
        opt.reg_weight = c.scheme.reg_weight;
        ImplicitStepper stepper(g, c.model, opt);
        const double tau = c.scheme.tau > 0.0
                               ? c.scheme.tau
                               : (c.time.output_every > 0.0 ? c.time.output_every
                                                            : c.time.t_end / 100.0);
        extra["variant"] = variant_name(Variant::ReducedSymmetric);
        extra["tau"] = tau;
        long iters = 0, steps = 0;
        for (double target : targets) {
            while (s.t < target * (1.0 - 1e-12) && target - s.t > 1e-15 * target) {
                const double step = std::min(tau, target - s.t);
                iters += stepper.step(s, step);
                ++steps;
            }
            s.t = target;  // absorb the accumulated rounding of repeated adds
            series.push_back(probe(s, g, c.model));
        }
        extra["implicit_steps"] = steps;
        extra["implicit_iters_total"] = iters;
    }

    return finalize_run(c, ctx, s_init, s, series, std::move(extra), t0);
}

json run_lattice(const Config& c, const RunContext& ctx) {
    const auto t0 = Clock::now();
    ensure_dir(ctx.outdir);
    const Grid& g = c.grid;
    State s = build_initial(c);
    const State s_init = s;
    write_state_csv(ctx.outdir / "initial_state.csv", g, s);

    MasterEvolver ev(g.nx, g.ny, c.model);
    const double dt = step_duration(c.model);
    std::vector<SeriesRow> series;
    series.push_back(probe(s, g, c.model));

    long steps = 0;
    auto targets = cadence_targets(c.time.t_end, c.time.output_every);
    for (double target : targets) {
        bool advanced = false;
        while (s.t < target - 0.5 * dt) {
            ev.step(s);
            ++steps;
            advanced = true;
        }
        // A cadence finer than the update step maps several targets to the
        // same step count; record each reached time once.
        if (advanced || series.size() == 1) series.push_back(probe(s, g, c.model));
    }

    json extra;
    extra["scheme"] = "lattice";
    extra["step_duration"] = dt;
    extra["steps"] = steps;
    return finalize_run(c, ctx, s_init, s, series, std::move(extra), t0);
}

json run_sample(const Config& c, const RunContext& ctx) {
    const auto t0 = Clock::now();
    ensure_dir(ctx.outdir);
    const Grid& g = c.grid;
    const State probs = build_initial(c);
    write_state_csv(ctx.outdir / "initial_state.csv", g, probs);

    const double dt = step_duration(c.model);
    const int sweeps = c.sample.sweeps > 0
                           ? c.sample.sweeps
                           : static_cast<int>(std::ceil(c.time.t_end / dt - 1e-12));
    const int traj = c.sample.trajectories;

    // Fixed-size trajectory blocks keep the final reduction order independent
    // of the worker count; block results are combined in block order.
    constexpr int kBlock = 32;
    const int nblocks = (traj + kBlock - 1) / kBlock;
    std::vector<Field2D> block_r(nblocks, Field2D(g.nx, g.ny));
    std::vector<Field2D> block_b(nblocks, Field2D(g.nx, g.ny));
    std::vector<double> block_red(nblocks, 0.0), block_blue(nblocks, 0.0);
    std::atomic<int> next_block{0};

    run_workers(ctx.workers, [&](int) {
        for (;;) {
            const int blk = next_block.fetch_add(1);
            if (blk >= nblocks) break;
            const int lo = blk * kBlock;
            const int hi = std::min(traj, lo + kBlock);
            for (int k = lo; k < hi; ++k) {
                std::mt19937_64 rng(splitmix64(c.seed + static_cast<std::uint64_t>(k)));
                ParticleSystem ps = ParticleSystem::draw(probs, rng);
                ps.sweeps(c.model, sweeps, rng);
                const State& ind = ps.indicator();
                for (int j = 0; j < g.ny; ++j) {
                    for (int i = 0; i < g.nx; ++i) {
                        block_r[blk].at(i, j) += ind.r.at(i, j);
                        block_b[blk].at(i, j) += ind.b.at(i, j);
                    }
                }
                block_red[blk] += ps.count(Occupant::Red);
                block_blue[blk] += ps.count(Occupant::Blue);
            }
        }
    });

    State mean(g.nx, g.ny);
    double mean_red = 0.0, mean_blue = 0.0;
    for (int blk = 0; blk < nblocks; ++blk) {
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                mean.r.at(i, j) += block_r[blk].at(i, j);
                mean.b.at(i, j) += block_b[blk].at(i, j);
            }
        }
        mean_red += block_red[blk];
        mean_blue += block_blue[blk];
    }
    const double inv = 1.0 / static_cast<double>(traj);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            mean.r.at(i, j) *= inv;
            mean.b.at(i, j) *= inv;
        }
    }
    mean.t = sweeps * dt;

    std::vector<SeriesRow> series;
    series.push_back(probe(probs, g, c.model));
    series.push_back(probe(mean, g, c.model));

    json extra;
    extra["scheme"] = "sample";
    extra["trajectories"] = traj;
    extra["sweeps"] = sweeps;
    extra["step_duration"] = dt;
    extra["mean_red_particles"] = mean_red * inv;
    extra["mean_blue_particles"] = mean_blue * inv;
    return finalize_run(c, ctx, probs, mean, series, std::move(extra), t0);
}

json run_stationary(const Config& c, const RunContext& ctx) {
    const auto t0 = Clock::now();
    ensure_dir(ctx.outdir);
    const Grid& g = c.grid;
    const double y_lo = g.y0, y_hi = g.y0 + g.wy;
    const double mass_r =
        c.stationary.mass_r > 0.0 ? c.stationary.mass_r : c.initial.c_r * g.wy;
    const double mass_b =
        c.stationary.mass_b > 0.0 ? c.stationary.mass_b : c.initial.c_b * g.wy;

    Manifest m;
    m.command = ctx.command;
    m.config = config_to_json(c);
    m.seed = c.seed;

    json summary;
    summary["mass_r_target"] = mass_r;
    summary["mass_b_target"] = mass_b;

    const MatchedProfile mp = match_masses(mass_r, mass_b, y_lo, y_hi, c.stationary.dy, c.model);
    std::vector<ProfileRow> rows;
    rows.reserve(mp.profile.pts.size());
    for (const auto& pt : mp.profile.pts) rows.push_back({pt.y, pt.r, pt.b});
    write_profile_csv(ctx.outdir / "profile.csv", rows, mp.c);
    m.files.push_back("profile.csv");

    summary["c"] = mp.c;
    summary["mass_r"] = mp.mass_r;
    summary["mass_b"] = mp.mass_b;
    if (std::isfinite(mp.crossing_y))
        summary["crossing_y"] = mp.crossing_y;
    else
        summary["crossing_y"] = nullptr;
    summary["max_c_drift"] = mp.profile.max_c_drift;
    summary["truncated"] = mp.profile.truncated;
    summary["outer_iters"] = mp.outer_iters;
    summary["inner_iters"] = mp.inner_iters;

    if (!c.stationary.curve_constants.empty()) {
        const auto curves =
            sweep_curves(c.stationary.curve_constants, c.stationary.dy, c.model);
        std::vector<PhaseRow> prows;
        json jc = json::array();
        for (const auto& cv : curves) {
            for (const auto& pt : cv.pts) prows.push_back({cv.c, pt.r, pt.b});
            jc.push_back({{"c", cv.c},
                          {"points", cv.pts.size()},
                          {"max_c_defect", cv.max_c_defect},
                          {"truncated", cv.truncated}});
        }
        write_phase_csv(ctx.outdir / "phase.csv", prows);
        m.files.push_back("phase.csv");
        summary["phase_curves"] = jc;
    }

    if (!c.stationary.gamma0_values.empty()) {
        // Species overlap of the matched profile, max over y of r(y) b(y).
        json tab = json::array();
        for (double g0 : c.stationary.gamma0_values) {
            ModelParams p = c.model;
            p.gamma0 = g0;
            const MatchedProfile q = match_masses(mass_r, mass_b, y_lo, y_hi,
                                                  c.stationary.dy, p);
            double overlap = 0.0;
            for (const auto& pt : q.profile.pts) overlap = std::max(overlap, pt.r * pt.b);
            tab.push_back({{"gamma0", g0}, {"overlap", overlap}, {"c", q.c}});
        }
        summary["overlap_by_gamma0"] = tab;
    }

    summary["run_id"] = m.run_id();
    summary["wall_seconds"] = seconds_since(t0);
    m.files.push_back("summary.json");
    write_json(ctx.outdir / "summary.json", summary);
    m.wall_seconds = summary["wall_seconds"].get<double>();
    write_manifest(ctx.outdir, m);
    return summary;
}

json run_compare(const Config& c, const RunContext& ctx) {
    const auto t0 = Clock::now();
    ensure_dir(ctx.outdir);

    Manifest m;
    m.command = ctx.command;
    m.config = config_to_json(c);
    m.seed = c.seed;

    json levels = json::array();
    std::vector<double> l2_totals;
    for (std::size_t k = 0; k < c.compare.h_levels.size(); ++k) {
        const double h = c.compare.h_levels[k];
        if (!(h > 0.0)) throw ConfigError("compare.h_levels entries must be > 0");
        Config lc = c;
        lc.model.h = h;
        lc.grid.nx = static_cast<int>(std::lround(c.grid.wx / h));
        lc.grid.ny = static_cast<int>(std::lround(c.grid.wy / h));
        lc.grid.validate();
        lc.model.validate();
        const Grid& g = lc.grid;

        State micro = build_initial(lc);
        State macro = micro;

        // The occupancy evolution advances in whole update steps; compare at
        // its final time so the clocks agree exactly.
        const double dt = step_duration(lc.model);
        const long steps = std::max<long>(1, std::lround(c.compare.t_end / dt));
        const double t_cmp = static_cast<double>(steps) * dt;
        MasterEvolver ev(g.nx, g.ny, lc.model);
        ev.evolve(micro, static_cast<int>(steps));

        ExplicitStepper stepper(g, lc.model, Variant::Full);
        stepper.advance_to(macro, t_cmp);

        const StateDistance d = state_distance(micro, macro, g);
        const double l2 = std::hypot(d.l2_r, d.l2_b);
        l2_totals.push_back(l2);

        const std::string mi = "state_micro_" + std::to_string(k) + ".csv";
        const std::string ma = "state_macro_" + std::to_string(k) + ".csv";
        write_state_csv(ctx.outdir / mi, g, micro);
        write_state_csv(ctx.outdir / ma, g, macro);
        m.files.push_back(mi);
        m.files.push_back(ma);

        levels.push_back({{"h", h},
                          {"nx", g.nx},
                          {"ny", g.ny},
                          {"t", t_cmp},
                          {"steps", steps},
                          {"l2_r", d.l2_r},
                          {"l2_b", d.l2_b},
                          {"sup_r", d.sup_r},
                          {"sup_b", d.sup_b},
                          {"l2", l2}});
    }

    json ratios = json::array();
    for (std::size_t k = 1; k < l2_totals.size(); ++k)
        ratios.push_back(l2_totals[k - 1] / std::max(l2_totals[k], 1e-300));

    json summary;
    summary["levels"] = levels;
    summary["l2_ratios"] = ratios;
    summary["run_id"] = m.run_id();
    summary["wall_seconds"] = seconds_since(t0);
    m.files.push_back("summary.json");
    write_json(ctx.outdir / "summary.json", summary);
    m.wall_seconds = summary["wall_seconds"].get<double>();
    write_manifest(ctx.outdir, m);
    return summary;
}

json run_sweep(const Config& base, const RunContext& ctx, const std::string& param,
               const std::vector<double>& values) {
    const auto t0 = Clock::now();
    if (values.empty()) throw ConfigError("sweep requires at least one value");
    ensure_dir(ctx.outdir);

    const json base_json = config_to_json(base);
    std::vector<json> summaries(values.size());
    std::atomic<std::size_t> next{0};

    run_workers(ctx.workers, [&](int) {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= values.size()) break;
            json j = base_json;
            set_by_path(j, param, values[k]);
            Config ck = parse_config(j);
            RunContext sub;
            sub.outdir = ctx.outdir / ("sub_" + std::to_string(k));
            sub.command = ctx.command + " [" + param + "=" + fmt17(values[k]) + "]";
            sub.workers = 1;
            summaries[k] = run_pde(ck, sub);
        }
    });

    json index;
    index["param"] = param;
    index["values"] = values;
    json runs = json::array();
    for (std::size_t k = 0; k < values.size(); ++k) {
        runs.push_back({{"dir", "sub_" + std::to_string(k)},
                        {"value", values[k]},
                        {"summary", summaries[k]}});
    }
    index["runs"] = runs;
    index["wall_seconds"] = seconds_since(t0);
    write_json(ctx.outdir / "index.json", index);
    return index;
}

}  // namespace laneform
