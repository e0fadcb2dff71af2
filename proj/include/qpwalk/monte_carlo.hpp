#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qpwalk/environment.hpp"
#include "qpwalk/errors.hpp"
#include "qpwalk/lattice.hpp"
#include "qpwalk/parallel.hpp"
#include "qpwalk/rng.hpp"
#include "qpwalk/stats.hpp"

// Quenched trajectory sampling. Path i draws from its own stream seeded by
// (master, i) and writes summaries into slots owned by i, so every result
// is bit-identical across thread counts and schedules.

namespace qpwalk {

struct SimConfig {
    std::uint64_t seed = 1;
    std::uint64_t paths = 1;             // ensemble size m
    std::int64_t horizon = 1;            // trajectory length n
    std::vector<std::int64_t> checkpoints;  // sorted, each in [1, horizon]
    unsigned threads = 1;

    static std::vector<std::int64_t> default_checkpoints(std::int64_t n) {
        std::vector<std::int64_t> cps;
        for (std::int64_t d : {8, 4, 2, 1}) {
            std::int64_t c = n / d;
            if (c >= 1 && (cps.empty() || c > cps.back())) cps.push_back(c);
        }
        return cps;
    }

    void validate() const {
        if (paths < 1) throw std::invalid_argument("sim config: need at least one path");
        if (horizon < 1) throw std::invalid_argument("sim config: horizon must be >= 1");
        if (checkpoints.empty()) throw std::invalid_argument("sim config: no checkpoints");
        std::int64_t prev = 0;
        for (std::int64_t c : checkpoints) {
            if (c <= prev || c > horizon)
                throw std::invalid_argument("sim config: checkpoints must increase and stay within the horizon");
            prev = c;
        }
    }
};

struct PathSummary {
    std::int64_t site = 0;     // walk position at the checkpoint
    std::int64_t max = 0;      // running maximum so far
    std::int64_t min = 0;      // running minimum so far
    bool at_max = false;       // site == max
    bool at_min = false;       // site == min
    std::int64_t gap = 0;      // max - site
};

// result[c][i] is path i's state at checkpoint c
struct SimResult {
    std::vector<std::int64_t> checkpoints;
    std::vector<std::vector<PathSummary>> rows;
};

inline SimResult simulate(const OrbitTable& orbit, const SimConfig& cfg) {
    cfg.validate();
    if (orbit.radius < cfg.horizon)
        throw CapError("simulate: orbit table radius " + std::to_string(orbit.radius) +
                       " below horizon " + std::to_string(cfg.horizon));
    SimResult res;
    res.checkpoints = cfg.checkpoints;
    res.rows.assign(cfg.checkpoints.size(), std::vector<PathSummary>(cfg.paths));
    const double* P = orbit.p.data() + orbit.radius;
    parallel_for(cfg.paths, cfg.threads, [&](std::uint64_t i) {
        SplitMix64 rng(stream_seed(cfg.seed, i));
        std::int64_t s = 0, smax = 0, smin = 0;
        std::size_t c = 0;
        for (std::int64_t k = 1; k <= cfg.horizon; ++k) {
            s += rng.next_double() < P[s] ? 1 : -1;
            if (s > smax) smax = s;
            if (s < smin) smin = s;
            if (c < cfg.checkpoints.size() && k == cfg.checkpoints[c]) {
                PathSummary& ps = res.rows[c][i];
                ps.site = s;
                ps.max = smax;
                ps.min = smin;
                ps.at_max = (s == smax);
                ps.at_min = (s == smin);
                ps.gap = smax - s;
                ++c;
            }
        }
    });
    return res;
}

inline SimResult simulate(const Environment& e, double x, const SimConfig& cfg) {
    cfg.validate();
    if (cfg.horizon > kDefaultHorizon)
        throw CapError("simulate: horizon above the default cap");
    OrbitTable orbit = OrbitTable::build(e, x, static_cast<int>(cfg.horizon));
    return simulate(orbit, cfg);
}

// ---- Running-extremum condition ----

struct Condition16Row {
    std::int64_t n = 0;
    std::uint64_t paths = 0;
    std::uint64_t hits_max = 0, hits_min = 0;
    double p_max = 0.0, p_min = 0.0;
    Interval ci_max, ci_min;
};

inline std::vector<Condition16Row> condition16_rows(const SimResult& sim) {
    std::vector<Condition16Row> out;
    for (std::size_t c = 0; c < sim.checkpoints.size(); ++c) {
        Condition16Row row;
        row.n = sim.checkpoints[c];
        row.paths = sim.rows[c].size();
        for (const PathSummary& ps : sim.rows[c]) {
            row.hits_max += ps.at_max ? 1 : 0;
            row.hits_min += ps.at_min ? 1 : 0;
        }
        row.p_max = static_cast<double>(row.hits_max) / static_cast<double>(row.paths);
        row.p_min = static_cast<double>(row.hits_min) / static_cast<double>(row.paths);
        row.ci_max = wilson_interval(row.hits_max, row.paths);
        row.ci_min = wilson_interval(row.hits_min, row.paths);
        out.push_back(row);
    }
    return out;
}

inline std::vector<Condition16Row> condition16_estimate(const Environment& e, double x,
                                                        const SimConfig& cfg) {
    return condition16_rows(simulate(e, x, cfg));
}

// ---- Scaled running-max gap against the reflected Gaussian ----

struct BrownianRow {
    double delta = 0.0;
    double empirical = 0.0;
    double integral = 0.0;
    double gap = 0.0;
};

struct BrownianReport {
    std::int64_t n = 0;
    double sigma_hat = 0.0;  // sqrt(Var(site at n)/n)
    std::vector<BrownianRow> rows;
};

inline BrownianReport brownian_functional_check(const Environment& e, double x,
                                                const SimConfig& cfg,
                                                const std::vector<double>& delta_grid) {
    for (double d : delta_grid)
        if (!(d >= 0.0)) throw std::invalid_argument("brownian check: deltas must be >= 0");
    SimResult sim = simulate(e, x, cfg);
    const std::vector<PathSummary>& final_row = sim.rows.back();
    BrownianReport rep;
    rep.n = sim.checkpoints.back();
    RunningMoments mom;
    for (const PathSummary& ps : final_row) mom.add(static_cast<double>(ps.site));
    rep.sigma_hat = std::sqrt(mom.variance() / static_cast<double>(rep.n));
    double root_n = std::sqrt(static_cast<double>(rep.n));
    for (double d : delta_grid) {
        BrownianRow row;
        row.delta = d;
        std::uint64_t cnt = 0;
        for (const PathSummary& ps : final_row)
            if (static_cast<double>(ps.gap) <= d * root_n) ++cnt;
        row.empirical = static_cast<double>(cnt) / static_cast<double>(final_row.size());
        row.integral = reflected_gaussian_cdf(d, rep.sigma_hat);
        row.gap = std::fabs(row.empirical - row.integral);
        rep.rows.push_back(row);
    }
    return rep;
}

// ---- Harmonic averages of the projected position ----

struct MixingEstimateRow {
    double x = 0.0;
    std::int64_t n = 0;
    Harmonic h;
    double mean = 0.0;
    double sem = 0.0;
    Interval ci;
};

inline std::vector<MixingEstimateRow> mixing_rows(const SimResult& sim, const Environment& e,
                                                  double x, const std::vector<Harmonic>& hs) {
    std::vector<MixingEstimateRow> out;
    for (std::size_t c = 0; c < sim.checkpoints.size(); ++c) {
        for (const Harmonic& h : hs) {
            RunningMoments mom;
            for (const PathSummary& ps : sim.rows[c])
                mom.add(h.eval(wrap_unit(x + static_cast<double>(ps.site) * e.alpha.value)));
            MixingEstimateRow row;
            row.x = x;
            row.n = sim.checkpoints[c];
            row.h = h;
            row.mean = mom.mean;
            row.sem = mom.sem();
            row.ci = {row.mean - 1.959963984540054 * row.sem,
                      row.mean + 1.959963984540054 * row.sem};
            out.push_back(row);
        }
    }
    return out;
}

inline std::vector<MixingEstimateRow> empirical_mixing(const Environment& e,
                                                       const std::vector<double>& x_list,
                                                       const SimConfig& cfg,
                                                       const std::vector<Harmonic>& hs) {
    std::vector<MixingEstimateRow> out;
    for (double x : x_list) {
        SimResult sim = simulate(e, x, cfg);
        std::vector<MixingEstimateRow> rows = mixing_rows(sim, e, x, hs);
        out.insert(out.end(), rows.begin(), rows.end());
    }
    return out;
}

}  // namespace qpwalk
