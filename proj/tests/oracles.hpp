#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qpwalk/circle.hpp"
#include "qpwalk/environment.hpp"

// Independent reference implementations for the test suite. Everything here
// recomputes from first principles with naive data structures and no shared
// code paths with the library beyond the environment evaluation itself.

namespace oracles {

// Plain long-double Gauss map, no certification. Only trustworthy for small
// depth on non-pathological inputs.
inline std::vector<std::int64_t> gauss_quotients(long double alpha, int depth) {
    std::vector<std::int64_t> out;
    long double x = alpha;
    for (int k = 0; k < depth; ++k) {
        long double inv = 1.0L / x;
        auto a = static_cast<std::int64_t>(std::floor(inv));
        out.push_back(a);
        x = inv - static_cast<long double>(a);
    }
    return out;
}

inline double circle_distance(double y) {
    double f = y - std::floor(y);
    return std::min(f, 1.0 - f);
}

// Record minima of q -> ||q alpha||, scanned directly.
inline std::vector<std::int64_t> record_return_times(double alpha, std::int64_t q_max) {
    std::vector<std::int64_t> out;
    double best = 1.0;
    for (std::int64_t q = 1; q <= q_max; ++q) {
        double d = circle_distance(static_cast<double>(q) * alpha);
        if (d < best) {
            best = d;
            out.push_back(q);
        }
    }
    return out;
}

// Sparse-map walk evolution. Site keys are walk lattice sites; the half
// chain is driven by its own two-step composition, recomputed here from the
// walk probabilities rather than taken from the library's band arrays.
struct NaiveWalk {
    std::map<std::int64_t, double> mass;
    double absorbed = 0.0;

    static double p_at(const qpwalk::Environment& e, double x, std::int64_t site) {
        return qpwalk::eval_p(e, qpwalk::wrap_unit(x + static_cast<double>(site) * e.alpha.value));
    }

    static NaiveWalk start() {
        NaiveWalk w;
        w.mass[0] = 1.0;
        return w;
    }

    void step_walk(const qpwalk::Environment& e, double x,
                   std::optional<std::int64_t> taboo = std::nullopt) {
        std::map<std::int64_t, double> next;
        for (const auto& [s, m] : mass) {
            double p = p_at(e, x, s);
            next[s + 1] += p * m;
            next[s - 1] += (1.0 - p) * m;
        }
        if (taboo) {
            auto it = next.find(*taboo);
            if (it != next.end()) {
                absorbed += it->second;
                next.erase(it);
            }
        }
        mass = std::move(next);
    }

    // Half-chain step at half-site k (walk site 2k): compose two walk moves.
    void step_half(const qpwalk::Environment& e, double x) {
        std::map<std::int64_t, double> next;
        for (const auto& [k, m] : mass) {
            double p0 = p_at(e, x, 2 * k);
            double pr = p_at(e, x, 2 * k + 1);
            double pl = p_at(e, x, 2 * k - 1);
            next[k + 1] += p0 * pr * m;
            next[k - 1] += (1.0 - p0) * (1.0 - pl) * m;
            next[k] += (p0 * (1.0 - pr) + (1.0 - p0) * pl) * m;
        }
        mass = std::move(next);
    }

    double at(std::int64_t s) const {
        auto it = mass.find(s);
        return it == mass.end() ? 0.0 : it->second;
    }
};

// P(hit a before b | start k) by absorbing evolution until the interior
// drains. The window is finite so the residual decays geometrically.
inline double naive_exit_probability(const qpwalk::Environment& e, double x, std::int64_t a,
                                     std::int64_t k, std::int64_t b) {
    std::map<std::int64_t, double> mass;
    mass[k] = 1.0;
    double hit_a = 0.0;
    for (int iter = 0; iter < 100000; ++iter) {
        std::map<std::int64_t, double> next;
        double interior = 0.0;
        for (const auto& [s, m] : mass) {
            double p = NaiveWalk::p_at(e, x, s);
            for (auto [t, dm] : {std::pair{s + 1, p * m}, std::pair{s - 1, (1.0 - p) * m}}) {
                if (t == a)
                    hit_a += dm;
                else if (t != b) {
                    next[t] += dm;
                    interior += dm;
                }
            }
        }
        mass = std::move(next);
        if (interior < 1e-16) break;
    }
    return hit_a;
}

// Exact P(S_n = s) for the symmetric simple walk.
inline double binomial_site_prob(std::int64_t n, std::int64_t s) {
    if ((n + s) % 2 != 0 || s < -n || s > n) return 0.0;
    double k = static_cast<double>((n + s) / 2);
    double nn = static_cast<double>(n);
    double lg = std::lgamma(nn + 1.0) - std::lgamma(k + 1.0) - std::lgamma(nn - k + 1.0);
    return std::exp(lg - nn * std::log(2.0));
}

// Exact joint law of (site, max, min) after `horizon` steps by enumerating
// all 2^horizon sign paths. Only for tiny horizons.
struct PathLawRow {
    std::int64_t site, max, min;
    double prob;
};

inline std::vector<PathLawRow> enumerate_paths(const qpwalk::Environment& e, double x, int horizon) {
    if (horizon > 20) throw std::invalid_argument("enumerate_paths: horizon too large");
    std::map<std::tuple<std::int64_t, std::int64_t, std::int64_t>, double> law;
    law[{0, 0, 0}] = 1.0;
    for (int t = 0; t < horizon; ++t) {
        std::map<std::tuple<std::int64_t, std::int64_t, std::int64_t>, double> next;
        for (const auto& [key, m] : law) {
            auto [s, mx, mn] = key;
            double p = NaiveWalk::p_at(e, x, s);
            next[{s + 1, std::max(mx, s + 1), mn}] += p * m;
            next[{s - 1, mx, std::min(mn, s - 1)}] += (1.0 - p) * m;
        }
        law = std::move(next);
    }
    std::vector<PathLawRow> out;
    for (const auto& [key, m] : law) {
        auto [s, mx, mn] = key;
        out.push_back({s, mx, mn, m});
    }
    return out;
}

}  // namespace oracles
