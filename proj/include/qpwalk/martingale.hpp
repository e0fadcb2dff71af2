#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qpwalk/environment.hpp"
#include "qpwalk/errors.hpp"

// Scale function M for the nearest-neighbour walk on the lattice orbit
// x + k*alpha. M makes M(xi_n) a martingale:
//   p(x+k a) M(k+1) + q(x+k a) M(k-1) = M(k),  M(0) = 0, M(1) = 1.
// Exit probabilities through a two-sided window follow from optional
// stopping, which is what everything downstream uses M for.

namespace qpwalk {

struct MartingaleTable {
    double x = 0.0;
    int radius = 0;
    // M(k) for k in [-radius, radius], index k+radius
    std::vector<double> m;
    // log of the increment d_k = M(k+1) - M(k), k in [-radius, radius-1],
    // index k+radius; increments are positive so logs are safe
    std::vector<double> logd;

    double at(std::int64_t k) const {
        return m[static_cast<std::size_t>(k + radius)];
    }
    double log_increment(std::int64_t k) const {
        return logd[static_cast<std::size_t>(k + radius)];
    }
    double increment(std::int64_t k) const { return std::exp(log_increment(k)); }
};

// The identity pinning the table is p_k d_k = q_k d_{k-1} with d_0 = 1, so
// log d_k is a Birkhoff sum of -f along the orbit:
//   log d_k     = -sum_{j=1}^{k} f(x + j a)        (k >= 1)
//   log d_{-k}  = +sum_{j=0}^{k-1} f(x - j a)      (k >= 1)
// M is then the cumulative sum of the d's in both directions. Building from
// the increments keeps both sides consistent with the defining identity; the
// closed forms one might write for the negative side by symmetry are easy to
// get off by one, and the identity test below is the arbiter.
inline MartingaleTable build_martingale(const Environment& e, double x, int radius) {
    if (radius < 1) throw std::invalid_argument("build_martingale: radius must be >= 1");
    MartingaleTable t;
    t.x = wrap_unit(x);
    t.radius = radius;
    t.m.assign(static_cast<std::size_t>(2 * radius + 1), 0.0);
    t.logd.assign(static_cast<std::size_t>(2 * radius + 1), 0.0);

    const double cap = 700.0;  // exp overflow guard
    auto check = [&](double v, std::int64_t k) {
        if (std::fabs(v) > cap)
            throw CapError("scale table: increment overflow at k = " + std::to_string(k) +
                           " (|log d| > 700); shrink the window or the drive");
    };

    // forward increments
    double y = t.x;
    double acc = 0.0;
    t.logd[static_cast<std::size_t>(radius)] = 0.0;  // d_0 = 1
    for (int k = 1; k < radius; ++k) {
        y = wrap_unit(y + e.alpha.value);
        acc -= e.f.eval(y);
        check(acc, k);
        t.logd[static_cast<std::size_t>(k + radius)] = acc;
    }
    // backward increments: log d_{k-1} = log d_k + f(x + k a), starting at k = 0
    y = t.x;
    acc = 0.0;
    for (int k = 0; k > -radius; --k) {
        acc += e.f.eval(y);
        check(acc, k - 1);
        t.logd[static_cast<std::size_t>(k - 1 + radius)] = acc;
        y = wrap_unit(y - e.alpha.value);
    }

    // cumulative sums
    t.m[static_cast<std::size_t>(radius)] = 0.0;
    for (int k = 0; k < radius; ++k)
        t.m[static_cast<std::size_t>(k + 1 + radius)] =
            t.m[static_cast<std::size_t>(k + radius)] + std::exp(t.logd[static_cast<std::size_t>(k + radius)]);
    for (int k = 0; k > -radius; --k)
        t.m[static_cast<std::size_t>(k - 1 + radius)] =
            t.m[static_cast<std::size_t>(k + radius)] - std::exp(t.logd[static_cast<std::size_t>(k - 1 + radius)]);
    return t;
}

// Largest relative defect of the one-step martingale identity over the
// interior of the table. Should sit at rounding level for a correct table.
inline double martingale_residual(const MartingaleTable& t, const Environment& e) {
    double worst = 0.0;
    // same iterative orbit walk as the builder, so positions agree to the ulp
    double y = t.x;
    for (int j = 0; j < t.radius - 1; ++j) y = wrap_unit(y - e.alpha.value);
    for (std::int64_t k = -t.radius + 1; k <= t.radius - 1; ++k) {
        double p = logistic(e.f.eval(y));
        double q = 1.0 - p;
        double lhs = p * t.at(k + 1) + q * t.at(k - 1);
        double scale = std::max({1.0, std::fabs(t.at(k + 1)), std::fabs(t.at(k - 1)), std::fabs(t.at(k))});
        double r = std::fabs(lhs - t.at(k)) / scale;
        if (r > worst) worst = r;
        y = wrap_unit(y + e.alpha.value);
    }
    return worst;
}

// P(walk started at k exits the window (a, b) through a), for a < k < b.
// Sanity anchor: for f == 0 this is the classical (b - k) / (b - a).
inline double exit_probability(const MartingaleTable& t, std::int64_t a, std::int64_t k, std::int64_t b) {
    if (!(a < k && k < b))
        throw std::invalid_argument("exit_probability: need a < k < b");
    if (a < -t.radius || b > t.radius)
        throw std::invalid_argument("exit_probability: window exceeds table radius");
    return (t.at(b) - t.at(k)) / (t.at(b) - t.at(a));
}

// Lower bounds on the probability of returning to 0 before leaving through
// the window edge, one per side.
struct ReturnBounds {
    double before_right;  // return to 0 before reaching +radius
    double before_left;   // return to 0 before reaching -radius
};

inline ReturnBounds return_bounds(const MartingaleTable& t) {
    double mb = t.at(t.radius);
    double ma = t.at(-t.radius);
    return {mb / (mb - t.at(-1)), -ma / (t.at(1) - ma)};
}

// At a close return time q the multiplicative drift collected along the
// orbit is pinched: prod_{j=1}^{q} q(x+ja)/p(x+ja) = exp(-S_q f) >= e^{-var f}.
struct ProductBandReport {
    std::int64_t q = 0;
    double variation = 0.0;
    double floor_value = 0.0;    // e^{-var}
    double min_product = 0.0;
    double max_abs_log = 0.0;
    int violations = 0;
    bool pass = false;
};

inline ProductBandReport close_return_product_check(const Environment& e,
                                                    const std::vector<double>& x_grid,
                                                    std::int64_t q) {
    auto crt = close_return_times(e.alpha, q);
    if (crt.empty() || crt.back() != q)
        throw std::invalid_argument("close_return_product_check: q = " + std::to_string(q) +
                                    " is not a close return time of alpha");
    ProductBandReport r;
    r.q = q;
    r.variation = total_variation(e.f);
    r.floor_value = std::exp(-r.variation);
    r.min_product = std::numeric_limits<double>::infinity();
    for (double x : x_grid) {
        double s = birkhoff_sum(e, x, q);  // log of prod p/q along the orbit
        double prod = std::exp(-s);        // prod of q/p
        r.min_product = std::min(r.min_product, prod);
        r.max_abs_log = std::max(r.max_abs_log, std::fabs(s));
        if (prod < r.floor_value) ++r.violations;
    }
    r.pass = (r.violations == 0);
    return r;
}

}  // namespace qpwalk
