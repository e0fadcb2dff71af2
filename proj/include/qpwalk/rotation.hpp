#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "qpwalk/circle.hpp"
#include "qpwalk/errors.hpp"

// Continued-fraction machinery for rotation numbers alpha in (0, 1):
// partial quotients, convergents p/q, and the return times q at which the
// orbit of the rotation comes back within 1/q of the start.

namespace qpwalk {

inline double golden_alpha() { return 0.6180339887498949; }   // (sqrt(5)-1)/2
inline double silver_alpha() { return 0.41421356237309515; }  // sqrt(2)-1

struct Convergent {
    std::int64_t p = 0;
    std::int64_t q = 1;
    double err = 0.0;  // |q*alpha - p|
};

// A rotation number given as a float, optionally with exact leading partial
// quotients. When quotients are present, convergent and return-time queries
// run on the integer recurrence instead of re-expanding the float.
struct AlphaSpec {
    double value = 0.0;
    std::vector<std::int64_t> quotients;  // a_1, a_2, ... ; empty means "expand value"

    bool exact() const { return !quotients.empty(); }
};

namespace detail {

inline std::int64_t checked_mul_add(std::int64_t a, std::int64_t b, std::int64_t c) {
    std::int64_t m = 0, s = 0;
    if (__builtin_mul_overflow(a, b, &m) || __builtin_add_overflow(m, c, &s))
        throw std::overflow_error("convergent recurrence overflowed 64-bit integers");
    return s;
}

}  // namespace detail

// Partial quotients of alpha = [0; a1, a2, ...] by the Gauss map x -> frac(1/x).
//
// The input is a binary double, so each iterate carries an uncertainty
// interval that the map inflates by roughly 1/x^2 per step. A quotient is
// emitted only while floor(1/x) is the same across the whole interval, and
// the expansion refuses once the residual drops to 2^-40, where the next
// quotient would be numerically meaningless.
inline std::vector<std::int64_t> continued_fraction(double alpha, int depth) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::domain_error("continued_fraction: alpha must lie strictly inside (0, 1)");
    if (depth < 1) throw std::invalid_argument("continued_fraction: depth must be >= 1");

    const long double resid_floor = std::ldexp(1.0L, -40);
    long double x = alpha;
    long double eps = static_cast<long double>(std::numeric_limits<double>::epsilon()) * alpha;

    std::vector<std::int64_t> out;
    out.reserve(static_cast<std::size_t>(depth));
    for (int k = 1; k <= depth; ++k) {
        if (x - eps <= resid_floor)
            throw PrecisionError("continued_fraction: residual at term " + std::to_string(k) +
                                 " is below 2^-40; expansion no longer certified");
        long double inv_lo = 1.0L / (x + eps);
        long double inv_hi = 1.0L / (x - eps);
        long double a_lo = std::floor(inv_lo);
        long double a_hi = std::floor(inv_hi);
        if (a_lo != a_hi)
            throw PrecisionError("continued_fraction: quotient " + std::to_string(k) +
                                 " not certified at double precision; reduce depth");
        long double inv = 1.0L / x;
        out.push_back(static_cast<std::int64_t>(a_lo));
        x = inv - a_lo;
        eps = (inv_hi - inv_lo) + 4.0L * std::numeric_limits<long double>::epsilon() * inv_hi;
    }
    return out;
}

// Convergents p_k/q_k from a quotient list via
//   p_k = a_k p_{k-1} + p_{k-2},  q_k = a_k q_{k-1} + q_{k-2}.
// The 0/1 convergent is kept only when a_1 >= 2 so that denominators are
// strictly increasing. err is |q*alpha - p| evaluated in extended precision.
inline std::vector<Convergent> convergents_from_quotients(const std::vector<std::int64_t>& a,
                                                          double alpha) {
    std::vector<Convergent> out;
    std::int64_t pm1 = 1, p0 = 0, qm1 = 0, q0 = 1;
    const long double lalpha = alpha;
    if (!a.empty() && a.front() >= 2)
        out.push_back({0, 1, static_cast<double>(std::fabs(lalpha))});
    for (std::int64_t ak : a) {
        if (ak < 1) throw std::invalid_argument("convergents: partial quotients must be >= 1");
        std::int64_t p = detail::checked_mul_add(ak, p0, pm1);
        std::int64_t q = detail::checked_mul_add(ak, q0, qm1);
        long double err = std::fabs(static_cast<long double>(q) * lalpha - static_cast<long double>(p));
        out.push_back({p, q, static_cast<double>(err)});
        pm1 = p0; p0 = p;
        qm1 = q0; q0 = q;
    }
    return out;
}

inline std::vector<Convergent> convergents(double alpha, int depth) {
    return convergents_from_quotients(continued_fraction(alpha, depth), alpha);
}

// alpha with prescribed leading partial quotients, e.g. (1,10,100,1000) for a
// rapidly approximated demo rotation. The expansion is continued with an
// all-ones tail, so the all-ones list reproduces the golden mean exactly and
// the result is always irrational. Convergents of the prescribed part are
// exact integers; their err uses the complete-quotient identity
//   |q_k alpha - p_k| = 1 / (t_{k+1} q_k + q_{k-1}),
// which stays accurate long after the float subtraction would cancel out.
struct LiouvilleAlpha {
    AlphaSpec alpha;
    std::vector<Convergent> convs;
};

inline LiouvilleAlpha liouville_like(const std::vector<std::int64_t>& growth) {
    if (growth.empty()) throw std::invalid_argument("liouville_like: need at least one quotient");
    for (std::int64_t g : growth)
        if (g < 1) throw std::invalid_argument("liouville_like: partial quotients must be >= 1");

    const long double phi = 1.6180339887498948482L;  // value of the all-ones tail
    // complete quotients t_k = [a_k; a_{k+1}, ...], computed backwards
    std::vector<long double> t(growth.size() + 1);
    t[growth.size()] = phi;
    for (std::size_t i = growth.size(); i-- > 0;)
        t[i] = static_cast<long double>(growth[i]) + 1.0L / t[i + 1];
    const long double lalpha = 1.0L / t[0];

    LiouvilleAlpha out;
    out.alpha.value = static_cast<double>(lalpha);
    out.alpha.quotients = growth;

    std::int64_t pm1 = 1, p0 = 0, qm1 = 0, q0 = 1;
    if (growth.front() >= 2)
        out.convs.push_back({0, 1, static_cast<double>(lalpha)});
    for (std::size_t i = 0; i < growth.size(); ++i) {
        std::int64_t p = detail::checked_mul_add(growth[i], p0, pm1);
        std::int64_t q = detail::checked_mul_add(growth[i], q0, qm1);
        // q0 still holds q_{k-1} at this point
        long double denom = t[i + 1] * static_cast<long double>(q) + static_cast<long double>(q0);
        out.convs.push_back({p, q, static_cast<double>(1.0L / denom)});
        pm1 = p0; p0 = p;
        qm1 = q0; q0 = q;
    }
    return out;
}

inline AlphaSpec liouville_demo_alpha() {
    return liouville_like({1, 10, 100, 1000}).alpha;
}

// Close return times of the rotation by alpha: the convergent denominators
// q <= q_max. Every returned q satisfies |q alpha - p| < 1/q; the converse
// can fail (intermediate fractions occasionally pass that test without being
// convergents), so membership is decided by the continued fraction, which is
// what the orbit-structure arguments downstream actually need.
inline std::vector<std::int64_t> close_return_times(const AlphaSpec& alpha, std::int64_t q_max) {
    if (q_max < 1) throw std::invalid_argument("close_return_times: q_max must be >= 1");

    std::vector<std::int64_t> quots;
    if (alpha.exact()) {
        quots = alpha.quotients;
        // extend with the same all-ones tail used to build the float value
        std::int64_t qm1 = 0, q0 = 1;
        for (std::int64_t a : quots) {
            std::int64_t q = detail::checked_mul_add(a, q0, qm1);
            qm1 = q0; q0 = q;
            if (q0 > q_max) break;
        }
        while (q0 <= q_max) {
            quots.push_back(1);
            std::int64_t q = detail::checked_mul_add(1, q0, qm1);
            qm1 = q0; q0 = q;
        }
    } else {
        // expand just far enough that the denominators clear q_max
        std::int64_t qm1 = 0, q0 = 1;
        const long double resid_floor = std::ldexp(1.0L, -40);
        long double x = alpha.value;
        if (!(x > 0.0L && x < 1.0L))
            throw std::domain_error("close_return_times: alpha must lie strictly inside (0, 1)");
        long double eps = static_cast<long double>(std::numeric_limits<double>::epsilon()) * x;
        while (q0 <= q_max) {
            if (x - eps <= resid_floor)
                throw PrecisionError("close_return_times: expansion of alpha not certified up to q_max");
            long double inv_lo = 1.0L / (x + eps);
            long double inv_hi = 1.0L / (x - eps);
            long double a_lo = std::floor(inv_lo);
            if (a_lo != std::floor(inv_hi))
                throw PrecisionError("close_return_times: expansion of alpha not certified up to q_max");
            quots.push_back(static_cast<std::int64_t>(a_lo));
            std::int64_t q = detail::checked_mul_add(quots.back(), q0, qm1);
            qm1 = q0; q0 = q;
            x = 1.0L / x - a_lo;
            eps = (inv_hi - inv_lo) + 4.0L * std::numeric_limits<long double>::epsilon() * inv_hi;
        }
    }

    std::vector<std::int64_t> out;
    std::int64_t qm1 = 0, q0 = 1;
    if (!quots.empty() && quots.front() >= 2) out.push_back(1);
    for (std::int64_t a : quots) {
        std::int64_t q = detail::checked_mul_add(a, q0, qm1);
        if (q <= q_max) out.push_back(q);
        qm1 = q0; q0 = q;
        if (q0 > q_max) break;
    }
    return out;
}

inline std::vector<std::int64_t> close_return_times(double alpha, std::int64_t q_max) {
    AlphaSpec s;
    s.value = alpha;
    return close_return_times(s, q_max);
}

}  // namespace qpwalk
