#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qpwalk/circle.hpp"
#include "qpwalk/errors.hpp"
#include "qpwalk/rotation.hpp"

// A quasi-periodic jump environment on the circle: a mean-zero trigonometric
// polynomial f fixes site-dependent probabilities p = e^f/(1+e^f) of stepping
// by +alpha and q = 1-p of stepping by -alpha.

namespace qpwalk {

// sum_k a_k cos(2 pi k x) + b_k sin(2 pi k x), k = 1..K. No constant term by
// construction, so the circle average is exactly zero.
struct TrigPolynomial {
    std::vector<double> cosc;  // a_k, k = 1..cosc.size()
    std::vector<double> sinc;  // b_k

    int degree() const {
        return static_cast<int>(std::max(cosc.size(), sinc.size()));
    }
    bool zero() const {
        for (double c : cosc) if (c != 0.0) return false;
        for (double c : sinc) if (c != 0.0) return false;
        return true;
    }
    double eval(double x) const {
        double s = 0.0;
        for (std::size_t i = 0; i < cosc.size(); ++i)
            s += cosc[i] * std::cos(kTwoPi * static_cast<double>(i + 1) * x);
        for (std::size_t i = 0; i < sinc.size(); ++i)
            s += sinc[i] * std::sin(kTwoPi * static_cast<double>(i + 1) * x);
        return s;
    }
    double deriv(double x) const {
        double s = 0.0;
        for (std::size_t i = 0; i < cosc.size(); ++i) {
            double w = kTwoPi * static_cast<double>(i + 1);
            s -= cosc[i] * w * std::sin(w * x);
        }
        for (std::size_t i = 0; i < sinc.size(); ++i) {
            double w = kTwoPi * static_cast<double>(i + 1);
            s += sinc[i] * w * std::cos(w * x);
        }
        return s;
    }
    // sup |f| <= sum of coefficient magnitudes
    double sup_bound() const {
        double s = 0.0;
        for (double c : cosc) s += std::fabs(c);
        for (double c : sinc) s += std::fabs(c);
        return s;
    }
    // sup |f'| <= 2 pi sum k (|a_k| + |b_k|)
    double deriv_bound() const {
        double s = 0.0;
        for (std::size_t i = 0; i < cosc.size(); ++i) s += static_cast<double>(i + 1) * std::fabs(cosc[i]);
        for (std::size_t i = 0; i < sinc.size(); ++i) s += static_cast<double>(i + 1) * std::fabs(sinc[i]);
        return kTwoPi * s;
    }
};

inline double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }

struct Environment {
    TrigPolynomial f;
    AlphaSpec alpha;
    double pmin = 0.5;  // certified lower bound on p over the whole circle
    double pmax = 0.5;  // certified upper bound

    static Environment make(TrigPolynomial f, AlphaSpec alpha) {
        if (!(alpha.value > 0.0 && alpha.value < 1.0))
            throw std::domain_error("environment: alpha must lie strictly inside (0, 1)");
        Environment e;
        e.f = std::move(f);
        e.alpha = std::move(alpha);

        // Dense sampling plus a derivative-bound inflation gives certified
        // ellipticity constants: |p'| = p q |f'| <= |f'|/4, and between two
        // of the 4096 samples p moves by at most sup|p'|/(2*4096).
        const int grid = 4096;
        double lo = 1.0, hi = 0.0;
        for (int i = 0; i < grid; ++i) {
            double p = logistic(e.f.eval(static_cast<double>(i) / grid));
            lo = std::min(lo, p);
            hi = std::max(hi, p);
        }
        double pad = e.f.deriv_bound() / 4.0 / (2.0 * grid);
        // logistic of the coefficient bound is a hard floor independent of the grid
        double floor_p = logistic(-e.f.sup_bound());
        e.pmin = std::max(lo - pad, floor_p);
        e.pmax = std::min(hi + pad, 1.0 - floor_p);
        return e;
    }

    static Environment make(TrigPolynomial f, double alpha) {
        AlphaSpec s;
        s.value = alpha;
        return make(std::move(f), std::move(s));
    }
};

// log-odds, step probabilities
inline double eval_f(const Environment& e, double x) { return e.f.eval(x); }
inline double eval_p(const Environment& e, double x) { return logistic(e.f.eval(x)); }
inline double eval_q(const Environment& e, double x) { return 1.0 - eval_p(e, x); }

// The default study environment: f = cos(2 pi x) over the golden rotation.
inline Environment default_environment() {
    TrigPolynomial f;
    f.cosc = {1.0};
    AlphaSpec a;
    a.value = golden_alpha();
    return Environment::make(std::move(f), std::move(a));
}

// Step probabilities precomputed along the orbit x0 + k*alpha for
// |k| <= radius; every lattice routine indexes this table instead of
// re-evaluating trig functions per step.
struct OrbitTable {
    double x0 = 0.0;
    double alpha = 0.0;
    int radius = 0;
    std::vector<double> pos;  // circle position of site k at index k+radius
    std::vector<double> p;    // right-step probability at site k
    std::vector<double> q;    // 1 - p

    int index(std::int64_t k) const { return static_cast<int>(k) + radius; }
    double pos_at(std::int64_t k) const { return pos[static_cast<std::size_t>(index(k))]; }
    double p_at(std::int64_t k) const { return p[static_cast<std::size_t>(index(k))]; }
    double q_at(std::int64_t k) const { return q[static_cast<std::size_t>(index(k))]; }

    static OrbitTable build(const Environment& e, double x0, int radius) {
        if (radius < 0) throw std::invalid_argument("orbit table: radius must be >= 0");
        // three doubles per site; refuse absurd windows before allocating
        double bytes = 3.0 * 8.0 * (2.0 * radius + 1.0);
        if (bytes > 6.0e9)
            throw CapError("orbit table: window of " + std::to_string(2 * radius + 1) +
                           " sites exceeds the memory cap");
        OrbitTable t;
        t.x0 = wrap_unit(x0);
        t.alpha = e.alpha.value;
        t.radius = radius;
        std::size_t n = static_cast<std::size_t>(2 * radius + 1);
        t.pos.resize(n);
        t.p.resize(n);
        t.q.resize(n);
        // walk outward in both directions; error grows like k*ulp, fine for
        // the horizons used here
        double y = t.x0;
        for (int k = 0; k <= radius; ++k) {
            t.pos[static_cast<std::size_t>(k + radius)] = y;
            y = wrap_unit(y + t.alpha);
        }
        y = t.x0;
        for (int k = -1; k >= -radius; --k) {
            y = wrap_unit(y - t.alpha);
            t.pos[static_cast<std::size_t>(k + radius)] = y;
        }
        for (std::size_t i = 0; i < n; ++i) {
            t.p[i] = logistic(e.f.eval(t.pos[i]));
            t.q[i] = 1.0 - t.p[i];
        }
        return t;
    }

    // Site-independent environment with right-step probability p0; used for
    // drifted control experiments that have no circle structure.
    static OrbitTable constant(double p0, int radius) {
        if (!(p0 > 0.0 && p0 < 1.0))
            throw std::domain_error("orbit table: constant p must lie in (0, 1)");
        OrbitTable t;
        t.radius = radius;
        std::size_t n = static_cast<std::size_t>(2 * radius + 1);
        t.pos.assign(n, 0.0);
        t.p.assign(n, p0);
        t.q.assign(n, 1.0 - p0);
        return t;
    }
};

// Total variation of f over one period, by adaptive Simpson on |f'|.
namespace detail {

template <typename G>
double simpson_rec(const G& g, double a, double b, double fa, double fm, double fb, double whole,
                   double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = g(lm), frm = g(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double sum = left + right;
    if (depth <= 0 || std::fabs(sum - whole) < 15.0 * tol)
        return sum + (sum - whole) / 15.0;
    return simpson_rec(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

inline double total_variation(const TrigPolynomial& f) {
    if (f.zero()) return 0.0;
    auto g = [&f](double x) { return std::fabs(f.deriv(x)); };
    // seed the recursion with enough panels to see every monotone piece
    int panels = std::max(16, 8 * f.degree());
    double tol = 1e-10 * std::max(1.0, f.deriv_bound());
    double total = 0.0;
    for (int i = 0; i < panels; ++i) {
        double a = static_cast<double>(i) / panels;
        double b = static_cast<double>(i + 1) / panels;
        double m = 0.5 * (a + b);
        double fa = g(a), fm = g(m), fb = g(b);
        double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        total += detail::simpson_rec(g, a, b, fa, fm, fb, whole, tol / panels, 28);
    }
    return total;
}

// Birkhoff sum sum_{j=1}^{n} f(x + j alpha).
inline double birkhoff_sum(const Environment& e, double x, std::int64_t n) {
    if (n < 0) throw std::invalid_argument("birkhoff_sum: n must be >= 0");
    double y = wrap_unit(x);
    double s = 0.0;
    for (std::int64_t j = 1; j <= n; ++j) {
        y = wrap_unit(y + e.alpha.value);
        s += e.f.eval(y);
    }
    return s;
}

// Certificate that Birkhoff sums at a close return time stay inside the
// total-variation band: |S_q f(x)| < var(f) for every x on the given grid.
struct DKReport {
    std::int64_t q = 0;
    double variation = 0.0;
    double max_abs_sum = 0.0;
    double argmax_x = 0.0;
    int violations = 0;
    bool pass = false;
};

inline DKReport denjoy_koksma_certificate(const Environment& e, const std::vector<double>& x_grid,
                                          std::int64_t q) {
    auto crt = close_return_times(e.alpha, q);
    if (crt.empty() || crt.back() != q)
        throw std::invalid_argument("denjoy_koksma_certificate: q = " + std::to_string(q) +
                                    " is not a close return time of alpha; the bound is not claimed there");
    DKReport r;
    r.q = q;
    r.variation = total_variation(e.f);
    for (double x : x_grid) {
        double s = birkhoff_sum(e, x, q);
        double a = std::fabs(s);
        if (a > r.max_abs_sum) {
            r.max_abs_sum = a;
            r.argmax_x = x;
        }
        if (a >= r.variation && a > 0.0) ++r.violations;
    }
    r.pass = (r.violations == 0);
    return r;
}

}  // namespace qpwalk
