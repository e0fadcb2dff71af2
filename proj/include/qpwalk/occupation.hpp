#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "qpwalk/circle.hpp"
#include "qpwalk/environment.hpp"
#include "qpwalk/martingale.hpp"

// Expected visit counts before the first return to the origin, and the
// atomic circle measures built from them. mu(a) is the expected number of
// visits to lattice site a strictly before the walk first returns to 0;
// weighting the orbit points x + k*alpha by mu(k) gives computable
// candidates for the stationary measure of the environment seen from the
// particle.

namespace qpwalk {

struct VisitProfile {
    double x = 0.0;
    int radius = 0;
    std::vector<double> mu;      // index a+radius
    std::vector<double> log_mu;  // same layout

    double at(std::int64_t a) const { return mu[static_cast<std::size_t>(a + radius)]; }
    double log_at(std::int64_t a) const { return log_mu[static_cast<std::size_t>(a + radius)]; }
};

// Closed form, a > 0 (mirrored for a < 0):
//   mu(a) = p(x)/q(x+aa) * prod_{j=1}^{a-1} p(x+ja)/q(x+ja)
//         = p(x) / ( q(x+aa) (M(a) - M(a-1)) ).
// The product starts at j = 1. Starting it at j = 0 multiplies in a stray
// p(x)/q(x) and breaks the stationarity identity at the a = 0 row; that
// variant is kept behind origin_factor as a negative control for tests.
inline VisitProfile visit_counts(const Environment& e, double x, int radius,
                                 bool origin_factor = false) {
    if (radius < 1) throw std::invalid_argument("visit_counts: radius must be >= 1");
    VisitProfile v;
    v.x = wrap_unit(x);
    v.radius = radius;
    std::size_t n = static_cast<std::size_t>(2 * radius + 1);
    v.mu.assign(n, 0.0);
    v.log_mu.assign(n, 0.0);

    const double f0 = e.f.eval(v.x);
    const double log_p0 = -std::log1p(std::exp(-f0));  // log p(x)
    const double log_q0 = -std::log1p(std::exp(f0));   // log q(x)

    // log q = -log(1+e^f), log p = -log(1+e^-f), evaluated along the orbit
    // with running Birkhoff sums of f
    double y = v.x;
    double sum_f = 0.0;  // sum_{j=1}^{a-1} f(x+ja)
    for (int a = 1; a <= radius; ++a) {
        double y_next = wrap_unit(y + e.alpha.value);  // x + a*alpha
        double fa = e.f.eval(y_next);
        double log_qa = -std::log1p(std::exp(fa));
        double lm = log_p0 - log_qa + sum_f;
        if (origin_factor) lm += f0;
        v.log_mu[static_cast<std::size_t>(a + radius)] = lm;
        sum_f += fa;
        y = y_next;
    }
    y = v.x;
    sum_f = 0.0;
    for (int a = 1; a <= radius; ++a) {
        double y_next = wrap_unit(y - e.alpha.value);  // x - a*alpha
        double fa = e.f.eval(y_next);
        double log_pa = -std::log1p(std::exp(-fa));
        double lm = log_q0 - log_pa - sum_f;
        if (origin_factor) lm -= f0;
        v.log_mu[static_cast<std::size_t>(-a + radius)] = lm;
        sum_f += fa;
        y = y_next;
    }
    v.log_mu[static_cast<std::size_t>(radius)] = 0.0;  // mu(0) = 1 by definition
    for (std::size_t i = 0; i < n; ++i) v.mu[i] = std::exp(v.log_mu[i]);
    return v;
}

// Escape parameter of the visit geometry: the probability that the walk at a
// reaches 0 before coming back to a. Visits to a before returning to 0 are
// then geometric with this parameter.
inline double geometric_parameter(const Environment& e, double x, std::int64_t a,
                                  const MartingaleTable& t) {
    if (a == 0) throw std::invalid_argument("geometric_parameter: a must be nonzero");
    if (std::llabs(a) > t.radius)
        throw std::invalid_argument("geometric_parameter: |a| exceeds table radius");
    double pos = wrap_unit(x + static_cast<double>(a) * e.alpha.value);
    double r;
    if (a > 0) {
        double q_a = 1.0 - logistic(e.f.eval(pos));
        r = q_a * t.increment(a - 1) / t.at(a);
    } else {
        double p_a = logistic(e.f.eval(pos));
        r = p_a * t.increment(a) / (-t.at(a));
    }
    if (!(r > 0.0 && r < 1.0))
        throw std::range_error("geometric_parameter: value " + std::to_string(r) +
                               " outside (0,1); table too small or drive too strong");
    return r;
}

// Largest relative defect of the stationarity identity
//   p(x+(a-1)a) mu(a-1) + q(x+(a+1)a) mu(a+1) = mu(a)
// over the interior of the profile.
inline double invariant_density_residual(const VisitProfile& v, const Environment& e) {
    double worst = 0.0;
    for (std::int64_t a = -v.radius + 1; a <= v.radius - 1; ++a) {
        double pos_lo = wrap_unit(v.x + static_cast<double>(a - 1) * e.alpha.value);
        double pos_hi = wrap_unit(v.x + static_cast<double>(a + 1) * e.alpha.value);
        double p_lo = logistic(e.f.eval(pos_lo));
        double q_hi = 1.0 - logistic(e.f.eval(pos_hi));
        double lhs = p_lo * v.at(a - 1) + q_hi * v.at(a + 1);
        double r = std::fabs(lhs - v.at(a)) / v.at(a);
        if (r > worst) worst = r;
    }
    return worst;
}

// ---- Atomic measures on the circle ----

struct Atom {
    double pos = 0.0;
    double w = 0.0;
};

struct AtomicCircleMeasure {
    std::vector<Atom> atoms;   // sorted by position after canonicalize()
    bool normalized = false;   // set when weights sum to 1 by construction

    static constexpr double kMergeEps = 1e-14;

    double total() const {
        double s = 0.0;
        for (const Atom& a : atoms) s += a.w;
        return s;
    }

    // Sort by position and merge atoms closer than kMergeEps (circle
    // distance, so the seam at 0/1 merges too).
    void canonicalize() {
        if (atoms.empty()) return;
        std::sort(atoms.begin(), atoms.end(),
                  [](const Atom& a, const Atom& b) { return a.pos < b.pos; });
        std::vector<Atom> merged;
        merged.reserve(atoms.size());
        for (const Atom& a : atoms) {
            if (!merged.empty() && a.pos - merged.back().pos <= kMergeEps)
                merged.back().w += a.w;
            else
                merged.push_back(a);
        }
        if (merged.size() >= 2 && (1.0 - merged.back().pos) + merged.front().pos <= kMergeEps) {
            merged.front().w += merged.back().w;
            merged.pop_back();
        }
        atoms = std::move(merged);
    }
};

inline double test_integral(const AtomicCircleMeasure& m, const Harmonic& h) {
    if (!m.normalized)
        throw std::invalid_argument("test_integral: measure is not normalized");
    double s = 0.0;
    for (const Atom& a : m.atoms) s += a.w * h.eval(a.pos);
    return s;
}

// One step of the walk kernel applied to an atomic measure: the atom at y
// splits into p(y) at y+alpha and q(y) at y-alpha. Mass is preserved.
inline AtomicCircleMeasure pushforward(const AtomicCircleMeasure& m, const Environment& e) {
    AtomicCircleMeasure out;
    out.normalized = m.normalized;
    out.atoms.reserve(2 * m.atoms.size());
    for (const Atom& a : m.atoms) {
        double p = logistic(e.f.eval(a.pos));
        out.atoms.push_back({wrap_unit(a.pos + e.alpha.value), p * a.w});
        out.atoms.push_back({wrap_unit(a.pos - e.alpha.value), (1.0 - p) * a.w});
    }
    out.canonicalize();
    return out;
}

// Visit-weighted orbit measures over one close-return block 0 <= k < q,
// split by the parity of k. Each component is normalized; the block masses
// are reported so callers can recombine them.
struct NuPair {
    AtomicCircleMeasure even, odd;
    double mass_even = 0.0, mass_odd = 0.0;  // unnormalized visit mass per block
};

inline NuPair nu_measures(const Environment& e, double x, std::int64_t q) {
    if (q < 2) throw std::invalid_argument("nu_measures: q must be >= 2");
    VisitProfile v = visit_counts(e, x, static_cast<int>(q));
    NuPair out;
    double y = wrap_unit(x);
    for (std::int64_t k = 0; k < q; ++k) {
        double w = v.at(k);
        if (k % 2 == 0) {
            out.even.atoms.push_back({y, w});
            out.mass_even += w;
        } else {
            out.odd.atoms.push_back({y, w});
            out.mass_odd += w;
        }
        y = wrap_unit(y + e.alpha.value);
    }
    for (Atom& a : out.even.atoms) a.w /= out.mass_even;
    for (Atom& a : out.odd.atoms) a.w /= out.mass_odd;
    out.even.normalized = true;
    out.odd.normalized = true;
    out.even.canonicalize();
    out.odd.canonicalize();
    return out;
}

// Mass-weighted recombination of the parity components: equal to weighting
// every orbit point 0 <= k < q by mu(k) and normalizing once. Small block
// masses mean the window has not resolved the measure yet; that is flagged,
// not fatal.
struct StationaryEstimate {
    AtomicCircleMeasure measure;
    double mass_even = 0.0, mass_odd = 0.0;
    bool mass_ok = false;  // both block masses above 10
};

inline StationaryEstimate stationary_estimate(const Environment& e, double x, std::int64_t q) {
    NuPair nu = nu_measures(e, x, q);
    StationaryEstimate out;
    out.mass_even = nu.mass_even;
    out.mass_odd = nu.mass_odd;
    out.mass_ok = (nu.mass_even > 10.0 && nu.mass_odd > 10.0);
    double total = nu.mass_even + nu.mass_odd;
    out.measure.atoms.reserve(nu.even.atoms.size() + nu.odd.atoms.size());
    for (const Atom& a : nu.even.atoms)
        out.measure.atoms.push_back({a.pos, a.w * nu.mass_even / total});
    for (const Atom& a : nu.odd.atoms)
        out.measure.atoms.push_back({a.pos, a.w * nu.mass_odd / total});
    out.measure.normalized = true;
    out.measure.canonicalize();
    return out;
}

// How compatible an atomic estimate is with the rotation quasi-invariance of
// the limit measure: mass transported by the rotation should match mass
// reweighted by p(y)/q(y+alpha). There is no exact identity at finite q;
// the gaps are diagnostics and should shrink along close-return q.
struct QuasiInvarianceRow {
    Harmonic h;
    double rotated = 0.0;     // integral of phi(y - alpha)
    double reweighted = 0.0;  // integral of phi(y) p(y)/q(y+alpha)
    double gap = 0.0;
};

inline std::vector<QuasiInvarianceRow> quasi_invariance_diagnostic(
    const AtomicCircleMeasure& m, const Environment& e, const std::vector<Harmonic>& hs) {
    if (!m.normalized)
        throw std::invalid_argument("quasi_invariance_diagnostic: measure is not normalized");
    std::vector<QuasiInvarianceRow> rows;
    rows.reserve(hs.size());
    for (const Harmonic& h : hs) {
        QuasiInvarianceRow r;
        r.h = h;
        for (const Atom& a : m.atoms) {
            double p = logistic(e.f.eval(a.pos));
            double q_next = 1.0 - logistic(e.f.eval(wrap_unit(a.pos + e.alpha.value)));
            r.rotated += a.w * h.eval(wrap_unit(a.pos - e.alpha.value));
            r.reweighted += a.w * h.eval(a.pos) * (p / q_next);
        }
        r.gap = std::fabs(r.rotated - r.reweighted);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace qpwalk
