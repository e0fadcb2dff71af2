#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qpwalk/environment.hpp"
#include "qpwalk/errors.hpp"
#include "qpwalk/occupation.hpp"
#include "qpwalk/stats.hpp"

// Exact evolution of the walk's site distribution by dynamic programming.
// Two chains share the machinery:
//   walk: steps +-1 with probabilities p/q read off the orbit;
//   half: the walk watched every two steps, relabelled so half-site k is
//         walk site 2k. It moves +-1 or stays, its stay probability is
//         bounded below by 2*pmin*(1-pmax), and two of its steps reproduce
//         four walk steps exactly, which the tests pin down.
// A taboo site turns the evolution into first-passage bookkeeping: mass
// arriving there is moved to an absorbed ledger and frozen.

namespace qpwalk {

inline constexpr std::int64_t kDefaultHorizon = 1'000'000;

enum class ChainKind { walk, half };

struct LatticeDistribution {
    ChainKind kind = ChainKind::walk;
    std::int64_t time = 0;
    std::int64_t lo = 0;       // lowest represented site, in the chain's own units
    std::vector<double> mass;  // mass[i] is the probability at site lo + i
    double absorbed = 0.0;
    std::optional<std::int64_t> taboo;
    double x0 = 0.0;     // circle start point
    double alpha = 0.0;  // rotation step

    std::int64_t hi() const { return lo + static_cast<std::int64_t>(mass.size()) - 1; }
    double at(std::int64_t site) const {
        if (site < lo || site > hi()) return 0.0;
        return mass[static_cast<std::size_t>(site - lo)];
    }
    double total() const {
        KahanSum s;
        for (double v : mass) s.add(v);
        return s.value();
    }
    // walk sites advance by 1 per unit of chain site for the walk chain,
    // by 2 for the half chain
    int site_stride() const { return kind == ChainKind::walk ? 1 : 2; }
};

// Stepper holding the precomputed kernels. Walk evolutions index the orbit
// table directly; half evolutions precompute their three-band kernel once.
class LatticeEvolver {
  public:
    LatticeEvolver(const OrbitTable& orbit, ChainKind kind, std::optional<std::int64_t> taboo)
        : orbit_(&orbit), kind_(kind) {
        dist_.kind = kind;
        dist_.taboo = taboo;
        dist_.lo = 0;
        dist_.mass = {1.0};
        dist_.x0 = orbit.x0;
        dist_.alpha = orbit.alpha;
        if (kind == ChainKind::half) {
            // half-site k uses walk sites 2k-1 .. 2k+1
            half_radius_ = (orbit.radius - 1) / 2;
            if (half_radius_ < 0) throw std::invalid_argument("lattice: orbit table too small");
            std::size_t n = static_cast<std::size_t>(2 * half_radius_ + 1);
            right_.resize(n);
            stay_.resize(n);
            left_.resize(n);
            for (std::int64_t k = -half_radius_; k <= half_radius_; ++k) {
                double p0 = orbit.p_at(2 * k);
                double q0 = orbit.q_at(2 * k);
                std::size_t i = static_cast<std::size_t>(k + half_radius_);
                right_[i] = p0 * orbit.p_at(2 * k + 1);
                left_[i] = q0 * orbit.q_at(2 * k - 1);
                stay_[i] = p0 * orbit.q_at(2 * k + 1) + q0 * orbit.p_at(2 * k - 1);
            }
        }
    }

    const LatticeDistribution& dist() const { return dist_; }
    LatticeDistribution take() { return std::move(dist_); }
    // mass moved to the ledger during the most recent step
    double last_absorbed_delta() const { return absorbed_delta_; }

    void step() {
        if (kind_ == ChainKind::walk)
            step_walk();
        else
            step_half();
        ++dist_.time;
    }

  private:
    void step_walk() {
        std::int64_t lo = dist_.lo, hi = dist_.hi();
        std::int64_t nlo = lo - 1, nhi = hi + 1;
        if (nlo < -orbit_->radius || nhi > orbit_->radius)
            throw CapError("lattice: evolution outgrew the orbit table");
        std::size_t nsize = static_cast<std::size_t>(nhi - nlo + 1);
        std::vector<double> next(nsize, 0.0);
        const double* P = orbit_->p.data() + orbit_->radius;  // P[s] at walk site s
        const double* Q = orbit_->q.data() + orbit_->radius;
        const double* in = dist_.mass.data();
        double* out = next.data();
        std::size_t last = nsize - 1;
        // sites nlo and nhi get single-sided contributions
        out[0] = Q[nlo + 1] * in[0];
        out[last] = P[nhi - 1] * in[last - 2];
        // interior sites of the new support share the walk's parity, so
        // stride 2 touches exactly the populated lanes
        for (std::size_t j = 2; j + 2 <= last; j += 2) {
            std::int64_t s = nlo + static_cast<std::int64_t>(j);
            out[j] = P[s - 1] * in[j - 2] + Q[s + 1] * in[j];
        }
        absorb(next, nlo);
        dist_.lo = nlo;
        dist_.mass = std::move(next);
    }

    void step_half() {
        std::int64_t lo = dist_.lo, hi = dist_.hi();
        std::int64_t nlo = lo - 1, nhi = hi + 1;
        if (nlo < -half_radius_ || nhi > half_radius_)
            throw CapError("lattice: evolution outgrew the orbit table");
        std::size_t nsize = static_cast<std::size_t>(nhi - nlo + 1);
        std::vector<double> next(nsize, 0.0);
        const double* R = right_.data() + half_radius_;
        const double* S = stay_.data() + half_radius_;
        const double* L = left_.data() + half_radius_;
        const double* in = dist_.mass.data();
        double* out = next.data();
        std::size_t last = nsize - 1;
        for (std::size_t j = 0; j <= last; ++j) {
            std::int64_t s = nlo + static_cast<std::int64_t>(j);
            double acc = 0.0;
            if (j >= 2) acc += R[s - 1] * in[j - 2];
            if (j >= 1 && j - 1 <= last - 2) acc += S[s] * in[j - 1];
            if (j <= last - 2) acc += L[s + 1] * in[j];
            out[j] = acc;
        }
        absorb(next, nlo);
        dist_.lo = nlo;
        dist_.mass = std::move(next);
    }

    void absorb(std::vector<double>& next, std::int64_t nlo) {
        absorbed_delta_ = 0.0;
        if (!dist_.taboo) return;
        std::int64_t t = *dist_.taboo;
        std::int64_t nhi = nlo + static_cast<std::int64_t>(next.size()) - 1;
        if (t < nlo || t > nhi) return;
        double& slot = next[static_cast<std::size_t>(t - nlo)];
        absorbed_delta_ = slot;
        dist_.absorbed += slot;
        slot = 0.0;
    }

    const OrbitTable* orbit_;
    ChainKind kind_;
    LatticeDistribution dist_;
    double absorbed_delta_ = 0.0;
    std::int64_t half_radius_ = 0;
    std::vector<double> right_, stay_, left_;
};

namespace detail {

inline void check_horizon(std::int64_t n, std::int64_t cap) {
    if (n < 0) throw std::invalid_argument("lattice: negative step count");
    if (n > cap)
        throw CapError("lattice: requested " + std::to_string(n) + " steps, horizon cap is " +
                       std::to_string(cap));
}

inline int orbit_radius_for(ChainKind kind, std::int64_t n) {
    // half-site n touches walk sites up to 2n+1
    return kind == ChainKind::walk ? static_cast<int>(n) : static_cast<int>(2 * n + 1);
}

}  // namespace detail

// Distribution of the chain after n steps from a point mass at the origin.
inline LatticeDistribution distribution_at(const Environment& e, double x, std::int64_t n,
                                           std::optional<std::int64_t> taboo = std::nullopt,
                                           ChainKind kind = ChainKind::walk,
                                           std::int64_t horizon_cap = kDefaultHorizon) {
    detail::check_horizon(n, horizon_cap);
    OrbitTable orbit = OrbitTable::build(e, x, std::max(1, detail::orbit_radius_for(kind, n)));
    LatticeEvolver ev(orbit, kind, taboo);
    for (std::int64_t i = 0; i < n; ++i) ev.step();
    return ev.take();
}

// First-visit series under the taboo at 0: terms[k-1] is the probability of
// sitting at `target` at step k without having touched 0 at steps 1..k
// (for target 0 it is the probability that the first return happens at k).
struct TabooSeries {
    std::int64_t target = 0;
    std::vector<double> terms;  // k = 1..K

    double partial_sum() const {
        KahanSum s;
        for (double v : terms) s.add(v);
        return s.value();
    }
};

inline TabooSeries taboo_series(const Environment& e, double x, std::int64_t target,
                                std::int64_t steps, ChainKind kind = ChainKind::walk,
                                std::int64_t horizon_cap = kDefaultHorizon) {
    detail::check_horizon(steps, horizon_cap);
    OrbitTable orbit = OrbitTable::build(e, x, std::max(1, detail::orbit_radius_for(kind, steps)));
    LatticeEvolver ev(orbit, kind, 0);
    TabooSeries out;
    out.target = target;
    out.terms.reserve(static_cast<std::size_t>(steps));
    for (std::int64_t k = 1; k <= steps; ++k) {
        ev.step();
        out.terms.push_back(target == 0 ? ev.last_absorbed_delta() : ev.dist().at(target));
    }
    return out;
}

// Expected visits to sites before the first return to 0, from a single taboo
// evolution. The raw partial sum converges like S_K = S - c K^{-1/2} (the
// first-return tail of a null-recurrent nearest-neighbour chain is k^{-3/2}),
// so snapshotting at K/4 and K and returning 2 S_K - S_{K/4} cancels the
// leading tail term and leaves an O(K^{-1}) bias. Runs of K = 1e4 land within
// about 2e-4 of the closed form where the raw sum is still 5% short.
inline std::vector<double> mu_via_dp_batch(const Environment& e, double x,
                                           const std::vector<std::int64_t>& targets,
                                           std::int64_t steps,
                                           std::int64_t horizon_cap = kDefaultHorizon) {
    detail::check_horizon(steps, horizon_cap);
    OrbitTable orbit = OrbitTable::build(e, x, std::max(1, detail::orbit_radius_for(ChainKind::walk, steps)));
    LatticeEvolver ev(orbit, ChainKind::walk, 0);
    std::vector<KahanSum> acc(targets.size());
    std::vector<double> quarter(targets.size(), 0.0);
    std::int64_t snap = steps / 4;
    for (std::int64_t k = 1; k <= steps; ++k) {
        ev.step();
        for (std::size_t i = 0; i < targets.size(); ++i)
            if (targets[i] != 0) acc[i].add(ev.dist().at(targets[i]));
        if (k == snap)
            for (std::size_t i = 0; i < targets.size(); ++i) quarter[i] = acc[i].value();
    }
    std::vector<double> out(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (targets[i] == 0) {
            out[i] = 1.0;  // the visit at time 0 is the only one that counts
        } else if (snap >= 1) {
            out[i] = 2.0 * acc[i].value() - quarter[i];
        } else {
            out[i] = acc[i].value();
        }
    }
    return out;
}

inline double mu_via_dp(const Environment& e, double x, std::int64_t a, std::int64_t steps,
                        std::int64_t horizon_cap = kDefaultHorizon) {
    return mu_via_dp_batch(e, x, {a}, steps, horizon_cap)[0];
}

// Brackets on P(at least j visits to `a` before the first return to 0).
// Layered evolution: layer c holds paths with exactly c visits so far
// (capped at j_max), mass moves up a layer on arrival at `a` and is
// retired to the layer's ledger on arrival at 0. Mass still in flight at
// the horizon is the bracket width: its visits so far are certain, its
// future visits are not.
struct VisitNumberBrackets {
    std::int64_t a = 0;
    std::vector<double> lower;  // index j-1 holds the bound for >= j visits
    std::vector<double> upper;
    double unresolved = 0.0;  // total surviving mass at the horizon
};

inline VisitNumberBrackets visit_number_brackets(const Environment& e, double x, std::int64_t a,
                                                 int j_max, std::int64_t steps,
                                                 std::int64_t horizon_cap = kDefaultHorizon) {
    if (a == 0) throw std::invalid_argument("visit_number_brackets: a must be nonzero");
    if (j_max < 1) throw std::invalid_argument("visit_number_brackets: j_max must be >= 1");
    detail::check_horizon(steps, horizon_cap);
    int radius = std::max(1, static_cast<int>(steps));
    OrbitTable orbit = OrbitTable::build(e, x, radius);
    const double* P = orbit.p.data() + orbit.radius;
    const double* Q = orbit.q.data() + orbit.radius;

    std::size_t width = static_cast<std::size_t>(2 * steps + 1);
    std::int64_t off = steps;  // site s lives at slot s + off
    int layers = j_max + 1;
    std::vector<std::vector<double>> cur(layers, std::vector<double>(width, 0.0));
    std::vector<std::vector<double>> nxt(layers, std::vector<double>(width, 0.0));
    cur[0][static_cast<std::size_t>(off)] = 1.0;
    std::vector<double> retired(layers, 0.0);  // absorbed at 0 with c visits

    for (std::int64_t t = 1; t <= steps; ++t) {
        for (auto& row : nxt) std::fill(row.begin(), row.end(), 0.0);
        for (int c = 0; c < layers; ++c) {
            const std::vector<double>& in = cur[c];
            for (std::int64_t s = -t + 1; s <= t - 1; ++s) {
                double w = in[static_cast<std::size_t>(s + off)];
                if (w == 0.0) continue;
                double wr = w * P[s], wl = w * Q[s];
                std::int64_t sr = s + 1, sl = s - 1;
                int cr = (sr == a && c < j_max) ? c + 1 : c;
                int cl = (sl == a && c < j_max) ? c + 1 : c;
                if (sr == 0)
                    retired[c] += wr;
                else
                    nxt[cr][static_cast<std::size_t>(sr + off)] += wr;
                if (sl == 0)
                    retired[c] += wl;
                else
                    nxt[cl][static_cast<std::size_t>(sl + off)] += wl;
            }
        }
        std::swap(cur, nxt);
    }

    std::vector<double> alive(layers, 0.0);
    double alive_total = 0.0;
    for (int c = 0; c < layers; ++c) {
        KahanSum s;
        for (double v : cur[c]) s.add(v);
        alive[c] = s.value();
        alive_total += alive[c];
    }
    VisitNumberBrackets out;
    out.a = a;
    out.unresolved = alive_total;
    out.lower.resize(static_cast<std::size_t>(j_max));
    out.upper.resize(static_cast<std::size_t>(j_max));
    for (int j = 1; j <= j_max; ++j) {
        double certain = 0.0;
        for (int c = j; c < layers; ++c) certain += retired[static_cast<std::size_t>(c)] + alive[static_cast<std::size_t>(c)];
        double pending = 0.0;
        for (int c = 0; c < j; ++c) pending += alive[static_cast<std::size_t>(c)];
        out.lower[static_cast<std::size_t>(j - 1)] = certain;
        out.upper[static_cast<std::size_t>(j - 1)] = certain + pending;
    }
    return out;
}

// ---- Return-probability asymptotics of the half chain ----

struct KORatioReport {
    std::vector<double> p0;     // P(half chain at 0 after k steps), k = 0..n
    std::vector<double> ratio;  // p0[k+1]/p0[k]
    bool truncated = false;     // stopped early on a vanishing denominator
};

inline KORatioReport kingman_orey_ratio(const Environment& e, double x, std::int64_t n,
                                        std::int64_t horizon_cap = kDefaultHorizon) {
    detail::check_horizon(n, horizon_cap);
    OrbitTable orbit = OrbitTable::build(e, x, std::max(1, detail::orbit_radius_for(ChainKind::half, n)));
    LatticeEvolver ev(orbit, ChainKind::half, std::nullopt);
    KORatioReport r;
    r.p0.reserve(static_cast<std::size_t>(n + 1));
    r.p0.push_back(1.0);
    for (std::int64_t k = 1; k <= n; ++k) {
        ev.step();
        double v = ev.dist().at(0);
        if (v < 1e-300) {
            r.truncated = true;
            break;
        }
        r.p0.push_back(v);
    }
    r.ratio.reserve(r.p0.size() - 1);
    for (std::size_t k = 0; k + 1 < r.p0.size(); ++k) r.ratio.push_back(r.p0[k + 1] / r.p0[k]);
    return r;
}

// u_n = -log P(half chain at 0 after n steps) grows subadditively and
// sublinearly; the report carries u_n/n rows and explicit subadditivity
// spot-checks for pairs drawn from the requested list.
struct SubexpReport {
    struct Row {
        std::int64_t n;
        double u;
        double u_over_n;
    };
    struct Spot {
        std::int64_t n, m;
        double defect;  // u_{n+m} - u_n - u_m, should be <= 0 up to rounding
        bool ok;
    };
    std::vector<Row> rows;
    std::vector<Spot> spots;
    bool pass = false;
};

inline SubexpReport subexponential_check(const Environment& e, double x,
                                         const std::vector<std::int64_t>& n_list,
                                         std::int64_t horizon_cap = kDefaultHorizon) {
    if (n_list.empty()) throw std::invalid_argument("subexponential_check: empty n list");
    std::int64_t n_max = *std::max_element(n_list.begin(), n_list.end());
    KORatioReport ko = kingman_orey_ratio(e, x, n_max, horizon_cap);
    if (ko.truncated || static_cast<std::int64_t>(ko.p0.size()) <= n_max)
        throw CapError("subexponential_check: return mass underflowed before n_max");
    auto u = [&ko](std::int64_t n) { return -std::log(ko.p0[static_cast<std::size_t>(n)]); };
    SubexpReport r;
    for (std::int64_t n : n_list)
        r.rows.push_back({n, u(n), u(n) / static_cast<double>(n)});
    r.pass = true;
    const double tol = 1e-9;
    for (std::int64_t n : n_list)
        for (std::int64_t m : n_list) {
            if (m < n || n + m > n_max) continue;
            double defect = u(n + m) - u(n) - u(m);
            bool ok = defect <= tol;
            r.spots.push_back({n, m, defect, ok});
            r.pass = r.pass && ok;
        }
    return r;
}

// Splitting every path at its last visit to 0 (first return, for target 0)
// ties the free evolution to the taboo series exactly:
//   P(Z_n = a) = sum_{k=1}^{n} P(Z_{n-k} = 0) f_k(a).
// Holds step-for-step for the half chain, so residuals sit at rounding level.
struct RenewalReport {
    struct Row {
        std::int64_t a;
        double lhs, rhs, residual;
    };
    std::vector<Row> rows;
    double max_residual = 0.0;
};

inline RenewalReport renewal_identity_check(const Environment& e, double x, std::int64_t n,
                                            const std::vector<std::int64_t>& targets,
                                            std::int64_t horizon_cap = kDefaultHorizon) {
    detail::check_horizon(n, horizon_cap);
    OrbitTable orbit = OrbitTable::build(e, x, std::max(1, detail::orbit_radius_for(ChainKind::half, n)));

    // free evolution: P(Z_k = 0) for k = 0..n, final masses at the targets
    LatticeEvolver free_ev(orbit, ChainKind::half, std::nullopt);
    std::vector<double> p0;
    p0.reserve(static_cast<std::size_t>(n + 1));
    p0.push_back(1.0);
    for (std::int64_t k = 1; k <= n; ++k) {
        free_ev.step();
        p0.push_back(free_ev.dist().at(0));
    }
    const LatticeDistribution& final_free = free_ev.dist();

    // taboo evolution: f_k(a) for every requested target at once
    LatticeEvolver tab_ev(orbit, ChainKind::half, 0);
    std::vector<std::vector<double>> f(targets.size());
    for (auto& v : f) v.reserve(static_cast<std::size_t>(n));
    for (std::int64_t k = 1; k <= n; ++k) {
        tab_ev.step();
        for (std::size_t ti = 0; ti < targets.size(); ++ti)
            f[ti].push_back(targets[ti] == 0 ? tab_ev.last_absorbed_delta()
                                             : tab_ev.dist().at(targets[ti]));
    }

    RenewalReport r;
    for (std::size_t ti = 0; ti < targets.size(); ++ti) {
        KahanSum rhs;
        for (std::int64_t k = 1; k <= n; ++k)
            rhs.add(p0[static_cast<std::size_t>(n - k)] * f[ti][static_cast<std::size_t>(k - 1)]);
        double lhs = final_free.at(targets[ti]);
        double res = std::fabs(lhs - rhs.value());
        r.rows.push_back({targets[ti], lhs, rhs.value(), res});
        r.max_residual = std::max(r.max_residual, res);
    }
    return r;
}

// ---- Ratio-limit and mixing diagnostics for the walk chain ----

// Site-occupation ratios after n steps against visit-count ratios. Only
// sites sharing the parity of n carry mass.
struct SrlpReport {
    struct Row {
        std::int64_t a, b;
        double prob_ratio, mu_ratio, deviation;
    };
    std::vector<Row> rows;
    double max_deviation = 0.0;
};

inline SrlpReport srlp_check(const Environment& e, double x, std::int64_t n, int window,
                             std::int64_t horizon_cap = kDefaultHorizon) {
    if (window < 1) throw std::invalid_argument("srlp_check: window must be >= 1");
    if (n < 2 * static_cast<std::int64_t>(window))
        throw std::invalid_argument("srlp_check: n too small for the window");
    LatticeDistribution d = distribution_at(e, x, n, std::nullopt, ChainKind::walk, horizon_cap);
    VisitProfile v = visit_counts(e, x, window);
    SrlpReport r;
    std::int64_t par = n % 2;
    for (std::int64_t a = -window; a <= window; ++a) {
        if (((a % 2) + 2) % 2 != par) continue;
        for (std::int64_t b = -window; b <= window; ++b) {
            if (b == a || ((b % 2) + 2) % 2 != par) continue;
            double pr = d.at(a) / d.at(b);
            double mr = v.at(a) / v.at(b);
            double dev = std::fabs(pr - mr);
            r.rows.push_back({a, b, pr, mr, dev});
            r.max_deviation = std::max(r.max_deviation, dev);
        }
    }
    return r;
}

// Push the lattice distribution onto the circle along the orbit.
inline AtomicCircleMeasure circle_projection(const LatticeDistribution& d) {
    AtomicCircleMeasure m;
    m.atoms.reserve(d.mass.size());
    int stride = d.site_stride();
    for (std::int64_t s = d.lo; s <= d.hi(); ++s) {
        double w = d.at(s);
        if (w == 0.0) continue;
        double pos = wrap_unit(d.x0 + static_cast<double>(s * stride) * d.alpha);
        m.atoms.push_back({pos, w});
    }
    m.normalized = (!d.taboo && d.absorbed == 0.0);
    m.canonicalize();
    return m;
}

// Harmonic averages of the walk position started from two circle points,
// against each other and against the visit-weighted stationary candidate.
struct MixingReport {
    struct Row {
        Harmonic h;
        double e1, e2, stationary;
        double gap12, gap1s, gap2s;
    };
    double x1, x2;
    std::int64_t n;
    std::int64_t q_stationary;
    std::vector<Row> rows;
    double max_gap12 = 0.0;
};

inline MixingReport mixing_distance(const Environment& e, double x1, double x2, std::int64_t n,
                                    const std::vector<Harmonic>& hs, std::int64_t q_stationary = 0,
                                    std::int64_t horizon_cap = kDefaultHorizon) {
    MixingReport r;
    r.x1 = x1;
    r.x2 = x2;
    r.n = n;
    if (q_stationary <= 0) {
        auto crt = close_return_times(e.alpha, std::max<std::int64_t>(2, std::min<std::int64_t>(n, 1000)));
        q_stationary = std::max<std::int64_t>(2, crt.back());
    }
    r.q_stationary = q_stationary;

    AtomicCircleMeasure m1 = circle_projection(distribution_at(e, x1, n, std::nullopt, ChainKind::walk, horizon_cap));
    AtomicCircleMeasure m2 = circle_projection(distribution_at(e, x2, n, std::nullopt, ChainKind::walk, horizon_cap));
    StationaryEstimate st = stationary_estimate(e, x1, q_stationary);

    for (const Harmonic& h : hs) {
        MixingReport::Row row;
        row.h = h;
        row.e1 = test_integral(m1, h);
        row.e2 = test_integral(m2, h);
        row.stationary = test_integral(st.measure, h);
        row.gap12 = std::fabs(row.e1 - row.e2);
        row.gap1s = std::fabs(row.e1 - row.stationary);
        row.gap2s = std::fabs(row.e2 - row.stationary);
        r.rows.push_back(row);
        r.max_gap12 = std::max(r.max_gap12, row.gap12);
    }
    return r;
}

}  // namespace qpwalk
