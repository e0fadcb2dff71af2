#pragma once

#include <cmath>
#include <cstdint>

namespace qpwalk {

// Compensated (Kahan) accumulator for long sums of small terms.
struct KahanSum {
    double s = 0.0;
    double c = 0.0;
    void add(double v) {
        double y = v - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    double value() const { return s; }
};

// Wilson 95% score interval for a binomial proportion.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool overlaps(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }
    double width() const { return hi - lo; }
};

inline Interval wilson_interval(std::int64_t count, std::int64_t n, double z = 1.959963984540054) {
    if (n <= 0) return {0.0, 1.0};
    double p = static_cast<double>(count) / static_cast<double>(n);
    double z2 = z * z;
    double denom = 1.0 + z2 / static_cast<double>(n);
    double center = (p + z2 / (2.0 * static_cast<double>(n))) / denom;
    double half = z * std::sqrt(p * (1.0 - p) / static_cast<double>(n) +
                                z2 / (4.0 * static_cast<double>(n) * static_cast<double>(n))) / denom;
    double lo = center - half, hi = center + half;
    if (lo < 0.0) lo = 0.0;
    if (hi > 1.0) hi = 1.0;
    return {lo, hi};
}

// Streaming mean/variance (Welford).
struct RunningMoments {
    std::int64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;
    void add(double v) {
        ++n;
        double d = v - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (v - mean);
    }
    double variance() const { return (n > 1) ? m2 / static_cast<double>(n - 1) : 0.0; }
    double stddev() const { return std::sqrt(variance()); }
    double sem() const { return (n > 0) ? stddev() / std::sqrt(static_cast<double>(n)) : 0.0; }
};

// P(|N(0, sigma^2)| <= t), the reflected-Gaussian law of max - end for a
// Brownian path over unit time.
inline double reflected_gaussian_cdf(double t, double sigma) {
    if (sigma <= 0.0) return (t >= 0.0) ? 1.0 : 0.0;
    return std::erf(t / (sigma * 1.4142135623730951));
}

}  // namespace qpwalk
