#pragma once

#include <cmath>
#include <vector>

// Small helpers for points on the unit circle R/Z.

namespace qpwalk {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Reduce to [0, 1).
inline double wrap_unit(double x) {
    double y = x - std::floor(x);
    // floor can round so that y lands exactly on 1.0 for tiny negative x
    return (y >= 1.0) ? y - 1.0 : y;
}

// Distance from x to 0 along the circle.
inline double circle_dist_to_zero(double x) {
    double y = wrap_unit(x);
    return std::min(y, 1.0 - y);
}

// One Fourier mode, cos(2*pi*k*y) or sin(2*pi*k*y).
struct Harmonic {
    int k = 1;
    bool sine = false;

    double eval(double y) const {
        double t = kTwoPi * static_cast<double>(k) * y;
        return sine ? std::sin(t) : std::cos(t);
    }
    const char* kind() const { return sine ? "sin" : "cos"; }
};

// The default diagnostic family: cos and sin for k = 1..kmax.
inline std::vector<Harmonic> harmonic_family(int kmax) {
    std::vector<Harmonic> out;
    for (int k = 1; k <= kmax; ++k) {
        out.push_back({k, false});
        out.push_back({k, true});
    }
    return out;
}

// n equally spaced points i/n, i = 0..n-1.
inline std::vector<double> uniform_grid(int n) {
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = static_cast<double>(i) / n;
    return g;
}

}  // namespace qpwalk
