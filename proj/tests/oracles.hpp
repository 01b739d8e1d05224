#pragma once

// Reference computations used by the tests. Deliberately naive and
// independent of the library's numeric helpers.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
    if (n % 2)
        ++n;
    double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i)
        s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

/// Smallest maximizer of f on a uniform grid of n + 1 points.
inline double grid_argmax(const std::function<double(double)>& f, double lo, double hi, int n) {
    double best_x = lo, best = f(lo);
    for (int i = 1; i <= n; ++i) {
        double x = lo + (hi - lo) * i / n;
        double v = f(x);
        if (v > best) {
            best = v;
            best_x = x;
        }
    }
    return best_x;
}

inline double lognormal_cdf(double x, double mu, double sigma) {
    if (x <= 0.0)
        return 0.0;
    return 0.5 * std::erfc(-(std::log(x) - mu) / (sigma * std::sqrt(2.0)));
}

/// Concave majorant of (x_i, y_i) evaluated at each x_i, by brute force over
/// all chords that straddle the point.
inline std::vector<double> concave_envelope(const std::vector<double>& x, const std::vector<double>& y) {
    std::size_t n = x.size();
    std::vector<double> env(y);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 2; j < n; ++j)
            for (std::size_t k = i + 1; k < j; ++k) {
                double t = (x[k] - x[i]) / (x[j] - x[i]);
                env[k] = std::max(env[k], y[i] + t * (y[j] - y[i]));
            }
    return env;
}

/// Direct second-price-family rules, written out independently.
inline int argmax_lowest(const std::vector<double>& b) {
    int w = 0;
    for (int i = 1; i < static_cast<int>(b.size()); ++i)
        if (b[i] > b[w])
            w = i;
    return w;
}

inline double second_highest(const std::vector<double>& b, int skip) {
    double s = 0.0;
    for (int i = 0; i < static_cast<int>(b.size()); ++i)
        if (i != skip)
            s = std::max(s, b[i]);
    return s;
}

}  // namespace oracle
