#include "auctionlab/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "auctionlab/error.hpp"
#include "auctionlab/parallel.hpp"

namespace auctionlab {

namespace {
unsigned g_default_workers = 0;
}

unsigned default_workers() {
    if (g_default_workers != 0)
        return g_default_workers;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

void set_default_workers(unsigned workers) { g_default_workers = workers; }

}  // namespace auctionlab

namespace auctionlab::numeric {

double bisect_first_true(const std::function<bool(double)>& pred, double lo, double hi, double tol, int max_iter) {
    if (pred(lo))
        return lo;
    if (!pred(hi))
        return hi;
    for (int i = 0; i < max_iter && hi - lo > tol; ++i) {
        double mid = 0.5 * (lo + hi);
        if (pred(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

double first_reaching(const std::function<double(double)>& f, double target, double lo, double hi, double tol) {
    double flo = f(lo) - target;
    if (flo >= 0.0)
        return lo;
    double fhi = f(hi) - target;
    if (!(fhi >= 0.0))
        return hi;
    // Illinois false position on the bracket f(lo) < target <= f(hi); a step
    // that fails to halve the bracket twice in a row is followed by a bisection
    int last = 0, stall = 0;
    for (int i = 0; i < 400 && hi - lo > tol; ++i) {
        const double width = hi - lo;
        double x = 0.5 * (lo + hi);
        if (stall < 2 && std::isfinite(flo) && std::isfinite(fhi) && fhi > flo) {
            x = lo - flo * width / (fhi - flo);
            x = std::clamp(x, lo + 0.25 * tol, hi - 0.25 * tol);
        } else {
            stall = 0;
        }
        const double fx = f(x) - target;
        if (fx >= 0.0) {
            hi = x;
            fhi = fx;
            if (last == 1)
                flo *= 0.5;
            last = 1;
        } else {
            lo = x;
            flo = fx;
            if (last == -1)
                fhi *= 0.5;
            last = -1;
        }
        stall = hi - lo > 0.5 * width ? stall + 1 : 0;
    }
    return hi;
}

double bisect_root(const std::function<double(double)>& f, double lo, double hi, double tol, int max_iter) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0)
        return lo;
    if (fhi == 0.0)
        return hi;
    require((flo < 0.0) != (fhi < 0.0), ErrorKind::NoBracket, "bisect_root: endpoints do not bracket a root");
    for (int i = 0; i < max_iter && hi - lo > tol; ++i) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if (fm == 0.0)
            return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double golden_section_max(const std::function<double(double)>& f, double lo, double hi, double tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        // ">=" keeps the left bracket on ties, so flat tops resolve leftward.
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

double integrate(const std::function<double(double)>& f, double lo, double hi, double rel_tol) {
    if (!(hi > lo))
        return 0.0;
    using boost::math::quadrature::gauss_kronrod;
    return gauss_kronrod<double, 31>::integrate(f, lo, hi, 15, rel_tol);
}

double gauss_legendre(const std::function<double(double)>& f, double lo, double hi) {
    if (!(hi > lo))
        return 0.0;
    return boost::math::quadrature::gauss<double, 20>::integrate(f, lo, hi);
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i)
        s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
    return s;
}

std::vector<std::size_t> upper_hull(std::span<const double> x, std::span<const double> y) {
    std::vector<std::size_t> hull;
    for (std::size_t i = 0; i < x.size(); ++i) {
        while (hull.size() >= 2) {
            std::size_t a = hull[hull.size() - 2];
            std::size_t b = hull.back();
            // drop b when it lies on or below the chord from a to i
            double cross = (x[b] - x[a]) * (y[i] - y[a]) - (y[b] - y[a]) * (x[i] - x[a]);
            if (cross >= 0.0)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(i);
    }
    return hull;
}

std::size_t argmax_first(std::span<const double> values, double rel_tol) {
    require(!values.empty(), ErrorKind::Empty, "argmax of an empty range");
    double best = -std::numeric_limits<double>::infinity();
    for (double v : values)
        best = std::max(best, v);
    double cut = best - rel_tol * std::max(1.0, std::abs(best));
    for (std::size_t i = 0; i < values.size(); ++i)
        if (values[i] >= cut)
            return i;
    return 0;
}

std::vector<double> isotonic_decreasing(std::span<const double> y, std::span<const double> w) {
    struct Block {
        double mean, weight;
        std::size_t len;
    };
    std::vector<Block> blocks;
    for (std::size_t i = 0; i < y.size(); ++i) {
        blocks.push_back({y[i], w.empty() ? 1.0 : w[i], 1});
        while (blocks.size() >= 2 && blocks[blocks.size() - 2].mean < blocks.back().mean) {
            Block b = blocks.back();
            blocks.pop_back();
            Block& a = blocks.back();
            double wt = a.weight + b.weight;
            a.mean = (a.mean * a.weight + b.mean * b.weight) / wt;
            a.weight = wt;
            a.len += b.len;
        }
    }
    std::vector<double> out;
    out.reserve(y.size());
    for (const auto& b : blocks)
        out.insert(out.end(), b.len, b.mean);
    return out;
}

double interp_linear(std::span<const double> x, std::span<const double> y, double at) {
    if (at <= x.front())
        return y.front();
    if (at >= x.back())
        return y.back();
    auto it = std::upper_bound(x.begin(), x.end(), at);
    std::size_t j = static_cast<std::size_t>(it - x.begin());
    std::size_t i = j - 1;
    double t = (at - x[i]) / (x[j] - x[i]);
    return y[i] + t * (y[j] - y[i]);
}

double quantile_of_sorted(std::span<const double> sorted, double p) {
    require(!sorted.empty(), ErrorKind::Empty, "quantile of an empty sample");
    double pos = p * static_cast<double>(sorted.size() - 1);
    std::size_t i = static_cast<std::size_t>(std::floor(pos));
    if (i + 1 >= sorted.size())
        return sorted.back();
    double t = pos - static_cast<double>(i);
    return sorted[i] + t * (sorted[i + 1] - sorted[i]);
}

}  // namespace auctionlab::numeric
