#pragma once

#include <functional>
#include <span>
#include <vector>

namespace auctionlab::numeric {

/// Smallest x in [lo, hi] with pred(x) true, assuming pred is monotone
/// (false then true). Returns hi if pred never holds below it.
double bisect_first_true(const std::function<bool(double)>& pred, double lo, double hi, double tol = 1e-12,
                         int max_iter = 200);

/// Smallest x in [lo, hi] with f(x) >= target for non-decreasing f, to
/// within tol. Same contract as bisect_first_true on f(x) >= target, with
/// superlinear steps where f is smooth.
double first_reaching(const std::function<double(double)>& f, double target, double lo, double hi,
                      double tol = 1e-12);

/// Root of a continuous function with f(lo) and f(hi) of opposite signs.
double bisect_root(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-12,
                   int max_iter = 200);

/// Maximizer of a unimodal function on [lo, hi].
double golden_section_max(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-10);

/// Adaptive Gauss-Kronrod integral of f over [lo, hi] (finite bounds).
double integrate(const std::function<double(double)>& f, double lo, double hi, double rel_tol = 1e-12);

/// Fixed 20-point Gauss-Legendre rule, for short smooth pieces.
double gauss_legendre(const std::function<double(double)>& f, double lo, double hi);

/// Composite trapezoid over tabulated (x, y).
double trapezoid(std::span<const double> x, std::span<const double> y);

/// Indices of the vertices of the upper concave envelope of the points
/// (x[i], y[i]); x must be strictly increasing. First and last points are
/// always vertices.
std::vector<std::size_t> upper_hull(std::span<const double> x, std::span<const double> y);

/// Index of the first maximum, treating values within `rel_tol` of the
/// maximum as ties (smallest index wins).
std::size_t argmax_first(std::span<const double> values, double rel_tol = 1e-12);

/// Isotonic (non-increasing) least-squares fit by pool-adjacent-violators.
std::vector<double> isotonic_decreasing(std::span<const double> y, std::span<const double> w = {});

/// Linear interpolation on a sorted grid, flat-clamped outside.
double interp_linear(std::span<const double> x, std::span<const double> y, double at);

double quantile_of_sorted(std::span<const double> sorted, double p);

}  // namespace auctionlab::numeric
