#pragma once

#include <memory>
#include <string_view>
#include <vector>

#include "auctionlab/dist.hpp"

namespace auctionlab {

enum class StrategyKind { Identity, Linear, Affine, Grid, Thresholded };

std::string_view to_string(StrategyKind kind);

namespace detail {
class StrategyImpl;
}

/// Non-decreasing bid function x -> beta(x) >= 0.
class Strategy {
public:
    static Strategy identity();
    static Strategy linear(double alpha);
    static Strategy affine(double slope, double intercept);
    /// Piecewise-linear interpolant through (values, bids); flat outside the grid.
    static Strategy grid(std::vector<double> values, std::vector<double> bids);
    /// Cubic Hermite interpolant with prescribed slopes at the knots.
    static Strategy grid(std::vector<double> values, std::vector<double> bids, std::vector<double> slopes);
    /// beta(r) (1 - F(r)) / (1 - F(x)) below r, base above.
    static Strategy thresholded(const Distribution& F, const Strategy& base, double r);

    StrategyKind kind() const;
    double operator()(double x) const;
    /// Analytic where the representation allows it, central differences otherwise.
    double derivative(double x) const;

    /// Knots of grid strategies; empty for closed forms.
    std::vector<double> knots() const;
    /// False for piecewise-linear grids, whose slope jumps at the knots.
    bool smooth() const;

private:
    explicit Strategy(std::shared_ptr<const detail::StrategyImpl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const detail::StrategyImpl> impl_;
};

/// Numeric derivative by central differences, falling back to a one-sided
/// stencil within h of the support edges.
double numeric_derivative(const Strategy& beta, double x, const Support& support, double h = 1e-6);

}  // namespace auctionlab
