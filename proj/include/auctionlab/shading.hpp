#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "auctionlab/dist.hpp"
#include "auctionlab/equilibrium.hpp"
#include "auctionlab/mechanism.hpp"
#include "auctionlab/strategy.hpp"

namespace auctionlab {

inline constexpr std::size_t kShadingGrid = 4096;

/// beta(x) - beta'(x) (1 - F(x)) / f(x): the virtual value of the bid law
/// B = beta(X) at the bid beta(x). Grid strategies are differentiated
/// numerically.
double h_of_beta(const Strategy& beta, const Distribution& F, double x);

/// Law of beta(X) for X ~ F.
Distribution bid_law(const Distribution& F, const Strategy& beta);

/// A bid function together with the value law it is applied to. Caches h on
/// a uniform grid over the part of the support where beta is strictly
/// increasing, and the reserve value x_beta: the smallest maximizer of
/// beta(x) (1 - F(x)), i.e. the value at which a seller posting the monopoly
/// price of the bid law cuts the bidder off.
class ShadedStrategy {
public:
    ShadedStrategy(Strategy beta, Distribution F, std::size_t grid = kShadingGrid);

    const Strategy& beta() const { return beta_; }
    const Distribution& F() const { return F_; }
    double operator()(double x) const { return beta_(x); }

    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& h_table() const { return h_; }
    double reserve_value() const { return reserve_value_; }
    /// beta(x_beta), the seller's reserve on this bidder.
    double reserve_price() const { return beta_(reserve_value_); }

private:
    Strategy beta_;
    Distribution F_;
    std::vector<double> grid_;
    std::vector<double> h_;
    double reserve_value_ = 0.0;
};

/// Solves h_beta = g with beta(x0) = C:
///   beta(x) = [C (1 - F(x0)) - int_{x0}^x g f] / (1 - F(x)),
/// tabulated as a cubic Hermite grid on quantiles F(x0) .. 1 - 1e-3 with the
/// slopes (beta - g) f / (1 - F). Flat outside the grid.
Strategy beta_from_g(const std::function<double(double)>& g, const Distribution& F, double x0, double C,
                     std::size_t grid = kShadingGrid);

/// beta(r) (1 - F(r)) / (1 - F(x)) below r, base at and above r.
ShadedStrategy thresholded_strategy(const Distribution& F, const Strategy& base, double r);

struct StrategicUtility {
    double utility = 0.0;
    double utility_se = 0.0;
    double payment = 0.0;
    double payment_se = 0.0;
};

/// E[(X - h(X)) G(beta(X)) 1{X >= x_beta}] and E[h(X) G(beta(X)) 1{X >= x_beta}]
/// by Monte Carlo; G is the law of the highest competing bid.
StrategicUtility strategic_utility(const ShadedStrategy& s, const Distribution& G, std::size_t n_draws,
                                   std::uint64_t seed, unsigned workers = 0);

struct StrategicMarket {
    /// Per-bidder monopoly prices of the bid laws.
    std::vector<double> reserves;
    std::vector<double> utilities;
    std::vector<double> utility_se;
    std::vector<double> payments;
    std::vector<double> payment_se;
    double revenue = 0.0;
    double revenue_se = 0.0;
    double welfare = 0.0;
    double welfare_se = 0.0;
};

/// Lazy second price where the seller posts each bidder the monopoly price of
/// that bidder's bid law, simulated directly on the bids.
StrategicMarket simulate_lazy_market(const std::vector<ShadedStrategy>& bidders, std::size_t n_draws,
                                     std::uint64_t seed, unsigned workers = 0);

/// Expected utility of bidding alpha x against G, by quadrature.
double linear_shading_utility(const Distribution& F, const Distribution& G, double alpha);

struct LinearShading {
    double alpha = 1.0;
    double utility = 0.0;
    /// Set when the first-order condition had no bracket on (0, 1] and the
    /// utility was maximized directly.
    bool fallback = false;
};

/// Best alpha in (0, 1] for beta(x) = alpha x facing highest competing bid G,
/// with the seller at the monopoly price of the bid law.
LinearShading optimal_linear_alpha(const Distribution& F, const Distribution& G);

/// Root r of (n-1) E[X F^{n-2}(X) (1 - F(X)) 1{X <= r}] = r (1 - F(r)) F^{n-1}(r).
double thresholded_nash_reserve(const Distribution& F, std::size_t n);

/// x -> E[beta_I(X) | X >= x] with beta_I the symmetric first-price equilibrium.
Strategy myerson_shading(const Distribution& F, std::size_t n, std::size_t grid = kEquilibriumGrid);

}  // namespace auctionlab
