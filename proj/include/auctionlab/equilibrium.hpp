#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "auctionlab/dist.hpp"
#include "auctionlab/mechanism.hpp"
#include "auctionlab/strategy.hpp"

namespace auctionlab {

inline constexpr std::size_t kEquilibriumGrid = 4096;

/// argmax_b (x - b) G(b), G the law of the highest competing bid. Laws with
/// atoms are handled by enumerating the atoms (ties resolved in the bidder's favour).
double fp_best_response(double x, const Distribution& G);

/// Symmetric first-price equilibrium E[max of n-1 rivals | below x], tabulated
/// on the quantile grid.
Strategy fp_symmetric_equilibrium(const Distribution& d, std::size_t n, std::size_t grid = kEquilibriumGrid);

struct RevenueComparison {
    double first = 0.0;
    double second = 0.0;
    double first_se = 0.0;
    double second_se = 0.0;
    /// Standard error of first - second under common random numbers.
    double diff_se = 0.0;

    double combined_se() const;
};

/// first: first price at the symmetric equilibrium, second: truthful Vickrey.
RevenueComparison revenue_equivalence_check(const Distribution& d, std::size_t n, std::size_t n_draws,
                                            std::uint64_t seed, unsigned workers = 0);

struct BulowKlempererResult {
    double vickrey_np1 = 0.0;
    double myerson_n = 0.0;
    double vickrey_n = 0.0;
    double vickrey_np1_se = 0.0;
    double myerson_n_se = 0.0;
    double vickrey_n_se = 0.0;
    /// SE of vickrey_np1 - myerson_n and of vickrey_n - (n-1)/n myerson_n.
    double gap_se = 0.0;
    double ratio_gap_se = 0.0;
};

/// Throws NotRegular for irregular laws.
BulowKlempererResult bulow_klemperer_check(const Distribution& d, std::size_t n, std::size_t n_draws,
                                           std::uint64_t seed, unsigned workers = 0);

struct Estimate {
    double mean = 0.0;
    double se = 0.0;
};

/// E[G(beta(X)) psi(X)] (ironed psi for irregular laws).
Estimate fp_revenue_via_virtual_value(const Distribution& d, const Strategy& beta, const Distribution& G,
                                      std::size_t n_draws, std::uint64_t seed, unsigned workers = 0);

/// b + G(b) / g(b) per bid.
std::vector<double> estimate_values_from_fp_bids(std::span<const double> bids, const Distribution& G);

/// Vickrey with probability 1 - eps; otherwise the top bidder wins only when
/// its bid reaches (1 + delta) times the second bid, and pays that amount.
AuctionOutcome inflated_vickrey(std::span<const double> bids, double eps, double delta, Rng& rng);

/// Empirical law of max over `rivals` i.i.d. bids beta(X), X ~ d, drawn by
/// stratified sampling of the top rival's quantile.
Distribution induced_competing_bid_law(const Distribution& d, const Strategy& beta, std::size_t rivals,
                                       std::size_t n_samples, std::uint64_t seed);

}  // namespace auctionlab
