#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "auctionlab/dist.hpp"
#include "auctionlab/mechanism.hpp"

namespace auctionlab {

struct BidderEpisode {
    std::vector<double> bids;
    std::vector<double> values;
    std::vector<double> competition;
    std::vector<double> payments;
    std::vector<bool> wins;
    std::vector<double> cumulative_utility;
    std::vector<double> cumulative_regret;
    /// Pacing only: multiplier before each round, then the terminal value.
    std::vector<double> multipliers;
    double utility = 0.0;
    double regret = 0.0;
    double spend = 0.0;
    std::size_t win_count = 0;

    std::size_t horizon() const { return bids.size(); }
    /// {T, regret, spend, wins}
    json summary() const;
};

/// min(1, mean + 2 sqrt(log T / wins)); 1 before the first win.
double ucbid_index(double mean, std::size_t wins, std::size_t T);

/// Second-price auctions against the given highest competing bids; a win
/// (bid strictly above the competition) reveals a Bernoulli(x) click.
/// Regret is in expectation against bidding x.
BidderEpisode ucbid(double x, std::span<const double> competition, std::uint64_t seed);

struct ContextualBidConfig {
    std::vector<double> value_support;
    std::vector<double> bid_grid;
    Mechanism mechanism = Mechanism::vickrey();
    /// Law of each rival bid.
    Distribution opponent = Distribution::uniform(0.0, 1.0);
    std::size_t rivals = 1;
};

/// One EXP3 instance per support value. The learner is bidder 0; utilities
/// are mapped to [0, 1] by (u + max bid) / (max bid + max value). Each
/// context draws its rival bids from its own stream, so a context's
/// transcript depends only on how often it arrives.
/// Regret is against the best grid bid per context in hindsight.
BidderEpisode contextual_bid_learner(const ContextualBidConfig& config, std::span<const std::size_t> contexts,
                                     std::uint64_t seed);

/// Contexts drawn uniformly from the support.
BidderEpisode contextual_bid_learner(const ContextualBidConfig& config, std::size_t T, std::uint64_t seed);

/// Bids x / (1 + mu) in second-price auctions (ties go to the learner) and
/// moves mu along the dual subgradient -g 1{x > (1 + mu) g} + B / T,
/// projected to mu >= 0. No bids once spend reaches B, and mu stays put.
/// gamma defaults to 1 / sqrt(T). Regret is only reported in total, against
/// the best fixed multiplier in {0, 0.05, ..., 10} under the same budget stop.
BidderEpisode pacing_bidder(std::span<const double> values, std::span<const double> competition, double budget,
                            std::optional<double> gamma = std::nullopt, double mu0 = 0.0);

}  // namespace auctionlab
