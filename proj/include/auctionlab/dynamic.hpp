#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "auctionlab/dist.hpp"

namespace auctionlab {

/// One seller-buyer episode, one entry per round.
struct DynamicTranscript {
    std::size_t T = 0;
    /// Discount factor; round t (from 1) is weighted gamma^t.
    double gamma = 1.0;
    std::vector<double> values;
    /// Posted price (or per-round reserve) chosen by the mechanism.
    std::vector<double> prices;
    std::vector<double> bids;
    std::vector<bool> allocations;
    std::vector<double> payments;
    double revenue = 0.0;
    double buyer_utility = 0.0;
    double discounted_utility = 0.0;
    /// Revenue attributed to each value of a discrete law.
    std::map<double, double> class_revenue;
    /// Price posted after the learning phase of the two-phase mechanism.
    std::optional<double> learned_price;

    json summary() const;
};

/// Columns t, value, price, bid, allocated, payment.
void write_csv(const DynamicTranscript& t, std::ostream& out);

enum class BidderMode { Oracle, Exp3, ExPostIr };

std::string_view to_string(BidderMode mode);
BidderMode bidder_mode_from_string(std::string_view s);

/// Bids in {0, 1}; the item goes only to bid 1, at price 0 in the first half
/// and 1 in the second. Oracle: for each value, bid the argmax of the
/// cumulative counterfactual utility (ties to 0). Exp3: one EXP3 learner per
/// value over {0, 1} on utilities mapped by (u + 1) / 2. ExPostIr: bid 1 iff
/// value >= price. `exp3_rate` overrides the EXP3 learning rate.
DynamicTranscript exploit_mean_based(const Distribution& F, std::size_t T, BidderMode mode, std::uint64_t seed,
                                     std::optional<double> exp3_rate = std::nullopt);

struct FeeMechanismReport {
    std::vector<double> fees;
    std::vector<double> fee_se;
    double revenue = 0.0;
    double revenue_se = 0.0;
    std::vector<double> utilities;
    std::vector<double> utility_se;
    /// E[max value], the surplus on offer.
    double welfare = 0.0;
    double welfare_se = 0.0;
    /// Share of profiles in which some losing bidder ends below zero.
    double losing_negative_share = 0.0;
};

/// Entry fee per bidder equal to its expected Vickrey utility (estimated on
/// its own stream), then Vickrey among all bidders. Totals are estimated on a
/// fresh stream.
FeeMechanismReport fee_mechanism(const std::vector<Distribution>& dists, std::size_t n_draws, std::uint64_t seed,
                                 unsigned workers = 0);

enum class BuyerMode { MyopicTruthful, ThresholdLiar };

struct BuyerModel {
    BuyerMode mode = BuyerMode::MyopicTruthful;
    /// ThresholdLiar rejects every learning-phase price above tau.
    double tau = 0.0;
};

/// ceil(alpha T) rounds at U[0,1] prices, then the rest at the revenue
/// maximizing price of the isotonic demand fitted to those rounds. The buyer
/// accepts iff value >= price, except as its mode says.
DynamicTranscript two_phase_posted_price(const Distribution& F, double gamma, std::size_t T, double alpha,
                                         BuyerModel buyer, std::uint64_t seed);

/// Posts p every round to a truthful buyer.
DynamicTranscript fixed_price(const Distribution& F, double p, std::size_t T, double gamma, std::uint64_t seed);

/// T Pi(p*) - realized revenue.
double dynamic_regret(const DynamicTranscript& t, const Distribution& F);

/// sum_t Pi(p*) - Pi(p_t), the regret in expectation over values given the
/// posted prices, for a truthful buyer.
double expected_regret(const DynamicTranscript& t, const Distribution& F);

}  // namespace auctionlab
