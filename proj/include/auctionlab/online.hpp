#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "auctionlab/dist.hpp"
#include "auctionlab/rng.hpp"

namespace auctionlab {

/// UCB with the known-horizon bonus sqrt(log T / N_k). Rewards in [0, 1].
class Ucb {
public:
    Ucb(std::size_t arms, std::size_t horizon);

    /// Unpulled arms first in index order, then the largest index (lowest arm on ties).
    std::size_t step() const;
    void update(std::size_t arm, double reward);
    /// +inf for an unpulled arm.
    double index(std::size_t arm) const;

    std::size_t arms() const { return pulls_.size(); }
    std::size_t t() const { return t_; }
    const std::vector<std::size_t>& pulls() const { return pulls_; }
    const std::vector<double>& sums() const { return sums_; }

private:
    std::size_t horizon_;
    std::size_t t_ = 0;
    std::vector<std::size_t> pulls_;
    std::vector<double> sums_;
};

/// EXP3 with the loss-based estimate 1 - (1 - X) / p on the pulled arm and 1
/// elsewhere; weights are kept as log-weights eta * cumulative estimate.
class Exp3 {
public:
    /// eta = sqrt(log K / (K T)).
    Exp3(std::size_t arms, std::size_t horizon);
    static Exp3 with_eta(std::size_t arms, double eta);

    std::vector<double> probabilities() const;
    std::size_t step(Rng& rng) const;
    void update(std::size_t arm, double reward);

    std::size_t arms() const { return cumulative_.size(); }
    std::size_t t() const { return t_; }
    double eta() const { return eta_; }
    const std::vector<double>& cumulative() const { return cumulative_; }

private:
    Exp3(std::vector<double> cumulative, double eta);

    double eta_;
    std::size_t t_ = 0;
    std::vector<double> cumulative_;
};

struct BanditEpisode {
    std::vector<std::size_t> arms;
    std::vector<double> rewards;
    std::vector<double> cumulative_regret;
    double regret = 0.0;
};

/// UCB on Bernoulli arms; regret is the pseudo-regret sum of (mu* - mu_arm).
BanditEpisode run_ucb_bernoulli(const std::vector<double>& means, std::size_t T, std::uint64_t seed);

/// Reward of `arm` at round t, in [0, 1]. Must be deterministic.
using RewardTable = std::function<double(std::size_t t, std::size_t arm)>;

/// EXP3 against a fixed reward table; regret against the best arm in hindsight.
BanditEpisode run_exp3(std::size_t arms, std::size_t T, const RewardTable& reward, std::uint64_t seed);

struct PricingEpisode {
    std::vector<double> prices;
    std::vector<bool> accepts;
    double revenue = 0.0;
    /// Against the best fixed price in [0, 1] in hindsight.
    double regret = 0.0;
    double best_price = 0.0;
    /// Against the best price on the learner's own grid (equals regret when there is no grid).
    double grid_regret = 0.0;
    std::vector<double> cumulative_regret;

    std::size_t horizon() const { return prices.size(); }
};

/// Prices k * eps below 1.
std::vector<double> price_grid(double eps);

/// Runs UCB (stochastic) or EXP3 over price_grid(eps) on the value stream.
/// The buyer accepts iff value >= price.
PricingEpisode posted_price_bandit(std::span<const double> values, double eps, bool stochastic,
                                   std::uint64_t seed);

/// Epoch l raises the last accepted price in steps 2^(-2^l), l = 0..ceil(log2 log2 T).
PricingEpisode cautious_search(double x, std::size_t T);

/// Bisection on [0, 1] down to width 1/T, then the last accepted price.
PricingEpisode binary_search_pricing(double x, std::size_t T);

/// Expected second-price revenue with anonymous reserve r and n i.i.d. truthful bidders.
double expected_sp_revenue(const Distribution& d, std::size_t n, double r);

struct ReserveEpoch {
    std::size_t start = 0;
    std::size_t length = 0;
    double reserve = 0.0;
    /// Point estimate of the optimal reserve after the epoch's data.
    double estimate = 0.0;
};

struct ReserveLearningReport {
    std::vector<ReserveEpoch> epochs;
    std::vector<double> reserves;
    std::vector<double> realized_revenue;
    /// Expected regret against always posting the optimal reserve.
    std::vector<double> cumulative_regret;
    double regret = 0.0;
    double optimal_reserve = 0.0;
    double optimal_revenue = 0.0;
};

/// First epoch length: max(16, ceil(sqrt T)); later epochs double.
std::size_t first_epoch_length(std::size_t T);

ReserveLearningReport symmetric_reserve_learning(const Distribution& d, std::size_t n, std::size_t T,
                                                 std::uint64_t seed);

}  // namespace auctionlab
