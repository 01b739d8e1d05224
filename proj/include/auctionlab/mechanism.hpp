#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "auctionlab/dist.hpp"
#include "auctionlab/strategy.hpp"

namespace auctionlab {

enum class MechanismKind { Vickrey, SpAnonymous, SpLazy, SpEager, LLevel, Myerson, BoostedSp, FirstPrice };

std::string_view to_string(MechanismKind kind);

struct AuctionOutcome {
    std::optional<std::size_t> winner;
    std::vector<double> payments;

    bool allocated() const { return winner.has_value(); }
    double revenue() const;
};

/// Allocation and payment rule. Immutable; run() is pure.
class Mechanism {
public:
    static Mechanism vickrey();
    static Mechanism sp_anonymous(double reserve);
    static Mechanism sp_lazy(std::vector<double> reserves);
    static Mechanism sp_eager(std::vector<double> reserves);
    /// floors[i] holds bidder i's non-decreasing level thresholds.
    static Mechanism l_level(std::vector<std::vector<double>> floors);
    static Mechanism myerson(std::vector<Distribution> priors, std::size_t iron_grid = kIronGridDefault);
    static Mechanism boosted(std::vector<double> boosts, std::vector<double> reserves);
    static Mechanism first_price(double reserve = 0.0);

    static Mechanism from_json(const json& j);
    json to_json() const;

    MechanismKind kind() const { return kind_; }
    /// Number of bidders the parameters are sized for; 0 when any n works.
    std::size_t arity() const;

    AuctionOutcome run(std::span<const double> bids) const;

    /// Virtual bid of bidder i under myerson / boosted-sp.
    double virtual_bid(std::size_t i, double bid) const;

    const std::vector<double>& reserves() const { return reserves_; }
    const std::vector<double>& boosts() const { return boosts_; }
    const std::vector<std::vector<double>>& floors() const { return floors_; }

private:
    struct Prior {
        Distribution dist;
        VirtualValueTable table;
        bool exact = false;
        double lo = 0.0;
        double cap = 0.0;
    };

    Mechanism() = default;
    AuctionOutcome run_virtual(std::span<const double> bids) const;
    double invert_virtual(std::size_t i, double target, double bid) const;

    MechanismKind kind_ = MechanismKind::Vickrey;
    double anonymous_reserve_ = 0.0;
    std::vector<double> reserves_;
    std::vector<double> boosts_;
    std::vector<std::vector<double>> floors_;
    std::vector<Prior> priors_;
    std::size_t iron_grid_ = kIronGridDefault;
};

struct Metrics {
    double revenue = 0.0;
    double revenue_se = 0.0;
    std::vector<double> utilities;
    std::vector<double> utility_se;
    double welfare = 0.0;
    double welfare_se = 0.0;
    double sale_rate = 0.0;
    std::size_t draws = 0;
};

/// Monte Carlo tag for expected_metrics substreams.
inline constexpr std::string_view kMechTag = "mech";

/// Draws value vectors (bidder i from dists[i], in index order), maps them
/// through the strategies (truthful when `strategies` is empty), runs m.
Metrics expected_metrics(const Mechanism& m, const std::vector<Distribution>& dists,
                         const std::vector<Strategy>& strategies, std::size_t n_draws, std::uint64_t seed,
                         unsigned workers = 0);

}  // namespace auctionlab
