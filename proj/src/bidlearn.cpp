#include "auctionlab/bidlearn.hpp"

#include <algorithm>
#include <cmath>

#include "auctionlab/error.hpp"
#include "auctionlab/online.hpp"

namespace auctionlab {

json BidderEpisode::summary() const {
    return {{"T", horizon()}, {"regret", regret}, {"spend", spend}, {"wins", win_count}};
}

namespace {

void record(BidderEpisode& ep, double bid, double value, double competition, bool win, double payment,
            double utility, double regret_step) {
    ep.bids.push_back(bid);
    ep.values.push_back(value);
    ep.competition.push_back(competition);
    ep.wins.push_back(win);
    ep.payments.push_back(payment);
    ep.utility += utility;
    ep.spend += payment;
    ep.win_count += win;
    ep.regret += regret_step;
    ep.cumulative_utility.push_back(ep.utility);
    ep.cumulative_regret.push_back(ep.regret);
}

}  // namespace

double ucbid_index(double mean, std::size_t wins, std::size_t T) {
    if (wins == 0)
        return 1.0;
    return std::min(1.0, mean + 2.0 * std::sqrt(std::log(static_cast<double>(T)) / static_cast<double>(wins)));
}

BidderEpisode ucbid(double x, std::span<const double> competition, std::uint64_t seed) {
    require(x >= 0.0 && x <= 1.0, ErrorKind::InvalidArgument, "click probability must lie in [0, 1]");
    require(!competition.empty(), ErrorKind::Empty, "empty competition stream");
    const std::size_t T = competition.size();
    Rng rng(seed, 0, "bidlearn.ucbid");
    BidderEpisode ep;
    double clicks = 0.0;
    std::size_t wins = 0;
    for (std::size_t t = 0; t < T; ++t) {
        double c = competition[t];
        double b = ucbid_index(wins ? clicks / static_cast<double>(wins) : 0.0, wins, T);
        bool win = b > c;
        double v = 0.0, pay = 0.0;
        if (win) {
            v = rng.bernoulli(x) ? 1.0 : 0.0;
            pay = c;
            clicks += v;
            ++wins;
        }
        double oracle = x > c ? x - c : 0.0;
        double expected = win ? x - c : 0.0;
        record(ep, b, v, c, win, pay, v - pay, oracle - expected);
    }
    return ep;
}

BidderEpisode contextual_bid_learner(const ContextualBidConfig& cfg, std::span<const std::size_t> contexts,
                                     std::uint64_t seed) {
    const std::size_t L = cfg.value_support.size(), K = cfg.bid_grid.size();
    require(L >= 1 && K >= 1, ErrorKind::Empty, "value support and bid grid must be non-empty");
    require(cfg.rivals >= 1, ErrorKind::InvalidArgument, "need at least one rival");
    const double v_max = *std::max_element(cfg.value_support.begin(), cfg.value_support.end());
    const double b_max = *std::max_element(cfg.bid_grid.begin(), cfg.bid_grid.end());
    for (double b : cfg.bid_grid)
        require(b >= 0.0 && std::isfinite(b), ErrorKind::InvalidArgument, "bids must be finite and >= 0");
    const double scale = b_max + v_max;
    require(scale > 0.0, ErrorKind::InvalidArgument, "degenerate utility range");
    const std::size_t T = contexts.size();

    std::vector<Exp3> learners;
    std::vector<Rng> choice_rng, rival_rng;
    // per-context counterfactual utility of every grid bid
    std::vector<std::vector<double>> hindsight(L, std::vector<double>(K, 0.0));
    std::vector<double> earned(L, 0.0);
    for (std::size_t l = 0; l < L; ++l) {
        learners.emplace_back(K, std::max<std::size_t>(1, T));
        choice_rng.emplace_back(seed, 2 * l, "bidlearn.ctx");
        rival_rng.emplace_back(seed, 2 * l + 1, "bidlearn.ctx");
    }

    BidderEpisode ep;
    std::vector<double> profile(cfg.rivals + 1);
    double regret_total = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        std::size_t l = contexts[t];
        require(l < L, ErrorKind::InvalidArgument, "context index out of range");
        const double v = cfg.value_support[l];
        double top_rival = 0.0;
        for (std::size_t j = 1; j <= cfg.rivals; ++j) {
            profile[j] = cfg.opponent.sample(rival_rng[l]);
            top_rival = std::max(top_rival, profile[j]);
        }
        auto utility_of = [&](double bid, double* payment, bool* won) {
            profile[0] = bid;
            auto out = cfg.mechanism.run(profile);
            bool w = out.winner && *out.winner == 0;
            if (payment)
                *payment = out.payments[0];
            if (won)
                *won = w;
            return (w ? v : 0.0) - out.payments[0];
        };
        std::size_t k = learners[l].step(choice_rng[l]);
        double pay = 0.0;
        bool win = false;
        double u = utility_of(cfg.bid_grid[k], &pay, &win);
        learners[l].update(k, std::clamp((u + b_max) / scale, 0.0, 1.0));
        for (std::size_t a = 0; a < K; ++a)
            hindsight[l][a] += utility_of(cfg.bid_grid[a], nullptr, nullptr);
        earned[l] += u;
        double before = regret_total;
        regret_total = 0.0;
        for (std::size_t c = 0; c < L; ++c)
            regret_total += *std::max_element(hindsight[c].begin(), hindsight[c].end()) - earned[c];
        record(ep, cfg.bid_grid[k], v, top_rival, win, pay, u, regret_total - before);
    }
    return ep;
}

BidderEpisode contextual_bid_learner(const ContextualBidConfig& cfg, std::size_t T, std::uint64_t seed) {
    require(!cfg.value_support.empty(), ErrorKind::Empty, "value support must be non-empty");
    Rng rng(seed, 0, "bidlearn.contexts");
    std::vector<std::size_t> contexts(T);
    for (auto& c : contexts)
        c = rng.index(cfg.value_support.size());
    return contextual_bid_learner(cfg, contexts, seed);
}

namespace {

/// Utility of a fixed multiplier on the stream, with the same budget stop.
double fixed_multiplier_utility(std::span<const double> x, std::span<const double> g, double budget, double mu) {
    double spend = 0.0, utility = 0.0;
    for (std::size_t t = 0; t < x.size() && spend < budget; ++t)
        if (x[t] / (1.0 + mu) >= g[t]) {
            spend += g[t];
            utility += x[t] - g[t];
        }
    return utility;
}

}  // namespace

BidderEpisode pacing_bidder(std::span<const double> values, std::span<const double> competition, double budget,
                            std::optional<double> gamma, double mu0) {
    require(budget > 0.0, ErrorKind::NonpositiveBudget, "budget must be > 0");
    require(values.size() == competition.size(), ErrorKind::InconsistentArity,
            "value and competition streams differ in length");
    require(!values.empty(), ErrorKind::Empty, "empty value stream");
    require(mu0 >= 0.0, ErrorKind::InvalidArgument, "initial multiplier must be >= 0");
    const std::size_t T = values.size();
    const double step = gamma.value_or(1.0 / std::sqrt(static_cast<double>(T)));
    require(step >= 0.0 && std::isfinite(step), ErrorKind::InvalidArgument, "step size must be >= 0");
    const double per_round = budget / static_cast<double>(T);

    BidderEpisode ep;
    double mu = mu0;
    for (std::size_t t = 0; t < T; ++t) {
        const double x = values[t], g = competition[t];
        ep.multipliers.push_back(mu);
        if (ep.spend >= budget) {
            record(ep, 0.0, x, g, false, 0.0, 0.0, 0.0);
            continue;
        }
        double b = x / (1.0 + mu);
        bool win = b >= g;
        double pay = win ? g : 0.0;
        record(ep, b, x, g, win, pay, win ? x - g : 0.0, 0.0);
        double subgradient = -(x > (1.0 + mu) * g ? g : 0.0) + per_round;
        mu = std::max(0.0, mu - step * subgradient);
    }
    ep.multipliers.push_back(mu);

    // regret against the best fixed multiplier on a grid over [0, 10]
    double best = 0.0;
    for (int k = 0; k <= 200; ++k)
        best = std::max(best, fixed_multiplier_utility(values, competition, budget, 0.05 * k));
    ep.regret = best - ep.utility;
    ep.cumulative_regret.clear();
    return ep;
}

}  // namespace auctionlab
