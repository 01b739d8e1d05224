#include "auctionlab/dynamic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "auctionlab/error.hpp"
#include "auctionlab/mechanism.hpp"
#include "auctionlab/numeric.hpp"
#include "auctionlab/online.hpp"
#include "auctionlab/parallel.hpp"

namespace auctionlab {

json DynamicTranscript::summary() const {
    json j{{"T", T},
           {"gamma", gamma},
           {"revenue", revenue},
           {"buyer_utility", buyer_utility},
           {"discounted_utility", discounted_utility}};
    if (learned_price)
        j["learned_price"] = *learned_price;
    if (!class_revenue.empty()) {
        json c = json::array();
        for (auto [v, r] : class_revenue)
            c.push_back({{"value", v}, {"revenue", r}});
        j["class_revenue"] = c;
    }
    return j;
}

void write_csv(const DynamicTranscript& t, std::ostream& out) {
    out.precision(17);
    out << "t,value,price,bid,allocated,payment\n";
    for (std::size_t i = 0; i < t.values.size(); ++i)
        out << i + 1 << ',' << t.values[i] << ',' << t.prices[i] << ',' << t.bids[i] << ','
            << (t.allocations[i] ? 1 : 0) << ',' << t.payments[i] << '\n';
}

std::string_view to_string(BidderMode mode) {
    switch (mode) {
        case BidderMode::Oracle: return "oracle";
        case BidderMode::Exp3: return "exp3";
        case BidderMode::ExPostIr: return "ex-post-ir";
    }
    return "?";
}

BidderMode bidder_mode_from_string(std::string_view s) {
    for (auto m : {BidderMode::Oracle, BidderMode::Exp3, BidderMode::ExPostIr})
        if (s == to_string(m))
            return m;
    fail(ErrorKind::InvalidConfig, "unknown bidder mode '" + std::string(s) + "'");
}

namespace {

void record_round(DynamicTranscript& tr, double value, double price, double bid, bool won, double payment) {
    tr.values.push_back(value);
    tr.prices.push_back(price);
    tr.bids.push_back(bid);
    tr.allocations.push_back(won);
    tr.payments.push_back(payment);
    double u = (won ? value : 0.0) - payment;
    tr.revenue += payment;
    tr.buyer_utility += u;
    tr.discounted_utility += std::pow(tr.gamma, static_cast<double>(tr.values.size())) * u;
}

}  // namespace

DynamicTranscript exploit_mean_based(const Distribution& F, std::size_t T, BidderMode mode, std::uint64_t seed,
                                     std::optional<double> exp3_rate) {
    require(F.is_discrete(), ErrorKind::RequiresDiscrete, "exploitation needs a finite value support");
    require(T >= 2 && T % 2 == 0, ErrorKind::InvalidArgument, "horizon must be even and >= 2");
    const auto atoms = F.atoms();
    const std::size_t L = atoms.size();
    std::vector<double> support(L);
    for (std::size_t l = 0; l < L; ++l) {
        support[l] = atoms[l].value;
        require(support[l] >= 0.0 && support[l] <= 1.0, ErrorKind::OutOfSupport, "values must lie in [0, 1]");
    }

    Rng values_rng(seed, 0, "dynamic.values");
    Rng choice_rng(seed, 0, "dynamic.exp3");
    // counterfactual cumulative utility of bid 1 for each value; bid 0 earns 0
    std::vector<double> ledger(L, 0.0);
    std::vector<Exp3> learners;
    if (mode == BidderMode::Exp3)
        for (std::size_t l = 0; l < L; ++l)
            learners.push_back(exp3_rate ? Exp3::with_eta(2, *exp3_rate) : Exp3(2, T));

    DynamicTranscript tr;
    tr.T = T;
    for (double v : support)
        tr.class_revenue[v] = 0.0;
    for (std::size_t t = 1; t <= T; ++t) {
        const double price = t <= T / 2 ? 0.0 : 1.0;
        const double x = F.sample(values_rng);
        const std::size_t l = static_cast<std::size_t>(std::lower_bound(support.begin(), support.end(), x) -
                                                       support.begin());
        int bid = 0;
        switch (mode) {
            case BidderMode::Oracle: bid = ledger[l] > 0.0 ? 1 : 0; break;
            case BidderMode::Exp3: bid = static_cast<int>(learners[l].step(choice_rng)); break;
            case BidderMode::ExPostIr: bid = x >= price ? 1 : 0; break;
        }
        const bool won = bid == 1;
        const double pay = won ? price : 0.0;
        record_round(tr, x, price, bid, won, pay);
        tr.class_revenue[x] += pay;
        if (mode == BidderMode::Exp3)
            learners[l].update(static_cast<std::size_t>(bid), won ? (x - price + 1.0) / 2.0 : 0.5);
        for (std::size_t k = 0; k < L; ++k)
            ledger[k] += support[k] - price;
    }
    return tr;
}

FeeMechanismReport fee_mechanism(const std::vector<Distribution>& dists, std::size_t n_draws, std::uint64_t seed,
                                 unsigned workers) {
    const std::size_t n = dists.size();
    require(n >= 1, ErrorKind::Empty, "no bidders");
    require(n_draws >= 2, ErrorKind::InvalidArgument, "need at least 2 draws");
    const Mechanism vickrey = Mechanism::vickrey();

    auto play = [&](Rng& rng, std::vector<double>& x) {
        for (std::size_t i = 0; i < n; ++i)
            x[i] = dists[i].sample(rng);
        return vickrey.run(x);
    };

    auto est = monte_carlo(
        n_draws, seed, "dynamic.fee.estimate", n,
        [&](Rng& rng, std::span<double> row) {
            std::vector<double> x(n);
            auto res = play(rng, x);
            if (res.winner)
                row[*res.winner] = x[*res.winner] - res.payments[*res.winner];
        },
        workers);
    FeeMechanismReport out;
    for (std::size_t i = 0; i < n; ++i) {
        out.fees.push_back(est.mean(i));
        out.fee_se.push_back(est.std_error(i));
    }
    const double total_fees = std::accumulate(out.fees.begin(), out.fees.end(), 0.0);

    // columns: utilities, revenue, welfare, losing-bidder-negative indicator
    auto m = monte_carlo(
        n_draws, seed, "dynamic.fee.run", n + 3,
        [&](Rng& rng, std::span<double> row) {
            std::vector<double> x(n);
            auto res = play(rng, x);
            double paid = total_fees;
            bool loser_negative = false;
            for (std::size_t i = 0; i < n; ++i) {
                bool won = res.winner && *res.winner == i;
                row[i] = (won ? x[i] - res.payments[i] : 0.0) - out.fees[i];
                paid += res.payments[i];
                if (!won && row[i] < 0.0)
                    loser_negative = true;
            }
            row[n] = paid;
            row[n + 1] = *std::max_element(x.begin(), x.end());
            row[n + 2] = loser_negative ? 1.0 : 0.0;
        },
        workers);
    for (std::size_t i = 0; i < n; ++i) {
        out.utilities.push_back(m.mean(i));
        out.utility_se.push_back(m.std_error(i));
    }
    out.revenue = m.mean(n);
    out.revenue_se = m.std_error(n);
    out.welfare = m.mean(n + 1);
    out.welfare_se = m.std_error(n + 1);
    out.losing_negative_share = m.mean(n + 2);
    return out;
}

namespace {

/// Revenue maximizing price under the non-increasing least-squares fit of the
/// accept indicators against the offered prices; 0 is always a candidate.
double fit_demand_price(std::vector<std::pair<double, bool>> offers) {
    if (offers.empty())
        return 0.0;
    std::sort(offers.begin(), offers.end());
    std::vector<double> y(offers.size());
    for (std::size_t i = 0; i < offers.size(); ++i)
        y[i] = offers[i].second ? 1.0 : 0.0;
    auto demand = numeric::isotonic_decreasing(y);
    std::vector<double> prices{0.0}, rev{0.0};
    for (std::size_t i = 0; i < offers.size(); ++i) {
        prices.push_back(offers[i].first);
        rev.push_back(offers[i].first * demand[i]);
    }
    return prices[numeric::argmax_first(rev)];
}

}  // namespace

DynamicTranscript two_phase_posted_price(const Distribution& F, double gamma, std::size_t T, double alpha,
                                         BuyerModel buyer, std::uint64_t seed) {
    require(gamma > 0.0 && gamma <= 1.0, ErrorKind::InvalidArgument, "gamma must lie in (0, 1]");
    require(alpha > 0.0 && alpha <= 1.0, ErrorKind::InvalidArgument, "alpha must lie in (0, 1]");
    require(T >= 1, ErrorKind::InvalidArgument, "horizon must be >= 1");
    const Support s = F.support();
    require(s.lo >= 0.0 && s.hi <= 1.0, ErrorKind::OutOfSupport, "values must lie in [0, 1]");
    const std::size_t explore = std::min<std::size_t>(T, static_cast<std::size_t>(std::ceil(alpha * T - 1e-9)));

    Rng values_rng(seed, 0, "dynamic.values");
    Rng price_rng(seed, 0, "dynamic.prices");
    DynamicTranscript tr;
    tr.T = T;
    tr.gamma = gamma;
    std::vector<std::pair<double, bool>> offers;
    offers.reserve(explore);
    double posted = 0.0;
    for (std::size_t t = 1; t <= T; ++t) {
        const bool learning = t <= explore;
        if (t == explore + 1) {
            posted = fit_demand_price(std::move(offers));
            tr.learned_price = posted;
        }
        const double x = F.sample(values_rng);
        const double p = learning ? price_rng.uniform() : posted;
        bool accept = x >= p;
        if (learning && buyer.mode == BuyerMode::ThresholdLiar && p > buyer.tau)
            accept = false;
        if (learning)
            offers.emplace_back(p, accept);
        record_round(tr, x, p, accept ? 1.0 : 0.0, accept, accept ? p : 0.0);
    }
    return tr;
}

DynamicTranscript fixed_price(const Distribution& F, double p, std::size_t T, double gamma, std::uint64_t seed) {
    require(gamma > 0.0 && gamma <= 1.0, ErrorKind::InvalidArgument, "gamma must lie in (0, 1]");
    require(p >= 0.0 && std::isfinite(p), ErrorKind::InvalidArgument, "price must be finite and >= 0");
    Rng values_rng(seed, 0, "dynamic.values");
    DynamicTranscript tr;
    tr.T = T;
    tr.gamma = gamma;
    for (std::size_t t = 1; t <= T; ++t) {
        const double x = F.sample(values_rng);
        const bool accept = x >= p;
        record_round(tr, x, p, accept ? 1.0 : 0.0, accept, accept ? p : 0.0);
    }
    return tr;
}

double dynamic_regret(const DynamicTranscript& t, const Distribution& F) {
    const double best = monopoly_revenue(F, monopoly_price(F));
    return static_cast<double>(t.T) * best - t.revenue;
}

double expected_regret(const DynamicTranscript& t, const Distribution& F) {
    const double best = monopoly_revenue(F, monopoly_price(F));
    double r = 0.0;
    for (double p : t.prices)
        r += best - monopoly_revenue(F, p);
    return r;
}

}  // namespace auctionlab
