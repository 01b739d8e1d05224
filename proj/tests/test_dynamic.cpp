#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "auctionlab/dynamic.hpp"
#include "auctionlab/error.hpp"

using namespace auctionlab;

namespace {

const Distribution U = Distribution::uniform(0.0, 1.0);

Distribution example_law() { return Distribution::discrete({{0.25, 0.5}, {0.5, 0.25}, {1.0, 0.25}}); }

}  // namespace

TEST_CASE("exploiting a mean-based bidder") {
    const auto F = example_law();
    const std::size_t T = 120000;
    CHECK(monopoly_revenue(F, monopoly_price(F)) == doctest::Approx(0.25));

    auto tr = exploit_mean_based(F, T, BidderMode::Oracle, 1);
    CHECK(std::abs(tr.revenue / T - 1.0 / 3.0) <= 0.02);
    // shares T/8, T/8 and T/12 for values 1, 1/2 and 1/4
    CHECK(std::abs(tr.class_revenue.at(1.0) - T / 8.0) <= 0.01 * T);
    CHECK(std::abs(tr.class_revenue.at(0.5) - T / 8.0) <= 0.01 * T);
    CHECK(std::abs(tr.class_revenue.at(0.25) - T / 12.0) <= 0.01 * T);

    double paid = 0.0;
    for (double p : tr.payments)
        paid += p;
    CHECK(tr.revenue == doctest::Approx(paid));

    // oracle: rebuild the counterfactual ledgers and confirm each bid is an argmax (ties to 0)
    std::map<double, double> ledger{{0.25, 0.0}, {0.5, 0.0}, {1.0, 0.0}};
    std::size_t mismatches = 0;
    for (std::size_t t = 0; t < T; ++t) {
        double one = ledger[tr.values[t]];
        mismatches += tr.bids[t] != (one > 0.0 ? 1.0 : 0.0);
        for (auto& [v, sum] : ledger)
            sum += v - tr.prices[t];
    }
    CHECK(mismatches == 0);

    auto ir = exploit_mean_based(F, T, BidderMode::ExPostIr, 1);
    CHECK(ir.revenue / T <= 0.25 + 0.02);
    std::size_t overpaid = 0;
    for (std::size_t t = 0; t < T; ++t)
        overpaid += ir.payments[t] > ir.values[t];
    CHECK(overpaid == 0);

    SUBCASE("two rounds by hand") {
        // round 1: empty ledgers tie, bid 0; round 2: every ledger holds v > 0, bid 1 at price 1
        auto tiny = exploit_mean_based(F, 2, BidderMode::Oracle, 9);
        CHECK(tiny.prices == std::vector<double>{0.0, 1.0});
        CHECK(tiny.bids == std::vector<double>{0.0, 1.0});
        CHECK(tiny.revenue == 1.0);
        CHECK(tiny.buyer_utility == doctest::Approx(tiny.values[1] - 1.0));
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(exploit_mean_based(U, 10, BidderMode::Oracle, 1), Error);
        try {
            exploit_mean_based(U, 10, BidderMode::Oracle, 1);
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::RequiresDiscrete);
        }
        CHECK_THROWS_AS(exploit_mean_based(F, 7, BidderMode::Oracle, 1), Error);
        CHECK(bidder_mode_from_string("exp3") == BidderMode::Exp3);
        CHECK_THROWS_AS(bidder_mode_from_string("greedy"), Error);
    }
}

TEST_CASE("exp3 bidder is mean-based") {
    const auto F = example_law();
    const std::size_t T = 10000;
    const double eta = 0.1;
    // a bid trailing by eta in mean utility trails by about eta t p(v) / 2 in mapped reward within its
    // own learner, so its selection probability decays like exp(-rate eta p(v) t / 2); summing over t
    // gives a frequency near 2 / (rate eta p(v) T), and the rate below makes that at most eta
    const double p_min = 0.25;
    const double rate = 2.0 / (eta * eta * p_min * T);
    double total = 0.0, total_sq = 0.0;
    const int seeds = 20;
    for (int seed = 0; seed < seeds; ++seed) {
        auto tr = exploit_mean_based(F, T, BidderMode::Exp3, seed, rate);
        std::map<double, double> ledger{{0.25, 0.0}, {0.5, 0.0}, {1.0, 0.0}};
        std::size_t trailing = 0;
        for (std::size_t t = 0; t < T; ++t) {
            double one = ledger[tr.values[t]];
            double chosen = tr.bids[t] == 1.0 ? one : 0.0;
            if (chosen < std::max(one, 0.0) - eta * static_cast<double>(t))
                ++trailing;
            for (auto& [v, sum] : ledger)
                sum += v - tr.prices[t];
        }
        double share = static_cast<double>(trailing) / T;
        total += share;
        total_sq += share * share;
    }
    double mean = total / seeds;
    double se = std::sqrt(std::max(0.0, total_sq / seeds - mean * mean) / seeds);
    CHECK(mean <= eta + 3 * se);
}

TEST_CASE("entry fees extract the surplus") {
    const std::size_t N = 1 << 20;
    auto rep = fee_mechanism({U, U}, N, 4);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(std::abs(rep.fees[i] - 1.0 / 6.0) <= 0.003);
        CHECK(std::abs(rep.utilities[i]) <= 0.005);
        CHECK(rep.utilities[i] >= -3 * rep.utility_se[i]);
    }
    CHECK(std::abs(rep.revenue - 2.0 / 3.0) <= 0.005);
    double sum_u = rep.utilities[0] + rep.utilities[1];
    CHECK(std::abs(rep.revenue + sum_u - rep.welfare) <= 3 * rep.welfare_se + 1e-12);
    // not interim IR
    CHECK(rep.losing_negative_share >= 0.99);

    auto single = fee_mechanism({Distribution::point_mass(0.6)}, 1000, 1);
    CHECK(single.fees[0] == doctest::Approx(0.6));
    CHECK(single.revenue == doctest::Approx(0.6));
    CHECK(single.utilities[0] == doctest::Approx(0.0).epsilon(1e-12));

    auto asym = fee_mechanism({U, Distribution::uniform(0.0, 2.0), Distribution::exponential(0.5)}, 1 << 18, 5);
    double total_u = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(std::abs(asym.utilities[i]) <= 3 * std::hypot(asym.utility_se[i], asym.fee_se[i]));
        total_u += asym.utilities[i];
    }
    CHECK(asym.revenue + total_u == doctest::Approx(asym.welfare).epsilon(1e-9));
    CHECK_THROWS_AS(fee_mechanism({}, 10, 1), Error);
}

TEST_CASE("two phase posted price") {
    SUBCASE("truthful buyer regret") {
        const std::size_t T = 100000;
        const double alpha = std::pow(static_cast<double>(T), -1.0 / 3.0);
        double scale = std::pow(static_cast<double>(T), 2.0 / 3.0);
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            auto tr = two_phase_posted_price(U, 0.8, T, alpha, {}, seed);
            CHECK(dynamic_regret(tr, U) / scale <= 6.0);
            CHECK(std::abs(*tr.learned_price - 0.5) <= 0.25);
        }
        double wide = 0.0, narrow = 0.0;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            wide += dynamic_regret(two_phase_posted_price(U, 0.8, T, 0.5, {}, seed), U);
            narrow += dynamic_regret(two_phase_posted_price(U, 0.8, T, alpha, {}, seed), U);
        }
        CHECK(wide >= narrow);
    }
    SUBCASE("lying pays only for patient buyers") {
        const std::size_t T = 1000;
        const double alpha = std::pow(static_cast<double>(T), -1.0 / 3.0);
        BuyerModel liar{BuyerMode::ThresholdLiar, 0.0};
        for (double gamma : {0.3, 0.5, 0.999}) {
            double gain = 0.0;
            for (std::uint64_t seed = 0; seed < 20; ++seed) {
                auto lie = two_phase_posted_price(U, gamma, T, alpha, liar, seed);
                auto honest = two_phase_posted_price(U, gamma, T, alpha, {}, seed);
                CHECK(*lie.learned_price == 0.0);
                gain += lie.discounted_utility - honest.discounted_utility;
            }
            if (gamma <= 0.5)
                CHECK(gain < 0.0);
            else
                CHECK(gain > 0.0);
        }
    }
    SUBCASE("pure exploration") {
        auto tr = two_phase_posted_price(U, 1.0, 5000, 1.0, {}, 2);
        CHECK_FALSE(tr.learned_price.has_value());
        // oracle: Pi(p) = p (1 - p) for the uniform law
        double r = 0.0;
        for (double p : tr.prices)
            r += 0.25 - p * (1 - p);
        CHECK(expected_regret(tr, U) == doctest::Approx(r).epsilon(1e-9));
    }
    SUBCASE("discounting") {
        auto tr = two_phase_posted_price(U, 0.9, 50, 0.2, {}, 7);
        double d = 0.0;
        for (std::size_t t = 0; t < 50; ++t)
            d += std::pow(0.9, t + 1.0) * ((tr.allocations[t] ? tr.values[t] : 0.0) - tr.payments[t]);
        CHECK(tr.discounted_utility == doctest::Approx(d).epsilon(1e-12));
    }
    CHECK_THROWS_AS(two_phase_posted_price(U, 0.0, 10, 0.5, {}, 1), Error);
    CHECK_THROWS_AS(two_phase_posted_price(U, 0.5, 10, 0.0, {}, 1), Error);
    CHECK_THROWS_AS(two_phase_posted_price(Distribution::uniform(0, 2), 0.5, 10, 0.5, {}, 1), Error);
}

TEST_CASE("dynamic regret") {
    const std::size_t T = 10000;
    double sum = 0.0, sum_sq = 0.0;
    const int seeds = 40;
    for (int seed = 0; seed < seeds; ++seed) {
        double r = dynamic_regret(fixed_price(U, 0.5, T, 1.0, seed), U);
        sum += r;
        sum_sq += r * r;
    }
    double mean = sum / seeds;
    double se = std::sqrt((sum_sq / seeds - mean * mean) / (seeds - 1));
    CHECK(std::abs(mean) <= 3 * se);

    auto never = fixed_price(U, 1.0, T, 1.0, 1);
    CHECK(dynamic_regret(never, U) == doctest::Approx(T * 0.25));

    std::ostringstream csv;
    write_csv(fixed_price(U, 0.5, 3, 1.0, 1), csv);
    std::string text = csv.str();
    CHECK(text.rfind("t,value,price,bid,allocated,payment\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 4);
}
