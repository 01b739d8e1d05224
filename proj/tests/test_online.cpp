#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "auctionlab/error.hpp"
#include "auctionlab/online.hpp"
#include "oracles.hpp"

using namespace auctionlab;

namespace {

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v)
        s += x;
    return s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
    double m = mean_of(v), s = 0.0;
    for (double x : v)
        s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::vector<double> uniform_stream(std::size_t T, std::uint64_t seed) {
    Rng rng(seed, 0, "test.online.stream");
    std::vector<double> v(T);
    for (auto& x : v)
        x = rng.uniform();
    return v;
}

}  // namespace

TEST_CASE("UCB arm selection") {
    Ucb ucb(2, 100);
    CHECK(ucb.step() == 0);
    ucb.update(0, 0.0);
    CHECK(ucb.step() == 1);
    ucb.update(1, 0.0);
    CHECK(ucb.step() == 0);  // equal indices: lowest arm

    Ucb two(2, 10000);
    for (int k = 0; k < 100; ++k) {
        two.update(0, k < 90 ? 1.0 : 0.0);
        two.update(1, k < 50 ? 1.0 : 0.0);
    }
    CHECK(two.sums()[0] == 90.0);
    CHECK(two.step() == 0);
    CHECK(two.index(0) == doctest::Approx(0.9 + std::sqrt(std::log(10000.0) / 100.0)));
    CHECK(two.t() == 200);

    CHECK_THROWS_AS(two.update(0, 1.5), Error);
    try {
        two.update(1, -0.1);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::RewardOutOfRange);
    }
    CHECK_THROWS_AS(Ucb(0, 10), Error);
}

TEST_CASE("UCB regret on Bernoulli arms") {
    const std::size_t T = 10000;
    std::vector<double> regrets;
    for (std::uint64_t seed = 0; seed < 100; ++seed)
        regrets.push_back(run_ucb_bernoulli({0.9, 0.5}, T, seed).regret);
    const double bound = 2.0 * std::sqrt(2.0 * 2.0 * T * std::log(static_cast<double>(T))) + 4.0;
    CHECK(mean_of(regrets) <= bound);

    // the optimistic index of the best arm stays above its mean
    int covered = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Ucb ucb(2, T);
        Rng rng(seed, 0, "test.online.cover");
        bool ok = true;
        for (std::size_t t = 0; t < T; ++t) {
            std::size_t k = ucb.step();
            ucb.update(k, rng.bernoulli(k == 0 ? 0.9 : 0.5) ? 1.0 : 0.0);
            if (ucb.pulls()[0] > 0 && ucb.index(0) < 0.9)
                ok = false;
        }
        covered += ok;
    }
    CHECK(covered >= 95);

    auto a = run_ucb_bernoulli({0.3, 0.6, 0.5}, 500, 4), b = run_ucb_bernoulli({0.3, 0.6, 0.5}, 500, 4);
    CHECK(a.arms == b.arms);
    CHECK(a.rewards == b.rewards);
}

TEST_CASE("EXP3 probabilities and updates") {
    Exp3 e(4, 1000);
    for (double p : e.probabilities())
        CHECK(p == 0.25);
    CHECK(e.eta() == doctest::Approx(std::sqrt(std::log(4.0) / 4000.0)));

    Exp3 single(1, 100);
    Rng rng(1, 0, "test.online.exp3");
    for (int t = 0; t < 50; ++t) {
        CHECK(single.step(rng) == 0);
        single.update(0, rng.uniform());
    }

    // estimator: the pulled arm moves by 1 - (1 - X)/p, the others by 1
    auto f = Exp3::with_eta(2, 0.5);
    f.update(0, 0.5);
    CHECK(f.cumulative()[0] == doctest::Approx(1.0 - 0.5 / 0.5));
    CHECK(f.cumulative()[1] == doctest::Approx(1.0));
    auto p = f.probabilities();
    CHECK(p[1] / p[0] == doctest::Approx(std::exp(0.5)));
    CHECK_THROWS_AS(f.update(0, 2.0), Error);

    // a million rounds: log-domain weights stay finite and normalized
    Exp3 big(2, std::size_t{1000000});
    Rng r2(2, 0, "test.online.exp3big");
    double lowest = 1.0;
    for (std::size_t t = 0; t < 1000000; ++t) {
        std::size_t k = big.step(r2);
        big.update(k, k == 0 ? 1.0 : 0.0);
        if (t % 1000 == 0) {
            auto q = big.probabilities();
            CHECK(q[0] + q[1] == doctest::Approx(1.0).epsilon(1e-12));
            double lo = *std::min_element(q.begin(), q.end());
            auto c = big.cumulative();
            double floor = std::exp(big.eta() * (std::min(c[0], c[1]) - std::max(c[0], c[1]))) / 2.0;
            CHECK(lo >= floor * (1.0 - 1e-9));
            lowest = std::min(lowest, lo);
        }
    }
    CHECK(lowest > 0.0);
}

TEST_CASE("EXP3 regret on an adversarial switch") {
    const std::size_t T = 10000;
    RewardTable switcher = [T](std::size_t t, std::size_t arm) {
        return (t < T / 2) == (arm == 1) ? 1.0 : 0.0;
    };
    std::vector<double> regrets;
    for (std::uint64_t seed = 0; seed < 100; ++seed)
        regrets.push_back(run_exp3(2, T, switcher, seed).regret);
    const double bound = 2.0 * std::sqrt(2.0 * std::log(2.0) * T);
    CHECK(mean_of(regrets) <= bound + 3.0 * sd_of(regrets) / std::sqrt(100.0));
}

TEST_CASE("price grid") {
    auto g = price_grid(0.1);
    CHECK(g.size() == 10);
    CHECK(g[7] == 0.7);
    CHECK(price_grid(0.5) == std::vector<double>{0.0, 0.5});
    CHECK_THROWS_AS(price_grid(0.0), Error);
    CHECK_THROWS_AS(price_grid(1.0), Error);
}

TEST_CASE("posted-price bandits") {
    SUBCASE("constant buyer") {
        std::vector<double> v(10000, 0.7);
        auto ep = posted_price_bandit(v, 0.1, true, 1);
        std::size_t acc = 0, from = 3 * v.size() / 4;
        for (std::size_t t = from; t < v.size(); ++t)
            acc += ep.accepts[t];
        CHECK(static_cast<double>(acc) / static_cast<double>(v.size() - from) >= 0.95);
        std::size_t at_best = std::count(ep.prices.begin() + static_cast<std::ptrdiff_t>(from), ep.prices.end(), 0.7);
        CHECK(at_best >= (v.size() - from) * 9 / 10);
        CHECK(ep.best_price == 0.7);
    }
    SUBCASE("uniform buyers with eps = T^(-1/3)") {
        const std::size_t T = 10000;
        const double eps = std::pow(static_cast<double>(T), -1.0 / 3.0);
        double worst = 0.0;
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            auto ep = posted_price_bandit(uniform_stream(T, seed), eps, true, seed);
            worst = std::max(worst, ep.regret / std::pow(static_cast<double>(T), 2.0 / 3.0));
        }
        CHECK(worst <= 4.0);
    }
    SUBCASE("two-price grid against enumeration") {
        for (bool stochastic : {true, false}) {
            auto v = uniform_stream(2000, 9);
            auto ep = posted_price_bandit(v, 0.5, stochastic, 3);
            double at_half = 0.0;
            for (double x : v)
                at_half += x >= 0.5 ? 0.5 : 0.0;
            double revenue = 0.0;
            for (std::size_t t = 0; t < v.size(); ++t) {
                CHECK((ep.prices[t] == 0.0 || ep.prices[t] == 0.5));
                revenue += v[t] >= ep.prices[t] ? ep.prices[t] : 0.0;
            }
            CHECK(ep.revenue == doctest::Approx(revenue));
            CHECK(ep.grid_regret == doctest::Approx(std::max(0.0, at_half) - revenue));
            CHECK(ep.regret >= ep.grid_regret - 1e-9);
            CHECK(ep.cumulative_regret.back() == doctest::Approx(ep.regret));
        }
    }
    SUBCASE("adversarial mode and determinism") {
        auto v = uniform_stream(3000, 5);
        auto a = posted_price_bandit(v, 0.1, false, 11), b = posted_price_bandit(v, 0.1, false, 11);
        CHECK(a.prices == b.prices);
        CHECK(a.regret == b.regret);
        for (double p : a.prices)
            CHECK((p >= 0.0 && p <= 1.0));
    }
    CHECK_THROWS_AS(posted_price_bandit(std::vector<double>{}, 0.1, true, 1), Error);
}

TEST_CASE("cautious search") {
    for (std::size_t T : {std::size_t{1} << 8, std::size_t{1} << 16}) {
        auto L = static_cast<std::size_t>(std::ceil(std::log2(std::log2(static_cast<double>(T)))));
        auto ep = cautious_search(0.5, T);
        CHECK(ep.horizon() == T);
        CHECK(ep.regret <= 2.0 * (L + 1) + 1.0);
        std::size_t rejections = std::count(ep.accepts.begin(), ep.accepts.end(), false);
        CHECK(rejections <= L + 1);
        CHECK(ep.regret == doctest::Approx(T * 0.5 - ep.revenue));
    }

    Rng rng(2, 0, "test.online.cautious");
    for (int trial = 0; trial < 50; ++trial) {
        double x = rng.uniform();
        std::size_t T = 16 + rng.index(100000);
        auto L = static_cast<std::size_t>(std::ceil(std::log2(std::log2(static_cast<double>(T))) - 1e-12));
        auto ep = cautious_search(x, T);
        CHECK(ep.regret <= 2.0 * (L + 1) + 1.0);
        std::size_t rejections = std::count(ep.accepts.begin(), ep.accepts.end(), false);
        CHECK(rejections <= L + 1);
        double last = ep.prices.back();
        CHECK(last <= x);
        CHECK(x - last < std::ldexp(1.0, -static_cast<int>(std::size_t{1} << L)));
    }

    auto top = cautious_search(1.0, 1 << 10);
    CHECK(std::all_of(top.accepts.begin(), top.accepts.end(), [](bool a) { return a; }));
    double direct = 0.0;
    for (double p : top.prices)
        direct += 1.0 - p;
    CHECK(top.regret == doctest::Approx(direct));
    CHECK(top.regret <= 2.0 * (4 + 1) + 1.0);

    auto tiny = cautious_search(0.3, 1);
    CHECK(tiny.horizon() == 1);
    CHECK_THROWS_AS(cautious_search(1.5, 10), Error);
    CHECK_THROWS_AS(cautious_search(0.5, 0), Error);
}

TEST_CASE("binary search pricing pays logarithmic regret") {
    for (std::size_t T : {std::size_t{1} << 10, std::size_t{1} << 16, std::size_t{1} << 20}) {
        auto ep = binary_search_pricing(0.5, T);
        CHECK(ep.regret >= 0.4 * std::log2(static_cast<double>(T)));
        CHECK(ep.regret > cautious_search(0.5, T).regret);
    }
}

TEST_CASE("expected second-price revenue with a reserve") {
    auto U = Distribution::uniform(0, 1);
    for (double r : {0.0, 0.2, 0.5, 0.8})
        CHECK(expected_sp_revenue(U, 2, r) == doctest::Approx(1.0 / 3.0 + r * r - 4.0 / 3.0 * r * r * r));
    CHECK(expected_sp_revenue(U, 2, 0.5) == doctest::Approx(5.0 / 12.0));
    CHECK(expected_sp_revenue(U, 1, 0.5) == doctest::Approx(0.25));

    auto pm = Distribution::point_mass(0.6);
    CHECK(expected_sp_revenue(pm, 2, 0.3) == doctest::Approx(0.6));
    CHECK(expected_sp_revenue(pm, 2, 0.6) == doctest::Approx(0.6));
    CHECK(expected_sp_revenue(pm, 2, 0.61) == 0.0);

    // three atoms: direct enumeration over all value pairs
    auto d = Distribution::discrete({{0.2, 0.5}, {0.5, 0.3}, {0.9, 0.2}});
    for (double r : {0.0, 0.3, 0.5, 0.7}) {
        double direct = 0.0;
        for (const auto& a : d.atoms())
            for (const auto& b : d.atoms()) {
                double hi = std::max(a.value, b.value), lo = std::min(a.value, b.value);
                direct += a.prob * b.prob * (hi >= r ? std::max(r, lo) : 0.0);
            }
        CHECK(expected_sp_revenue(d, 2, r) == doctest::Approx(direct));
    }
}

TEST_CASE("symmetric reserve learning") {
    auto U = Distribution::uniform(0, 1);
    SUBCASE("regret scale") {
        const std::size_t T = 100000;
        const double scale = std::sqrt(T * std::log(static_cast<double>(T)));
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            auto rep = symmetric_reserve_learning(U, 2, T, seed);
            CHECK(rep.regret / scale <= 5.0);
            CHECK(rep.reserves.size() == T);
            CHECK(std::abs(rep.epochs.back().estimate - 0.5) <= 0.1);
        }
    }
    SUBCASE("horizon inside the first epoch") {
        const std::size_t T = 16;
        REQUIRE(first_epoch_length(T) >= T);
        auto rep = symmetric_reserve_learning(U, 2, T, 1);
        for (double r : rep.reserves)
            CHECK(r == 0.0);
        CHECK(rep.regret == doctest::Approx(T * (5.0 / 12.0 - 1.0 / 3.0)).epsilon(1e-12));
    }
    SUBCASE("point mass settles within two epochs") {
        auto rep = symmetric_reserve_learning(Distribution::point_mass(0.7), 2, 20000, 3);
        REQUIRE(rep.epochs.size() >= 3);
        CHECK(rep.epochs[0].estimate == 0.7);
        CHECK(rep.epochs[1].estimate == 0.7);
        CHECK(rep.epochs[2].reserve <= 0.7);
        CHECK(rep.epochs[2].reserve >= 0.63);
        CHECK(rep.regret == doctest::Approx(0.0));
    }
    SUBCASE("posted reserve never exceeds the point estimate") {
        auto rep = symmetric_reserve_learning(Distribution::exponential(1.0), 3, 20000, 4);
        for (std::size_t k = 1; k < rep.epochs.size(); ++k)
            CHECK(rep.epochs[k].reserve <= rep.epochs[k - 1].estimate + 1e-12);
        auto again = symmetric_reserve_learning(Distribution::exponential(1.0), 3, 20000, 4);
        CHECK(again.realized_revenue == rep.realized_revenue);
    }
    CHECK_THROWS_AS(symmetric_reserve_learning(U, 1, 100, 1), Error);
}
