#include <doctest.h>

#include <cmath>

#include "auctionlab/error.hpp"
#include "auctionlab/rng.hpp"
#include "auctionlab/shading.hpp"
#include "oracles.hpp"

using namespace auctionlab;

namespace {

const Distribution U = Distribution::uniform(0.0, 1.0);

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::InvalidArgument;
}

bool within(double a, double b, double se_a, double se_b, double k = 3.0) {
    return std::abs(a - b) <= k * std::sqrt(se_a * se_a + se_b * se_b) + 1e-12;
}

}  // namespace

TEST_CASE("h transform") {
    CHECK(h_of_beta(Strategy::identity(), U, 0.75) == doctest::Approx(0.5).epsilon(1e-12));
    for (double a : {0.3, 0.7, 1.0})
        for (double x : {0.1, 0.5, 0.9})
            CHECK(h_of_beta(Strategy::linear(a), U, x) == doctest::Approx(a * (2 * x - 1)).epsilon(1e-12));

    auto th = Strategy::thresholded(U, Strategy::identity(), 0.5);
    for (double x = 0.0; x < 0.5; x += 0.01)
        CHECK(std::abs(h_of_beta(th, U, x)) <= 1e-6);
    CHECK(h_of_beta(th, U, 0.8) == doctest::Approx(0.6));

    // grid strategies go through central differences
    std::vector<double> xs, bs;
    for (int k = 0; k <= 100; ++k) {
        xs.push_back(k / 100.0);
        bs.push_back(0.6 * k / 100.0);
    }
    CHECK(h_of_beta(Strategy::grid(xs, bs), U, 0.505) == doctest::Approx(0.6 * 0.01).epsilon(1e-6));

    CHECK(kind_of([] { h_of_beta(Strategy::affine(0.0, 0.3), U, 0.5); }) == ErrorKind::NonMonotone);
    auto gap = Distribution::mixture({Distribution::uniform(0, 1), Distribution::uniform(2, 3)}, {0.5, 0.5});
    CHECK(kind_of([&] { h_of_beta(Strategy::identity(), gap, 1.5); }) == ErrorKind::ZeroDensity);
}

TEST_CASE("shaded strategy table") {
    ShadedStrategy truthful(Strategy::identity(), U);
    CHECK(truthful.reserve_value() == doctest::Approx(0.5).epsilon(1e-9));
    for (std::size_t k = 0; k < truthful.grid().size(); k += 97)
        CHECK(truthful.h_table()[k] == doctest::Approx(2 * truthful.grid()[k] - 1).epsilon(1e-5));

    ShadedStrategy lin(Strategy::linear(0.4), Distribution::exponential(2.0));
    CHECK(lin.reserve_value() == doctest::Approx(2.0).epsilon(1e-6));
    for (std::size_t k = 0; k < lin.grid().size(); k += 101) {
        double x = lin.grid()[k];
        CHECK(lin.h_table()[k] == doctest::Approx(0.4 * (x - 2.0)).epsilon(1e-5));
    }
}

TEST_CASE("thresholded strategy") {
    auto s = thresholded_strategy(U, Strategy::identity(), 0.5);
    for (double x : {0.0, 0.1, 0.3, 0.49})
        CHECK(s(x) == doctest::Approx(0.25 / (1 - x)).epsilon(1e-12));
    CHECK(s(0.5) == doctest::Approx(0.5));
    CHECK(s(0.8) == 0.8);
    CHECK(s.reserve_value() == 0.0);
    CHECK(std::abs(s.reserve_price() - 0.25) <= 1e-6);
    for (std::size_t k = 0; 2 * k < s.grid().size(); k += 50)
        CHECK(std::abs(s.h_table()[k]) <= 1e-6);

    // continuity at r for several bases
    auto F = Distribution::kumaraswamy(2.0, 3.0);
    for (auto base : {Strategy::identity(), Strategy::linear(0.6), Strategy::affine(0.5, 0.1)})
        for (double r : {0.2, 0.4, 0.6}) {
            auto t = thresholded_strategy(F, base, r);
            CHECK(t(r) == doctest::Approx(base(r)));
            CHECK(t(r - 1e-9) == doctest::Approx(base(r)).epsilon(1e-6));
        }

    auto flat = thresholded_strategy(U, Strategy::linear(0.8), 0.0);
    for (double x : {0.0, 0.2, 0.7})
        CHECK(flat(x) == doctest::Approx(0.8 * x));
}

TEST_CASE("seller cuts a thresholded bidder at the lowest bid") {
    struct Case {
        Distribution F;
        Strategy base;
    };
    std::vector<Case> cases{{U, Strategy::identity()},
                            {Distribution::uniform(0.0, 2.0), Strategy::linear(0.7)},
                            {Distribution::kumaraswamy(2.0, 2.0), Strategy::identity()},
                            {Distribution::exponential(1.0), Strategy::identity()}};
    for (const auto& c : cases) {
        double r = ShadedStrategy(c.base, c.F).reserve_value();
        auto s = thresholded_strategy(c.F, c.base, r);
        CHECK(s.reserve_value() <= c.F.support().lo + 1e-8);
        double lowest = s(c.F.support().lo);
        double seller = monopoly_price(bid_law(c.F, s.beta()));
        CHECK(std::abs(seller - lowest) <= 1e-6 * std::max(1.0, lowest));
    }
}

TEST_CASE("beta from g") {
    auto b0 = beta_from_g([](double) { return 0.0; }, U, 0.0, 0.25);
    for (double x = 0.0; x < 0.99; x += 0.01)
        CHECK(b0(x) == doctest::Approx(0.25 / (1 - x)).epsilon(1e-6));

    auto b1 = beta_from_g([](double x) { return 2 * x - 1; }, U, 0.0, 0.0);
    for (double x = 0.0; x < 0.99; x += 0.01)
        CHECK(std::abs(b1(x) - x) <= 1e-4);

    CHECK(kind_of([] { beta_from_g([](double x) { return 3 * x; }, U, 0.0, 0.1); }) == ErrorKind::NotIncreasing);
    CHECK(kind_of([] { beta_from_g([](double) { return 0.0; }, U, 1.5, 0.1); }) == ErrorKind::OutOfSupport);
}

TEST_CASE("round trips through h") {
    Rng rng(17, 0, "test.strat.roundtrip");
    const std::vector<Distribution> laws{U, Distribution::uniform(0.0, 3.0), Distribution::kumaraswamy(2.0, 2.0),
                                         Distribution::exponential(1.0)};
    for (int trial = 0; trial < 32; ++trial) {
        const auto& F = laws[trial % laws.size()];
        const double span = F.support().bounded() ? F.support().hi - F.support().lo : 3.0;
        const double a = rng.uniform() - 0.5, b = rng.uniform(), c = rng.uniform();
        auto g = [&](double x) {
            double t = x / span;
            return span * (a + b * t + c * t * t);
        };
        const double x0 = F.quantile(0.5 * rng.uniform());
        // keeps beta - g away from zero: the gap cannot shrink faster than g grows
        const double C = std::max(0.0, g(x0) + span * (b + 2 * c + 0.1)) + 0.05 * span;
        auto beta = beta_from_g(g, F, x0, C, 2048);
        CHECK(beta(x0) == doctest::Approx(C));
        auto knots = beta.knots();
        auto check_at = [&](double x) {
            double tol = 1e-4 * std::max(1.0, std::abs(g(x)));
            CHECK(std::abs(h_of_beta(beta, F, x) - g(x)) <= tol);
        };
        for (std::size_t k = 0; k < knots.size(); k += 37)
            check_at(knots[k]);
        // the top knot carries the steepest slope
        check_at(knots.back());

        // the other direction, from a closed-form bid function
        const double slope = 0.2 + rng.uniform(), shift = 0.3 * rng.uniform();
        auto affine = Strategy::affine(slope, shift);
        auto back = beta_from_g([&](double x) { return h_of_beta(affine, F, x); }, F, x0, affine(x0), 2048);
        auto back_knots = back.knots();
        for (std::size_t k = 0; k < back_knots.size(); k += 41) {
            double x = back_knots[k];
            CHECK(std::abs(back(x) - affine(x)) <= 1e-4 * std::max(1.0, affine(x)));
        }
    }
}

TEST_CASE("strategic utility") {
    const std::size_t N = 1 << 20;
    SUBCASE("both truthful against monopoly reserves") {
        ShadedStrategy t(Strategy::identity(), U);
        auto su = strategic_utility(t, U, N, 1);
        CHECK(within(su.utility, 1.0 / 12.0, su.utility_se, 0.0));
        auto market = simulate_lazy_market({t, t}, N, 2);
        CHECK(market.reserves[0] == doctest::Approx(0.5).epsilon(1e-6));
        for (std::size_t i = 0; i < 2; ++i)
            CHECK(within(market.utilities[i], 1.0 / 12.0, market.utility_se[i], 0.0));
        CHECK(within(market.revenue, 5.0 / 12.0, market.revenue_se, 0.0));
        CHECK(within(market.payments[0], su.payment, market.payment_se[0], su.payment_se));
    }
    SUBCASE("threshold against a truthful rival") {
        auto s = thresholded_strategy(U, Strategy::identity(), 0.5);
        ShadedStrategy t(Strategy::identity(), U);
        const double expected = 1.0 / 12.0 + (std::log(2.0) - 0.5) / 4.0;
        CHECK(expected == doctest::Approx(0.1316).epsilon(1e-3));
        // oracle: the integral of x G(beta(x)) below r plus the truthful part above
        double direct = oracle::simpson([](double x) { return x * 0.25 / (1 - x); }, 0.0, 0.5) +
                        oracle::simpson([](double x) { return (1 - x) * x; }, 0.5, 1.0);
        CHECK(direct == doctest::Approx(expected).epsilon(1e-9));

        auto su = strategic_utility(s, U, N, 3);
        CHECK(within(su.utility, expected, su.utility_se, 0.0));
        auto base = strategic_utility(t, U, N, 3);
        CHECK(su.payment == doctest::Approx(base.payment).epsilon(1e-12));

        auto market = simulate_lazy_market({s, t}, N, 4);
        CHECK(market.reserves[0] == doctest::Approx(0.25).epsilon(1e-6));
        CHECK(within(market.utilities[0], expected, market.utility_se[0], 0.0));
        CHECK(within(market.payments[0], su.payment, market.payment_se[0], su.payment_se));
        CHECK(std::abs(market.welfare - 0.6316) <= 3 * market.welfare_se + 5e-5);
    }
}

TEST_CASE("thresholding dominates the base strategy") {
    Rng rng(5, 0, "test.strat.dominance");
    for (int trial = 0; trial < 8; ++trial) {
        Distribution F = trial % 3 == 0   ? Distribution::uniform(0.0, 0.5 + rng.uniform())
                         : trial % 3 == 1 ? Distribution::exponential(0.5 + rng.uniform())
                                          : Distribution::kumaraswamy(1.5 + rng.uniform(), 1.5 + rng.uniform());
        Distribution G = trial % 2 ? Distribution::uniform(0.0, 0.5 + rng.uniform())
                                   : Distribution::max_of(Distribution::uniform(0.0, 1.0), 1 + trial / 2);
        Strategy base = trial % 2 ? Strategy::identity() : Strategy::linear(0.5 + 0.5 * rng.uniform());
        ShadedStrategy plain(base, F);
        auto shaded = thresholded_strategy(F, base, plain.reserve_value());
        auto u0 = strategic_utility(plain, G, 200000, 100 + trial);
        auto u1 = strategic_utility(shaded, G, 200000, 100 + trial);
        CHECK(u1.utility >= u0.utility - 3 * std::hypot(u0.utility_se, u1.utility_se));
        CHECK(u1.payment >= u0.payment - 3 * std::hypot(u0.payment_se, u1.payment_se));
    }
}

TEST_CASE("optimal linear shading") {
    auto best = optimal_linear_alpha(U, U);
    CHECK_FALSE(best.fallback);
    CHECK(std::abs(best.alpha - 0.7) <= 0.01);
    // oracle: alpha 7/24 - alpha^2 5/24
    CHECK(best.utility == doctest::Approx(0.7 * 7 / 24 - 0.49 * 5 / 24).epsilon(1e-6));
    ShadedStrategy at(Strategy::linear(best.alpha), U);
    auto centre = strategic_utility(at, U, 400000, 8);
    for (double d : {-0.05, 0.05}) {
        auto side = strategic_utility(ShadedStrategy(Strategy::linear(best.alpha + d), U), U, 400000, 8);
        CHECK(centre.utility >= side.utility - 3 * std::hypot(centre.utility_se, side.utility_se));
    }

    SUBCASE("no competition") {
        auto G = Distribution::point_mass(0.0);
        auto r = optimal_linear_alpha(U, G);
        CHECK(r.fallback);
        double grid_best = oracle::grid_argmax(
            [](double a) { return oracle::simpson([a](double x) { return x - a * (2 * x - 1); }, 0.5, 1.0, 200); },
            0.001, 1.0, 999);
        CHECK(std::abs(r.alpha - grid_best) <= 1e-3);
    }
    SUBCASE("scale covariance") {
        const double base_u = linear_shading_utility(U, U, 0.7);
        for (double c : {0.5, 2.0}) {
            auto Fc = Distribution::uniform(0.0, c);
            auto rc = optimal_linear_alpha(Fc, Fc);
            CHECK(rc.alpha == doctest::Approx(best.alpha).epsilon(1e-6));
            CHECK(linear_shading_utility(Fc, Fc, 0.7) == doctest::Approx(c * base_u).epsilon(1e-8));
        }
    }
}

TEST_CASE("thresholded nash reserve") {
    CHECK(thresholded_nash_reserve(U, 2) == doctest::Approx(0.75).epsilon(1e-9));
    // oracle: for the uniform law (n-1)(r^n/n - r^{n+1}/(n+1)) = r^n (1 - r) gives r = (n+1) / (2n),
    // which falls toward the monopoly price as n grows
    double prev = 1.0;
    for (std::size_t n = 2; n <= 10; ++n) {
        double r = thresholded_nash_reserve(U, n);
        double k = static_cast<double>(n);
        CHECK(r == doctest::Approx((k + 1) / (2 * k)).epsilon(1e-9));
        CHECK(r < prev);
        CHECK(r > 0.5);
        prev = r;
    }
    auto kum = Distribution::kumaraswamy(1.0, 2.0);
    double rk = thresholded_nash_reserve(kum, 3);
    double lhs = 2.0 * oracle::simpson([&](double x) { return x * kum.cdf(x) * (1 - kum.cdf(x)) * kum.pdf(x); }, 0.0, rk);
    CHECK(lhs == doctest::Approx(rk * (1 - kum.cdf(rk)) * std::pow(kum.cdf(rk), 2.0)).epsilon(1e-7));

    const double r = thresholded_nash_reserve(U, 2);
    auto s = thresholded_strategy(U, Strategy::identity(), r);
    auto market = simulate_lazy_market({s, s}, 1 << 20, 6);
    CHECK(within(market.revenue, 1.0 / 3.0, market.revenue_se, 0.0));

    CHECK(kind_of([] { thresholded_nash_reserve(U, 1); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([] { thresholded_nash_reserve(Distribution::discrete({{0.2, 0.5}, {0.8, 0.5}}), 2); }) ==
          ErrorKind::NoDensity);
}

TEST_CASE("shading against a per-bidder Myerson seller") {
    auto beq = myerson_shading(U, 2);
    CHECK(beq(0.0) == doctest::Approx(0.25).epsilon(1e-4));
    CHECK(beq(1.0) == doctest::Approx(0.5).epsilon(1e-4));
    auto first = fp_symmetric_equilibrium(U, 2);
    double prev = -1.0;
    for (double x = 0.0; x <= 1.0; x += 0.005) {
        CHECK(std::abs(beq(x) - (1 + x) / 4) <= 1e-4);
        CHECK(beq(x) >= first(x) - 1e-9);
        CHECK(beq(x) >= prev - 1e-12);
        prev = beq(x);
    }

    auto prior = bid_law(U, beq);
    auto m = Mechanism::myerson({prior, prior});
    auto metrics = expected_metrics(m, {U, U}, {beq, beq}, 1 << 17, 11);
    for (std::size_t i = 0; i < 2; ++i)
        CHECK(within(metrics.utilities[i], 1.0 / 6.0, metrics.utility_se[i], 0.0));
}
