#include <doctest.h>

#include <cmath>

#include "auctionlab/error.hpp"
#include "auctionlab/mechanism.hpp"
#include "oracles.hpp"

using namespace auctionlab;

namespace {

double utility(const AuctionOutcome& o, std::size_t i, double value) {
    return (o.winner == i ? value : 0.0) - o.payments[i];
}

std::vector<double> draw(Rng& rng, std::size_t n, double scale = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v)
        x = scale * rng.uniform();
    return v;
}

}  // namespace

TEST_CASE("second-price variants on fixed profiles") {
    std::vector<double> b{0.6, 0.5};
    auto lazy = Mechanism::sp_lazy({0.7, 0.4}).run(b);
    CHECK_FALSE(lazy.allocated());
    CHECK(lazy.payments == std::vector<double>{0.0, 0.0});

    auto eager = Mechanism::sp_eager({0.7, 0.4}).run(b);
    REQUIRE(eager.allocated());
    CHECK(*eager.winner == 1);
    CHECK(eager.payments[1] == doctest::Approx(0.4));
    CHECK(eager.payments[0] == 0.0);

    auto vick = Mechanism::vickrey().run(std::vector<double>{0.3, 0.9, 0.5});
    CHECK(*vick.winner == 1);
    CHECK(vick.payments[1] == doctest::Approx(0.5));

    auto solo = Mechanism::vickrey().run(std::vector<double>{0.3});
    CHECK(*solo.winner == 0);
    CHECK(solo.payments[0] == 0.0);

    auto tie = Mechanism::vickrey().run(std::vector<double>{0.5, 0.5});
    CHECK(*tie.winner == 0);
    CHECK(tie.payments[0] == 0.5);

    auto fp = Mechanism::first_price(0.2).run(std::vector<double>{0.1, 0.15});
    CHECK_FALSE(fp.allocated());
    auto fp2 = Mechanism::first_price().run(std::vector<double>{0.1, 0.15});
    CHECK(*fp2.winner == 1);
    CHECK(fp2.payments[1] == 0.15);
}

TEST_CASE("myerson with symmetric uniform priors") {
    auto u = Distribution::uniform(0, 1);
    auto m = Mechanism::myerson({u, u});
    auto o = m.run(std::vector<double>{0.8, 0.6});
    REQUIRE(o.allocated());
    CHECK(*o.winner == 0);
    CHECK(o.payments[0] == doctest::Approx(0.6).epsilon(1e-9));
    auto lone = m.run(std::vector<double>{0.8, 0.3});
    CHECK(lone.payments[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK_FALSE(m.run(std::vector<double>{0.4, 0.3}).allocated());
    // bids above the support are clamped into the inversion bracket
    auto high = m.run(std::vector<double>{1.7, 0.6});
    CHECK(high.payments[0] == doctest::Approx(0.6).epsilon(1e-9));
}

TEST_CASE("myerson with asymmetric priors favours the weaker bidder") {
    auto m = Mechanism::myerson({Distribution::uniform(0, 1), Distribution::uniform(0, 2)});
    // psi_0(0.8) = 0.6, psi_1(1.0) = 0
    auto o = m.run(std::vector<double>{0.8, 1.0});
    CHECK(*o.winner == 0);
    CHECK(o.payments[0] == doctest::Approx(0.5).epsilon(1e-9));
    // psi_1(1.5) = 1, bidder 1 needs psi >= 0.6 -> bid 1.3
    auto o2 = m.run(std::vector<double>{0.8, 1.5});
    CHECK(*o2.winner == 1);
    CHECK(o2.payments[1] == doctest::Approx(1.3).epsilon(1e-9));
}

TEST_CASE("boosted second price") {
    auto m = Mechanism::boosted({1.0, 2.0}, {0.5, 0.4});
    // phi = (0.3, 0.6)
    auto o = m.run(std::vector<double>{0.8, 0.5});
    CHECK(*o.winner == 1);
    CHECK(o.payments[1] == doctest::Approx((0.3 + 0.4) / 2.0));
    CHECK_FALSE(m.run(std::vector<double>{0.4, 0.1}).allocated());
    // gpd priors have affine psi = 1.5 x - 1 = boost 1.5, reserve 1
    auto g = Distribution::gpd(0, -0.5, 1);
    auto my = Mechanism::myerson({g, g});
    auto bo = Mechanism::boosted({1.5, 1.5}, {1.0, 1.0});
    Rng rng(4);
    for (int k = 0; k < 200; ++k) {
        auto b = draw(rng, 2, 2.0);
        auto a = my.run(b), c = bo.run(b);
        CHECK(a.winner == c.winner);
        for (std::size_t i = 0; i < 2; ++i)
            CHECK(a.payments[i] == doctest::Approx(c.payments[i]).epsilon(1e-8));
    }
}

TEST_CASE("l-level payments") {
    auto m = Mechanism::l_level({{0.2, 0.5}, {0.3, 0.6}});
    // levels: bidder 0 -> 1, bidder 1 -> 0; staying at level 0 and outbidding 0.4 is cheaper than 0.5
    auto o = m.run(std::vector<double>{0.55, 0.4});
    CHECK(*o.winner == 0);
    CHECK(o.payments[0] == doctest::Approx(0.4));
    // rival high at level 0: clearing level 1 at 0.5 is the cheaper route
    auto o1 = m.run(std::vector<double>{0.55, 0.58});
    CHECK(*o1.winner == 0);
    CHECK(o1.payments[0] == doctest::Approx(0.5));
    // same level: outbid the rival at that level
    auto o2 = m.run(std::vector<double>{0.45, 0.4});
    CHECK(*o2.winner == 0);
    CHECK(o2.payments[0] == doctest::Approx(0.4));
    // rival below its lowest floor: pay own lowest floor
    auto o3 = m.run(std::vector<double>{0.45, 0.1});
    CHECK(o3.payments[0] == doctest::Approx(0.2));
    CHECK_FALSE(m.run(std::vector<double>{0.1, 0.2}).allocated());
    // higher level beats a higher bid
    auto o4 = m.run(std::vector<double>{0.52, 0.58});
    CHECK(*o4.winner == 0);
}

TEST_CASE("arity and parameter validation") {
    auto kind = [](const std::function<void()>& fn) {
        try {
            fn();
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::MissingSeries;
    };
    CHECK(kind([] { Mechanism::sp_lazy({0.1, 0.2}).run(std::vector<double>{0.3}); }) == ErrorKind::InconsistentArity);
    CHECK(kind([] { Mechanism::boosted({1.0}, {0.1, 0.2}); }) == ErrorKind::InconsistentArity);
    CHECK(kind([] { Mechanism::boosted({0.0}, {0.1}); }) == ErrorKind::InvalidArgument);
    CHECK(kind([] { Mechanism::l_level({{0.5, 0.2}}); }) == ErrorKind::NonMonotone);
    CHECK(kind([] { Mechanism::l_level({{0.1, 0.2}, {0.3}}); }) == ErrorKind::InconsistentArity);
    CHECK(kind([] { Mechanism::vickrey().run(std::vector<double>{-0.1, 0.2}); }) == ErrorKind::InvalidArgument);
    CHECK(kind([] { Mechanism::vickrey().run(std::vector<double>{}); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("truthful bidding is dominant in the incentive-compatible mechanisms") {
    auto mix = Distribution::mixture({Distribution::uniform(0, 0.5), Distribution::uniform(0, 1)}, {0.5, 0.5});
    std::vector<std::pair<Mechanism, double>> mechs{
        {Mechanism::vickrey(), 1e-12},
        {Mechanism::sp_lazy({0.3, 0.5, 0.1}), 1e-12},
        {Mechanism::sp_eager({0.3, 0.5, 0.1}), 1e-12},
        {Mechanism::l_level({{0.1, 0.4, 0.7}, {0.2, 0.3, 0.9}, {0.0, 0.5, 0.6}}), 1e-12},
        {Mechanism::boosted({1.0, 1.3, 0.8}, {0.2, 0.4, 0.1}), 1e-12},
        // payments come from a 1e-10 bisection, so the comparison inherits that slack
        {Mechanism::myerson({Distribution::uniform(0, 1), Distribution::uniform(0, 2), mix}), 1e-9},
    };
    Rng rng(2024);
    for (const auto& [m, tol] : mechs) {
        CAPTURE(to_string(m.kind()));
        int violations = 0;
        for (int p = 0; p < 1000; ++p) {
            auto v = draw(rng, 3, 1.2);
            auto truthful = m.run(v);
            for (int d = 0; d < 100; ++d) {
                std::size_t i = rng.index(3);
                auto dev = v;
                dev[i] = 1.5 * rng.uniform();
                auto o = m.run(dev);
                if (utility(o, i, v[i]) > utility(truthful, i, v[i]) + tol)
                    ++violations;
            }
        }
        CHECK(violations == 0);
    }
}

TEST_CASE("lazy reserves act independently per bidder") {
    Rng rng(5);
    for (int p = 0; p < 2000; ++p) {
        auto b = draw(rng, 3);
        std::vector<double> r = draw(rng, 3);
        auto base = Mechanism::sp_lazy(r).run(b);
        std::size_t j = rng.index(3);
        auto r2 = r;
        r2[j] = rng.uniform();
        auto moved = Mechanism::sp_lazy(r2).run(b);
        for (std::size_t i = 0; i < 3; ++i) {
            if (i == j)
                continue;
            CHECK((base.winner == i) == (moved.winner == i));
            CHECK(base.payments[i] == moved.payments[i]);
        }
    }
}

TEST_CASE("lazy and eager coincide under equal reserves; 1-level equals eager") {
    Rng rng(6);
    for (int p = 0; p < 2000; ++p) {
        auto b = draw(rng, 4);
        double r = rng.uniform();
        auto lazy = Mechanism::sp_lazy({r, r, r, r}).run(b);
        auto eager = Mechanism::sp_eager({r, r, r, r}).run(b);
        auto anon = Mechanism::sp_anonymous(r).run(b);
        CHECK(lazy.winner == eager.winner);
        CHECK(lazy.payments == eager.payments);
        CHECK(anon.payments == eager.payments);

        auto res = draw(rng, 4);
        auto e = Mechanism::sp_eager(res).run(b);
        auto l = Mechanism::l_level({{res[0]}, {res[1]}, {res[2]}, {res[3]}}).run(b);
        CHECK(e.winner == l.winner);
        CHECK(e.payments == l.payments);
    }
}

TEST_CASE("vickrey matches a direct implementation") {
    Rng rng(8);
    for (int p = 0; p < 1000; ++p) {
        auto b = draw(rng, 5);
        auto o = Mechanism::vickrey().run(b);
        int w = oracle::argmax_lowest(b);
        CHECK(*o.winner == static_cast<std::size_t>(w));
        CHECK(o.payments[static_cast<std::size_t>(w)] == oracle::second_highest(b, w));
    }
}

TEST_CASE("payments respect individual rationality and only the winner pays") {
    Rng rng(9);
    auto u = Distribution::uniform(0, 1);
    std::vector<Mechanism> mechs{Mechanism::vickrey(), Mechanism::sp_lazy({0.2, 0.6, 0.4}),
                                 Mechanism::sp_eager({0.2, 0.6, 0.4}), Mechanism::myerson({u, u, u}),
                                 Mechanism::first_price(0.1), Mechanism::boosted({1.2, 1, 0.9}, {0.3, 0.1, 0.2})};
    for (const auto& m : mechs)
        for (int p = 0; p < 500; ++p) {
            auto b = draw(rng, 3);
            auto o = m.run(b);
            for (std::size_t i = 0; i < 3; ++i) {
                if (o.winner == i)
                    CHECK(o.payments[i] <= b[i] + 1e-12);
                else
                    CHECK(o.payments[i] == 0.0);
            }
        }
}

TEST_CASE("expected metrics of the two-bidder uniform example") {
    auto u = Distribution::uniform(0, 1);
    auto v = expected_metrics(Mechanism::vickrey(), {u, u}, {}, 1000000, 1);
    CHECK(v.revenue == doctest::Approx(1.0 / 3).epsilon(0.005 * 3));
    CHECK(std::abs(v.revenue - 1.0 / 3) < 0.005);
    CHECK(std::abs(v.utilities[0] - 1.0 / 6) < 0.005);
    CHECK(std::abs(v.utilities[1] - 1.0 / 6) < 0.005);
    CHECK(std::abs(v.welfare - 2.0 / 3) < 0.005);
    CHECK(v.sale_rate == 1.0);

    auto r = expected_metrics(Mechanism::sp_anonymous(0.5), {u, u}, {}, 1000000, 1);
    CHECK(std::abs(r.revenue - 5.0 / 12) < 0.005);
    CHECK(std::abs(r.utilities[0] - 1.0 / 12) < 0.005);
    CHECK(std::abs(r.welfare - 7.0 / 12) < 0.005);
    CHECK(std::abs(r.sale_rate - 0.75) < 0.005);
}

TEST_CASE("a single draw reproduces a direct run") {
    auto u = Distribution::uniform(0, 1);
    auto e = Distribution::exponential(1.0);
    auto m = Mechanism::sp_lazy({0.3, 0.9});
    auto metrics = expected_metrics(m, {u, e}, {}, 1, 77);
    Rng rng(77, 0, kMechTag);
    std::vector<double> v{u.sample(rng), e.sample(rng)};
    auto o = m.run(v);
    CHECK(metrics.revenue == o.revenue());
    for (std::size_t i = 0; i < 2; ++i)
        CHECK(metrics.utilities[i] == utility(o, i, v[i]));
}

TEST_CASE("expected metrics are independent of the worker count") {
    auto u = Distribution::uniform(0, 1);
    auto a = expected_metrics(Mechanism::vickrey(), {u, u, u}, {}, 200000, 3, 1);
    auto b = expected_metrics(Mechanism::vickrey(), {u, u, u}, {}, 200000, 3, 4);
    CHECK(a.revenue == b.revenue);
    CHECK(a.utilities == b.utilities);
    CHECK(a.welfare == b.welfare);
}

TEST_CASE("welfare accounting per draw") {
    Rng rng(10);
    auto m = Mechanism::sp_eager({0.3, 0.2});
    for (int p = 0; p < 1000; ++p) {
        auto v = draw(rng, 2);
        auto o = m.run(v);
        double total = o.revenue() + utility(o, 0, v[0]) + utility(o, 1, v[1]);
        CHECK(total == doctest::Approx(o.allocated() ? v[*o.winner] : 0.0).epsilon(1e-15));
    }
}

TEST_CASE("mechanism json round trip") {
    for (const char* text :
         {R"({"kind":"sp-lazy","reserves":[0.5,0.5]})", R"({"kind":"l-level","floors":[[0.2,0.5],[0.3,0.6]]})",
          R"({"kind":"boosted-sp","boosts":[1.0,1.2],"reserves":[0.5,0.4]})", R"({"kind":"vickrey"})",
          R"({"kind":"myerson","priors":[{"family":"uniform","a":0,"b":1},{"family":"uniform","a":0,"b":1}]})"}) {
        auto m = Mechanism::from_json(json::parse(text));
        auto back = Mechanism::from_json(m.to_json());
        CHECK(back.kind() == m.kind());
        std::vector<double> b{0.55, 0.45};
        CHECK(back.run(b).payments == m.run(b).payments);
    }
    CHECK_THROWS_AS(Mechanism::from_json(json::parse(R"({"kind":"sp-lazy","reserve":[0.5]})")), Error);
    CHECK_THROWS_AS(Mechanism::from_json(json::parse(R"({"kind":"dutch"})")), Error);
}
