#include "auctionlab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "auctionlab/batch.hpp"
#include "auctionlab/bidlearn.hpp"
#include "auctionlab/dynamic.hpp"
#include "auctionlab/equilibrium.hpp"
#include "auctionlab/error.hpp"
#include "auctionlab/mechanism.hpp"
#include "auctionlab/numeric.hpp"
#include "auctionlab/online.hpp"
#include "auctionlab/parallel.hpp"
#include "auctionlab/shading.hpp"

#ifndef AUCTIONLAB_VERSION
#define AUCTIONLAB_VERSION "0.0.0"
#endif

namespace auctionlab {

std::string_view version() { return AUCTIONLAB_VERSION; }

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& what) {
    fail(ErrorKind::InvalidConfig, path + ": " + what);
}

bool is_count(const json& v, bool allow_zero) {
    if (v.is_number_unsigned())
        return allow_zero || v.get<std::uint64_t>() > 0;
    if (v.is_number_integer())
        return v.get<std::int64_t>() > 0 || (allow_zero && v.get<std::int64_t>() == 0);
    return false;
}

/// Reads an object's fields, remembering which were consumed so leftovers
/// can be reported as unknown.
class Fields {
public:
    Fields(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object())
            bad(path_, "expected an object");
    }

    std::string at(std::string_view key) const { return path_ + "." + std::string(key); }
    bool has(std::string_view key) const { return obj_.contains(std::string(key)); }

    const json& get(std::string_view key) {
        if (!has(key))
            bad(at(key), "required field is missing");
        used_.insert(std::string(key));
        return obj_.at(std::string(key));
    }

    double number(std::string_view key) {
        const json& v = get(key);
        if (!v.is_number())
            bad(at(key), "expected a number");
        double x = v.get<double>();
        if (!std::isfinite(x))
            bad(at(key), "expected a finite number");
        return x;
    }
    double number(std::string_view key, double fallback) { return has(key) ? number(key) : fallback; }

    std::uint64_t integer(std::string_view key) {
        const json& v = get(key);
        if (!is_count(v, true))
            bad(at(key), "expected a non-negative integer");
        return v.get<std::uint64_t>();
    }
    std::uint64_t integer(std::string_view key, std::uint64_t fallback) { return has(key) ? integer(key) : fallback; }

    std::size_t positive(std::string_view key, std::size_t fallback) {
        if (!has(key))
            return fallback;
        std::uint64_t v = integer(key);
        if (v == 0)
            bad(at(key), "must be positive");
        return static_cast<std::size_t>(v);
    }

    std::string text(std::string_view key) {
        const json& v = get(key);
        if (!v.is_string())
            bad(at(key), "expected a string");
        return v.get<std::string>();
    }
    std::string text(std::string_view key, std::string fallback) { return has(key) ? text(key) : fallback; }

    bool flag(std::string_view key, bool fallback) {
        if (!has(key))
            return fallback;
        const json& v = get(key);
        if (!v.is_boolean())
            bad(at(key), "expected true or false");
        return v.get<bool>();
    }

    std::vector<double> numbers(std::string_view key) {
        const json& v = get(key);
        if (!v.is_array() || v.empty())
            bad(at(key), "expected a non-empty array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number())
                bad(at(key) + "[" + std::to_string(i) + "]", "expected a number");
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    std::vector<std::size_t> counts(std::string_view key) {
        const json& v = get(key);
        if (!v.is_array() || v.empty())
            bad(at(key), "expected a non-empty array of positive integers");
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!is_count(v[i], false))
                bad(at(key) + "[" + std::to_string(i) + "]", "expected a positive integer");
            out.push_back(v[i].get<std::size_t>());
        }
        return out;
    }

    Distribution dist(std::string_view key) { return parse_dist(get(key), at(key)); }

    std::vector<Distribution> dists(std::string_view key) {
        const json& v = get(key);
        if (!v.is_array() || v.empty())
            bad(at(key), "expected a non-empty array of distributions");
        std::vector<Distribution> out;
        for (std::size_t i = 0; i < v.size(); ++i)
            out.push_back(parse_dist(v[i], at(key) + "[" + std::to_string(i) + "]"));
        return out;
    }

    Mechanism mechanism(std::string_view key) {
        const json& v = get(key);
        try {
            return Mechanism::from_json(v);
        } catch (const Error& e) {
            bad(at(key), e.what());
        }
    }

    void finish() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (!used_.count(it.key()))
                bad(at(it.key()), "unknown key");
    }

    static Distribution parse_dist(const json& v, const std::string& path) {
        try {
            return Distribution::from_json(v);
        } catch (const Error& e) {
            bad(path, e.what());
        }
    }

private:
    const json& obj_;
    std::string path_;
    std::set<std::string> used_;
};

using Runner = std::function<void(std::uint64_t seed, Replication& out)>;
using Prepare = Runner (*)(Fields& params, const ExperimentConfig& cfg);

std::size_t draws_or(const ExperimentConfig& cfg, std::size_t fallback) { return cfg.n_draws ? cfg.n_draws : fallback; }
std::size_t horizon_or(const ExperimentConfig& cfg, std::size_t fallback) { return cfg.T ? cfg.T : fallback; }

std::string label(const std::string& key, std::size_t i) { return key + "." + std::to_string(i); }

std::vector<double> draw_stream(const Distribution& d, std::size_t T, std::uint64_t seed, std::string_view tag) {
    Rng rng(seed, 0, tag);
    std::vector<double> v(T);
    for (auto& x : v)
        x = d.sample(rng);
    return v;
}

// ---- dist

Runner prep_distribution_summary(Fields& p, const ExperimentConfig&) {
    Distribution d = p.dist("dist");
    return [d](std::uint64_t, Replication& out) {
        double price = monopoly_price(d);
        out.metrics["monopoly_price"] = price;
        out.metrics["monopoly_revenue"] = monopoly_revenue(d, price);
        out.metrics["mean"] = d.mean();
        auto reg = regularity_report(d);
        out.metrics["regular"] = reg.regular ? 1.0 : 0.0;
        out.metrics["mhr"] = reg.mhr ? 1.0 : 0.0;
    };
}

Runner prep_profit_curve(Fields& p, const ExperimentConfig&) {
    auto families = p.dists("families");
    std::vector<std::string> names;
    const json& raw = p.get("families");
    for (std::size_t i = 0; i < raw.size(); ++i)
        names.push_back(std::to_string(i) + ":" + raw[i].at("family").get<std::string>());
    std::size_t grid = p.positive("grid", 200);
    return [families, names, grid](std::uint64_t, Replication& out) {
        for (std::size_t f = 0; f < families.size(); ++f) {
            const auto& d = families[f];
            double lo = d.support().lo, hi = d.search_cap();
            std::vector<double> r(grid + 1), pi(grid + 1);
            for (std::size_t k = 0; k <= grid; ++k) {
                r[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(grid);
                pi[k] = monopoly_revenue(d, r[k]);
            }
            out.series["r[" + names[f] + "]"] = r;
            out.series["Pi_r[" + names[f] + "]"] = pi;
            double best = monopoly_price(d);
            out.metrics["monopoly_price[" + names[f] + "]"] = best;
        }
    };
}

// ---- simulate

Runner prep_two_bidder_uniform(Fields& p, const ExperimentConfig& cfg) {
    double reserve = p.number("reserve", 0.5);
    if (reserve < 0.0)
        bad(p.at("reserve"), "must be >= 0");
    std::size_t n = draws_or(cfg, 1000000);
    return [reserve, n](std::uint64_t seed, Replication& out) {
        const Distribution U = Distribution::uniform(0.0, 1.0);
        auto plain = expected_metrics(Mechanism::vickrey(), {U, U}, {}, n, seed, 1);
        auto with = expected_metrics(Mechanism::sp_anonymous(reserve), {U, U}, {}, n, seed, 1);
        for (auto [name, m] : {std::pair{"no_reserve", &plain}, std::pair{"reserve", &with}}) {
            std::string s(name);
            out.metrics["revenue_" + s] = m->revenue;
            out.metrics["revenue_se_" + s] = m->revenue_se;
            out.metrics["utility_" + s] = m->utilities[0];
            out.metrics["welfare_" + s] = m->welfare;
        }
    };
}

Runner prep_mechanism(Fields& p, const ExperimentConfig& cfg) {
    Mechanism m = p.mechanism("mechanism");
    auto dists = p.dists("dists");
    if (m.arity() != 0 && m.arity() != dists.size())
        bad(p.at("dists"), "mechanism is sized for " + std::to_string(m.arity()) + " bidders");
    std::size_t n = draws_or(cfg, 100000);
    return [m, dists, n](std::uint64_t seed, Replication& out) {
        auto r = expected_metrics(m, dists, {}, n, seed, 1);
        out.metrics["revenue"] = r.revenue;
        out.metrics["revenue_se"] = r.revenue_se;
        out.metrics["welfare"] = r.welfare;
        out.metrics["sale_rate"] = r.sale_rate;
        for (std::size_t i = 0; i < r.utilities.size(); ++i)
            out.metrics[label("utility", i)] = r.utilities[i];
    };
}

// ---- equilibrium

Runner prep_revenue_equivalence(Fields& p, const ExperimentConfig& cfg) {
    Distribution d = p.dist("dist");
    std::size_t n = p.positive("n", 2);
    std::size_t draws = draws_or(cfg, 100000);
    return [d, n, draws](std::uint64_t seed, Replication& out) {
        auto r = revenue_equivalence_check(d, n, draws, seed, 1);
        out.metrics["first_price_revenue"] = r.first;
        out.metrics["vickrey_revenue"] = r.second;
        out.metrics["diff_se"] = r.diff_se;
    };
}

Runner prep_bulow_klemperer(Fields& p, const ExperimentConfig& cfg) {
    Distribution d = p.dist("dist");
    std::size_t n_max = p.positive("n_max", 5);
    std::size_t draws = draws_or(cfg, 100000);
    return [d, n_max, draws](std::uint64_t seed, Replication& out) {
        std::vector<double> ns, vick, mye, vick_next;
        double violations = 0.0;
        for (std::size_t n = 1; n <= n_max; ++n) {
            auto r = bulow_klemperer_check(d, n, draws, derive_seed(seed, n, "harness.bk"), 1);
            ns.push_back(static_cast<double>(n));
            vick.push_back(r.vickrey_n);
            mye.push_back(r.myerson_n);
            vick_next.push_back(r.vickrey_np1);
            if (r.vickrey_np1 < r.myerson_n - 3.0 * r.gap_se)
                violations += 1.0;
        }
        out.series["n"] = ns;
        out.series["vickrey_revenue"] = vick;
        out.series["myerson_revenue"] = mye;
        out.series["vickrey_revenue_plus_one"] = vick_next;
        out.metrics["violations"] = violations;
    };
}

// ---- learn

Runner prep_sample_complexity(Fields& p, const ExperimentConfig&) {
    Distribution d = p.dist("dist");
    std::string learner = p.text("learner", "empirical");
    if (learner != "empirical" && learner != "guarded")
        bad(p.at("learner"), "expected 'empirical' or 'guarded'");
    auto Ts = p.counts("Ts");
    std::size_t seeds = p.positive("seeds", 200);
    double kappa = p.number("kappa", 0.05);
    if (!(kappa > 0.0 && kappa < 1.0))
        bad(p.at("kappa"), "must lie in (0, 1)");
    ReserveLearner which = learner == "guarded" ? ReserveLearner::Guarded : ReserveLearner::Empirical;
    return [d, Ts, seeds, kappa, which](std::uint64_t seed, Replication& out) {
        auto rep = sample_complexity_sweep(d, Ts, seeds, which, seed, kappa, 1);
        std::vector<double> t, mean, se, p05;
        for (const auto& row : rep.rows) {
            t.push_back(static_cast<double>(row.T));
            mean.push_back(row.mean_ratio);
            se.push_back(row.se_ratio);
            p05.push_back(row.p05_ratio);
        }
        out.series["T"] = t;
        out.series["mean_ratio"] = mean;
        out.series["se_ratio"] = se;
        out.series["p05_ratio"] = p05;
        out.metrics["final_mean_ratio"] = mean.back();
    };
}

// ---- online

Runner prep_ucb(Fields& p, const ExperimentConfig& cfg) {
    auto means = p.numbers("means");
    for (std::size_t i = 0; i < means.size(); ++i)
        if (means[i] < 0.0 || means[i] > 1.0)
            bad(p.at("means") + "[" + std::to_string(i) + "]", "must lie in [0, 1]");
    std::size_t T = horizon_or(cfg, 10000);
    return [means, T](std::uint64_t seed, Replication& out) {
        auto ep = run_ucb_bernoulli(means, T, seed);
        out.metrics["regret"] = ep.regret;
    };
}

Runner prep_posted_price(Fields& p, const ExperimentConfig& cfg) {
    Distribution d = p.dist("dist");
    double eps = p.number("eps", 0.1);
    if (!(eps > 0.0 && eps <= 1.0))
        bad(p.at("eps"), "must lie in (0, 1]");
    bool stochastic = p.flag("stochastic", true);
    std::size_t T = horizon_or(cfg, 10000);
    return [d, eps, stochastic, T](std::uint64_t seed, Replication& out) {
        auto values = draw_stream(d, T, seed, "harness.values");
        auto ep = posted_price_bandit(values, eps, stochastic, seed);
        out.metrics["regret"] = ep.regret;
        out.metrics["grid_regret"] = ep.grid_regret;
        out.metrics["revenue"] = ep.revenue;
        out.metrics["best_price"] = ep.best_price;
    };
}

Runner prep_cautious_search(Fields& p, const ExperimentConfig& cfg) {
    double x = p.number("x", 0.5);
    if (x < 0.0 || x > 1.0)
        bad(p.at("x"), "must lie in [0, 1]");
    std::size_t T = horizon_or(cfg, 1 << 16);
    return [x, T](std::uint64_t, Replication& out) {
        out.metrics["regret"] = cautious_search(x, T).regret;
        out.metrics["binary_search_regret"] = binary_search_pricing(x, T).regret;
    };
}

Runner prep_reserve_learning(Fields& p, const ExperimentConfig& cfg) {
    Distribution d = p.dist("dist");
    std::size_t n = p.positive("n", 2);
    if (n < 2)
        bad(p.at("n"), "need at least 2 bidders");
    std::size_t T = horizon_or(cfg, 10000);
    return [d, n, T](std::uint64_t seed, Replication& out) {
        auto rep = symmetric_reserve_learning(d, n, T, seed);
        out.metrics["regret"] = rep.regret;
        out.metrics["optimal_reserve"] = rep.optimal_reserve;
        out.metrics["final_reserve"] = rep.reserves.back();
        out.metrics["epochs"] = static_cast<double>(rep.epochs.size());
    };
}

// ---- bid

Runner prep_ucbid(Fields& p, const ExperimentConfig& cfg) {
    double x = p.number("x");
    if (x < 0.0 || x > 1.0)
        bad(p.at("x"), "must lie in [0, 1]");
    Distribution comp = p.dist("competition");
    std::size_t T = horizon_or(cfg, 10000);
    return [x, comp, T](std::uint64_t seed, Replication& out) {
        auto c = draw_stream(comp, T, seed, "harness.competition");
        auto ep = ucbid(x, c, seed);
        out.metrics["regret"] = ep.regret;
        out.metrics["wins"] = static_cast<double>(ep.win_count);
        out.metrics["spend"] = ep.spend;
        out.metrics["utility"] = ep.utility;
    };
}

Runner prep_pacing(Fields& p, const ExperimentConfig& cfg) {
    Distribution values = p.dist("values");
    Distribution comp = p.dist("competition");
    double rate = p.number("budget_rate");
    if (!(rate > 0.0))
        bad(p.at("budget_rate"), "must be > 0");
    std::optional<double> gamma;
    if (p.has("gamma"))
        gamma = p.number("gamma");
    std::size_t T = horizon_or(cfg, 100000);
    return [values, comp, rate, gamma, T](std::uint64_t seed, Replication& out) {
        auto x = draw_stream(values, T, seed, "harness.values");
        auto g = draw_stream(comp, T, seed, "harness.competition");
        auto ep = pacing_bidder(x, g, rate * static_cast<double>(T), gamma);
        out.metrics["terminal_mu"] = ep.multipliers.back();
        out.metrics["spend"] = ep.spend;
        out.metrics["utility"] = ep.utility;
        out.metrics["regret"] = ep.regret;
        out.metrics["wins"] = static_cast<double>(ep.win_count);
    };
}

Runner prep_contextual_bid(Fields& p, const ExperimentConfig& cfg) {
    ContextualBidConfig c;
    c.value_support = p.numbers("value_support");
    c.bid_grid = p.numbers("bid_grid");
    if (p.has("mechanism"))
        c.mechanism = p.mechanism("mechanism");
    if (p.has("opponent"))
        c.opponent = p.dist("opponent");
    c.rivals = p.positive("rivals", 1);
    std::size_t T = horizon_or(cfg, 10000);
    return [c, T](std::uint64_t seed, Replication& out) {
        auto ep = contextual_bid_learner(c, T, seed);
        out.metrics["regret"] = ep.regret;
        out.metrics["utility"] = ep.utility;
        out.metrics["wins"] = static_cast<double>(ep.win_count);
    };
}

// ---- shade

Strategy parse_base(Fields& p) {
    if (!p.has("base"))
        return Strategy::identity();
    const json& v = p.get("base");
    if (v.is_string() && v.get<std::string>() == "truthful")
        return Strategy::identity();
    if (v.is_number() && v.get<double>() > 0.0)
        return Strategy::linear(v.get<double>());
    bad(p.at("base"), "expected \"truthful\" or a positive linear slope");
}

Runner prep_thresholding(Fields& p, const ExperimentConfig& cfg) {
    Distribution F = p.dist("dist");
    Strategy base = parse_base(p);
    std::optional<double> r;
    if (p.has("r")) {
        r = p.number("r");
        if (*r < F.support().lo || *r >= F.search_cap())
            bad(p.at("r"), "must lie in the support");
    }
    std::size_t draws = draws_or(cfg, 1000000);
    return [F, base, r, draws](std::uint64_t seed, Replication& out) {
        ShadedStrategy plain(base, F);
        ShadedStrategy truthful(Strategy::identity(), F);
        double at = r.value_or(plain.reserve_value());
        auto shaded = thresholded_strategy(F, base, at);
        auto before = simulate_lazy_market({plain, truthful}, draws, seed, 1);
        auto after = simulate_lazy_market({shaded, truthful}, draws, seed, 1);
        out.metrics["r"] = at;
        out.metrics["reserve_price_base"] = plain.reserve_price();
        out.metrics["reserve_price_strategic"] = shaded.reserve_price();
        out.metrics["utility_base"] = before.utilities[0];
        out.metrics["utility_strategic"] = after.utilities[0];
        out.metrics["utility_se_strategic"] = after.utility_se[0];
        out.metrics["payment_base"] = before.payments[0];
        out.metrics["payment_strategic"] = after.payments[0];
        out.metrics["welfare_base"] = before.welfare;
        out.metrics["welfare_strategic"] = after.welfare;
        out.metrics["revenue_base"] = before.revenue;
        out.metrics["revenue_strategic"] = after.revenue;
    };
}

Runner prep_linear_shading(Fields& p, const ExperimentConfig&) {
    Distribution F = p.dist("dist");
    Distribution G = p.has("competition") ? p.dist("competition") : F;
    return [F, G](std::uint64_t, Replication& out) {
        auto r = optimal_linear_alpha(F, G);
        out.metrics["alpha"] = r.alpha;
        out.metrics["utility"] = r.utility;
        out.metrics["fallback"] = r.fallback ? 1.0 : 0.0;
    };
}

Runner prep_thresholded_nash(Fields& p, const ExperimentConfig& cfg) {
    Distribution F = p.dist("dist");
    std::size_t n = p.positive("n", 2);
    if (n < 2)
        bad(p.at("n"), "need at least 2 bidders");
    std::size_t draws = draws_or(cfg, 1000000);
    return [F, n, draws](std::uint64_t seed, Replication& out) {
        double r = thresholded_nash_reserve(F, n);
        std::vector<ShadedStrategy> bidders(n, thresholded_strategy(F, Strategy::identity(), r));
        auto market = simulate_lazy_market(bidders, draws, seed, 1);
        auto plain = expected_metrics(Mechanism::vickrey(), std::vector<Distribution>(n, F), {}, draws, seed, 1);
        out.metrics["r_star"] = r;
        out.metrics["revenue"] = market.revenue;
        out.metrics["revenue_se"] = market.revenue_se;
        out.metrics["vickrey_revenue"] = plain.revenue;
        out.metrics["vickrey_revenue_se"] = plain.revenue_se;
    };
}

Runner prep_myerson_shading(Fields& p, const ExperimentConfig& cfg) {
    Distribution F = p.dist("dist");
    std::size_t n = p.positive("n", 2);
    if (n < 2)
        bad(p.at("n"), "need at least 2 bidders");
    std::size_t draws = draws_or(cfg, 1 << 17);
    return [F, n, draws](std::uint64_t seed, Replication& out) {
        Strategy beq = myerson_shading(F, n);
        double lo = F.support().lo, hi = F.search_cap();
        std::vector<double> xs, bs;
        for (int k = 0; k <= 100; ++k) {
            double x = lo + (hi - lo) * k / 100.0;
            xs.push_back(x);
            bs.push_back(beq(x));
        }
        out.series["x"] = xs;
        out.series["beta_eq"] = bs;
        Distribution prior = bid_law(F, beq);
        auto m = expected_metrics(Mechanism::myerson(std::vector<Distribution>(n, prior)),
                                  std::vector<Distribution>(n, F), std::vector<Strategy>(n, beq), draws, seed, 1);
        out.metrics["utility"] = m.utilities[0];
        out.metrics["utility_se"] = m.utility_se[0];
        out.metrics["revenue"] = m.revenue;
    };
}

// ---- exploit

Runner prep_mean_based(Fields& p, const ExperimentConfig& cfg) {
    Distribution F = p.has("dist") ? p.dist("dist")
                                   : Distribution::discrete({{0.25, 0.5}, {0.5, 0.25}, {1.0, 0.25}});
    if (!F.is_discrete())
        bad(p.at("dist"), "needs a discrete law");
    BidderMode mode;
    try {
        mode = bidder_mode_from_string(p.text("bidder", "oracle"));
    } catch (const Error& e) {
        bad(p.at("bidder"), e.what());
    }
    std::optional<double> rate;
    if (p.has("exp3_rate"))
        rate = p.number("exp3_rate");
    std::size_t T = horizon_or(cfg, 120000);
    if (T % 2)
        bad("T", "must be even");
    return [F, mode, rate, T](std::uint64_t seed, Replication& out) {
        auto tr = exploit_mean_based(F, T, mode, seed, rate);
        double t = static_cast<double>(T);
        out.metrics["revenue_per_round"] = tr.revenue / t;
        out.metrics["monopoly_revenue_per_round"] = monopoly_revenue(F, monopoly_price(F));
        for (auto [v, r] : tr.class_revenue) {
            char key[64];
            std::snprintf(key, sizeof key, "class_share[%g]", v);
            out.metrics[key] = r / t;
        }
    };
}

Runner prep_fee(Fields& p, const ExperimentConfig& cfg) {
    auto dists = p.dists("dists");
    std::size_t draws = draws_or(cfg, 1 << 20);
    return [dists, draws](std::uint64_t seed, Replication& out) {
        auto r = fee_mechanism(dists, draws, seed, 1);
        out.metrics["revenue"] = r.revenue;
        out.metrics["welfare"] = r.welfare;
        out.metrics["losing_negative_share"] = r.losing_negative_share;
        for (std::size_t i = 0; i < r.fees.size(); ++i) {
            out.metrics[label("fee", i)] = r.fees[i];
            out.metrics[label("utility", i)] = r.utilities[i];
        }
    };
}

Runner prep_two_phase(Fields& p, const ExperimentConfig& cfg) {
    Distribution F = p.has("dist") ? p.dist("dist") : Distribution::uniform(0.0, 1.0);
    double gamma = p.number("gamma", 0.8);
    if (!(gamma > 0.0 && gamma <= 1.0))
        bad(p.at("gamma"), "must lie in (0, 1]");
    std::size_t T = horizon_or(cfg, 100000);
    double alpha = p.number("alpha", std::pow(static_cast<double>(T), -1.0 / 3.0));
    if (!(alpha > 0.0 && alpha <= 1.0))
        bad(p.at("alpha"), "must lie in (0, 1]");
    std::string buyer = p.text("buyer", "truthful");
    BuyerModel model;
    if (buyer == "liar")
        model.mode = BuyerMode::ThresholdLiar;
    else if (buyer != "truthful")
        bad(p.at("buyer"), "expected 'truthful' or 'liar'");
    model.tau = p.number("tau", 0.0);
    return [F, gamma, T, alpha, model](std::uint64_t seed, Replication& out) {
        auto tr = two_phase_posted_price(F, gamma, T, alpha, model, seed);
        double regret = dynamic_regret(tr, F);
        out.metrics["regret"] = regret;
        out.metrics["regret_scaled"] = regret / std::pow(static_cast<double>(T), 2.0 / 3.0);
        out.metrics["learned_price"] = tr.learned_price.value_or(-1.0);
        out.metrics["discounted_utility"] = tr.discounted_utility;
        out.metrics["revenue"] = tr.revenue;
    };
}

struct ScenarioDef {
    std::string_view name;
    std::string_view command;
    Prepare prepare;
};

constexpr ScenarioDef kScenarios[] = {
    {"distribution-summary", "dist", prep_distribution_summary},
    {"profit-curve", "dist", prep_profit_curve},
    {"two-bidder-uniform", "simulate", prep_two_bidder_uniform},
    {"mechanism", "simulate", prep_mechanism},
    {"revenue-equivalence", "equilibrium", prep_revenue_equivalence},
    {"bulow-klemperer", "equilibrium", prep_bulow_klemperer},
    {"sample-complexity", "learn", prep_sample_complexity},
    {"ucb", "online", prep_ucb},
    {"posted-price", "online", prep_posted_price},
    {"cautious-search", "online", prep_cautious_search},
    {"reserve-learning", "online", prep_reserve_learning},
    {"ucbid", "bid", prep_ucbid},
    {"pacing", "bid", prep_pacing},
    {"contextual-bid", "bid", prep_contextual_bid},
    {"thresholding", "shade", prep_thresholding},
    {"linear-shading", "shade", prep_linear_shading},
    {"thresholded-nash", "shade", prep_thresholded_nash},
    {"myerson-shading", "shade", prep_myerson_shading},
    {"mean-based", "exploit", prep_mean_based},
    {"fee", "exploit", prep_fee},
    {"two-phase", "exploit", prep_two_phase},
};

const ScenarioDef& find_scenario(std::string_view name, const std::string& path) {
    for (const auto& s : kScenarios)
        if (s.name == name)
            return s;
    bad(path, "unknown scenario '" + std::string(name) + "'");
}

Runner prepare(const ExperimentConfig& cfg) {
    const auto& def = find_scenario(cfg.scenario, "scenario");
    Fields params(cfg.params, "params");
    Runner run = def.prepare(params, cfg);
    params.finish();
    return run;
}

}  // namespace

std::string_view scenario_command(std::string_view scenario) { return find_scenario(scenario, "scenario").command; }

std::vector<std::string> scenario_names() {
    std::vector<std::string> out;
    for (const auto& s : kScenarios)
        out.emplace_back(s.name);
    return out;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    ExperimentConfig cfg;
    Fields top(j, "config");
    auto where = [](std::string_view key) { return std::string(key); };

    const json& ver = top.get("schema_version");
    if (!ver.is_number_integer() || ver.get<int>() != kSchemaVersion)
        bad(where("schema_version"), "unsupported schema version " + ver.dump() + " (this build reads version " +
                                         std::to_string(kSchemaVersion) + ")");
    const json& sc = top.get("scenario");
    if (!sc.is_string())
        bad(where("scenario"), "expected a string");
    cfg.scenario = sc.get<std::string>();
    find_scenario(cfg.scenario, "scenario");
    if (top.has("params"))
        cfg.params = top.get("params");
    auto count = [&](std::string_view key) -> std::size_t {
        const json& v = top.get(key);
        if (!is_count(v, false))
            bad(where(key), "expected a positive integer");
        return v.get<std::size_t>();
    };
    if (top.has("n_draws"))
        cfg.n_draws = count("n_draws");
    if (top.has("T"))
        cfg.T = count("T");
    if (top.has("workers"))
        cfg.workers = static_cast<unsigned>(count("workers"));
    if (top.has("seeds")) {
        Fields seeds(top.get("seeds"), "seeds");
        cfg.master_seed = seeds.integer("master", 0);
        if (seeds.has("replications")) {
            const json& r = seeds.get("replications");
            if (!is_count(r, false))
                bad("seeds.replications", "expected a positive integer");
            cfg.replications = r.get<std::size_t>();
        }
        seeds.finish();
    }
    if (top.has("output")) {
        Fields out(top.get("output"), "output");
        cfg.report_path = out.text("report", "");
        cfg.series_path = out.text("series", "");
        out.finish();
    }
    top.finish();
    cfg.echo = j;
    // validate the scenario parameters before anything runs
    prepare(cfg);
    return cfg;
}

void ExperimentConfig::override_seed(std::uint64_t seed) {
    master_seed = seed;
    if (!echo.contains("seeds"))
        echo["seeds"] = json::object();
    echo["seeds"]["master"] = seed;
}

// ---- reports

namespace {

void write_number(std::ostream& out, double x) {
    if (!std::isfinite(x)) {
        out << "null";
        return;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out << buf;
}

void write_value(std::ostream& out, const json& j, int indent, int depth) {
    auto newline = [&](int d) {
        if (indent < 0)
            return;
        out << '\n' << std::string(static_cast<std::size_t>(indent * d), ' ');
    };
    const char* sep = indent < 0 ? ":" : ": ";
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                out << "{}";
                return;
            }
            out << '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first)
                    out << ',';
                first = false;
                newline(depth + 1);
                out << json(it.key()).dump() << sep;
                write_value(out, it.value(), indent, depth + 1);
            }
            newline(depth);
            out << '}';
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                out << "[]";
                return;
            }
            out << '[';
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i)
                    out << ',';
                newline(depth + 1);
                write_value(out, j[i], indent, depth + 1);
            }
            newline(depth);
            out << ']';
            return;
        }
        case json::value_t::number_float: write_number(out, j.get<double>()); return;
        default: out << j.dump(); return;
    }
}

MetricSummary summarize(std::vector<double> v) {
    MetricSummary s;
    const double n = static_cast<double>(v.size());
    for (double x : v)
        s.mean += x / n;
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v)
            ss += (x - s.mean) * (x - s.mean);
        s.std = std::sqrt(ss / (n - 1.0));
    }
    std::sort(v.begin(), v.end());
    s.p05 = numeric::quantile_of_sorted(v, 0.05);
    s.p95 = numeric::quantile_of_sorted(v, 0.95);
    return s;
}

json replication_json(const Replication& r) {
    json m = json::object(), s = json::object();
    for (const auto& [k, v] : r.metrics)
        m[k] = v;
    for (const auto& [k, v] : r.series)
        s[k] = v;
    return {{"index", r.index}, {"seed", r.seed}, {"metrics", m}, {"series", s}};
}

json aggregate_json(const std::map<std::string, MetricSummary>& agg) {
    json a = json::object();
    for (const auto& [k, s] : agg)
        a[k] = {{"mean", s.mean}, {"std", s.std}, {"p05", s.p05}, {"p95", s.p95}};
    return a;
}

}  // namespace

std::string dump_json(const json& j, int indent) {
    std::ostringstream out;
    write_value(out, j, indent, 0);
    return out.str();
}

json RunReport::to_json() const {
    json reps = json::array();
    for (const auto& r : replications)
        reps.push_back(replication_json(r));
    json s = json::object();
    for (const auto& [k, v] : series)
        s[k] = v;
    return {{"schema_version", schema_version},
            {"version", version},
            {"master_seed", master_seed},
            {"config", config},
            {"replications", reps},
            {"aggregate", aggregate_json(aggregate)},
            {"series", s},
            {"wall_clock_seconds", wall_clock_seconds}};
}

RunReport RunReport::from_json(const json& j) {
    try {
        RunReport r;
        r.schema_version = j.at("schema_version").get<int>();
        require(r.schema_version == kSchemaVersion, ErrorKind::InvalidConfig, "report schema version mismatch");
        r.version = j.at("version").get<std::string>();
        r.master_seed = j.at("master_seed").get<std::uint64_t>();
        r.config = j.at("config");
        for (const auto& rep : j.at("replications")) {
            Replication x;
            x.index = rep.at("index").get<std::size_t>();
            x.seed = rep.at("seed").get<std::uint64_t>();
            for (auto it = rep.at("metrics").begin(); it != rep.at("metrics").end(); ++it)
                x.metrics[it.key()] = it.value().is_null() ? NAN : it.value().get<double>();
            for (auto it = rep.at("series").begin(); it != rep.at("series").end(); ++it)
                x.series[it.key()] = it.value().get<std::vector<double>>();
            r.replications.push_back(std::move(x));
        }
        for (auto it = j.at("aggregate").begin(); it != j.at("aggregate").end(); ++it) {
            const json& a = it.value();
            r.aggregate[it.key()] = {a.at("mean").get<double>(), a.at("std").get<double>(), a.at("p05").get<double>(),
                                     a.at("p95").get<double>()};
        }
        for (auto it = j.at("series").begin(); it != j.at("series").end(); ++it)
            r.series[it.key()] = it.value().get<std::vector<double>>();
        r.wall_clock_seconds = j.value("wall_clock_seconds", 0.0);
        return r;
    } catch (const json::exception& e) {
        fail(ErrorKind::InvalidConfig, std::string("malformed report: ") + e.what());
    }
}

std::string RunReport::metrics_dump() const {
    json reps = json::array();
    for (const auto& r : replications)
        reps.push_back(replication_json(r));
    return dump_json(json{{"replications", reps}, {"aggregate", aggregate_json(aggregate)}}, -1);
}

RunReport run_experiment(const ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    Runner run = prepare(cfg);
    RunReport report;
    report.config = cfg.echo;
    report.master_seed = cfg.master_seed;
    report.version = std::string(version());
    report.replications.resize(cfg.replications);
    parallel_for(cfg.replications, cfg.workers, [&](std::size_t k) {
        Replication& r = report.replications[k];
        r.index = k;
        r.seed = derive_seed(cfg.master_seed, k, "harness.replication");
        try {
            run(r.seed, r);
        } catch (const Error& e) {
            fail(e.kind(), "scenario " + cfg.scenario + ", replication " + std::to_string(k) + ": " + e.what());
        }
    });

    std::map<std::string, std::vector<double>> columns;
    for (const auto& r : report.replications)
        for (const auto& [k, v] : r.metrics)
            columns[k].push_back(v);
    for (auto& [k, v] : columns)
        report.aggregate[k] = summarize(std::move(v));
    for (const auto& [k, first] : report.replications.front().series) {
        std::vector<double> mean(first.size(), 0.0);
        for (const auto& r : report.replications) {
            const auto& s = r.series.at(k);
            for (std::size_t i = 0; i < mean.size() && i < s.size(); ++i)
                mean[i] += s[i] / static_cast<double>(report.replications.size());
        }
        report.series[k] = std::move(mean);
    }
    report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (!cfg.report_path.empty()) {
        std::ofstream out(cfg.report_path, std::ios::binary);
        require(static_cast<bool>(out), ErrorKind::InvalidConfig, "output.report: cannot open " + cfg.report_path);
        out << dump_json(report.to_json()) << '\n';
    }
    if (!cfg.series_path.empty()) {
        std::ofstream out(cfg.series_path, std::ios::binary);
        require(static_cast<bool>(out), ErrorKind::InvalidConfig, "output.series: cannot open " + cfg.series_path);
        out << "replication";
        for (const auto& [k, v] : columns)
            out << ',' << k;
        out << '\n';
        for (const auto& r : report.replications) {
            out << r.index;
            for (const auto& [k, v] : columns) {
                out << ',';
                auto it = r.metrics.find(k);
                if (it != r.metrics.end())
                    write_number(out, it->second);
            }
            out << '\n';
        }
    }
    return report;
}

// ---- plot data

std::string PlotTable::to_csv() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < columns.size(); ++i)
        out << (i ? "," : "") << columns[i];
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << row[i];
        out << '\n';
    }
    return out.str();
}

namespace {

std::string cell(double x) {
    std::ostringstream s;
    write_number(s, x);
    return s.str();
}

const std::vector<double>& need_series(const RunReport& r, const std::string& name, std::string_view kind) {
    auto it = r.series.find(name);
    require(it != r.series.end() && !it->second.empty(), ErrorKind::MissingSeries,
            std::string(kind) + " needs series '" + name + "'");
    return it->second;
}

}  // namespace

PlotTable emit_plot_data(const RunReport& report, std::string_view kind) {
    require(!report.replications.empty(), ErrorKind::MissingSeries, "report has no replications");
    PlotTable t;
    if (kind == "bk-curve") {
        const auto& n = need_series(report, "n", kind);
        const auto& v = need_series(report, "vickrey_revenue", kind);
        const auto& m = need_series(report, "myerson_revenue", kind);
        t.columns = {"n", "vickrey_revenue", "myerson_revenue"};
        for (std::size_t i = 0; i < n.size(); ++i)
            t.rows.push_back({cell(n[i]), cell(v.at(i)), cell(m.at(i))});
    } else if (kind == "profit-curve") {
        t.columns = {"family", "r", "Pi_r"};
        for (const auto& [name, r] : report.series) {
            if (name.rfind("r[", 0) != 0)
                continue;
            std::string family = name.substr(2, name.size() - 3);
            const auto& pi = need_series(report, "Pi_r[" + family + "]", kind);
            for (std::size_t i = 0; i < r.size(); ++i)
                t.rows.push_back({family, cell(r[i]), cell(pi.at(i))});
        }
        require(!t.rows.empty(), ErrorKind::MissingSeries, "profit-curve needs r[...] and Pi_r[...] series");
    } else if (kind == "sample-complexity") {
        const auto& T = need_series(report, "T", kind);
        const auto& mean = need_series(report, "mean_ratio", kind);
        const auto& p05 = need_series(report, "p05_ratio", kind);
        t.columns = {"T", "mean_ratio", "p05_ratio"};
        for (std::size_t i = 0; i < T.size(); ++i)
            t.rows.push_back({cell(T[i]), cell(mean.at(i)), cell(p05.at(i))});
    } else {
        fail(ErrorKind::InvalidArgument, "unknown plot kind '" + std::string(kind) + "'");
    }
    return t;
}

void write_plot_data(const RunReport& report, std::string_view kind, const std::string& path) {
    PlotTable t = emit_plot_data(report, kind);
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorKind::InvalidArgument, "cannot open " + path);
    out << t.to_csv();
}

}  // namespace auctionlab
