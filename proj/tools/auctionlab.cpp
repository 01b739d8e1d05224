// Command-line front end. Every subcommand runs an experiment config
// (--config); most also take direct flags for a single run.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "auctionlab/bidlearn.hpp"
#include "auctionlab/dynamic.hpp"
#include "auctionlab/equilibrium.hpp"
#include "auctionlab/error.hpp"
#include "auctionlab/harness.hpp"
#include "auctionlab/online.hpp"
#include "auctionlab/rng.hpp"
#include "auctionlab/shading.hpp"

using namespace auctionlab;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    unsigned workers = 1;
    std::string out;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "experiment config (JSON)");
    sub->add_option("--seed", c.seed, "master seed, overrides the config");
    sub->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", c.out, "output path");
}

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

json read_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorKind::InvalidConfig, "cannot read " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::InvalidConfig, path + ": " + e.what());
    }
}

std::ofstream open_out(const std::string& path) {
    require(!path.empty(), ErrorKind::InvalidConfig, "--out is required");
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorKind::InvalidConfig, "cannot write " + path);
    return out;
}

/// Params of a direct run: known keys only.
json params_from(const std::string& path, std::set<std::string> allowed) {
    if (path.empty())
        return json::object();
    json j = read_json(path);
    require(j.is_object(), ErrorKind::InvalidConfig, path + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        require(allowed.count(it.key()) > 0, ErrorKind::InvalidConfig, "params." + it.key() + ": unknown key");
    return j;
}

Distribution law_from(const json& j, std::string_view key, Distribution fallback) {
    if (!j.contains(std::string(key)))
        return fallback;
    try {
        return Distribution::from_json(j.at(std::string(key)));
    } catch (const Error& e) {
        fail(ErrorKind::InvalidConfig, "params." + std::string(key) + ": " + e.what());
    }
}

/// A named family with default parameters, or a full JSON law when `dist` is given.
Distribution family_law(const std::string& family, const std::string& dist) {
    if (!dist.empty()) {
        try {
            return Distribution::from_json(json::parse(dist));
        } catch (const json::parse_error& e) {
            fail(ErrorKind::InvalidConfig, std::string("--dist: ") + e.what());
        }
    }
    json j{{"family", family}};
    if (family == "uniform")
        j.update({{"a", 0.0}, {"b", 1.0}});
    else if (family == "exponential")
        j["scale"] = 1.0;
    else if (family == "lognormal")
        j.update({{"mu", 0.0}, {"sigma", 0.5}});
    else if (family == "gpd")
        j.update({{"mu", 0.0}, {"xi", 0.25}, {"sigma", 1.0}});
    else if (family == "pareto")
        j.update({{"scale", 1.0}, {"shape", 3.0}});
    else if (family == "kumaraswamy")
        j.update({{"a", 2.0}, {"b", 3.0}});
    else if (family != "heavy-tail")
        fail(ErrorKind::InvalidConfig, "--family: unknown family '" + family + "'");
    return Distribution::from_json(j);
}

int run_config(const std::string& group, const Common& c) {
    require(!c.config.empty(), ErrorKind::InvalidConfig, group + ": --config is required");
    auto cfg = ExperimentConfig::from_json(read_json(c.config));
    if (group != "report")
        require(scenario_command(cfg.scenario) == group, ErrorKind::InvalidConfig,
                "scenario: '" + cfg.scenario + "' belongs to '" + std::string(scenario_command(cfg.scenario)) +
                    "', not '" + group + "'");
    if (c.seed)
        cfg.override_seed(*c.seed);
    cfg.workers = c.workers;
    if (!c.out.empty())
        cfg.report_path = c.out;
    auto report = run_experiment(cfg);
    if (cfg.report_path.empty())
        std::cout << dump_json(report.to_json()) << '\n';
    return 0;
}

// ---- direct runs

int equilibrium_direct(const std::string& auction, const Distribution& F, std::size_t n, const std::string& out) {
    Strategy beta = Strategy::identity();
    if (auction == "first-price")
        beta = fp_symmetric_equilibrium(F, n);
    else
        require(auction == "second-price", ErrorKind::InvalidConfig,
                "--auction: expected first-price or second-price");
    auto file = open_out(out);
    file << "value,bid\n";
    const double lo = F.support().lo, hi = F.search_cap();
    for (int k = 0; k <= 200; ++k) {
        double x = lo + (hi - lo) * k / 200.0;
        file << num(x) << ',' << num(beta(x)) << '\n';
    }
    return 0;
}

int online_direct(const std::string& algo, std::size_t T, std::uint64_t seed, const std::string& config,
                  const std::string& out) {
    if (algo == "ucb" || algo == "exp3") {
        json p = params_from(config, {"means"});
        auto means = p.value("means", std::vector<double>{0.3, 0.5, 0.7});
        BanditEpisode ep;
        if (algo == "ucb") {
            ep = run_ucb_bernoulli(means, T, seed);
        } else {
            // Bernoulli rewards fixed in advance, one stream per (round, arm)
            auto table = [&](std::size_t t, std::size_t arm) {
                Rng rng(seed, t * means.size() + arm, "cli.exp3.rewards");
                return rng.uniform() < means[arm] ? 1.0 : 0.0;
            };
            ep = run_exp3(means.size(), T, table, seed);
        }
        auto file = open_out(out);
        file << "t,arm,reward,cumulative_regret\n";
        for (std::size_t t = 0; t < ep.arms.size(); ++t)
            file << t + 1 << ',' << ep.arms[t] << ',' << num(ep.rewards[t]) << ',' << num(ep.cumulative_regret[t])
                 << '\n';
        std::cout << dump_json(json{{"T", T}, {"regret", ep.regret}}) << '\n';
        return 0;
    }
    if (algo == "posted-ucb" || algo == "cautious") {
        PricingEpisode ep;
        if (algo == "posted-ucb") {
            json p = params_from(config, {"dist", "eps", "stochastic"});
            auto d = law_from(p, "dist", Distribution::uniform(0.0, 1.0));
            double eps = p.value("eps", std::pow(static_cast<double>(T), -1.0 / 3.0));
            Rng rng(seed, 0, "cli.values");
            std::vector<double> values(T);
            for (auto& v : values)
                v = d.sample(rng);
            ep = posted_price_bandit(values, eps, p.value("stochastic", true), seed);
        } else {
            json p = params_from(config, {"x"});
            ep = cautious_search(p.value("x", 0.5), T);
        }
        auto file = open_out(out);
        file << "t,price,accept,cumulative_regret\n";
        for (std::size_t t = 0; t < ep.prices.size(); ++t)
            file << t + 1 << ',' << num(ep.prices[t]) << ',' << (ep.accepts[t] ? 1 : 0) << ','
                 << num(ep.cumulative_regret[t]) << '\n';
        std::cout << dump_json(json{{"T", T}, {"regret", ep.regret}, {"revenue", ep.revenue}}) << '\n';
        return 0;
    }
    if (algo == "reserve-epochs") {
        json p = params_from(config, {"dist", "n"});
        auto d = law_from(p, "dist", Distribution::uniform(0.0, 1.0));
        auto rep = symmetric_reserve_learning(d, p.value("n", std::size_t{2}), T, seed);
        auto file = open_out(out);
        file << "t,reserve,revenue,cumulative_regret\n";
        for (std::size_t t = 0; t < rep.reserves.size(); ++t)
            file << t + 1 << ',' << num(rep.reserves[t]) << ',' << num(rep.realized_revenue[t]) << ','
                 << num(rep.cumulative_regret[t]) << '\n';
        std::cout << dump_json(json{{"T", T}, {"regret", rep.regret}, {"optimal_reserve", rep.optimal_reserve}})
                  << '\n';
        return 0;
    }
    fail(ErrorKind::InvalidConfig, "--algo: unknown algorithm '" + algo + "'");
}

std::vector<double> stream(const Distribution& d, std::size_t T, std::uint64_t seed, std::string_view tag) {
    Rng rng(seed, 0, tag);
    std::vector<double> v(T);
    for (auto& x : v)
        x = d.sample(rng);
    return v;
}

int bid_direct(const std::string& algo, std::size_t T, std::uint64_t seed, const std::string& config,
               const std::string& out) {
    BidderEpisode ep;
    const Distribution U = Distribution::uniform(0.0, 1.0);
    if (algo == "ucbid") {
        json p = params_from(config, {"x", "competition"});
        auto comp = stream(law_from(p, "competition", U), T, seed, "cli.competition");
        ep = ucbid(p.value("x", 0.6), comp, seed);
    } else if (algo == "pacing") {
        json p = params_from(config, {"values", "competition", "budget_rate", "gamma"});
        auto x = stream(law_from(p, "values", U), T, seed, "cli.values");
        auto g = stream(law_from(p, "competition", U), T, seed, "cli.competition");
        std::optional<double> gamma;
        if (p.contains("gamma"))
            gamma = p.at("gamma").get<double>();
        ep = pacing_bidder(x, g, p.value("budget_rate", 0.2) * static_cast<double>(T), gamma);
    } else if (algo == "contextual") {
        json p = params_from(config, {"value_support", "bid_grid", "mechanism", "opponent", "rivals"});
        ContextualBidConfig c;
        c.value_support = p.value("value_support", std::vector<double>{0.25, 0.5, 0.75, 1.0});
        if (p.contains("bid_grid")) {
            c.bid_grid = p.at("bid_grid").get<std::vector<double>>();
        } else {
            for (int k = 0; k <= 20; ++k)
                c.bid_grid.push_back(k / 20.0);
        }
        if (p.contains("mechanism"))
            c.mechanism = Mechanism::from_json(p.at("mechanism"));
        c.opponent = law_from(p, "opponent", U);
        c.rivals = p.value("rivals", std::size_t{1});
        ep = contextual_bid_learner(c, T, seed);
    } else {
        fail(ErrorKind::InvalidConfig, "--algo: unknown algorithm '" + algo + "'");
    }
    auto file = open_out(out);
    const bool paced = !ep.multipliers.empty();
    file << "t,value,bid,competition,win,payment,cumulative_utility,cumulative_regret" << (paced ? ",mu" : "")
         << '\n';
    auto at = [](const std::vector<double>& v, std::size_t i) { return i < v.size() ? num(v[i]) : std::string(); };
    for (std::size_t t = 0; t < ep.horizon(); ++t) {
        file << t + 1 << ',' << at(ep.values, t) << ',' << num(ep.bids[t]) << ',' << at(ep.competition, t) << ','
             << (ep.wins[t] ? 1 : 0) << ',' << at(ep.payments, t) << ',' << at(ep.cumulative_utility, t) << ','
             << at(ep.cumulative_regret, t);
        if (paced)
            file << ',' << num(ep.multipliers[t]);
        file << '\n';
    }
    std::cout << dump_json(ep.summary()) << '\n';
    return 0;
}

int shade_direct(const Distribution& F, const std::string& scheme, std::optional<double> r, std::size_t n,
                 const std::string& out) {
    std::optional<ShadedStrategy> s;
    json summary;
    if (scheme == "threshold") {
        ShadedStrategy truthful(Strategy::identity(), F);
        double at = r.value_or(truthful.reserve_value());
        s = thresholded_strategy(F, Strategy::identity(), at);
        summary = {{"scheme", scheme}, {"r", at}};
    } else if (scheme == "linear") {
        auto best = optimal_linear_alpha(F, F);
        s = ShadedStrategy(Strategy::linear(best.alpha), F);
        summary = {{"scheme", scheme}, {"alpha", best.alpha}, {"utility", best.utility}};
    } else if (scheme == "myerson-eq") {
        s = ShadedStrategy(myerson_shading(F, n), F);
        summary = {{"scheme", scheme}, {"n", n}};
    } else {
        fail(ErrorKind::InvalidConfig, "--scheme: expected threshold, linear or myerson-eq");
    }
    summary["reserve_price"] = s->reserve_price();
    const auto& xs = s->grid();
    const auto& hs = s->h_table();
    auto file = open_out(out);
    file << "x,bid,h\n";
    const std::size_t stride = std::max<std::size_t>(1, xs.size() / 256);
    for (std::size_t i = 0; i < xs.size(); i += stride)
        file << num(xs[i]) << ',' << num((*s)(xs[i])) << ',' << num(hs[i]) << '\n';
    std::cout << dump_json(summary) << '\n';
    return 0;
}

struct ExploitFlags {
    std::string scenario;
    std::size_t T = 120000;
    double gamma = 0.8;
    std::string bidder = "oracle";
    std::optional<double> alpha;
    std::string buyer = "truthful";
    double tau = 0.0;
    std::size_t n = 2;
    std::size_t n_draws = 1 << 20;
};

int exploit_direct(const ExploitFlags& f, const std::string& family, const std::string& dist, std::uint64_t seed,
                   const std::string& out) {
    if (f.scenario == "fee") {
        auto F = family_law(family, dist);
        auto rep = fee_mechanism(std::vector<Distribution>(f.n, F), f.n_draws, seed, 1);
        auto file = open_out(out);
        file << "bidder,fee,utility\n";
        for (std::size_t i = 0; i < f.n; ++i)
            file << i << ',' << num(rep.fees[i]) << ',' << num(rep.utilities[i]) << '\n';
        std::cout << dump_json(json{{"revenue", rep.revenue},
                                    {"welfare", rep.welfare},
                                    {"losing_negative_share", rep.losing_negative_share}})
                  << '\n';
        return 0;
    }
    DynamicTranscript tr;
    if (f.scenario == "mean-based") {
        auto F = dist.empty() ? Distribution::discrete({{0.25, 0.5}, {0.5, 0.25}, {1.0, 0.25}})
                              : family_law(family, dist);
        tr = exploit_mean_based(F, f.T, bidder_mode_from_string(f.bidder), seed);
    } else if (f.scenario == "two-phase") {
        auto F = family_law(family, dist);
        BuyerModel buyer;
        if (f.buyer == "liar")
            buyer.mode = BuyerMode::ThresholdLiar;
        else
            require(f.buyer == "truthful", ErrorKind::InvalidConfig, "--buyer: expected truthful or liar");
        buyer.tau = f.tau;
        double alpha = f.alpha.value_or(std::pow(static_cast<double>(f.T), -1.0 / 3.0));
        tr = two_phase_posted_price(F, f.gamma, f.T, alpha, buyer, seed);
    } else {
        fail(ErrorKind::InvalidConfig, "--scenario: expected mean-based, fee or two-phase");
    }
    auto file = open_out(out);
    write_csv(tr, file);
    std::cout << dump_json(tr.summary()) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Auction mechanism and learning experiments"};
    app.set_version_flag("--version", std::string(version()));
    app.require_subcommand(1);

    std::map<std::string, Common> common;
    std::map<std::string, CLI::App*> subs;
    const std::vector<std::pair<std::string, std::string>> groups{
        {"dist", "distribution summaries and profit curves"},
        {"simulate", "Monte Carlo mechanism runs"},
        {"equilibrium", "first-price equilibria and revenue comparisons"},
        {"learn", "reserve learning from samples"},
        {"online", "bandit pricing"},
        {"bid", "bidder-side learning"},
        {"shade", "strategic bid shading"},
        {"exploit", "dynamic seller-buyer interactions"},
        {"report", "run any scenario, or emit plot data from a report"},
    };
    for (const auto& [name, help] : groups) {
        subs[name] = app.add_subcommand(name, help);
        add_common(subs[name], common[name]);
    }

    std::string family = "uniform", dist;
    for (const char* g : {"equilibrium", "shade", "exploit"}) {
        subs[g]->add_option("--family", family, "value law by family name, default parameters");
        subs[g]->add_option("--dist", dist, "value law as JSON");
    }

    std::string auction;
    std::size_t n = 2;
    subs["equilibrium"]->add_option("--auction", auction, "first-price or second-price");
    subs["equilibrium"]->add_option("--n", n, "bidders")->check(CLI::PositiveNumber);

    std::string algo;
    std::size_t T = 100000;
    for (const char* g : {"online", "bid"}) {
        subs[g]->add_option("--algo", algo, "algorithm; --config then holds its parameters");
        subs[g]->add_option("--T", T, "horizon")->check(CLI::PositiveNumber);
    }

    std::string scheme;
    std::optional<double> r;
    subs["shade"]->add_option("--scheme", scheme, "threshold, linear or myerson-eq");
    subs["shade"]->add_option("--r", r, "threshold value");
    subs["shade"]->add_option("--n", n, "bidders (myerson-eq)")->check(CLI::PositiveNumber);

    ExploitFlags ex;
    auto* e = subs["exploit"];
    e->add_option("--scenario", ex.scenario, "mean-based, fee or two-phase");
    e->add_option("--T", ex.T, "horizon")->check(CLI::PositiveNumber);
    e->add_option("--gamma", ex.gamma, "buyer discount factor");
    e->add_option("--bidder", ex.bidder, "oracle, exp3 or ex-post-ir (mean-based)");
    e->add_option("--alpha", ex.alpha, "learning-phase share (two-phase)");
    e->add_option("--buyer", ex.buyer, "truthful or liar (two-phase)");
    e->add_option("--tau", ex.tau, "liar threshold (two-phase)");
    e->add_option("--n", ex.n, "bidders (fee)")->check(CLI::PositiveNumber);
    e->add_option("--n-draws", ex.n_draws, "Monte Carlo draws (fee)")->check(CLI::PositiveNumber);

    std::string from, plot;
    subs["report"]->add_option("--from", from, "existing report JSON");
    subs["report"]->add_option("--plot", plot, "bk-curve, profit-curve or sample-complexity");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        int code = app.exit(err);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        for (const auto& [name, sub] : subs) {
            if (!sub->parsed())
                continue;
            const Common& c = common[name];
            const std::uint64_t seed = c.seed.value_or(0);
            if (name == "equilibrium" && !auction.empty())
                return equilibrium_direct(auction, family_law(family, dist), n, c.out);
            if ((name == "online" || name == "bid") && !algo.empty())
                return name == "online" ? online_direct(algo, T, seed, c.config, c.out)
                                        : bid_direct(algo, T, seed, c.config, c.out);
            if (name == "shade" && !scheme.empty())
                return shade_direct(family_law(family, dist), scheme, r, n, c.out);
            if (name == "exploit" && !ex.scenario.empty())
                return exploit_direct(ex, family, dist, seed, c.out);
            if (name == "report" && !from.empty()) {
                require(!plot.empty(), ErrorKind::InvalidConfig, "report: --from needs --plot");
                require(!c.out.empty(), ErrorKind::InvalidConfig, "report: --plot needs --out");
                write_plot_data(RunReport::from_json(read_json(from)), plot, c.out);
                return 0;
            }
            return run_config(name, c);
        }
    } catch (const Error& err) {
        std::cerr << "error: " << err.what() << '\n';
        return err.kind() == ErrorKind::InvalidConfig ? kExitConfig : kExitNumeric;
    } catch (const json::exception& err) {
        std::cerr << "error: InvalidConfig: " << err.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitNumeric;
    }
    return 0;
}
