#include "auctionlab/online.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "auctionlab/error.hpp"
#include "auctionlab/numeric.hpp"

namespace auctionlab {

namespace {

void check_reward(double reward) {
    require(reward >= 0.0 && reward <= 1.0, ErrorKind::RewardOutOfRange,
            "reward " + std::to_string(reward) + " outside [0, 1]");
}

}  // namespace

Ucb::Ucb(std::size_t arms, std::size_t horizon) : horizon_(horizon), pulls_(arms, 0), sums_(arms, 0.0) {
    require(arms >= 1, ErrorKind::InvalidArgument, "need at least one arm");
    require(horizon >= 1, ErrorKind::InvalidArgument, "horizon must be >= 1");
}

double Ucb::index(std::size_t arm) const {
    if (pulls_[arm] == 0)
        return kInf;
    double n = static_cast<double>(pulls_[arm]);
    return sums_[arm] / n + std::sqrt(std::log(static_cast<double>(horizon_)) / n);
}

std::size_t Ucb::step() const {
    std::size_t best = 0;
    double best_index = index(0);
    for (std::size_t k = 1; k < pulls_.size(); ++k) {
        double v = index(k);
        if (v > best_index) {
            best = k;
            best_index = v;
        }
    }
    return best;
}

void Ucb::update(std::size_t arm, double reward) {
    require(arm < pulls_.size(), ErrorKind::InvalidArgument, "arm out of range");
    check_reward(reward);
    ++pulls_[arm];
    sums_[arm] += reward;
    ++t_;
}

Exp3::Exp3(std::size_t arms, std::size_t horizon)
    : Exp3(std::vector<double>(arms, 0.0), arms == 1 ? 0.0
                           : std::sqrt(std::log(static_cast<double>(arms)) /
                                       (static_cast<double>(arms) * static_cast<double>(std::max<std::size_t>(1, horizon))))) {
    require(horizon >= 1, ErrorKind::InvalidArgument, "horizon must be >= 1");
}

Exp3 Exp3::with_eta(std::size_t arms, double eta) { return Exp3(std::vector<double>(arms, 0.0), eta); }

Exp3::Exp3(std::vector<double> cumulative, double eta) : eta_(eta), cumulative_(std::move(cumulative)) {
    require(!cumulative_.empty(), ErrorKind::InvalidArgument, "need at least one arm");
    require(eta >= 0.0 && std::isfinite(eta), ErrorKind::InvalidArgument, "eta must be finite and >= 0");
}

std::vector<double> Exp3::probabilities() const {
    double top = *std::max_element(cumulative_.begin(), cumulative_.end());
    std::vector<double> p(cumulative_.size());
    double z = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        p[k] = std::exp(eta_ * (cumulative_[k] - top));
        z += p[k];
    }
    for (auto& x : p)
        x /= z;
    return p;
}

std::size_t Exp3::step(Rng& rng) const {
    auto p = probabilities();
    double u = rng.uniform(), acc = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        acc += p[k];
        if (u < acc)
            return k;
    }
    return p.size() - 1;
}

void Exp3::update(std::size_t arm, double reward) {
    require(arm < cumulative_.size(), ErrorKind::InvalidArgument, "arm out of range");
    check_reward(reward);
    double p = probabilities()[arm];
    for (std::size_t k = 0; k < cumulative_.size(); ++k)
        cumulative_[k] += k == arm ? 1.0 - (1.0 - reward) / p : 1.0;
    ++t_;
}

BanditEpisode run_ucb_bernoulli(const std::vector<double>& means, std::size_t T, std::uint64_t seed) {
    require(!means.empty(), ErrorKind::InvalidArgument, "need at least one arm");
    for (double m : means)
        require(m >= 0.0 && m <= 1.0, ErrorKind::InvalidArgument, "Bernoulli means must lie in [0, 1]");
    const double best = *std::max_element(means.begin(), means.end());
    Ucb ucb(means.size(), T);
    Rng rng(seed, 0, "online.ucb");
    BanditEpisode ep;
    double regret = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        std::size_t k = ucb.step();
        double x = rng.bernoulli(means[k]) ? 1.0 : 0.0;
        ucb.update(k, x);
        regret += best - means[k];
        ep.arms.push_back(k);
        ep.rewards.push_back(x);
        ep.cumulative_regret.push_back(regret);
    }
    ep.regret = regret;
    return ep;
}

BanditEpisode run_exp3(std::size_t arms, std::size_t T, const RewardTable& reward, std::uint64_t seed) {
    Exp3 learner(arms, T);
    Rng rng(seed, 0, "online.exp3");
    std::vector<double> totals(arms, 0.0);
    BanditEpisode ep;
    double got = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        std::size_t k = learner.step(rng);
        for (std::size_t a = 0; a < arms; ++a) {
            double x = reward(t, a);
            check_reward(x);
            totals[a] += x;
        }
        double x = reward(t, k);
        learner.update(k, x);
        got += x;
        ep.arms.push_back(k);
        ep.rewards.push_back(x);
        // hindsight regret against the arm that is best so far
        ep.cumulative_regret.push_back(*std::max_element(totals.begin(), totals.end()) - got);
    }
    ep.regret = T ? ep.cumulative_regret.back() : 0.0;
    return ep;
}

std::vector<double> price_grid(double eps) {
    require(eps > 0.0 && eps < 1.0, ErrorKind::InvalidArgument, "eps must lie in (0, 1)");
    std::vector<double> g;
    for (std::size_t k = 0;; ++k) {
        // rounding keeps k * eps on the decimal grid (7 * 0.1 is not 0.7)
        double p = std::round(static_cast<double>(k) * eps * 1e12) / 1e12;
        if (p >= 1.0 - 1e-12)
            break;
        g.push_back(p);
    }
    return g;
}

namespace {

/// Best fixed price among `candidates` on the stream: (price, revenue), smallest price on ties.
std::pair<double, double> best_fixed(std::span<const double> sorted_values, std::span<const double> candidates) {
    double best = 0.0, best_rev = -1.0;
    for (double p : candidates) {
        auto it = std::lower_bound(sorted_values.begin(), sorted_values.end(), p);
        double rev = p * static_cast<double>(sorted_values.end() - it);
        if (rev > best_rev) {
            best_rev = rev;
            best = p;
        }
    }
    return {best, best_rev};
}

void finish_episode(PricingEpisode& ep, std::span<const double> values, double best_price) {
    ep.best_price = best_price;
    double acc = 0.0;
    ep.cumulative_regret.resize(ep.prices.size());
    for (std::size_t t = 0; t < ep.prices.size(); ++t) {
        acc += (values[t] >= best_price ? best_price : 0.0) - (ep.accepts[t] ? ep.prices[t] : 0.0);
        ep.cumulative_regret[t] = acc;
    }
    ep.regret = acc;
}

}  // namespace

PricingEpisode posted_price_bandit(std::span<const double> values, double eps, bool stochastic, std::uint64_t seed) {
    require(!values.empty(), ErrorKind::Empty, "empty value stream");
    auto grid = price_grid(eps);
    const std::size_t T = values.size();
    PricingEpisode ep;
    ep.prices.reserve(T);
    ep.accepts.reserve(T);
    Ucb ucb(grid.size(), T);
    Exp3 exp3(grid.size(), T);
    Rng rng(seed, 0, "online.posted");
    for (std::size_t t = 0; t < T; ++t) {
        std::size_t k = stochastic ? ucb.step() : exp3.step(rng);
        double p = grid[k];
        bool accept = values[t] >= p;
        double reward = accept ? p : 0.0;
        if (stochastic)
            ucb.update(k, reward);
        else
            exp3.update(k, reward);
        ep.prices.push_back(p);
        ep.accepts.push_back(accept);
        ep.revenue += reward;
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    auto [grid_price, grid_rev] = best_fixed(sorted, grid);
    std::vector<double> cand(sorted.begin(), sorted.end());
    for (auto& c : cand)
        c = std::min(c, 1.0);
    cand.push_back(grid_price);
    auto [price, rev] = best_fixed(sorted, cand);
    (void)rev;
    finish_episode(ep, values, price);
    ep.grid_regret = grid_rev - ep.revenue;
    return ep;
}

namespace {

std::size_t cautious_epochs(std::size_t T) {
    if (T <= 2)
        return 0;
    return static_cast<std::size_t>(std::ceil(std::log2(std::log2(static_cast<double>(T))) - 1e-12));
}

PricingEpisode constant_buyer_episode(double x, std::size_t T, std::vector<double> prices) {
    PricingEpisode ep;
    ep.prices = std::move(prices);
    for (double p : ep.prices) {
        ep.accepts.push_back(x >= p);
        ep.revenue += x >= p ? p : 0.0;
    }
    std::vector<double> v(T, x);
    finish_episode(ep, v, x);
    ep.grid_regret = ep.regret;
    return ep;
}

}  // namespace

PricingEpisode cautious_search(double x, std::size_t T) {
    require(x >= 0.0 && x <= 1.0, ErrorKind::InvalidArgument, "value must lie in [0, 1]");
    require(T >= 1, ErrorKind::InvalidArgument, "horizon must be >= 1");
    const std::size_t L = cautious_epochs(T);
    std::vector<double> prices;
    prices.reserve(T);
    double accepted = 0.0;
    double rejected = kInf;  // lowest price known to be refused
    for (std::size_t l = 0; l <= L && prices.size() < T; ++l) {
        const double step = std::ldexp(1.0, -static_cast<int>(std::size_t{1} << l));
        while (prices.size() < T) {
            double q = accepted + step;
            if (q > 1.0 || q >= rejected)
                break;
            prices.push_back(q);
            if (x >= q) {
                accepted = q;
            } else {
                rejected = q;
                break;
            }
        }
    }
    while (prices.size() < T)
        prices.push_back(accepted);
    return constant_buyer_episode(x, T, std::move(prices));
}

PricingEpisode binary_search_pricing(double x, std::size_t T) {
    require(x >= 0.0 && x <= 1.0, ErrorKind::InvalidArgument, "value must lie in [0, 1]");
    require(T >= 1, ErrorKind::InvalidArgument, "horizon must be >= 1");
    std::vector<double> prices;
    double lo = 0.0, hi = 1.0;
    const double width = 1.0 / static_cast<double>(T);
    while (hi - lo > width && prices.size() < T) {
        double mid = 0.5 * (lo + hi);
        prices.push_back(mid);
        (x >= mid ? lo : hi) = mid;
    }
    while (prices.size() < T)
        prices.push_back(lo);
    return constant_buyer_episode(x, T, std::move(prices));
}

double expected_sp_revenue(const Distribution& d, std::size_t n, double r) {
    require(n >= 1, ErrorKind::InvalidArgument, "need at least one bidder");
    require(r >= 0.0 && std::isfinite(r), ErrorKind::InvalidArgument, "reserve must be finite and >= 0");
    const double nn = static_cast<double>(n);
    // E[max(r, X(2)) 1{X(1) >= r}] = r P(X(1) >= r) + int_r^inf P(X(2) > t) dt
    auto second_survival = [&](double F) {
        return n == 1 ? 0.0 : 1.0 - std::pow(F, nn) - nn * std::pow(F, nn - 1.0) * (1.0 - F);
    };
    double head = r * (1.0 - std::pow(d.cdf_left(r), nn));
    double tail = 0.0;
    if (d.is_discrete()) {
        auto atoms = d.atoms();
        for (std::size_t j = 0; j < atoms.size(); ++j) {
            double a = std::max(r, atoms[j].value);
            double b = j + 1 < atoms.size() ? atoms[j + 1].value : atoms[j].value;
            if (b > a)
                tail += (b - a) * second_survival(d.cdf(atoms[j].value));
        }
        if (!atoms.empty() && r < atoms.front().value)
            tail += (atoms.front().value - r) * second_survival(0.0);
    } else {
        double cap = d.search_cap();
        if (cap > r)
            tail = numeric::integrate([&](double t) { return second_survival(d.cdf(t)); }, r, cap, 1e-10);
    }
    return head + tail;
}

std::size_t first_epoch_length(std::size_t T) {
    return std::max<std::size_t>(16, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(T)))));
}

namespace {

/// F from the law G = n F^(n-1) - (n-1) F^n of the second highest of n draws.
double invert_second_cdf(double g, std::size_t n) {
    if (g <= 0.0)
        return 0.0;
    if (g >= 1.0)
        return 1.0;
    if (n == 2)
        return 1.0 - std::sqrt(1.0 - g);
    const double nn = static_cast<double>(n);
    return numeric::bisect_root(
        [&](double F) { return nn * std::pow(F, nn - 1.0) - (nn - 1.0) * std::pow(F, nn) - g; }, 0.0, 1.0, 1e-14);
}

struct ReserveUpdate {
    double posted;
    double estimate;
};

/// DKW band on the second-highest bid law, carried through to F and to the
/// posted-price curve r (1 - F(r-)). The posted reserve is the smallest r whose
/// optimistic curve reaches the best pessimistic value.
ReserveUpdate next_reserve(const std::vector<double>& sorted, std::size_t n, std::size_t T) {
    const double m = static_cast<double>(sorted.size());
    const double band = std::sqrt(std::log(2.0 * static_cast<double>(T)) / (2.0 * m));
    std::vector<double> values;
    std::vector<double> below;  // fraction of samples strictly below values[i]
    for (std::size_t i = 0; i < sorted.size(); ++i)
        if (i == 0 || sorted[i] != sorted[i - 1]) {
            values.push_back(sorted[i]);
            below.push_back(static_cast<double>(i) / m);
        }
    double target = 0.0, estimate = 0.0, estimate_value = -1.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        double pess = values[i] * (1.0 - invert_second_cdf(std::min(1.0, below[i] + band), n));
        target = std::max(target, pess);
        double point = values[i] * (1.0 - invert_second_cdf(below[i], n));
        if (point > estimate_value) {
            estimate_value = point;
            estimate = values[i];
        }
    }
    // F(r-) is constant on (values[i-1], values[i]]; within a step the curve rises with r
    for (std::size_t i = 0; i <= values.size(); ++i) {
        double lo = i == 0 ? 0.0 : values[i - 1];
        double hi = i < values.size() ? values[i] : kInf;
        double frac = i < values.size() ? below[i] : 1.0;
        double F = invert_second_cdf(std::max(0.0, frac - band), n);
        if (F >= 1.0)
            continue;
        double r = std::max(lo, target / (1.0 - F));
        if (r <= hi)
            return {r, estimate};
    }
    return {estimate, estimate};
}

}  // namespace

ReserveLearningReport symmetric_reserve_learning(const Distribution& d, std::size_t n, std::size_t T,
                                                 std::uint64_t seed) {
    require(n >= 2, ErrorKind::DegenerateCompetition, "reserve learning needs n >= 2");
    require(T >= 1, ErrorKind::InvalidArgument, "horizon must be >= 1");
    ReserveLearningReport rep;
    rep.optimal_reserve = monopoly_price(d);
    rep.optimal_revenue = expected_sp_revenue(d, n, rep.optimal_reserve);
    Rng rng(seed, 0, "online.reserve");
    std::vector<double> observed;
    std::vector<double> v(n);
    double reserve = 0.0, regret = 0.0;
    std::size_t length = first_epoch_length(T), t = 0;
    while (t < T) {
        std::size_t len = std::min(length, T - t);
        const double loss = rep.optimal_revenue - expected_sp_revenue(d, n, reserve);
        ReserveEpoch epoch{t, len, reserve, 0.0};
        for (std::size_t k = 0; k < len; ++k, ++t) {
            double top = 0.0, second = 0.0;
            for (auto& x : v) {
                x = d.sample(rng);
                if (x > top) {
                    second = top;
                    top = x;
                } else if (x > second) {
                    second = x;
                }
            }
            rep.reserves.push_back(reserve);
            rep.realized_revenue.push_back(top >= reserve ? std::max(reserve, second) : 0.0);
            regret += loss;
            rep.cumulative_regret.push_back(regret);
            observed.push_back(second);
        }
        std::sort(observed.begin(), observed.end());
        auto upd = next_reserve(observed, n, T);
        epoch.estimate = upd.estimate;
        rep.epochs.push_back(epoch);
        reserve = upd.posted;
        length *= 2;
    }
    rep.regret = regret;
    return rep;
}

}  // namespace auctionlab
