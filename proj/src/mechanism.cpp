#include "auctionlab/mechanism.hpp"

#include <algorithm>
#include <cmath>

#include "auctionlab/error.hpp"
#include "auctionlab/numeric.hpp"
#include "auctionlab/parallel.hpp"

namespace auctionlab {

std::string_view to_string(MechanismKind kind) {
    switch (kind) {
        case MechanismKind::Vickrey: return "vickrey";
        case MechanismKind::SpAnonymous: return "sp-anonymous";
        case MechanismKind::SpLazy: return "sp-lazy";
        case MechanismKind::SpEager: return "sp-eager";
        case MechanismKind::LLevel: return "l-level";
        case MechanismKind::Myerson: return "myerson";
        case MechanismKind::BoostedSp: return "boosted-sp";
        case MechanismKind::FirstPrice: return "first-price";
    }
    return "?";
}

double AuctionOutcome::revenue() const {
    double s = 0.0;
    for (double p : payments)
        s += p;
    return s;
}

namespace {

void check_reserve(double r) {
    require(std::isfinite(r) && r >= 0.0, ErrorKind::InvalidArgument, "reserves must be finite and >= 0");
}

std::size_t argmax_lowest(std::span<const double> b) {
    std::size_t w = 0;
    for (std::size_t i = 1; i < b.size(); ++i)
        if (b[i] > b[w])
            w = i;
    return w;
}

}  // namespace

Mechanism Mechanism::vickrey() {
    Mechanism m;
    m.kind_ = MechanismKind::Vickrey;
    return m;
}

Mechanism Mechanism::sp_anonymous(double reserve) {
    check_reserve(reserve);
    Mechanism m;
    m.kind_ = MechanismKind::SpAnonymous;
    m.anonymous_reserve_ = reserve;
    return m;
}

Mechanism Mechanism::sp_lazy(std::vector<double> reserves) {
    require(!reserves.empty(), ErrorKind::InvalidArgument, "sp-lazy needs one reserve per bidder");
    for (double r : reserves)
        check_reserve(r);
    Mechanism m;
    m.kind_ = MechanismKind::SpLazy;
    m.reserves_ = std::move(reserves);
    return m;
}

Mechanism Mechanism::sp_eager(std::vector<double> reserves) {
    Mechanism m = sp_lazy(std::move(reserves));
    m.kind_ = MechanismKind::SpEager;
    return m;
}

Mechanism Mechanism::l_level(std::vector<std::vector<double>> floors) {
    require(!floors.empty(), ErrorKind::InvalidArgument, "l-level needs floors per bidder");
    const std::size_t L = floors.front().size();
    require(L >= 1, ErrorKind::InvalidArgument, "l-level needs at least one level");
    for (const auto& f : floors) {
        require(f.size() == L, ErrorKind::InconsistentArity, "every bidder needs the same number of levels");
        for (std::size_t l = 0; l < f.size(); ++l) {
            check_reserve(f[l]);
            require(l == 0 || f[l] >= f[l - 1], ErrorKind::NonMonotone, "floors must be non-decreasing in level");
        }
    }
    Mechanism m;
    m.kind_ = MechanismKind::LLevel;
    m.floors_ = std::move(floors);
    return m;
}

Mechanism Mechanism::myerson(std::vector<Distribution> priors, std::size_t iron_grid) {
    require(!priors.empty(), ErrorKind::InvalidArgument, "myerson needs one prior per bidder");
    Mechanism m;
    m.kind_ = MechanismKind::Myerson;
    m.iron_grid_ = iron_grid;
    for (auto& d : priors) {
        Prior p{d, iron(d, iron_grid)};
        p.exact = d.has_density() && p.table.regular;
        p.lo = d.support().lo;
        p.cap = d.search_cap();
        m.priors_.push_back(std::move(p));
    }
    return m;
}

Mechanism Mechanism::boosted(std::vector<double> boosts, std::vector<double> reserves) {
    require(!boosts.empty(), ErrorKind::InvalidArgument, "boosted-sp needs one boost per bidder");
    require(boosts.size() == reserves.size(), ErrorKind::InconsistentArity, "boosts and reserves differ in length");
    for (double b : boosts)
        require(b > 0.0 && std::isfinite(b), ErrorKind::InvalidArgument, "boosts must be > 0");
    for (double r : reserves)
        check_reserve(r);
    Mechanism m;
    m.kind_ = MechanismKind::BoostedSp;
    m.boosts_ = std::move(boosts);
    m.reserves_ = std::move(reserves);
    return m;
}

Mechanism Mechanism::first_price(double reserve) {
    check_reserve(reserve);
    Mechanism m;
    m.kind_ = MechanismKind::FirstPrice;
    m.anonymous_reserve_ = reserve;
    return m;
}

std::size_t Mechanism::arity() const {
    switch (kind_) {
        case MechanismKind::SpLazy:
        case MechanismKind::SpEager:
        case MechanismKind::BoostedSp: return reserves_.size();
        case MechanismKind::LLevel: return floors_.size();
        case MechanismKind::Myerson: return priors_.size();
        default: return 0;
    }
}

double Mechanism::virtual_bid(std::size_t i, double bid) const {
    if (kind_ == MechanismKind::BoostedSp)
        return boosts_[i] * bid - reserves_[i];
    require(kind_ == MechanismKind::Myerson, ErrorKind::InvalidArgument, "virtual bids exist only for myerson/boosted");
    const Prior& p = priors_[i];
    double x = std::clamp(bid, p.lo, p.cap);
    if (p.exact) {
        double ih = p.dist.inverse_hazard(x);
        return std::isfinite(ih) ? x - ih : -kInf;
    }
    return p.table.ironed_at(x);
}

double Mechanism::invert_virtual(std::size_t i, double target, double bid) const {
    if (kind_ == MechanismKind::BoostedSp)
        return std::min(bid, (target + reserves_[i]) / boosts_[i]);
    const Prior& p = priors_[i];
    double hi = std::clamp(bid, p.lo, p.cap);
    double price = numeric::first_reaching([&](double b) { return virtual_bid(i, b); }, target, p.lo, hi, 1e-10);
    if (p.table.stepwise) {
        // discrete priors: the cheapest winning bid is an atom
        auto it = std::lower_bound(p.table.grid.begin(), p.table.grid.end(), price - 1e-9);
        if (it != p.table.grid.end())
            price = *it;
    }
    return std::min(price, bid);
}

AuctionOutcome Mechanism::run_virtual(std::span<const double> bids) const {
    const std::size_t n = bids.size();
    AuctionOutcome out{std::nullopt, std::vector<double>(n, 0.0)};
    std::vector<double> phi(n);
    for (std::size_t i = 0; i < n; ++i)
        phi[i] = virtual_bid(i, bids[i]);
    std::size_t w = argmax_lowest(phi);
    if (!(phi[w] >= 0.0))
        return out;
    double rival = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        if (j != w)
            rival = std::max(rival, phi[j]);
    out.winner = w;
    out.payments[w] = invert_virtual(w, rival, bids[w]);
    return out;
}

AuctionOutcome Mechanism::run(std::span<const double> bids) const {
    const std::size_t n = bids.size();
    require(n >= 1, ErrorKind::InvalidArgument, "bid profile is empty");
    for (double b : bids)
        require(std::isfinite(b) && b >= 0.0, ErrorKind::InvalidArgument, "bids must be finite and >= 0");
    require(arity() == 0 || arity() == n, ErrorKind::InconsistentArity,
            "mechanism sized for " + std::to_string(arity()) + " bidders, got " + std::to_string(n));

    AuctionOutcome out{std::nullopt, std::vector<double>(n, 0.0)};
    auto second = [&](std::size_t skip) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != skip)
                s = std::max(s, bids[j]);
        return s;
    };

    switch (kind_) {
        case MechanismKind::Vickrey:
        case MechanismKind::SpAnonymous:
        case MechanismKind::SpLazy: {
            std::size_t w = argmax_lowest(bids);
            double r = kind_ == MechanismKind::SpLazy ? reserves_[w] : anonymous_reserve_;
            if (bids[w] < r)
                return out;
            out.winner = w;
            out.payments[w] = std::max(r, second(w));
            return out;
        }
        case MechanismKind::SpEager: {
            std::optional<std::size_t> w;
            for (std::size_t i = 0; i < n; ++i)
                if (bids[i] >= reserves_[i] && (!w || bids[i] > bids[*w]))
                    w = i;
            if (!w)
                return out;
            double rival = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != *w && bids[j] >= reserves_[j])
                    rival = std::max(rival, bids[j]);
            out.winner = w;
            out.payments[*w] = std::max(reserves_[*w], rival);
            return out;
        }
        case MechanismKind::LLevel: {
            const int L = static_cast<int>(floors_.front().size());
            std::vector<int> level(n, -1);
            for (std::size_t i = 0; i < n; ++i)
                for (int l = 0; l < L; ++l)
                    if (bids[i] >= floors_[i][static_cast<std::size_t>(l)])
                        level[i] = l;
            std::size_t w = 0;
            for (std::size_t i = 1; i < n; ++i)
                if (level[i] > level[w] || (level[i] == level[w] && bids[i] > bids[w]))
                    w = i;
            if (level[w] < 0)
                return out;
            int J = -1;
            double rival_at_J = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == w)
                    continue;
                if (level[j] > J) {
                    J = level[j];
                    rival_at_J = bids[j];
                } else if (level[j] == J) {
                    rival_at_J = std::max(rival_at_J, bids[j]);
                }
            }
            const auto& f = floors_[w];
            // Cheapest winning bid: either clear level J + 1 outright or tie at
            // level J and outbid the best rival there.
            double price = J + 1 < L ? f[static_cast<std::size_t>(J + 1)] : kInf;
            if (J >= 0)
                price = std::min(price, std::max(f[static_cast<std::size_t>(J)], rival_at_J));
            out.winner = w;
            out.payments[w] = std::min(price, bids[w]);
            return out;
        }
        case MechanismKind::Myerson:
        case MechanismKind::BoostedSp: return run_virtual(bids);
        case MechanismKind::FirstPrice: {
            std::size_t w = argmax_lowest(bids);
            if (bids[w] < anonymous_reserve_)
                return out;
            out.winner = w;
            out.payments[w] = bids[w];
            return out;
        }
    }
    return out;
}

namespace {

void check_keys(const json& j, std::initializer_list<std::string_view> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = std::any_of(allowed.begin(), allowed.end(), [&](std::string_view k) { return k == it.key(); });
        require(ok, ErrorKind::InvalidConfig, "mechanism: unknown key '" + it.key() + "'");
    }
}

}  // namespace

Mechanism Mechanism::from_json(const json& j) {
    require(j.is_object() && j.contains("kind") && j.at("kind").is_string(), ErrorKind::InvalidConfig,
            "mechanism: expected an object with a string 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    try {
        if (kind == "vickrey") {
            check_keys(j, {"kind"});
            return vickrey();
        }
        if (kind == "sp-anonymous") {
            check_keys(j, {"kind", "reserve"});
            return sp_anonymous(j.value("reserve", 0.0));
        }
        if (kind == "sp-lazy" || kind == "sp-eager") {
            check_keys(j, {"kind", "reserves"});
            auto r = j.at("reserves").get<std::vector<double>>();
            return kind == "sp-lazy" ? sp_lazy(std::move(r)) : sp_eager(std::move(r));
        }
        if (kind == "l-level") {
            check_keys(j, {"kind", "floors"});
            return l_level(j.at("floors").get<std::vector<std::vector<double>>>());
        }
        if (kind == "myerson") {
            check_keys(j, {"kind", "priors", "iron_grid"});
            std::vector<Distribution> priors;
            for (const auto& p : j.at("priors"))
                priors.push_back(Distribution::from_json(p));
            return myerson(std::move(priors), j.value("iron_grid", kIronGridDefault));
        }
        if (kind == "boosted-sp") {
            check_keys(j, {"kind", "boosts", "reserves"});
            return boosted(j.at("boosts").get<std::vector<double>>(), j.at("reserves").get<std::vector<double>>());
        }
        if (kind == "first-price") {
            check_keys(j, {"kind", "reserve"});
            return first_price(j.value("reserve", 0.0));
        }
    } catch (const json::exception& e) {
        fail(ErrorKind::InvalidConfig, "mechanism (" + kind + "): " + e.what());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::InvalidConfig)
            throw;
        fail(ErrorKind::InvalidConfig, "mechanism (" + kind + "): " + e.what());
    }
    fail(ErrorKind::InvalidConfig, "mechanism.kind: unknown kind '" + kind + "'");
}

json Mechanism::to_json() const {
    json j{{"kind", std::string(to_string(kind_))}};
    switch (kind_) {
        case MechanismKind::SpAnonymous:
        case MechanismKind::FirstPrice: j["reserve"] = anonymous_reserve_; break;
        case MechanismKind::SpLazy:
        case MechanismKind::SpEager: j["reserves"] = reserves_; break;
        case MechanismKind::LLevel: j["floors"] = floors_; break;
        case MechanismKind::BoostedSp:
            j["boosts"] = boosts_;
            j["reserves"] = reserves_;
            break;
        case MechanismKind::Myerson: {
            json priors = json::array();
            for (const auto& p : priors_)
                priors.push_back(p.dist.to_json());
            j["priors"] = priors;
            j["iron_grid"] = iron_grid_;
            break;
        }
        case MechanismKind::Vickrey: break;
    }
    return j;
}

Metrics expected_metrics(const Mechanism& m, const std::vector<Distribution>& dists,
                         const std::vector<Strategy>& strategies, std::size_t n_draws, std::uint64_t seed,
                         unsigned workers) {
    const std::size_t n = dists.size();
    require(n >= 1, ErrorKind::InvalidArgument, "expected_metrics needs at least one bidder");
    require(n_draws >= 1, ErrorKind::InvalidArgument, "expected_metrics needs n_draws >= 1");
    require(strategies.empty() || strategies.size() == n, ErrorKind::InconsistentArity,
            "one strategy per bidder expected");
    require(m.arity() == 0 || m.arity() == n, ErrorKind::InconsistentArity, "mechanism arity differs from bidders");

    // layout: revenue, welfare, sold, utility_0..n-1
    auto moments = monte_carlo(
        n_draws, seed, kMechTag, 3 + n,
        [&](Rng& rng, std::span<double> out) {
            std::vector<double> values(n), bids(n);
            for (std::size_t i = 0; i < n; ++i) {
                values[i] = dists[i].sample(rng);
                bids[i] = strategies.empty() ? values[i] : strategies[i](values[i]);
            }
            auto o = m.run(bids);
            double rev = o.revenue();
            out[0] = rev;
            out[2] = o.allocated() ? 1.0 : 0.0;
            double welfare = rev;
            for (std::size_t i = 0; i < n; ++i) {
                double u = (o.winner == i ? values[i] : 0.0) - o.payments[i];
                out[3 + i] = u;
                welfare += u;
            }
            out[1] = welfare;
        },
        workers);

    Metrics r;
    r.draws = moments.count();
    r.revenue = moments.mean(0);
    r.revenue_se = moments.std_error(0);
    r.welfare = moments.mean(1);
    r.welfare_se = moments.std_error(1);
    r.sale_rate = moments.mean(2);
    for (std::size_t i = 0; i < n; ++i) {
        r.utilities.push_back(moments.mean(3 + i));
        r.utility_se.push_back(moments.std_error(3 + i));
    }
    return r;
}

}  // namespace auctionlab
