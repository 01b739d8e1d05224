#include "auctionlab/shading.hpp"

#include <algorithm>
#include <cmath>

#include "auctionlab/error.hpp"
#include "auctionlab/numeric.hpp"
#include "auctionlab/parallel.hpp"

namespace auctionlab {

namespace {

/// Central differences for piecewise-linear grids, kept inside the knot range so the flat
/// extension never enters the stencil.
double slope_of(const Strategy& beta, const Support& support, double x) {
    if (beta.kind() != StrategyKind::Grid || beta.smooth())
        return beta.derivative(x);
    auto knots = beta.knots();
    Support inner{std::max(support.lo, knots.front()), std::min(support.hi, knots.back())};
    return numeric_derivative(beta, x, inner);
}

}  // namespace

double h_of_beta(const Strategy& beta, const Distribution& F, double x) {
    double ih = F.inverse_hazard(x);
    require(std::isfinite(ih), ErrorKind::ZeroDensity, "value density vanishes below a positive survival");
    double d = slope_of(beta, F.support(), x);
    require(d > 0.0, ErrorKind::NonMonotone, "bid function is not strictly increasing here");
    return beta(x) - d * ih;
}

Distribution bid_law(const Distribution& F, const Strategy& beta) {
    Support s = F.support();
    return Distribution::pushforward(F, MonotoneMap{[beta](double x) { return beta(x); },
                                                    [beta, s](double x) { return slope_of(beta, s, x); }});
}

ShadedStrategy::ShadedStrategy(Strategy beta, Distribution F, std::size_t grid)
    : beta_(std::move(beta)), F_(std::move(F)) {
    require(grid >= 2, ErrorKind::GridTooCoarse, "shading table needs at least 2 intervals");
    double lo = F_.support().lo, hi = F_.search_cap();
    auto knots = beta_.knots();
    if (!knots.empty()) {
        lo = std::max(lo, knots.front());
        hi = std::min(hi, knots.back());
    }
    require(hi > lo, ErrorKind::InvalidArgument, "bid function has no increasing part on the support");
    // h is undefined where the density vanishes; step just inside such an end
    const double nudge = 1e-9 * (hi - lo);
    if (!std::isfinite(F_.inverse_hazard(lo)))
        lo += nudge;
    if (!std::isfinite(F_.inverse_hazard(hi)))
        hi -= nudge;

    grid_.resize(grid + 1);
    h_.resize(grid + 1);
    std::vector<double> rev(grid + 1);
    for (std::size_t k = 0; k <= grid; ++k) {
        double x = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(grid);
        grid_[k] = x;
        h_[k] = h_of_beta(beta_, F_, x);
        rev[k] = beta_(x) * (1.0 - F_.cdf(x));
    }
    std::size_t best = numeric::argmax_first(rev, 1e-9);
    reserve_value_ = grid_[best];
    // refine an interior peak; flat stretches keep the smallest grid point
    if (best > 0 && best < grid) {
        auto pi = [&](double x) { return beta_(x) * (1.0 - F_.cdf(x)); };
        double x = numeric::golden_section_max(pi, grid_[best - 1], grid_[best + 1], 1e-12 * std::max(1.0, hi));
        if (pi(x) > rev[best] * (1.0 + 1e-9))
            reserve_value_ = x;
    }
}

Strategy beta_from_g(const std::function<double(double)>& g, const Distribution& F, double x0, double C,
                     std::size_t grid) {
    require(grid >= 2, ErrorKind::GridTooCoarse, "need at least 2 grid intervals");
    const Support s = F.support();
    require(x0 >= s.lo && x0 < s.hi, ErrorKind::OutOfSupport, "x0 must lie in the support");
    require(C >= 0.0 && std::isfinite(C), ErrorKind::InvalidArgument, "bid at x0 must be finite and >= 0");
    const double u0 = F.cdf(x0), u1 = 1.0 - 1e-3;
    require(u0 < u1, ErrorKind::OutOfSupport, "x0 is too close to the top of the support");

    std::vector<double> xs, bids, slopes;
    xs.reserve(grid + 1);
    const double mass = C * (1.0 - u0);
    double integral = 0.0, prev = x0;
    for (std::size_t k = 0; k <= grid; ++k) {
        double x = k == 0 ? x0 : F.quantile(u0 + (u1 - u0) * static_cast<double>(k) / static_cast<double>(grid));
        if (k > 0) {
            if (x <= prev)
                continue;
            integral += numeric::gauss_legendre([&](double t) { return g(t) * F.pdf(t); }, prev, x);
        }
        double surv = 1.0 - F.cdf(x);
        double b = (mass - integral) / surv;
        double gx = g(x);
        double m = (b - gx) * F.pdf(x) / surv;
        require(m > 0.0, ErrorKind::NotIncreasing, "solution stops increasing; g must stay below the bid");
        xs.push_back(x);
        bids.push_back(b);
        slopes.push_back(m);
        prev = x;
    }
    return Strategy::grid(std::move(xs), std::move(bids), std::move(slopes));
}

ShadedStrategy thresholded_strategy(const Distribution& F, const Strategy& base, double r) {
    return ShadedStrategy(Strategy::thresholded(F, base, r), F);
}

StrategicUtility strategic_utility(const ShadedStrategy& s, const Distribution& G, std::size_t n_draws,
                                   std::uint64_t seed, unsigned workers) {
    require(n_draws >= 2, ErrorKind::InvalidArgument, "need at least 2 draws");
    const double cut = s.reserve_value();
    auto m = monte_carlo(
        n_draws, seed, "strat.utility", 2,
        [&](Rng& rng, std::span<double> out) {
            double x = s.F().sample(rng);
            if (x < cut)
                return;
            double h = h_of_beta(s.beta(), s.F(), x);
            double win = G.cdf(s(x));
            out[0] = (x - h) * win;
            out[1] = h * win;
        },
        workers);
    return {m.mean(0), m.std_error(0), m.mean(1), m.std_error(1)};
}

StrategicMarket simulate_lazy_market(const std::vector<ShadedStrategy>& bidders, std::size_t n_draws,
                                     std::uint64_t seed, unsigned workers) {
    const std::size_t n = bidders.size();
    require(n >= 1, ErrorKind::Empty, "no bidders");
    require(n_draws >= 2, ErrorKind::InvalidArgument, "need at least 2 draws");
    StrategicMarket out;
    for (const auto& b : bidders)
        out.reserves.push_back(monopoly_price(bid_law(b.F(), b.beta())));
    const Mechanism mech = Mechanism::sp_lazy(out.reserves);
    auto m = monte_carlo(
        n_draws, seed, "strat.market", 2 * n + 2,
        [&](Rng& rng, std::span<double> row) {
            std::vector<double> x(n), bids(n);
            for (std::size_t i = 0; i < n; ++i) {
                x[i] = bidders[i].F().sample(rng);
                bids[i] = bidders[i](x[i]);
            }
            auto res = mech.run(bids);
            for (std::size_t i = 0; i < n; ++i) {
                bool won = res.winner && *res.winner == i;
                row[i] = (won ? x[i] : 0.0) - res.payments[i];
                row[n + i] = res.payments[i];
                row[2 * n] += res.payments[i];
            }
            if (res.winner)
                row[2 * n + 1] = x[*res.winner];
        },
        workers);
    for (std::size_t i = 0; i < n; ++i) {
        out.utilities.push_back(m.mean(i));
        out.utility_se.push_back(m.std_error(i));
        out.payments.push_back(m.mean(n + i));
        out.payment_se.push_back(m.std_error(n + i));
    }
    out.revenue = m.mean(2 * n);
    out.revenue_se = m.std_error(2 * n);
    out.welfare = m.mean(2 * n + 1);
    out.welfare_se = m.std_error(2 * n + 1);
    return out;
}

double linear_shading_utility(const Distribution& F, const Distribution& G, double alpha) {
    require(alpha >= 0.0 && std::isfinite(alpha), ErrorKind::InvalidArgument, "alpha must be >= 0");
    // alpha x (1 - F(x)) peaks at the monopoly price whatever alpha is
    const double r = monopoly_price(F);
    return numeric::integrate(
        [&](double x) { return (x - alpha * virtual_value(F, x)) * G.cdf(alpha * x) * F.pdf(x); }, r,
        F.search_cap(), 1e-10);
}

LinearShading optimal_linear_alpha(const Distribution& F, const Distribution& G) {
    require(F.has_density(), ErrorKind::NoDensity, "value law needs a density");
    const double r = monopoly_price(F), cap = F.search_cap();
    LinearShading out;
    auto utility = [&](double a) { return linear_shading_utility(F, G, a); };
    const double a_lo = 1e-6, a_hi = 1.0;
    bool bracketed = false;
    if (G.has_density()) {
        auto foc = [&](double a) {
            return numeric::integrate(
                [&](double x) {
                    double psi = virtual_value(F, x);
                    return (-psi * G.cdf(a * x) + (x - a * psi) * x * G.pdf(a * x)) * F.pdf(x);
                },
                r, cap, 1e-10);
        };
        double f_lo = foc(a_lo), f_hi = foc(a_hi);
        if (f_lo > 0.0 && f_hi < 0.0) {
            out.alpha = numeric::bisect_root(foc, a_lo, a_hi, 1e-10);
            bracketed = true;
        }
    }
    if (!bracketed) {
        out.fallback = true;
        out.alpha = numeric::golden_section_max(utility, 0.0, 1.0, 1e-9);
    }
    out.utility = utility(out.alpha);
    return out;
}

double thresholded_nash_reserve(const Distribution& F, std::size_t n) {
    require(n >= 2, ErrorKind::InvalidArgument, "need at least 2 bidders");
    require(F.has_density(), ErrorKind::NoDensity, "value law needs a density");
    const Support s = F.support();
    const double lo = s.lo, hi = F.search_cap();
    const double k = static_cast<double>(n);
    auto gap = [&](double r) {
        double lhs = (k - 1.0) * numeric::integrate(
                                     [&](double x) {
                                         double c = F.cdf(x);
                                         return x * std::pow(c, k - 2.0) * (1.0 - c) * F.pdf(x);
                                     },
                                     lo, r, 1e-12);
        double c = F.cdf(r);
        return lhs - r * (1.0 - c) * std::pow(c, k - 1.0);
    };
    const double a = lo + 1e-6 * (hi - lo), b = hi - 1e-6 * (hi - lo);
    double ga = gap(a), gb = gap(b);
    require(ga < 0.0 && gb > 0.0, ErrorKind::NoRoot, "threshold equation has no sign change on the support");
    return numeric::bisect_root(gap, a, b, 1e-12);
}

Strategy myerson_shading(const Distribution& F, std::size_t n, std::size_t grid) {
    require(grid >= 2, ErrorKind::GridTooCoarse, "need at least 2 grid intervals");
    const Strategy first = fp_symmetric_equilibrium(F, n, grid);
    const double u_top = F.support().bounded() ? 1.0 : kTailQuantile;
    std::vector<double> u, x, b;
    for (std::size_t k = 0; k <= grid; ++k) {
        double q = u_top * static_cast<double>(k) / static_cast<double>(grid);
        double v = F.quantile(q);
        if (!x.empty() && v <= x.back())
            continue;
        u.push_back(q);
        x.push_back(v);
        b.push_back(first(v));
    }
    require(x.size() >= 2, ErrorKind::GridTooCoarse, "value law has too few distinct quantiles");
    // tail integral of beta_I(Q(v)) dv, the mass above u_top bidding beta_I(top)
    const std::size_t m = x.size();
    std::vector<double> out(m);
    double tail = (1.0 - u.back()) * b.back();
    out[m - 1] = b.back();
    for (std::size_t k = m - 1; k-- > 0;) {
        tail += 0.5 * (b[k] + b[k + 1]) * (u[k + 1] - u[k]);
        out[k] = tail / (1.0 - u[k]);
    }
    return Strategy::grid(std::move(x), std::move(out));
}

}  // namespace auctionlab
