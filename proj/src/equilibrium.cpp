#include "auctionlab/equilibrium.hpp"

#include <algorithm>
#include <cmath>

#include "auctionlab/error.hpp"
#include "auctionlab/numeric.hpp"
#include "auctionlab/parallel.hpp"

namespace auctionlab {

double fp_best_response(double x, const Distribution& G) {
    require(std::isfinite(x) && x >= 0.0, ErrorKind::InvalidArgument, "value must be finite and >= 0");
    if (G.cdf(x) <= 0.0)
        return x;
    auto utility = [&](double b) { return (x - b) * G.cdf(b); };

    std::vector<double> candidates{0.0, x};
    if (G.is_discrete()) {
        for (const auto& a : G.atoms()) {
            if (a.value > x)
                break;
            candidates.push_back(a.value);
        }
    } else {
        require(G.has_density(), ErrorKind::NoDensity, "best response needs a competing-bid law with a density");
        // stationary points of the utility: g(b)(x - b) - G(b) = 0
        auto deriv = [&](double b) { return G.pdf(b) * (x - b) - G.cdf(b); };
        const int n = 512;
        double prev_b = 0.0, prev_d = deriv(0.0);
        for (int k = 1; k <= n; ++k) {
            double b = x * k / n;
            double d = deriv(b);
            candidates.push_back(b);
            if ((prev_d > 0.0 && d <= 0.0) || (prev_d < 0.0 && d >= 0.0))
                candidates.push_back(numeric::bisect_root(deriv, prev_b, b, 1e-14));
            prev_b = b;
            prev_d = d;
        }
    }
    double best = candidates.front(), best_u = utility(best);
    for (double b : candidates) {
        double u = utility(b);
        if (u > best_u || (u == best_u && b < best)) {
            best = b;
            best_u = u;
        }
    }
    return best;
}

Strategy fp_symmetric_equilibrium(const Distribution& d, std::size_t n, std::size_t grid) {
    require(n >= 2, ErrorKind::DegenerateCompetition, "a symmetric equilibrium needs at least two bidders");
    require(grid >= 16, ErrorKind::GridTooCoarse, "equilibrium grid needs at least 16 points");
    if (d.is_discrete()) {
        require(d.atoms().size() == 1, ErrorKind::NoDensity, "symmetric equilibrium needs a continuous law");
        double v = d.atoms().front().value;
        // Bertrand competition at a single value bids the value itself.
        return Strategy::grid({v, v + 1.0}, {v, v});
    }
    require(d.has_density(), ErrorKind::NoDensity, "symmetric equilibrium needs a continuous law");
    const double q_max = d.support().bounded() ? 1.0 : kTailQuantile;
    const double power = static_cast<double>(n - 1);
    std::vector<double> x(grid), q(grid), Fn(grid), bids(grid);
    for (std::size_t k = 0; k < grid; ++k) {
        q[k] = q_max * static_cast<double>(k) / static_cast<double>(grid - 1);
        x[k] = d.quantile(q[k]);
        Fn[k] = std::pow(q[k], power);
    }
    // Per segment, F is taken linear in x and F^(n-1) integrated exactly; this
    // is the trapezoid rule on F itself and stays accurate near the bottom.
    double integral = 0.0;
    bids[0] = x[0];
    for (std::size_t k = 1; k < grid; ++k) {
        double dx = x[k] - x[k - 1];
        if (q[k] > q[k - 1])
            integral += dx * (Fn[k] * q[k] - Fn[k - 1] * q[k - 1]) / ((power + 1.0) * (q[k] - q[k - 1]));
        else
            integral += dx * Fn[k];
        double b = Fn[k] > 0.0 ? x[k] - integral / Fn[k] : x[k];
        bids[k] = std::max(bids[k - 1], std::max(0.0, b));
    }
    return Strategy::grid(std::move(x), std::move(bids));
}

double RevenueComparison::combined_se() const { return std::sqrt(first_se * first_se + second_se * second_se); }

RevenueComparison revenue_equivalence_check(const Distribution& d, std::size_t n, std::size_t n_draws,
                                            std::uint64_t seed, unsigned workers) {
    require(n >= 2, ErrorKind::DegenerateCompetition, "revenue comparison needs at least two bidders");
    Strategy beta = fp_symmetric_equilibrium(d, n);
    auto m = monte_carlo(
        n_draws, seed, "equil.re", 3,
        [&](Rng& rng, std::span<double> out) {
            double top = -1.0, second = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                double v = d.sample(rng);
                if (v > top) {
                    second = top;
                    top = v;
                } else if (v > second) {
                    second = v;
                }
            }
            out[0] = beta(top);
            out[1] = second;
            out[2] = out[0] - out[1];
        },
        workers);
    return {m.mean(0), m.mean(1), m.std_error(0), m.std_error(1), m.std_error(2)};
}

BulowKlempererResult bulow_klemperer_check(const Distribution& d, std::size_t n, std::size_t n_draws,
                                           std::uint64_t seed, unsigned workers) {
    require(n >= 1, ErrorKind::DegenerateCompetition, "need at least one bidder");
    require(regularity_report(d).regular, ErrorKind::NotRegular, "the comparison assumes a regular value law");
    Mechanism myerson = Mechanism::myerson(std::vector<Distribution>(n, d));
    Mechanism vickrey = Mechanism::vickrey();
    const double ratio = static_cast<double>(n - 1) / static_cast<double>(n);
    auto m = monte_carlo(
        n_draws, seed, "equil.bk", 5,
        [&](Rng& rng, std::span<double> out) {
            std::vector<double> v(n + 1);
            for (auto& x : v)
                x = d.sample(rng);
            out[0] = vickrey.run(v).revenue();
            std::span<const double> first_n(v.data(), n);
            out[1] = myerson.run(first_n).revenue();
            out[2] = vickrey.run(first_n).revenue();
            out[3] = out[0] - out[1];
            out[4] = out[2] - ratio * out[1];
        },
        workers);
    BulowKlempererResult r;
    r.vickrey_np1 = m.mean(0);
    r.myerson_n = m.mean(1);
    r.vickrey_n = m.mean(2);
    r.vickrey_np1_se = m.std_error(0);
    r.myerson_n_se = m.std_error(1);
    r.vickrey_n_se = m.std_error(2);
    r.gap_se = m.std_error(3);
    r.ratio_gap_se = m.std_error(4);
    return r;
}

Estimate fp_revenue_via_virtual_value(const Distribution& d, const Strategy& beta, const Distribution& G,
                                      std::size_t n_draws, std::uint64_t seed, unsigned workers) {
    require(d.has_density(), ErrorKind::NoDensity, "virtual-value revenue needs a value law with a density");
    auto table = iron(d);
    const bool exact = table.regular;
    auto m = monte_carlo(
        n_draws, seed, "equil.vv", 1,
        [&](Rng& rng, std::span<double> out) {
            double x = d.sample(rng);
            double psi = exact ? virtual_value(d, x) : table.ironed_at(x);
            out[0] = G.cdf(beta(x)) * psi;
        },
        workers);
    return {m.mean(0), m.std_error(0)};
}

std::vector<double> estimate_values_from_fp_bids(std::span<const double> bids, const Distribution& G) {
    require(G.has_density(), ErrorKind::NoDensity, "value inversion needs a competing-bid density");
    std::vector<double> out;
    out.reserve(bids.size());
    for (double b : bids) {
        double g = G.pdf(b);
        double c = G.cdf(b);
        require(g > 0.0 && c > 0.0, ErrorKind::ZeroDensity,
                "competing-bid law is degenerate at bid " + std::to_string(b));
        out.push_back(b + c / g);
    }
    return out;
}

AuctionOutcome inflated_vickrey(std::span<const double> bids, double eps, double delta, Rng& rng) {
    require(eps >= 0.0 && eps <= 1.0, ErrorKind::InvalidArgument, "eps must lie in [0, 1]");
    require(delta >= 0.0 && std::isfinite(delta), ErrorKind::InvalidArgument, "delta must be >= 0");
    AuctionOutcome base = Mechanism::vickrey().run(bids);
    if (!(rng.uniform() < eps))
        return base;
    std::size_t w = *base.winner;
    double second = 0.0;
    for (std::size_t j = 0; j < bids.size(); ++j)
        if (j != w)
            second = std::max(second, bids[j]);
    double price = (1.0 + delta) * second;
    AuctionOutcome out{std::nullopt, std::vector<double>(bids.size(), 0.0)};
    if (bids[w] >= price) {
        out.winner = w;
        out.payments[w] = price;
    }
    return out;
}

Distribution induced_competing_bid_law(const Distribution& d, const Strategy& beta, std::size_t rivals,
                                       std::size_t n_samples, std::uint64_t seed) {
    require(rivals >= 1, ErrorKind::DegenerateCompetition, "need at least one rival");
    require(n_samples >= 1, ErrorKind::Empty, "need at least one sample");
    // beta is monotone, so the top rival bid is beta of the top rival value,
    // whose quantile is Q(u^(1/rivals)). One jittered draw per stratum.
    Rng rng(seed, 0, "equil.induced");
    const double inv = 1.0 / static_cast<double>(rivals);
    std::vector<double> s(n_samples);
    for (std::size_t k = 0; k < n_samples; ++k) {
        double u = (static_cast<double>(k) + rng.uniform_open()) / static_cast<double>(n_samples);
        s[k] = std::max(0.0, beta(d.quantile(std::pow(u, inv))));
    }
    return Distribution::empirical(s);
}

}  // namespace auctionlab
