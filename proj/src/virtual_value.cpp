#include <algorithm>
#include <cmath>

#include "auctionlab/dist.hpp"
#include "auctionlab/error.hpp"
#include "auctionlab/numeric.hpp"

namespace auctionlab {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::ZeroDensity: return "ZeroDensity";
        case ErrorKind::NoDensity: return "NoDensity";
        case ErrorKind::OutOfSupport: return "OutOfSupport";
        case ErrorKind::Unbounded: return "Unbounded";
        case ErrorKind::GridTooCoarse: return "GridTooCoarse";
        case ErrorKind::InconsistentArity: return "InconsistentArity";
        case ErrorKind::DegenerateCompetition: return "DegenerateCompetition";
        case ErrorKind::NotRegular: return "NotRegular";
        case ErrorKind::Empty: return "Empty";
        case ErrorKind::AllRemoved: return "AllRemoved";
        case ErrorKind::SearchSpaceTooLarge: return "SearchSpaceTooLarge";
        case ErrorKind::EmptyCell: return "EmptyCell";
        case ErrorKind::RewardOutOfRange: return "RewardOutOfRange";
        case ErrorKind::NonpositiveBudget: return "NonpositiveBudget";
        case ErrorKind::NonMonotone: return "NonMonotone";
        case ErrorKind::NotIncreasing: return "NotIncreasing";
        case ErrorKind::NoRoot: return "NoRoot";
        case ErrorKind::NoBracket: return "NoBracket";
        case ErrorKind::RequiresDiscrete: return "RequiresDiscrete";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
        case ErrorKind::MissingSeries: return "MissingSeries";
    }
    return "Unknown";
}

double virtual_value(const Distribution& d, double x) {
    require(d.has_density(), ErrorKind::NoDensity, "virtual value of an atomic law is only defined after ironing");
    require(d.support().contains(x), ErrorKind::OutOfSupport, "virtual value requested outside the support");
    double ih = d.inverse_hazard(x);
    // Endpoint limits are finite even where the density itself vanishes
    // (e.g. the upper end of a bounded gpd), so only a genuine blow-up fails.
    require(std::isfinite(ih), ErrorKind::ZeroDensity, "density vanishes at x = " + std::to_string(x));
    return x - ih;
}

double monopoly_revenue(const Distribution& d, double r) {
    if (r <= 0.0)
        return 0.0;
    return r * (1.0 - d.cdf_left(r));
}

double monopoly_price(const Distribution& d, std::size_t grid_size) {
    require(grid_size >= 2, ErrorKind::GridTooCoarse, "monopoly price grid needs at least 2 points");
    if (d.is_discrete()) {
        auto atoms = d.atoms();
        std::vector<double> rev(atoms.size());
        double below = 0.0;
        for (std::size_t j = 0; j < atoms.size(); ++j) {
            rev[j] = atoms[j].value * (1.0 - below);
            below += atoms[j].prob;
        }
        return atoms[numeric::argmax_first(rev)].value;
    }
    const Support s = d.support();
    const double q_max = s.bounded() ? 1.0 : kTailQuantile;
    std::vector<double> prices(grid_size + 1), rev(grid_size + 1);
    for (std::size_t k = 0; k <= grid_size; ++k) {
        double q = q_max * static_cast<double>(k) / static_cast<double>(grid_size);
        prices[k] = d.quantile(q);
        rev[k] = monopoly_revenue(d, prices[k]);
    }
    std::size_t best = numeric::argmax_first(rev);
    require(s.bounded() || best < grid_size, ErrorKind::Unbounded,
            "revenue keeps increasing up to the tail cap; expectation is not finite");
    double lo = prices[best == 0 ? 0 : best - 1];
    double hi = prices[std::min(best + 1, grid_size)];
    if (hi > lo) {
        auto pi = [&](double r) { return monopoly_revenue(d, r); };
        double r = numeric::golden_section_max(pi, lo, hi, 1e-12 * std::max(1.0, hi));
        if (pi(r) > rev[best] + 1e-15 * std::max(1.0, rev[best]))
            return r;
    }
    return prices[best];
}

double VirtualValueTable::ironed_at(double x) const {
    if (stepwise) {
        auto it = std::upper_bound(grid.begin(), grid.end(), x);
        if (it == grid.begin())
            return psi_ironed.front();
        return psi_ironed[static_cast<std::size_t>(it - grid.begin()) - 1];
    }
    return numeric::interp_linear(grid, psi_ironed, x);
}

namespace {

VirtualValueTable iron_discrete(const Distribution& d) {
    auto atoms = d.atoms();
    const std::size_t m = atoms.size();
    // Quantile-space breakpoints (c_{j-1}, v_j (1 - c_{j-1})) closed by (1, 0).
    std::vector<double> q(m + 1), r(m + 1);
    double c = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        q[j] = c;
        r[j] = atoms[j].value * (1.0 - c);
        c += atoms[j].prob;
    }
    q[m] = 1.0;
    r[m] = 0.0;

    VirtualValueTable t;
    t.stepwise = true;
    t.quantiles.assign(q.begin(), q.end() - 1);
    for (std::size_t j = 0; j < m; ++j) {
        t.grid.push_back(atoms[j].value);
        t.psi.push_back(-(r[j + 1] - r[j]) / (q[j + 1] - q[j]));
    }
    auto hull = numeric::upper_hull(q, r);
    t.psi_ironed.resize(m);
    for (std::size_t h = 0; h + 1 < hull.size(); ++h) {
        std::size_t a = hull[h], b = hull[h + 1];
        double slope = (r[b] - r[a]) / (q[b] - q[a]);
        for (std::size_t j = a; j < b; ++j)
            t.psi_ironed[j] = -slope;
    }
    t.regular = true;
    for (std::size_t j = 1; j < m; ++j)
        if (t.psi[j] < t.psi[j - 1] - 1e-9 * std::max(1.0, std::abs(t.psi[j - 1])))
            t.regular = false;
    auto report = regularity_report(d);
    t.mhr = report.mhr;
    return t;
}

}  // namespace

VirtualValueTable iron(const Distribution& d, std::size_t grid_size) {
    require(grid_size >= 16, ErrorKind::GridTooCoarse, "ironing grid needs at least 16 points");
    if (d.is_discrete())
        return iron_discrete(d);

    const std::size_t n = grid_size;
    const double q_max = d.support().bounded() ? 1.0 : kTailQuantile;
    VirtualValueTable t;
    t.quantiles.resize(n);
    t.grid.resize(n);
    t.psi.resize(n);
    std::vector<double> rev(n);
    for (std::size_t k = 0; k < n; ++k) {
        double q = q_max * static_cast<double>(k) / static_cast<double>(n - 1);
        t.quantiles[k] = q;
        t.grid[k] = d.quantile(q);
        rev[k] = t.grid[k] * (1.0 - q);
        double ih = d.has_density() ? d.inverse_hazard(t.grid[k]) : kInf;
        t.psi[k] = std::isfinite(ih) ? t.grid[k] - ih : -kInf;
    }

    auto hull = numeric::upper_hull(t.quantiles, rev);
    std::vector<double> seg_psi(hull.size() - 1);
    for (std::size_t h = 0; h + 1 < hull.size(); ++h) {
        std::size_t a = hull[h], b = hull[h + 1];
        seg_psi[h] = -(rev[b] - rev[a]) / (t.quantiles[b] - t.quantiles[a]);
    }
    t.psi_ironed.resize(n);
    for (std::size_t h = 0; h + 1 < hull.size(); ++h)
        for (std::size_t k = hull[h] + 1; k < hull[h + 1]; ++k)
            t.psi_ironed[k] = seg_psi[h];
    // At hull vertices the pointwise value is kept, clamped between the
    // neighbouring chord slopes so the result stays monotone.
    for (std::size_t h = 0; h < hull.size(); ++h) {
        double lo = h > 0 ? seg_psi[h - 1] : -kInf;
        double hi = h + 1 < hull.size() ? seg_psi[h] : kInf;
        double v = t.psi[hull[h]];
        if (!std::isfinite(v))
            v = h + 1 < hull.size() ? seg_psi[h] : seg_psi[h - 1];
        t.psi_ironed[hull[h]] = std::clamp(v, lo, hi);
    }
    for (auto& v : t.psi)
        if (!std::isfinite(v))
            v = t.psi_ironed[static_cast<std::size_t>(&v - t.psi.data())];
    auto report = regularity_report(d, grid_size);
    t.regular = report.regular;
    t.mhr = report.mhr;
    return t;
}

RegularityReport regularity_report(const Distribution& d, std::size_t grid_size) {
    require(grid_size >= 16, ErrorKind::GridTooCoarse, "regularity grid needs at least 16 points");
    auto non_decreasing = [](const std::vector<double>& v) {
        for (std::size_t i = 1; i < v.size(); ++i)
            if (v[i] < v[i - 1] - 1e-9 * std::max(1.0, std::abs(v[i - 1])))
                return false;
        return true;
    };
    RegularityReport rep;
    if (d.is_discrete()) {
        auto atoms = d.atoms();
        std::vector<double> psi, hazard;
        double c = 0.0;
        for (std::size_t j = 0; j < atoms.size(); ++j) {
            double next = j + 1 < atoms.size() ? atoms[j + 1].value : atoms[j].value;
            double surv_after = 1.0 - (c + atoms[j].prob);
            psi.push_back(atoms[j].value - (next - atoms[j].value) * surv_after / atoms[j].prob);
            hazard.push_back(atoms[j].prob / (1.0 - c));
            c += atoms[j].prob;
        }
        rep.regular = non_decreasing(psi);
        rep.mhr = non_decreasing(hazard);
        return rep;
    }
    require(d.has_density(), ErrorKind::NoDensity, "regularity needs a density");
    const double q_max = d.support().bounded() ? 1.0 : kTailQuantile;
    std::vector<double> psi, neg_ih;
    psi.reserve(grid_size);
    neg_ih.reserve(grid_size);
    for (std::size_t k = 0; k < grid_size; ++k) {
        double q = q_max * static_cast<double>(k + 1) / static_cast<double>(grid_size + 1);
        double x = d.quantile(q);
        double ih = d.inverse_hazard(x);
        if (!std::isfinite(ih))
            continue;
        psi.push_back(x - ih);
        neg_ih.push_back(-ih);
    }
    rep.regular = non_decreasing(psi);
    rep.mhr = non_decreasing(neg_ih);
    return rep;
}

}  // namespace auctionlab
