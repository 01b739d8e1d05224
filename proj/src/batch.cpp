#include "auctionlab/batch.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <sstream>

#include "auctionlab/error.hpp"
#include "auctionlab/numeric.hpp"
#include "auctionlab/parallel.hpp"

namespace auctionlab {

SampleSet::SampleSet(std::size_t n, std::vector<double> values, std::size_t d, std::vector<double> context)
    : n_(n), d_(d), values_(std::move(values)), context_(std::move(context)) {
    require(n >= 1, ErrorKind::InvalidArgument, "sample set needs at least one bidder");
    require(!values_.empty() && values_.size() % n == 0, ErrorKind::Empty, "sample set needs T >= 1 full rows");
    T_ = values_.size() / n;
    require(d == 0 ? context_.empty() : context_.size() == T_ * d, ErrorKind::InconsistentArity,
            "context rows do not match value rows");
    for (double v : values_)
        require(std::isfinite(v) && v >= 0.0, ErrorKind::InvalidArgument, "sample values must be finite and >= 0");
}

SampleSet SampleSet::from_rows(const std::vector<std::vector<double>>& rows) {
    require(!rows.empty(), ErrorKind::Empty, "no rows");
    std::size_t n = rows.front().size();
    std::vector<double> v;
    v.reserve(rows.size() * n);
    for (const auto& r : rows) {
        require(r.size() == n, ErrorKind::InconsistentArity, "rows differ in length");
        v.insert(v.end(), r.begin(), r.end());
    }
    return SampleSet(n, std::move(v));
}

SampleSet SampleSet::draw(const std::vector<Distribution>& dists, std::size_t T, std::uint64_t seed) {
    require(!dists.empty() && T >= 1, ErrorKind::InvalidArgument, "draw needs bidders and T >= 1");
    Rng rng(seed, 0, "batch.draw");
    std::vector<double> v(T * dists.size());
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t i = 0; i < dists.size(); ++i)
            v[t * dists.size() + i] = dists[i].sample(rng);
    return SampleSet(dists.size(), std::move(v));
}

SampleSet SampleSet::read_csv(std::istream& in) {
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorKind::Empty, "samples csv: missing header");
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            header.push_back(cell);
    }
    std::size_t n = 0, d = 0;
    for (const auto& h : header) {
        if (h.rfind("bidder_", 0) == 0) {
            require(d == 0, ErrorKind::InvalidConfig, "samples csv: bidder columns must precede context columns");
            require(h == "bidder_" + std::to_string(n), ErrorKind::InvalidConfig, "samples csv: bad column " + h);
            ++n;
        } else {
            require(h == "ctx_" + std::to_string(d), ErrorKind::InvalidConfig, "samples csv: bad column " + h);
            ++d;
        }
    }
    std::vector<double> values, context;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty())
            continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t col = 0;
        while (std::getline(ss, cell, ',')) {
            double v = 0.0;
            try {
                v = std::stod(cell);
            } catch (const std::exception&) {
                fail(ErrorKind::InvalidConfig, "samples csv: row " + std::to_string(row) + " is not numeric");
            }
            (col < n ? values : context).push_back(v);
            ++col;
        }
        require(col == n + d, ErrorKind::InvalidConfig, "samples csv: row " + std::to_string(row) + " has wrong width");
    }
    return SampleSet(n, std::move(values), d, std::move(context));
}

std::vector<double> SampleSet::column(std::size_t i) const {
    std::vector<double> c(T_);
    for (std::size_t t = 0; t < T_; ++t)
        c[t] = value(t, i);
    return c;
}

std::vector<double> SampleSet::row_max() const {
    std::vector<double> m(T_);
    for (std::size_t t = 0; t < T_; ++t) {
        auto r = row(t);
        m[t] = *std::max_element(r.begin(), r.end());
    }
    return m;
}

double empirical_revenue(const Mechanism& m, const SampleSet& s) {
    double total = 0.0;
    for (std::size_t t = 0; t < s.size(); ++t)
        total += m.run(s.row(t)).revenue();
    return total / static_cast<double>(s.size());
}

Distribution empirical_cdf(std::span<const double> samples) { return Distribution::empirical(samples); }

double empirical_monopoly_price(std::span<const double> samples) {
    require(!samples.empty(), ErrorKind::Empty, "empirical monopoly price of an empty sample");
    std::vector<double> v(samples.begin(), samples.end());
    std::sort(v.begin(), v.end());
    const std::size_t T = v.size();
    double best = v.front(), best_rev = -1.0;
    for (std::size_t i = 0; i < T; ++i) {
        if (i > 0 && v[i] == v[i - 1])
            continue;
        double rev = v[i] * static_cast<double>(T - i);
        if (rev > best_rev) {
            best_rev = rev;
            best = v[i];
        }
    }
    return best;
}

double guarded_empirical_monopoly_price(std::span<const double> samples, double kappa) {
    require(!samples.empty(), ErrorKind::Empty, "guarded monopoly price of an empty sample");
    require(kappa >= 0.0 && kappa < 1.0, ErrorKind::InvalidArgument, "kappa must lie in [0, 1)");
    const std::size_t T = samples.size();
    auto drop = static_cast<std::size_t>(std::ceil(kappa * static_cast<double>(T) - 1e-9));
    require(drop < T, ErrorKind::AllRemoved, "guard removes every sample");
    if (drop == 0)
        return empirical_monopoly_price(samples);
    std::vector<double> v(samples.begin(), samples.end());
    std::sort(v.begin(), v.end());
    v.resize(T - drop);
    return empirical_monopoly_price(v);
}

namespace {

/// Top and second value of each row.
void top_two(const SampleSet& s, std::vector<double>& top, std::vector<double>& second) {
    top.resize(s.size());
    second.resize(s.size());
    for (std::size_t t = 0; t < s.size(); ++t) {
        double h = 0.0, g = 0.0;
        for (double v : s.row(t)) {
            if (v > h) {
                g = h;
                h = v;
            } else if (v > g) {
                g = v;
            }
        }
        top[t] = h;
        second[t] = g;
    }
}

double eager_revenue(const SampleSet& s, const std::vector<double>& r) {
    const std::size_t n = s.bidders();
    double total = 0.0;
    for (std::size_t t = 0; t < s.size(); ++t) {
        auto row = s.row(t);
        double h = -1.0, g = 0.0;
        std::size_t w = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (row[i] < r[i])
                continue;
            if (row[i] > h) {
                if (w < n)
                    g = std::max(g, h);
                h = row[i];
                w = i;
            } else {
                g = std::max(g, row[i]);
            }
        }
        if (w < n)
            total += std::max(r[w], g);
    }
    return total / static_cast<double>(s.size());
}

double boosted_revenue(const SampleSet& s, const std::vector<double>& boost, const std::vector<double>& r) {
    const std::size_t n = s.bidders();
    double total = 0.0;
    for (std::size_t t = 0; t < s.size(); ++t) {
        auto row = s.row(t);
        double best = -kInf, rival = 0.0;
        std::size_t w = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double phi = boost[i] * row[i] - r[i];
            if (phi > best) {
                rival = std::max(rival, best);
                best = phi;
                w = i;
            } else {
                rival = std::max(rival, phi);
            }
        }
        if (best >= 0.0)
            total += std::min(row[w], (rival + r[w]) / boost[w]);
    }
    return total / static_cast<double>(s.size());
}

bool improves(double candidate, double incumbent) {
    return candidate > incumbent + 1e-12 * std::max(1.0, std::abs(incumbent));
}

void finish(LearnedMechanismReport& rep, const SampleSet* holdout) {
    if (holdout)
        rep.holdout_revenue = empirical_revenue(rep.mechanism, *holdout);
}

std::vector<double> sorted_unique(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

std::vector<double> eager_grid(const SampleSet& s, std::size_t i, double init, double grid_step) {
    auto col = s.column(i);
    std::sort(col.begin(), col.end());
    std::vector<double> g{init, empirical_monopoly_price(col)};
    for (int k = 1; k <= 9; ++k)
        g.push_back(numeric::quantile_of_sorted(col, k / 10.0));
    if (grid_step > 0.0)
        for (double r = 0.0; r <= col.back() + 1e-12; r += grid_step)
            g.push_back(std::round(r / grid_step) * grid_step);
    return sorted_unique(std::move(g));
}

}  // namespace

LearnedMechanismReport erm_anonymous_reserve(const SampleSet& s, const SampleSet* holdout) {
    require(s.bidders() >= 2, ErrorKind::InvalidArgument, "anonymous-reserve ERM needs n >= 2");
    std::vector<double> top, second;
    top_two(s, top, second);
    std::vector<double> candidates{0.0};
    for (std::size_t t = 0; t < s.size(); ++t)
        for (double v : s.row(t))
            candidates.push_back(v);
    candidates = sorted_unique(std::move(candidates));

    std::sort(top.begin(), top.end());
    std::sort(second.begin(), second.end());
    std::vector<double> suffix(second.size() + 1, 0.0);
    for (std::size_t k = second.size(); k-- > 0;)
        suffix[k] = suffix[k + 1] + second[k];
    const double T = static_cast<double>(s.size());

    // revenue(r) = sum of seconds >= r + r * #{top >= r > second}
    std::vector<double> rev(candidates.size());
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        double r = candidates[c];
        auto ih = static_cast<std::size_t>(std::lower_bound(top.begin(), top.end(), r) - top.begin());
        auto is = static_cast<std::size_t>(std::lower_bound(second.begin(), second.end(), r) - second.begin());
        double n_top = static_cast<double>(top.size() - ih);
        double n_sec = static_cast<double>(second.size() - is);
        rev[c] = (suffix[is] + r * (n_top - n_sec)) / T;
    }
    std::size_t best = numeric::argmax_first(rev);
    LearnedMechanismReport rep{Mechanism::sp_anonymous(candidates[best]), rev[best]};
    rep.candidates_evaluated = candidates.size();
    rep.best_candidate_revenue = *std::max_element(rev.begin(), rev.end());
    finish(rep, holdout);
    return rep;
}

std::vector<double> lazy_reserves_from_samples(const SampleSet& s) {
    std::vector<double> r(s.bidders());
    for (std::size_t i = 0; i < s.bidders(); ++i)
        r[i] = empirical_monopoly_price(s.column(i));
    return r;
}

LearnedMechanismReport local_search_eager(const SampleSet& s, const std::vector<double>& init, double grid_step,
                                          const SampleSet* holdout) {
    const std::size_t n = s.bidders();
    require(init.size() == n, ErrorKind::InconsistentArity, "one initial reserve per bidder expected");
    std::vector<std::vector<double>> grids(n);
    for (std::size_t i = 0; i < n; ++i)
        grids[i] = eager_grid(s, i, init[i], grid_step);

    std::vector<double> r = init;
    double current = eager_revenue(s, r);
    double best_seen = current;
    std::size_t evaluated = 1;
    for (;;) {
        // steepest single-coordinate move; earlier bidders and smaller
        // reserves win ties
        double best_rev = current;
        std::size_t best_i = n;
        double best_r = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            auto trial = r;
            for (double g : grids[i]) {
                if (g == r[i])
                    continue;
                trial[i] = g;
                double v = eager_revenue(s, trial);
                ++evaluated;
                best_seen = std::max(best_seen, v);
                if (improves(v, best_rev)) {
                    best_rev = v;
                    best_i = i;
                    best_r = g;
                }
            }
        }
        if (best_i == n)
            break;
        r[best_i] = best_r;
        current = best_rev;
    }
    LearnedMechanismReport rep{Mechanism::sp_eager(r), current};
    rep.candidates_evaluated = evaluated;
    rep.best_candidate_revenue = best_seen;
    finish(rep, holdout);
    return rep;
}

LearnedMechanismReport search_boosted(const SampleSet& s, const std::vector<double>& init_reserves,
                                      const std::vector<double>& boost_grid, const std::vector<double>& reserve_grid,
                                      const SampleSet* holdout) {
    const std::size_t n = s.bidders();
    require(init_reserves.size() == n, ErrorKind::InconsistentArity, "one initial reserve per bidder expected");
    require(!boost_grid.empty() && !reserve_grid.empty(), ErrorKind::Empty, "boost and reserve grids must be non-empty");
    for (double b : boost_grid)
        require(b > 0.0, ErrorKind::InvalidArgument, "boosts must be > 0");

    std::vector<double> boosts(n, 1.0), r = init_reserves;
    double current = boosted_revenue(s, boosts, r);
    const double eager_baseline = eager_revenue(s, init_reserves);
    double best_seen = std::max(current, eager_baseline);
    std::size_t evaluated = 2;
    auto rgrid = sorted_unique(reserve_grid);
    auto bgrid = sorted_unique(boost_grid);
    for (;;) {
        double best_rev = current;
        std::size_t best_i = n;
        double best_b = 0.0, best_r = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            auto tb = boosts;
            auto tr = r;
            for (double b : bgrid)
                for (double g : rgrid) {
                    if (b == boosts[i] && g == r[i])
                        continue;
                    tb[i] = b;
                    tr[i] = g;
                    double v = boosted_revenue(s, tb, tr);
                    ++evaluated;
                    best_seen = std::max(best_seen, v);
                    if (improves(v, best_rev)) {
                        best_rev = v;
                        best_i = i;
                        best_b = b;
                        best_r = g;
                    }
                }
        }
        if (best_i == n)
            break;
        boosts[best_i] = best_b;
        r[best_i] = best_r;
        current = best_rev;
    }
    // With unequal reserves a unit-boost auction ranks by x - r_i and is not
    // the eager auction, so the eager start is kept when it is better.
    LearnedMechanismReport rep = current >= eager_baseline
                                     ? LearnedMechanismReport{Mechanism::boosted(boosts, r), current}
                                     : LearnedMechanismReport{Mechanism::sp_eager(init_reserves), eager_baseline};
    rep.candidates_evaluated = evaluated;
    rep.best_candidate_revenue = best_seen;
    finish(rep, holdout);
    return rep;
}

LearnedMechanismReport search_llevel(const SampleSet& s, std::size_t L, const std::vector<double>& grid,
                                     const SampleSet* holdout) {
    require(L >= 1, ErrorKind::InvalidArgument, "L must be >= 1");
    auto g = sorted_unique(grid);
    require(!g.empty(), ErrorKind::Empty, "level grid must be non-empty");
    const std::size_t n = s.bidders();

    // multisets of size L from the grid, each listed ascending
    std::vector<std::vector<double>> per_bidder;
    std::vector<std::size_t> idx(L, 0);
    for (;;) {
        std::vector<double> f(L);
        for (std::size_t l = 0; l < L; ++l)
            f[l] = g[idx[l]];
        per_bidder.push_back(std::move(f));
        std::size_t pos = L;
        while (pos > 0 && idx[pos - 1] == g.size() - 1)
            --pos;
        if (pos == 0)
            break;
        ++idx[pos - 1];
        for (std::size_t l = pos; l < L; ++l)
            idx[l] = idx[pos - 1];
        require(per_bidder.size() <= kMaxLevelCandidates, ErrorKind::SearchSpaceTooLarge,
                "too many floor vectors per bidder");
    }
    double total = 1.0;
    for (std::size_t i = 0; i < n; ++i)
        total *= static_cast<double>(per_bidder.size());
    require(total <= static_cast<double>(kMaxLevelCandidates), ErrorKind::SearchSpaceTooLarge,
            "exhaustive l-level search would evaluate " + std::to_string(static_cast<long long>(total)) +
                " candidates");

    std::vector<std::size_t> choice(n, 0);
    double best_rev = -1.0;
    std::vector<std::vector<double>> best_floors;
    std::size_t evaluated = 0;
    for (;;) {
        std::vector<std::vector<double>> floors(n);
        for (std::size_t i = 0; i < n; ++i)
            floors[i] = per_bidder[choice[i]];
        double v = empirical_revenue(Mechanism::l_level(floors), s);
        ++evaluated;
        if (improves(v, best_rev) || best_floors.empty()) {
            best_rev = v;
            best_floors = std::move(floors);
        }
        std::size_t i = n;
        while (i > 0 && choice[i - 1] + 1 == per_bidder.size()) {
            choice[i - 1] = 0;
            --i;
        }
        if (i == 0)
            break;
        ++choice[i - 1];
    }
    LearnedMechanismReport rep{Mechanism::l_level(best_floors), best_rev};
    rep.candidates_evaluated = evaluated;
    rep.best_candidate_revenue = best_rev;
    finish(rep, holdout);
    return rep;
}

std::vector<std::size_t> kmeans_1d(std::span<const double> v, std::span<const double> w, std::size_t K) {
    const std::size_t m = v.size();
    require(m >= 1, ErrorKind::Empty, "k-means of an empty set");
    K = std::min(K, m);
    std::vector<double> sw(m + 1, 0.0), swx(m + 1, 0.0), swxx(m + 1, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double wi = w.empty() ? 1.0 : w[i];
        sw[i + 1] = sw[i] + wi;
        swx[i + 1] = swx[i] + wi * v[i];
        swxx[i + 1] = swxx[i] + wi * v[i] * v[i];
    }
    auto cost = [&](std::size_t i, std::size_t j) {  // cell [i, j)
        double W = sw[j] - sw[i];
        double S = swx[j] - swx[i];
        return std::max(0.0, (swxx[j] - swxx[i]) - S * S / W);
    };
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> prev(m + 1, inf), cur(m + 1, inf);
    std::vector<std::vector<std::size_t>> arg(K + 1, std::vector<std::size_t>(m + 1, 0));
    for (std::size_t j = 1; j <= m; ++j)
        prev[j] = cost(0, j);
    for (std::size_t k = 2; k <= K; ++k) {
        std::fill(cur.begin(), cur.end(), inf);
        auto& a = arg[k];
        // divide and conquer over j with monotone optimal split points
        std::function<void(std::size_t, std::size_t, std::size_t, std::size_t)> solve =
            [&](std::size_t jlo, std::size_t jhi, std::size_t olo, std::size_t ohi) {
                if (jlo > jhi)
                    return;
                std::size_t j = (jlo + jhi) / 2;
                double best = inf;
                std::size_t best_i = olo;
                for (std::size_t i = olo; i <= std::min(ohi, j - 1); ++i) {
                    double c = prev[i] + cost(i, j);
                    if (c < best) {
                        best = c;
                        best_i = i;
                    }
                }
                cur[j] = best;
                a[j] = best_i;
                if (j > jlo)
                    solve(jlo, j - 1, olo, best_i);
                solve(j + 1, jhi, best_i, ohi);
            };
        solve(k, m, k - 1, m - 1);
        std::swap(prev, cur);
    }
    std::vector<std::size_t> starts(K);
    std::size_t j = m;
    for (std::size_t k = K; k >= 2; --k) {
        j = arg[k][j];
        starts[k - 1] = j;
    }
    starts[0] = 0;
    return starts;
}

std::size_t ContextualReserve::cell(double prediction) const {
    return static_cast<std::size_t>(std::upper_bound(thresholds.begin(), thresholds.end(), prediction) -
                                    thresholds.begin());
}

ContextualReserve contextual_partition_reserve(const SampleSet& s, const Predictor& predictor, std::size_t K) {
    require(K >= 1, ErrorKind::InvalidArgument, "K must be >= 1");
    require(s.context_dim() > 0, ErrorKind::InvalidArgument, "contextual reserves need context columns");
    const std::size_t T = s.size();
    std::vector<double> pred(T);
    for (std::size_t t = 0; t < T; ++t)
        pred[t] = predictor(s.context(t));
    std::vector<double> distinct = pred;
    std::sort(distinct.begin(), distinct.end());
    std::vector<double> weight;
    {
        std::vector<double> u;
        for (double p : distinct) {
            if (!u.empty() && u.back() == p) {
                weight.back() += 1.0;
            } else {
                u.push_back(p);
                weight.push_back(1.0);
            }
        }
        distinct = std::move(u);
    }
    // With fewer distinct predictions than K, neighbouring cells would be
    // empty; they merge, so the partition has at most that many cells.
    auto starts = kmeans_1d(distinct, weight, K);
    ContextualReserve c;
    for (std::size_t k = 1; k < starts.size(); ++k)
        c.thresholds.push_back(0.5 * (distinct[starts[k] - 1] + distinct[starts[k]]));
    std::vector<std::vector<double>> cell_values(starts.size());
    auto maxima = s.row_max();
    for (std::size_t t = 0; t < T; ++t)
        cell_values[c.cell(pred[t])].push_back(maxima[t]);
    for (const auto& v : cell_values) {
        require(!v.empty(), ErrorKind::EmptyCell, "partition produced an empty cell");
        c.reserves.push_back(empirical_monopoly_price(v));
    }
    return c;
}

double contextual_revenue(const ContextualReserve& c, const SampleSet& s, const Predictor& predictor) {
    require(s.context_dim() > 0, ErrorKind::InvalidArgument, "contextual revenue needs context columns");
    double total = 0.0;
    for (std::size_t t = 0; t < s.size(); ++t) {
        double r = c.reserve_for(predictor(s.context(t)));
        total += Mechanism::sp_anonymous(r).run(s.row(t)).revenue();
    }
    return total / static_cast<double>(s.size());
}

json SweepReport::to_json() const {
    json rows_json = json::array();
    for (const auto& r : rows)
        rows_json.push_back({{"T", r.T}, {"mean_ratio", r.mean_ratio}, {"se_ratio", r.se_ratio},
                             {"p05_ratio", r.p05_ratio}});
    return {{"learner", learner}, {"params", {{"kappa", kappa}, {"seeds", seeds}}}, {"per_T", rows_json}};
}

SweepReport sample_complexity_sweep(const Distribution& d, const std::vector<std::size_t>& Ts, std::size_t seeds,
                                    ReserveLearner learner, std::uint64_t master_seed, double kappa,
                                    unsigned workers) {
    require(seeds >= 1, ErrorKind::InvalidArgument, "need at least one seed");
    require(!Ts.empty(), ErrorKind::Empty, "need at least one sample size");
    const double r_star = monopoly_price(d);
    const double pi_star = monopoly_revenue(d, r_star);
    require(pi_star > 0.0, ErrorKind::InvalidArgument, "optimal revenue is zero; ratios undefined");

    std::vector<double> ratios(Ts.size() * seeds);
    parallel_for(ratios.size(), workers, [&](std::size_t cell) {
        std::size_t ti = cell / seeds;
        require(Ts[ti] >= 1, ErrorKind::InvalidArgument, "sample sizes must be >= 1");
        Rng rng(master_seed, cell, "batch.sweep");
        std::vector<double> x(Ts[ti]);
        for (auto& v : x)
            v = d.sample(rng);
        double r = learner == ReserveLearner::Guarded ? guarded_empirical_monopoly_price(x, kappa)
                                                      : empirical_monopoly_price(x);
        ratios[cell] = monopoly_revenue(d, r) / pi_star;
    });

    SweepReport rep{learner == ReserveLearner::Guarded ? "guarded" : "empirical",
                    learner == ReserveLearner::Guarded ? kappa : 0.0, seeds, {}};
    for (std::size_t ti = 0; ti < Ts.size(); ++ti) {
        SweepRow row;
        row.T = Ts[ti];
        row.ratios.assign(ratios.begin() + static_cast<std::ptrdiff_t>(ti * seeds),
                          ratios.begin() + static_cast<std::ptrdiff_t>((ti + 1) * seeds));
        Moments m(1);
        for (double r : row.ratios)
            m.add(std::span<const double>(&r, 1));
        row.mean_ratio = m.mean(0);
        row.se_ratio = m.std_error(0);
        auto sorted = row.ratios;
        std::sort(sorted.begin(), sorted.end());
        row.p05_ratio = numeric::quantile_of_sorted(sorted, 0.05);
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

}  // namespace auctionlab
