#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "auctionlab/dist.hpp"
#include "auctionlab/mechanism.hpp"

namespace auctionlab {

/// T i.i.d. value vectors (row-major T x n) with optional T x d context.
class SampleSet {
public:
    SampleSet(std::size_t n, std::vector<double> values, std::size_t d = 0, std::vector<double> context = {});
    static SampleSet from_rows(const std::vector<std::vector<double>>& rows);
    /// Row t draws bidder i from dists[i], in index order, from substream (seed, 0, "batch.draw").
    static SampleSet draw(const std::vector<Distribution>& dists, std::size_t T, std::uint64_t seed);
    /// Header bidder_0..bidder_{n-1}[,ctx_0,...].
    static SampleSet read_csv(std::istream& in);

    std::size_t size() const { return T_; }
    std::size_t bidders() const { return n_; }
    std::size_t context_dim() const { return d_; }
    double value(std::size_t t, std::size_t i) const { return values_[t * n_ + i]; }
    std::span<const double> row(std::size_t t) const { return {values_.data() + t * n_, n_}; }
    std::span<const double> context(std::size_t t) const { return {context_.data() + t * d_, d_}; }
    std::vector<double> column(std::size_t i) const;
    /// Highest value per row.
    std::vector<double> row_max() const;

private:
    std::size_t T_ = 0, n_ = 0, d_ = 0;
    std::vector<double> values_;
    std::vector<double> context_;
};

struct LearnedMechanismReport {
    LearnedMechanismReport(Mechanism m, double revenue) : mechanism(std::move(m)), empirical_revenue(revenue) {}

    Mechanism mechanism;
    double empirical_revenue = 0.0;
    std::optional<double> holdout_revenue;
    std::optional<double> ratio_to_oracle;
    std::size_t candidates_evaluated = 0;
    /// Best empirical revenue among all candidates the search evaluated.
    double best_candidate_revenue = 0.0;
};

/// Average per-auction revenue of m run truthfully on every row.
double empirical_revenue(const Mechanism& m, const SampleSet& s);

Distribution empirical_cdf(std::span<const double> samples);

/// Smallest sample x maximizing x (1 - F_hat(x-)).
double empirical_monopoly_price(std::span<const double> samples);

/// Drops the ceil(kappa T) largest samples first.
double guarded_empirical_monopoly_price(std::span<const double> samples, double kappa);

LearnedMechanismReport erm_anonymous_reserve(const SampleSet& s, const SampleSet* holdout = nullptr);

std::vector<double> lazy_reserves_from_samples(const SampleSet& s);

/// Per-bidder reserve grid: deciles of the bidder's column, its empirical
/// monopoly price, its initial reserve, and multiples of grid_step (if > 0).
LearnedMechanismReport local_search_eager(const SampleSet& s, const std::vector<double>& init, double grid_step,
                                          const SampleSet* holdout = nullptr);

LearnedMechanismReport search_boosted(const SampleSet& s, const std::vector<double>& init_reserves,
                                      const std::vector<double>& boost_grid, const std::vector<double>& reserve_grid,
                                      const SampleSet* holdout = nullptr);

inline constexpr std::size_t kMaxLevelCandidates = 1000000;

LearnedMechanismReport search_llevel(const SampleSet& s, std::size_t L, const std::vector<double>& grid,
                                     const SampleSet* holdout = nullptr);

using Predictor = std::function<double(std::span<const double>)>;

struct ContextualReserve {
    /// Cell k holds predictions in [thresholds[k-1], thresholds[k]).
    std::vector<double> thresholds;
    std::vector<double> reserves;

    std::size_t cell(double prediction) const;
    double reserve_for(double prediction) const { return reserves[cell(prediction)]; }
};

ContextualReserve contextual_partition_reserve(const SampleSet& s, const Predictor& predictor, std::size_t K);

/// Average revenue of a second-price auction whose anonymous reserve depends on the row context.
double contextual_revenue(const ContextualReserve& c, const SampleSet& s, const Predictor& predictor);

/// Optimal 1-d k-means partition of sorted values (returns cell start indices).
std::vector<std::size_t> kmeans_1d(std::span<const double> sorted_values, std::span<const double> weights,
                                   std::size_t K);

enum class ReserveLearner { Empirical, Guarded };

struct SweepRow {
    std::size_t T = 0;
    double mean_ratio = 0.0;
    double se_ratio = 0.0;
    double p05_ratio = 0.0;
    std::vector<double> ratios;
};

struct SweepReport {
    std::string learner;
    double kappa = 0.0;
    std::size_t seeds = 0;
    std::vector<SweepRow> rows;

    json to_json() const;
};

SweepReport sample_complexity_sweep(const Distribution& d, const std::vector<std::size_t>& Ts, std::size_t seeds,
                                    ReserveLearner learner, std::uint64_t master_seed, double kappa = 0.05,
                                    unsigned workers = 0);

}  // namespace auctionlab
