#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "auctionlab/rng.hpp"

namespace auctionlab {

using json = nlohmann::json;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Quantile at which searches and quadratures over unbounded supports stop.
inline constexpr double kTailQuantile = 1.0 - 1e-9;

inline constexpr std::size_t kIronGridDefault = 4096;
inline constexpr std::size_t kPriceGridDefault = 100000;

enum class Family {
    Uniform,
    Exponential,
    Lognormal,
    GeneralizedPareto,
    Pareto,
    HeavyTail,
    Kumaraswamy,
    Mixture,
    Discrete,
    Empirical,
    MaxOf,
    Pushforward,
};

std::string_view to_string(Family family);

struct Support {
    double lo = 0.0;
    double hi = kInf;

    bool bounded() const { return hi < kInf; }
    bool contains(double x, double tol = 1e-12) const { return x >= lo - tol && x <= hi + tol; }
};

struct Atom {
    double value;
    double prob;
};

/// Increasing map applied to a base law (bids from values).
struct MonotoneMap {
    std::function<double(double)> forward;
    std::function<double(double)> derivative;
};

namespace detail {
class DistImpl;
}

/// Immutable value law. Copies share the underlying parameters; every method
/// is const and thread-safe. Sampling takes the RNG stream explicitly.
class Distribution {
public:
    static Distribution uniform(double a, double b);
    /// cdf 1 - exp(-x / scale)
    static Distribution exponential(double scale);
    static Distribution lognormal(double mu, double sigma);
    /// Accepts xi < 1; xi in (0, 1) is flagged through extended_range().
    static Distribution gpd(double mu, double xi, double sigma);
    static Distribution pareto(double scale, double shape);
    /// F(x) = 1 - 1/x on [1, 2), 1 - 1/(2(x - 1)) beyond.
    static Distribution heavy_tail();
    static Distribution kumaraswamy(double a, double b);
    static Distribution mixture(std::vector<Distribution> components, std::vector<double> weights);
    static Distribution discrete(std::vector<Atom> atoms);
    static Distribution point_mass(double value);
    static Distribution empirical(std::span<const double> samples);
    /// Law of the maximum of k i.i.d. draws.
    static Distribution max_of(const Distribution& base, std::size_t k);
    static Distribution pushforward(const Distribution& base, MonotoneMap map);

    static Distribution from_json(const json& j);
    json to_json() const;

    Family family() const;
    Support support() const;
    /// Upper end of searches: support.hi when finite, else the kTailQuantile quantile.
    double search_cap() const;

    double cdf(double x) const;
    /// Left limit F(x-).
    double cdf_left(double x) const;
    double survival(double x) const { return 1.0 - cdf(x); }
    /// Throws NoDensity for atomic laws.
    double pdf(double x) const;
    /// (1 - F(x)) / f(x); +inf where the density vanishes under positive survival.
    double inverse_hazard(double x) const;
    double quantile(double q) const;
    double sample(Rng& rng) const;
    double mean() const;

    bool has_density() const;
    bool is_discrete() const;
    /// Sorted atoms for discrete and empirical laws; empty otherwise.
    std::span<const Atom> atoms() const;
    bool extended_range() const;

private:
    explicit Distribution(std::shared_ptr<const detail::DistImpl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const detail::DistImpl> impl_;
};

struct VirtualValueTable {
    std::vector<double> quantiles;
    std::vector<double> grid;
    std::vector<double> psi;
    std::vector<double> psi_ironed;
    bool regular = false;
    bool mhr = false;
    bool stepwise = false;  // discrete laws: ironed value is constant per atom

    double ironed_at(double x) const;
};

struct RegularityReport {
    bool regular = false;
    bool mhr = false;
};

/// x - (1 - F(x)) / f(x)
double virtual_value(const Distribution& d, double x);

/// Smallest maximizer of r (1 - F(r-)).
double monopoly_price(const Distribution& d, std::size_t grid_size = kPriceGridDefault);

/// r (1 - F(r-)); a sale happens when the value is at least the price.
double monopoly_revenue(const Distribution& d, double r);

VirtualValueTable iron(const Distribution& d, std::size_t grid_size = kIronGridDefault);

RegularityReport regularity_report(const Distribution& d, std::size_t grid_size = kIronGridDefault);

}  // namespace auctionlab
