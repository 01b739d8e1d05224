#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <boost/math/special_functions/erf.hpp>

#include "auctionlab/dist.hpp"
#include "auctionlab/error.hpp"
#include "auctionlab/numeric.hpp"

namespace auctionlab {

std::string_view to_string(Family family) {
    switch (family) {
        case Family::Uniform: return "uniform";
        case Family::Exponential: return "exponential";
        case Family::Lognormal: return "lognormal";
        case Family::GeneralizedPareto: return "gpd";
        case Family::Pareto: return "pareto";
        case Family::HeavyTail: return "heavy-tail";
        case Family::Kumaraswamy: return "kumaraswamy";
        case Family::Mixture: return "mixture";
        case Family::Discrete: return "discrete";
        case Family::Empirical: return "empirical";
        case Family::MaxOf: return "max-of";
        case Family::Pushforward: return "pushforward";
    }
    return "?";
}

namespace detail {

class DistImpl {
public:
    virtual ~DistImpl() = default;
    virtual Family family() const = 0;
    virtual Support support() const = 0;
    virtual double cdf(double x) const = 0;
    virtual double cdf_left(double x) const { return cdf(x); }
    virtual double pdf(double x) const = 0;
    virtual double inverse_hazard(double x) const {
        double f = pdf(x);
        double s = 1.0 - cdf(x);
        if (f <= 0.0)
            return s <= 0.0 ? 0.0 : kInf;
        return s / f;
    }
    virtual double quantile(double q) const = 0;
    virtual double sample(Rng& rng) const { return quantile(rng.uniform_open()); }
    virtual double mean() const = 0;
    virtual bool has_density() const { return true; }
    virtual std::span<const Atom> atoms() const { return {}; }
    virtual bool extended_range() const { return false; }
    virtual json to_json() const = 0;
};

namespace {

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

class UniformImpl final : public DistImpl {
public:
    UniformImpl(double a, double b) : a_(a), b_(b) {}
    Family family() const override { return Family::Uniform; }
    Support support() const override { return {a_, b_}; }
    double cdf(double x) const override { return clamp01((x - a_) / (b_ - a_)); }
    double pdf(double x) const override { return (x >= a_ && x <= b_) ? 1.0 / (b_ - a_) : 0.0; }
    double inverse_hazard(double x) const override {
        if (x < a_ || x > b_)
            return x > b_ ? 0.0 : kInf;
        return b_ - x;
    }
    double quantile(double q) const override { return a_ + clamp01(q) * (b_ - a_); }
    double sample(Rng& rng) const override { return a_ + rng.uniform() * (b_ - a_); }
    double mean() const override { return 0.5 * (a_ + b_); }
    json to_json() const override { return {{"family", "uniform"}, {"a", a_}, {"b", b_}}; }

private:
    double a_, b_;
};

class ExponentialImpl final : public DistImpl {
public:
    explicit ExponentialImpl(double scale) : scale_(scale) {}
    Family family() const override { return Family::Exponential; }
    Support support() const override { return {0.0, kInf}; }
    double cdf(double x) const override { return x <= 0.0 ? 0.0 : -std::expm1(-x / scale_); }
    double pdf(double x) const override { return x < 0.0 ? 0.0 : std::exp(-x / scale_) / scale_; }
    double inverse_hazard(double x) const override { return x < 0.0 ? kInf : scale_; }
    double quantile(double q) const override {
        if (q >= 1.0)
            return kInf;
        return -scale_ * std::log1p(-clamp01(q));
    }
    double mean() const override { return scale_; }
    json to_json() const override { return {{"family", "exponential"}, {"scale", scale_}}; }

private:
    double scale_;
};

class LognormalImpl final : public DistImpl {
public:
    LognormalImpl(double mu, double sigma) : mu_(mu), sigma_(sigma) {}
    Family family() const override { return Family::Lognormal; }
    Support support() const override { return {0.0, kInf}; }
    double z(double x) const { return (std::log(x) - mu_) / sigma_; }
    double cdf(double x) const override { return x <= 0.0 ? 0.0 : 0.5 * std::erfc(-z(x) / std::sqrt(2.0)); }
    double pdf(double x) const override {
        if (x <= 0.0)
            return 0.0;
        double zz = z(x);
        return std::exp(-0.5 * zz * zz) / (x * sigma_ * std::sqrt(2.0 * M_PI));
    }
    double inverse_hazard(double x) const override {
        if (x <= 0.0)
            return kInf;
        double s = 0.5 * std::erfc(z(x) / std::sqrt(2.0));
        double f = pdf(x);
        return f > 0.0 ? s / f : (s > 0.0 ? kInf : 0.0);
    }
    double quantile(double q) const override {
        if (q <= 0.0)
            return 0.0;
        if (q >= 1.0)
            return kInf;
        double zq = -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * q);
        return std::exp(mu_ + sigma_ * zq);
    }
    double mean() const override { return std::exp(mu_ + 0.5 * sigma_ * sigma_); }
    json to_json() const override { return {{"family", "lognormal"}, {"mu", mu_}, {"sigma", sigma_}}; }

private:
    double mu_, sigma_;
};

class GpdImpl final : public DistImpl {
public:
    GpdImpl(double mu, double xi, double sigma) : mu_(mu), xi_(xi), sigma_(sigma) {}
    Family family() const override { return Family::GeneralizedPareto; }
    Support support() const override { return {mu_, xi_ < 0.0 ? mu_ - sigma_ / xi_ : kInf}; }
    double base(double x) const { return 1.0 + xi_ * (x - mu_) / sigma_; }
    double surv(double x) const {
        if (x <= mu_)
            return 1.0;
        if (xi_ == 0.0)
            return std::exp(-(x - mu_) / sigma_);
        double t = base(x);
        if (t <= 0.0)
            return 0.0;
        return std::pow(t, -1.0 / xi_);
    }
    double cdf(double x) const override { return 1.0 - surv(x); }
    double pdf(double x) const override {
        if (x < mu_ || x > support().hi)
            return 0.0;
        if (xi_ == 0.0)
            return std::exp(-(x - mu_) / sigma_) / sigma_;
        double t = base(x);
        if (t <= 0.0)
            return 0.0;
        return std::pow(t, -1.0 / xi_ - 1.0) / sigma_;
    }
    double inverse_hazard(double x) const override {
        if (x < mu_)
            return kInf;
        return std::max(0.0, sigma_ + xi_ * (x - mu_));
    }
    double quantile(double q) const override {
        q = clamp01(q);
        if (q >= 1.0)
            return support().hi;
        if (xi_ == 0.0)
            return mu_ - sigma_ * std::log1p(-q);
        return mu_ + sigma_ * std::expm1(-xi_ * std::log1p(-q)) / xi_;
    }
    double mean() const override { return mu_ + sigma_ / (1.0 - xi_); }
    bool extended_range() const override { return xi_ > 0.0; }
    json to_json() const override { return {{"family", "gpd"}, {"mu", mu_}, {"xi", xi_}, {"sigma", sigma_}}; }

private:
    double mu_, xi_, sigma_;
};

class ParetoImpl final : public DistImpl {
public:
    ParetoImpl(double scale, double shape) : xm_(scale), alpha_(shape) {}
    Family family() const override { return Family::Pareto; }
    Support support() const override { return {xm_, kInf}; }
    double cdf(double x) const override { return x <= xm_ ? 0.0 : 1.0 - std::pow(xm_ / x, alpha_); }
    double pdf(double x) const override { return x < xm_ ? 0.0 : alpha_ * std::pow(xm_ / x, alpha_) / x; }
    double inverse_hazard(double x) const override { return x < xm_ ? kInf : x / alpha_; }
    double quantile(double q) const override {
        if (q >= 1.0)
            return kInf;
        return xm_ * std::pow(1.0 - clamp01(q), -1.0 / alpha_);
    }
    double mean() const override { return alpha_ > 1.0 ? alpha_ * xm_ / (alpha_ - 1.0) : kInf; }
    json to_json() const override { return {{"family", "pareto"}, {"scale", xm_}, {"shape", alpha_}}; }

private:
    double xm_, alpha_;
};

class HeavyTailImpl final : public DistImpl {
public:
    Family family() const override { return Family::HeavyTail; }
    Support support() const override { return {1.0, kInf}; }
    double surv(double x) const {
        if (x <= 1.0)
            return 1.0;
        return x < 2.0 ? 1.0 / x : 1.0 / (2.0 * (x - 1.0));
    }
    double cdf(double x) const override { return 1.0 - surv(x); }
    double pdf(double x) const override {
        if (x < 1.0)
            return 0.0;
        return x < 2.0 ? 1.0 / (x * x) : 1.0 / (2.0 * (x - 1.0) * (x - 1.0));
    }
    double inverse_hazard(double x) const override {
        if (x < 1.0)
            return kInf;
        return x < 2.0 ? x : x - 1.0;
    }
    double quantile(double q) const override {
        q = clamp01(q);
        if (q >= 1.0)
            return kInf;
        return q < 0.5 ? 1.0 / (1.0 - q) : 1.0 + 1.0 / (2.0 * (1.0 - q));
    }
    double mean() const override { return kInf; }
    json to_json() const override { return {{"family", "heavy-tail"}}; }
};

class KumaraswamyImpl final : public DistImpl {
public:
    KumaraswamyImpl(double a, double b) : a_(a), b_(b) {}
    Family family() const override { return Family::Kumaraswamy; }
    Support support() const override { return {0.0, 1.0}; }
    double cdf(double x) const override {
        if (x <= 0.0)
            return 0.0;
        if (x >= 1.0)
            return 1.0;
        return 1.0 - std::pow(1.0 - std::pow(x, a_), b_);
    }
    double pdf(double x) const override {
        if (x < 0.0 || x > 1.0)
            return 0.0;
        double xa = std::pow(x, a_);
        return a_ * b_ * std::pow(x, a_ - 1.0) * std::pow(1.0 - xa, b_ - 1.0);
    }
    double inverse_hazard(double x) const override {
        if (x < 0.0)
            return kInf;
        if (x >= 1.0)
            return 0.0;
        if (x == 0.0)
            return a_ < 1.0 ? 0.0 : (a_ == 1.0 ? 1.0 / b_ : kInf);
        return (1.0 - std::pow(x, a_)) / (a_ * b_ * std::pow(x, a_ - 1.0));
    }
    double quantile(double q) const override {
        q = clamp01(q);
        return std::pow(1.0 - std::pow(1.0 - q, 1.0 / b_), 1.0 / a_);
    }
    double mean() const override { return b_ * std::beta(1.0 + 1.0 / a_, b_); }
    json to_json() const override { return {{"family", "kumaraswamy"}, {"a", a_}, {"b", b_}}; }

private:
    double a_, b_;
};

class MixtureImpl final : public DistImpl {
public:
    MixtureImpl(std::vector<Distribution> comps, std::vector<double> weights)
        : comps_(std::move(comps)), weights_(std::move(weights)) {}
    Family family() const override { return Family::Mixture; }
    Support support() const override {
        Support s{kInf, -kInf};
        for (const auto& c : comps_) {
            s.lo = std::min(s.lo, c.support().lo);
            s.hi = std::max(s.hi, c.support().hi);
        }
        return s;
    }
    double cdf(double x) const override {
        double s = 0.0;
        for (std::size_t i = 0; i < comps_.size(); ++i)
            s += weights_[i] * comps_[i].cdf(x);
        return clamp01(s);
    }
    double cdf_left(double x) const override {
        double s = 0.0;
        for (std::size_t i = 0; i < comps_.size(); ++i)
            s += weights_[i] * comps_[i].cdf_left(x);
        return clamp01(s);
    }
    double pdf(double x) const override {
        double s = 0.0;
        for (std::size_t i = 0; i < comps_.size(); ++i)
            s += weights_[i] * comps_[i].pdf(x);
        return s;
    }
    double inverse_hazard(double x) const override {
        double surv = 0.0, dens = 0.0;
        for (std::size_t i = 0; i < comps_.size(); ++i) {
            surv += weights_[i] * (1.0 - comps_[i].cdf(x));
            dens += weights_[i] * comps_[i].pdf(x);
        }
        if (dens <= 0.0)
            return surv <= 0.0 ? 0.0 : kInf;
        return surv / dens;
    }
    double quantile(double q) const override {
        q = clamp01(q);
        double lo = kInf, hi = -kInf;
        for (const auto& c : comps_) {
            lo = std::min(lo, c.quantile(q));
            hi = std::max(hi, c.quantile(q));
        }
        if (!(hi < kInf))
            return kInf;
        return numeric::bisect_first_true([&](double x) { return cdf(x) >= q; }, lo, hi, 1e-13);
    }
    double sample(Rng& rng) const override {
        double u = rng.uniform();
        std::size_t i = 0;
        double acc = weights_[0];
        while (u >= acc && i + 1 < comps_.size())
            acc += weights_[++i];
        return comps_[i].sample(rng);
    }
    double mean() const override {
        double m = 0.0;
        for (std::size_t i = 0; i < comps_.size(); ++i)
            m += weights_[i] * comps_[i].mean();
        return m;
    }
    bool has_density() const override {
        return std::all_of(comps_.begin(), comps_.end(), [](const auto& c) { return c.has_density(); });
    }
    json to_json() const override {
        json comps = json::array();
        for (const auto& c : comps_)
            comps.push_back(c.to_json());
        return {{"family", "mixture"}, {"components", comps}, {"weights", weights_}};
    }

private:
    std::vector<Distribution> comps_;
    std::vector<double> weights_;
};

class DiscreteImpl final : public DistImpl {
public:
    DiscreteImpl(std::vector<Atom> atoms, bool empirical, std::vector<double> raw = {})
        : atoms_(std::move(atoms)), empirical_(empirical), raw_(std::move(raw)) {
        cum_.resize(atoms_.size());
        double c = 0.0;
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            c += atoms_[i].prob;
            cum_[i] = c;
        }
        cum_.back() = 1.0;
    }
    Family family() const override { return empirical_ ? Family::Empirical : Family::Discrete; }
    Support support() const override { return {atoms_.front().value, atoms_.back().value}; }
    double cdf(double x) const override {
        auto it = std::upper_bound(atoms_.begin(), atoms_.end(), x,
                                   [](double v, const Atom& a) { return v < a.value; });
        if (it == atoms_.begin())
            return 0.0;
        return cum_[static_cast<std::size_t>(it - atoms_.begin()) - 1];
    }
    double cdf_left(double x) const override {
        auto it = std::lower_bound(atoms_.begin(), atoms_.end(), x,
                                   [](const Atom& a, double v) { return a.value < v; });
        if (it == atoms_.begin())
            return 0.0;
        return cum_[static_cast<std::size_t>(it - atoms_.begin()) - 1];
    }
    double pdf(double) const override {
        fail(ErrorKind::NoDensity, "atomic law has no density");
    }
    double inverse_hazard(double) const override {
        fail(ErrorKind::NoDensity, "atomic law has no pointwise hazard");
    }
    double quantile(double q) const override {
        q = clamp01(q);
        auto it = std::lower_bound(cum_.begin(), cum_.end(), q - 1e-12);
        if (it == cum_.end())
            return atoms_.back().value;
        return atoms_[static_cast<std::size_t>(it - cum_.begin())].value;
    }
    double sample(Rng& rng) const override { return quantile(rng.uniform_open()); }
    double mean() const override {
        double m = 0.0;
        for (const auto& a : atoms_)
            m += a.value * a.prob;
        return m;
    }
    bool has_density() const override { return false; }
    std::span<const Atom> atoms() const override { return atoms_; }
    json to_json() const override {
        if (empirical_)
            return {{"family", "empirical"}, {"samples", raw_}};
        json atoms = json::array();
        for (const auto& a : atoms_)
            atoms.push_back({a.value, a.prob});
        return {{"family", "discrete"}, {"atoms", atoms}};
    }

private:
    std::vector<Atom> atoms_;
    std::vector<double> cum_;
    bool empirical_;
    std::vector<double> raw_;
};

class MaxOfImpl final : public DistImpl {
public:
    MaxOfImpl(Distribution base, std::size_t k) : base_(std::move(base)), k_(static_cast<double>(k)) {}
    Family family() const override { return Family::MaxOf; }
    Support support() const override { return base_.support(); }
    double cdf(double x) const override { return std::pow(base_.cdf(x), k_); }
    double pdf(double x) const override { return k_ * std::pow(base_.cdf(x), k_ - 1.0) * base_.pdf(x); }
    double inverse_hazard(double x) const override {
        double f = pdf(x);
        double s = 1.0 - cdf(x);
        if (f <= 0.0)
            return s <= 0.0 ? 0.0 : kInf;
        return s / f;
    }
    double quantile(double q) const override { return base_.quantile(std::pow(clamp01(q), 1.0 / k_)); }
    double mean() const override {
        if (!(base_.mean() < kInf))
            return kInf;
        return numeric::integrate([&](double u) { return quantile(u); }, 0.0, kTailQuantile, 1e-10);
    }
    json to_json() const override { return {{"family", "max-of"}, {"base", base_.to_json()}, {"k", k_}}; }

private:
    Distribution base_;
    double k_;
};

class PushforwardImpl final : public DistImpl {
public:
    PushforwardImpl(Distribution base, MonotoneMap map) : base_(std::move(base)), map_(std::move(map)) {
        value_lo_ = base_.support().lo;
        value_hi_ = base_.search_cap();
    }
    Family family() const override { return Family::Pushforward; }
    Support support() const override {
        Support s = base_.support();
        return {map_.forward(s.lo), s.bounded() ? map_.forward(s.hi) : kInf};
    }
    double preimage(double b) const {
        return numeric::first_reaching(map_.forward, b, value_lo_, value_hi_, 1e-13);
    }
    double cdf(double b) const override {
        if (b < map_.forward(value_lo_))
            return 0.0;
        if (b >= map_.forward(value_hi_))
            return base_.support().bounded() ? 1.0 : base_.cdf(value_hi_);
        return base_.cdf(preimage(b));
    }
    double pdf(double b) const override {
        Support s = support();
        if (b < s.lo || b > s.hi)
            return 0.0;
        double x = preimage(b);
        double d = map_.derivative(x);
        return d > 0.0 ? base_.pdf(x) / d : kInf;
    }
    double inverse_hazard(double b) const override {
        double x = preimage(b);
        return map_.derivative(x) * base_.inverse_hazard(x);
    }
    double quantile(double q) const override { return map_.forward(base_.quantile(q)); }
    double sample(Rng& rng) const override { return map_.forward(base_.sample(rng)); }
    double mean() const override {
        return numeric::integrate([&](double u) { return quantile(u); }, 0.0, kTailQuantile, 1e-10);
    }
    json to_json() const override { fail(ErrorKind::InvalidConfig, "pushforward laws are not serializable"); }

private:
    Distribution base_;
    MonotoneMap map_;
    double value_lo_, value_hi_;
};

void check_finite(double v, const char* name) {
    require(std::isfinite(v), ErrorKind::InvalidArgument, std::string(name) + " must be finite");
}

}  // namespace
}  // namespace detail

Distribution Distribution::uniform(double a, double b) {
    detail::check_finite(a, "uniform.a");
    detail::check_finite(b, "uniform.b");
    require(a >= 0.0 && b > a, ErrorKind::InvalidArgument, "uniform requires 0 <= a < b");
    return Distribution(std::make_shared<detail::UniformImpl>(a, b));
}

Distribution Distribution::exponential(double scale) {
    require(scale > 0.0 && std::isfinite(scale), ErrorKind::InvalidArgument, "exponential scale must be > 0");
    return Distribution(std::make_shared<detail::ExponentialImpl>(scale));
}

Distribution Distribution::lognormal(double mu, double sigma) {
    detail::check_finite(mu, "lognormal.mu");
    require(sigma > 0.0 && std::isfinite(sigma), ErrorKind::InvalidArgument, "lognormal sigma must be > 0");
    return Distribution(std::make_shared<detail::LognormalImpl>(mu, sigma));
}

Distribution Distribution::gpd(double mu, double xi, double sigma) {
    require(mu >= 0.0 && std::isfinite(mu), ErrorKind::InvalidArgument, "gpd mu must be >= 0");
    require(sigma > 0.0 && std::isfinite(sigma), ErrorKind::InvalidArgument, "gpd sigma must be > 0");
    require(xi < 1.0 && std::isfinite(xi), ErrorKind::InvalidArgument, "gpd requires xi < 1");
    return Distribution(std::make_shared<detail::GpdImpl>(mu, xi, sigma));
}

Distribution Distribution::pareto(double scale, double shape) {
    require(scale > 0.0 && shape > 0.0, ErrorKind::InvalidArgument, "pareto requires scale > 0 and shape > 0");
    return Distribution(std::make_shared<detail::ParetoImpl>(scale, shape));
}

Distribution Distribution::heavy_tail() { return Distribution(std::make_shared<detail::HeavyTailImpl>()); }

Distribution Distribution::kumaraswamy(double a, double b) {
    require(a > 0.0 && b > 0.0, ErrorKind::InvalidArgument, "kumaraswamy requires a > 0 and b > 0");
    return Distribution(std::make_shared<detail::KumaraswamyImpl>(a, b));
}

Distribution Distribution::mixture(std::vector<Distribution> components, std::vector<double> weights) {
    require(!components.empty(), ErrorKind::InvalidArgument, "mixture needs at least one component");
    require(components.size() == weights.size(), ErrorKind::InconsistentArity,
            "mixture components and weights differ in length");
    double total = 0.0;
    for (double w : weights) {
        require(w >= 0.0 && std::isfinite(w), ErrorKind::InvalidArgument, "mixture weights must be >= 0");
        total += w;
    }
    require(std::abs(total - 1.0) <= 1e-9, ErrorKind::InvalidArgument, "mixture weights must sum to 1");
    return Distribution(std::make_shared<detail::MixtureImpl>(std::move(components), std::move(weights)));
}

Distribution Distribution::discrete(std::vector<Atom> atoms) {
    require(!atoms.empty(), ErrorKind::Empty, "discrete law needs at least one atom");
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.value < b.value; });
    std::vector<Atom> merged;
    double total = 0.0;
    for (const auto& a : atoms) {
        require(a.value >= 0.0 && std::isfinite(a.value), ErrorKind::InvalidArgument, "atoms must be finite and >= 0");
        require(a.prob >= 0.0, ErrorKind::InvalidArgument, "atom probabilities must be >= 0");
        total += a.prob;
        if (a.prob == 0.0)
            continue;
        if (!merged.empty() && merged.back().value == a.value)
            merged.back().prob += a.prob;
        else
            merged.push_back(a);
    }
    require(std::abs(total - 1.0) <= 1e-9, ErrorKind::InvalidArgument, "atom probabilities must sum to 1");
    return Distribution(std::make_shared<detail::DiscreteImpl>(std::move(merged), false));
}

Distribution Distribution::point_mass(double value) { return discrete({{value, 1.0}}); }

Distribution Distribution::empirical(std::span<const double> samples) {
    require(!samples.empty(), ErrorKind::Empty, "empirical law needs at least one sample");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    double w = 1.0 / static_cast<double>(sorted.size());
    std::vector<Atom> atoms;
    for (double v : sorted) {
        require(v >= 0.0 && std::isfinite(v), ErrorKind::InvalidArgument, "samples must be finite and >= 0");
        if (!atoms.empty() && atoms.back().value == v)
            atoms.back().prob += w;
        else
            atoms.push_back({v, w});
    }
    return Distribution(std::make_shared<detail::DiscreteImpl>(
        std::move(atoms), true, std::vector<double>(samples.begin(), samples.end())));
}

Distribution Distribution::max_of(const Distribution& base, std::size_t k) {
    require(k >= 1, ErrorKind::InvalidArgument, "max_of needs k >= 1");
    if (k == 1)
        return base;
    if (base.is_discrete()) {
        std::vector<Atom> atoms;
        double prev = 0.0;
        for (const auto& a : base.atoms()) {
            double c = std::pow(base.cdf(a.value), static_cast<double>(k));
            atoms.push_back({a.value, c - prev});
            prev = c;
        }
        double total = prev;
        for (auto& a : atoms)
            a.prob /= total;
        return discrete(std::move(atoms));
    }
    return Distribution(std::make_shared<detail::MaxOfImpl>(base, k));
}

Distribution Distribution::pushforward(const Distribution& base, MonotoneMap map) {
    require(base.has_density(), ErrorKind::NoDensity, "pushforward needs a base law with a density");
    return Distribution(std::make_shared<detail::PushforwardImpl>(base, std::move(map)));
}

namespace {

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
    require(j.is_object(), ErrorKind::InvalidConfig, where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = std::any_of(allowed.begin(), allowed.end(), [&](std::string_view k) { return k == it.key(); });
        require(ok, ErrorKind::InvalidConfig, where + ": unknown key '" + it.key() + "'");
    }
}

double get_number(const json& j, const char* key, const std::string& where) {
    require(j.contains(key) && j.at(key).is_number(), ErrorKind::InvalidConfig,
            where + "." + key + ": missing or not a number");
    return j.at(key).get<double>();
}

}  // namespace

Distribution Distribution::from_json(const json& j) {
    const std::string where = "dist";
    require(j.is_object() && j.contains("family") && j.at("family").is_string(), ErrorKind::InvalidConfig,
            where + ": expected an object with a string 'family'");
    std::string fam = j.at("family").get<std::string>();
    try {
        if (fam == "uniform") {
            check_keys(j, {"family", "a", "b"}, where);
            return uniform(get_number(j, "a", where), get_number(j, "b", where));
        }
        if (fam == "exponential") {
            check_keys(j, {"family", "scale"}, where);
            return exponential(get_number(j, "scale", where));
        }
        if (fam == "lognormal") {
            check_keys(j, {"family", "mu", "sigma"}, where);
            return lognormal(get_number(j, "mu", where), get_number(j, "sigma", where));
        }
        if (fam == "gpd") {
            check_keys(j, {"family", "mu", "xi", "sigma"}, where);
            return gpd(get_number(j, "mu", where), get_number(j, "xi", where), get_number(j, "sigma", where));
        }
        if (fam == "pareto") {
            check_keys(j, {"family", "scale", "shape"}, where);
            return pareto(get_number(j, "scale", where), get_number(j, "shape", where));
        }
        if (fam == "heavy-tail") {
            check_keys(j, {"family"}, where);
            return heavy_tail();
        }
        if (fam == "kumaraswamy") {
            check_keys(j, {"family", "a", "b"}, where);
            return kumaraswamy(get_number(j, "a", where), get_number(j, "b", where));
        }
        if (fam == "point-mass") {
            check_keys(j, {"family", "value"}, where);
            return point_mass(get_number(j, "value", where));
        }
        if (fam == "mixture") {
            check_keys(j, {"family", "components", "weights"}, where);
            require(j.contains("components") && j.at("components").is_array(), ErrorKind::InvalidConfig,
                    where + ".components: expected an array");
            std::vector<Distribution> comps;
            for (const auto& c : j.at("components"))
                comps.push_back(from_json(c));
            auto weights = j.at("weights").get<std::vector<double>>();
            return mixture(std::move(comps), std::move(weights));
        }
        if (fam == "discrete") {
            check_keys(j, {"family", "atoms"}, where);
            std::vector<Atom> atoms;
            for (const auto& a : j.at("atoms")) {
                require(a.is_array() && a.size() == 2, ErrorKind::InvalidConfig,
                        where + ".atoms: each atom is [value, prob]");
                atoms.push_back({a[0].get<double>(), a[1].get<double>()});
            }
            return discrete(std::move(atoms));
        }
        if (fam == "empirical") {
            check_keys(j, {"family", "samples"}, where);
            auto s = j.at("samples").get<std::vector<double>>();
            return empirical(s);
        }
    } catch (const json::exception& e) {
        fail(ErrorKind::InvalidConfig, where + ": " + e.what());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::InvalidConfig)
            throw;
        fail(ErrorKind::InvalidConfig, where + " (" + fam + "): " + e.what());
    }
    fail(ErrorKind::InvalidConfig, where + ".family: unknown family '" + fam + "'");
}

json Distribution::to_json() const { return impl_->to_json(); }
Family Distribution::family() const { return impl_->family(); }
Support Distribution::support() const { return impl_->support(); }

double Distribution::search_cap() const {
    Support s = support();
    return s.bounded() ? s.hi : quantile(kTailQuantile);
}

double Distribution::cdf(double x) const { return impl_->cdf(x); }
double Distribution::cdf_left(double x) const { return impl_->cdf_left(x); }
double Distribution::pdf(double x) const { return impl_->pdf(x); }
double Distribution::inverse_hazard(double x) const { return impl_->inverse_hazard(x); }
double Distribution::quantile(double q) const { return impl_->quantile(q); }
double Distribution::sample(Rng& rng) const { return impl_->sample(rng); }
double Distribution::mean() const { return impl_->mean(); }
bool Distribution::has_density() const { return impl_->has_density(); }
bool Distribution::is_discrete() const { return !impl_->atoms().empty(); }
std::span<const Atom> Distribution::atoms() const { return impl_->atoms(); }
bool Distribution::extended_range() const { return impl_->extended_range(); }

}  // namespace auctionlab
