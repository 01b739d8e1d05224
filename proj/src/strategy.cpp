#include "auctionlab/strategy.hpp"

#include <algorithm>
#include <cmath>

#include "auctionlab/error.hpp"

namespace auctionlab {

std::string_view to_string(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::Identity: return "identity";
        case StrategyKind::Linear: return "linear";
        case StrategyKind::Affine: return "affine";
        case StrategyKind::Grid: return "grid";
        case StrategyKind::Thresholded: return "thresholded";
    }
    return "?";
}

namespace detail {

class StrategyImpl {
public:
    virtual ~StrategyImpl() = default;
    virtual StrategyKind kind() const = 0;
    virtual double eval(double x) const = 0;
    virtual double derivative(double x) const = 0;
    virtual std::vector<double> knots() const { return {}; }
    virtual bool smooth() const { return true; }
};

namespace {

class AffineImpl final : public StrategyImpl {
public:
    AffineImpl(StrategyKind kind, double slope, double intercept) : kind_(kind), a_(slope), c_(intercept) {}
    StrategyKind kind() const override { return kind_; }
    double eval(double x) const override { return std::max(0.0, a_ * x + c_); }
    double derivative(double) const override { return a_; }

private:
    StrategyKind kind_;
    double a_, c_;
};

class GridImpl final : public StrategyImpl {
public:
    GridImpl(std::vector<double> x, std::vector<double> y, std::vector<double> m)
        : x_(std::move(x)), y_(std::move(y)), m_(std::move(m)) {}
    StrategyKind kind() const override { return StrategyKind::Grid; }

    std::size_t segment(double v) const {
        auto it = std::upper_bound(x_.begin(), x_.end(), v);
        std::size_t j = static_cast<std::size_t>(it - x_.begin());
        return std::clamp<std::size_t>(j, 1, x_.size() - 1) - 1;
    }

    double eval(double v) const override {
        if (v <= x_.front())
            return y_.front();
        if (v >= x_.back())
            return y_.back();
        std::size_t i = segment(v);
        double h = x_[i + 1] - x_[i];
        double t = (v - x_[i]) / h;
        if (m_.empty())
            return y_[i] + t * (y_[i + 1] - y_[i]);
        double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * y_[i] + (t3 - 2 * t2 + t) * h * m_[i] + (-2 * t3 + 3 * t2) * y_[i + 1] +
               (t3 - t2) * h * m_[i + 1];
    }

    double derivative(double v) const override {
        if (v < x_.front() || v > x_.back())
            return 0.0;
        std::size_t i = segment(v);
        double h = x_[i + 1] - x_[i];
        if (m_.empty())
            return (y_[i + 1] - y_[i]) / h;
        double t = (v - x_[i]) / h;
        double t2 = t * t;
        return ((6 * t2 - 6 * t) * y_[i] + (-6 * t2 + 6 * t) * y_[i + 1]) / h + (3 * t2 - 4 * t + 1) * m_[i] +
               (3 * t2 - 2 * t) * m_[i + 1];
    }

    std::vector<double> knots() const override { return x_; }
    bool smooth() const override { return !m_.empty(); }

private:
    std::vector<double> x_, y_, m_;
};

class ThresholdedImpl final : public StrategyImpl {
public:
    ThresholdedImpl(Distribution F, Strategy base, double r) : F_(std::move(F)), base_(std::move(base)), r_(r) {
        level_ = base_(r_) * (1.0 - F_.cdf(r_));
    }
    StrategyKind kind() const override { return StrategyKind::Thresholded; }
    double eval(double x) const override {
        if (x >= r_)
            return base_(x);
        return level_ / (1.0 - F_.cdf(x));
    }
    double derivative(double x) const override {
        if (x >= r_)
            return base_.derivative(x);
        double s = 1.0 - F_.cdf(x);
        return level_ * F_.pdf(x) / (s * s);
    }
    std::vector<double> knots() const override { return base_.knots(); }

private:
    Distribution F_;
    Strategy base_;
    double r_;
    double level_;
};

}  // namespace
}  // namespace detail

Strategy Strategy::identity() {
    return Strategy(std::make_shared<detail::AffineImpl>(StrategyKind::Identity, 1.0, 0.0));
}

Strategy Strategy::linear(double alpha) {
    require(alpha > 0.0 && std::isfinite(alpha), ErrorKind::InvalidArgument, "linear shading needs alpha > 0");
    return Strategy(std::make_shared<detail::AffineImpl>(StrategyKind::Linear, alpha, 0.0));
}

Strategy Strategy::affine(double slope, double intercept) {
    require(slope >= 0.0 && std::isfinite(slope) && std::isfinite(intercept), ErrorKind::InvalidArgument,
            "affine strategy needs a non-negative slope");
    return Strategy(std::make_shared<detail::AffineImpl>(StrategyKind::Affine, slope, intercept));
}

namespace {

void validate_grid(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() >= 2, ErrorKind::GridTooCoarse, "grid strategy needs at least two knots");
    require(x.size() == y.size(), ErrorKind::InconsistentArity, "grid values and bids differ in length");
    for (std::size_t i = 0; i < x.size(); ++i) {
        require(std::isfinite(x[i]) && std::isfinite(y[i]) && y[i] >= 0.0, ErrorKind::InvalidArgument,
                "grid entries must be finite and bids >= 0");
        if (i > 0) {
            require(x[i] > x[i - 1], ErrorKind::InvalidArgument, "grid values must be strictly increasing");
            require(y[i] >= y[i - 1] - 1e-12, ErrorKind::NonMonotone, "grid bids must be non-decreasing");
        }
    }
}

}  // namespace

Strategy Strategy::grid(std::vector<double> values, std::vector<double> bids) {
    validate_grid(values, bids);
    return Strategy(std::make_shared<detail::GridImpl>(std::move(values), std::move(bids), std::vector<double>{}));
}

Strategy Strategy::grid(std::vector<double> values, std::vector<double> bids, std::vector<double> slopes) {
    validate_grid(values, bids);
    require(slopes.size() == values.size(), ErrorKind::InconsistentArity, "grid slopes differ in length");
    return Strategy(std::make_shared<detail::GridImpl>(std::move(values), std::move(bids), std::move(slopes)));
}

Strategy Strategy::thresholded(const Distribution& F, const Strategy& base, double r) {
    Support s = F.support();
    require(r >= s.lo && r < s.hi, ErrorKind::OutOfSupport, "threshold must lie in the support");
    require(F.has_density(), ErrorKind::NoDensity, "thresholding needs a value law with a density");
    return Strategy(std::make_shared<detail::ThresholdedImpl>(F, base, r));
}

StrategyKind Strategy::kind() const { return impl_->kind(); }
double Strategy::operator()(double x) const { return impl_->eval(x); }
double Strategy::derivative(double x) const { return impl_->derivative(x); }
std::vector<double> Strategy::knots() const { return impl_->knots(); }
bool Strategy::smooth() const { return impl_->smooth(); }

double numeric_derivative(const Strategy& beta, double x, const Support& support, double h) {
    double lo = x - h, hi = x + h;
    if (lo < support.lo) {
        lo = x;
    }
    if (hi > support.hi) {
        hi = x;
    }
    require(hi > lo, ErrorKind::InvalidArgument, "derivative stencil collapsed");
    return (beta(hi) - beta(lo)) / (hi - lo);
}

}  // namespace auctionlab
