#include "cxls/dist.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cxls/error.hpp"

namespace cxls {

namespace {

constexpr double kOrderSlack = 1e-12;

// Cumulative weights can land a few ulps below an exact level such as 0.25.
constexpr double kLevelSlack = 1e-14;

void require_finite(double x, const char* field) {
    if (!std::isfinite(x)) {
        throw InvariantError(std::string(field) + ": value must be finite");
    }
}

std::vector<double> merged_support(const DiscreteDistribution& f, const DiscreteDistribution& g) {
    std::vector<double> ts;
    ts.reserve(f.size() + g.size());
    std::merge(f.points().begin(), f.points().end(), g.points().begin(), g.points().end(),
               std::back_inserter(ts));
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    return ts;
}

}  // namespace

DiscreteDistribution::DiscreteDistribution(std::vector<double> points, std::vector<double> probs) {
    if (points.size() != probs.size()) {
        throw InvariantError("probs: length " + std::to_string(probs.size()) +
                             " does not match points length " + std::to_string(points.size()));
    }
    if (points.empty()) throw InvariantError("points: distribution needs at least one atom");

    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < points.size(); ++i) {
        require_finite(points[i], "points");
        require_finite(probs[i], "probs");
        if (probs[i] < 0.0) throw InvariantError("probs: weights must be nonnegative");
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });

    double total = 0.0;
    for (std::size_t idx : order) {
        const double x = points[idx];
        const double w = probs[idx];
        total += w;
        if (w == 0.0) continue;
        if (!points_.empty() && x - points_.back() <= kMergeTolerance) {
            probs_.back() += w;
        } else {
            points_.push_back(x);
            probs_.push_back(w);
        }
    }
    if (std::abs(total - 1.0) > kMassTolerance) {
        throw InvariantError("probs: weights sum to " + std::to_string(total) + ", expected 1");
    }
}

double DiscreteDistribution::mass_at(double x) const {
    auto it = std::lower_bound(points_.begin(), points_.end(), x);
    if (it == points_.end() || *it != x) return 0.0;
    return probs_[static_cast<std::size_t>(it - points_.begin())];
}

double DiscreteDistribution::cdf(double t) const {
    double c = 0.0;
    for (std::size_t i = 0; i < points_.size() && points_[i] <= t; ++i) c += probs_[i];
    return std::min(c, 1.0);
}

double DiscreteDistribution::integrated_cdf(double t) const {
    double s = 0.0;
    for (std::size_t i = 0; i < points_.size() && points_[i] < t; ++i) {
        s += probs_[i] * (t - points_[i]);
    }
    return s;
}

Gauge Gauge::power(double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw InvariantError("gauge.p: power must be >= 1");
    return Gauge(Kind::power, p);
}

Gauge Gauge::absexp(double scale) {
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw InvariantError("gauge.scale: scale must be > 0");
    }
    return Gauge(Kind::absexp, scale);
}

double Gauge::operator()(double x) const {
    switch (kind_) {
        case Kind::power: return std::pow(std::max(1.0, std::abs(x)), param_);
        case Kind::absexp: return std::exp(std::abs(x) / param_);
    }
    return 0.0;
}

DiscreteDistribution dirac(double x) {
    require_finite(x, "x");
    return DiscreteDistribution({x}, {1.0});
}

DiscreteDistribution mixture(const DiscreteDistribution& f, const DiscreteDistribution& g,
                             double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw InvariantError("lambda: mixture weight must lie in [0, 1]");
    }
    std::vector<double> pts;
    std::vector<double> ws;
    pts.reserve(f.size() + g.size());
    ws.reserve(f.size() + g.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        pts.push_back(f.points()[i]);
        ws.push_back(lambda * f.probs()[i]);
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
        pts.push_back(g.points()[i]);
        ws.push_back((1.0 - lambda) * g.probs()[i]);
    }
    return DiscreteDistribution(std::move(pts), std::move(ws));
}

double quantile(const DiscreteDistribution& f, double level) {
    if (!(level > 0.0 && level <= 1.0)) throw InvariantError("level: quantile level must lie in (0, 1]");
    double cum = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        cum += f.probs()[i];
        if (cum + kLevelSlack >= level) return f.points()[i];
    }
    return f.max_point();
}

DiscreteDistribution shift(const DiscreteDistribution& f, double h) {
    require_finite(h, "h");
    std::vector<double> pts(f.points().begin(), f.points().end());
    for (double& x : pts) x += h;
    return DiscreteDistribution(std::move(pts), {f.probs().begin(), f.probs().end()});
}

double mean(const DiscreteDistribution& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f.probs()[i] * f.points()[i];
    return s;
}

double essinf(const DiscreteDistribution& f) { return f.min_point(); }

double variance(const DiscreteDistribution& f) {
    const double m = mean(f);
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double d = f.points()[i] - m;
        s += f.probs()[i] * d * d;
    }
    return s;
}

bool dominates(const DiscreteDistribution& f, const DiscreteDistribution& g, OrderRelation order) {
    for (double t : merged_support(f, g)) {
        switch (order) {
            case OrderRelation::first_order:
                if (g.cdf(t) > f.cdf(t) + kOrderSlack) return false;
                break;
            case OrderRelation::increasing_concave:
                if (g.integrated_cdf(t) > f.integrated_cdf(t) + kOrderSlack) return false;
                break;
        }
    }
    return true;
}

double gauge_integral(const DiscreteDistribution& f, const Gauge& psi) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double v = psi(f.points()[i]);
        if (!std::isfinite(v)) {
            throw NumericError("gauge: psi overflows at x = " + std::to_string(f.points()[i]));
        }
        s += f.probs()[i] * v;
    }
    if (!std::isfinite(s)) throw NumericError("gauge: integral overflows");
    return s;
}

}  // namespace cxls
