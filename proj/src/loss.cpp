#include "cxls/loss.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cxls/error.hpp"

namespace cxls {

namespace {

constexpr double kSlopeSlack = 1e-12;
constexpr int kGridPoints = 1000;

void require_truncation(ExtendedReal k) {
    if (k.is_finite() && !(std::isfinite(k.value()) && k.value() <= 0.0)) {
        throw InvariantError("K: truncation point must be <= 0 or -inf");
    }
}

}  // namespace

ExtendedLossFunction ExtendedLossFunction::linear(ExtendedReal truncation) {
    require_truncation(truncation);
    return ExtendedLossFunction(Kind::linear, truncation);
}

ExtendedLossFunction ExtendedLossFunction::expectile(double alpha, ExtendedReal truncation) {
    if (!(alpha > 0.0 && alpha <= 0.5)) {
        throw InvariantError("alpha: expectile loss needs alpha in (0, 0.5]");
    }
    require_truncation(truncation);
    ExtendedLossFunction f(Kind::expectile, truncation);
    f.alpha_ = alpha;
    return f;
}

ExtendedLossFunction ExtendedLossFunction::log_shift(double truncation) {
    if (!(std::isfinite(truncation) && truncation < 0.0)) {
        throw InvariantError("K: log_shift needs a finite K < 0");
    }
    ExtendedLossFunction f(Kind::log_shift, truncation);
    f.validate_on_grid();
    return f;
}

ExtendedLossFunction ExtendedLossFunction::sqrt_shift(double truncation) {
    if (!(std::isfinite(truncation) && truncation < 0.0)) {
        throw InvariantError("K: sqrt_shift needs a finite K < 0");
    }
    ExtendedLossFunction f(Kind::sqrt_shift, truncation);
    f.validate_on_grid();
    return f;
}

ExtendedLossFunction ExtendedLossFunction::zero_above_linear_below(ExtendedReal truncation) {
    require_truncation(truncation);
    return ExtendedLossFunction(Kind::zero_above_linear_below, truncation);
}

ExtendedLossFunction ExtendedLossFunction::piecewise(std::vector<Knot> knots,
                                                     ExtendedReal truncation) {
    require_truncation(truncation);
    ExtendedLossFunction f(Kind::piecewise, truncation);
    f.knots_ = std::move(knots);
    f.validate();
    return f;
}

void ExtendedLossFunction::validate() const {
    if (knots_.size() < 2) throw InvariantError("knots: need at least two knots");
    for (const auto& [x, y] : knots_) {
        if (!std::isfinite(x) || !std::isfinite(y)) throw InvariantError("knots: values must be finite");
    }
    double prev_slope = HUGE_VAL;
    bool nonconstant = false;
    for (std::size_t j = 1; j < knots_.size(); ++j) {
        const double dx = knots_[j].first - knots_[j - 1].first;
        if (!(dx > 0.0)) throw InvariantError("knots: x values must be strictly increasing");
        const double slope = (knots_[j].second - knots_[j - 1].second) / dx;
        if (slope < -kSlopeSlack) throw InvariantError("knots: slopes must be nonnegative");
        if (slope > prev_slope + kSlopeSlack) {
            throw InvariantError("knots: slopes must be nonincreasing (concavity)");
        }
        nonconstant = nonconstant || slope > 0.0;
        prev_slope = slope;
    }
    if (!nonconstant) throw InvariantError("knots: loss function must be nonconstant");
    if (std::abs(inner(0.0)) > kSlopeSlack) throw InvariantError("knots: inner(0) must equal 0");
    // Slope just left of 0; zero would make phi vanish on a neighbourhood of 0-
    // and the shortfall would not be normalized.
    std::size_t j = 1;
    while (j + 1 < knots_.size() && knots_[j].first < 0.0) ++j;
    if (!(knots_[j].second - knots_[j - 1].second > 0.0)) {
        throw InvariantError("knots: loss must be strictly increasing just below 0");
    }
}

void ExtendedLossFunction::validate_on_grid() const {
    const double hi = 100.0;
    const double lo = truncation_.is_finite() ? truncation_.value() + 1e-3 * (hi - truncation_.value())
                                              : -hi;
    const double step = (hi - lo) / (kGridPoints - 1);
    double prev = inner(lo);
    double prev_slope = HUGE_VAL;
    for (int i = 1; i < kGridPoints; ++i) {
        const double v = inner(lo + i * step);
        const double slope = (v - prev) / step;
        if (slope < -kSlopeSlack) throw InvariantError("inner: loss must be nondecreasing");
        if (slope > prev_slope + 1e-9 * std::max(1.0, std::abs(prev_slope))) {
            throw InvariantError("inner: loss must be concave");
        }
        prev = v;
        prev_slope = slope;
    }
    if (inner(0.0) != 0.0) throw InvariantError("inner: inner(0) must equal 0");
}

double ExtendedLossFunction::inner(double x) const {
    switch (kind_) {
        case Kind::linear: return x;
        case Kind::expectile: return x >= 0.0 ? x : (1.0 - alpha_) / alpha_ * x;
        case Kind::log_shift: {
            const double k = truncation_.value();
            return std::log(x - k) - std::log(-k);
        }
        case Kind::sqrt_shift: {
            const double k = truncation_.value();
            return std::sqrt(x - k) - std::sqrt(-k);
        }
        case Kind::zero_above_linear_below: return std::min(x, 0.0);
        case Kind::piecewise: {
            // Locate the segment; outside the knot range extend the edge segment.
            std::size_t j = 1;
            while (j + 1 < knots_.size() && x > knots_[j].first) ++j;
            const auto& [x0, y0] = knots_[j - 1];
            const auto& [x1, y1] = knots_[j];
            return y0 + (y1 - y0) / (x1 - x0) * (x - x0);
        }
    }
    return 0.0;
}

ExtendedReal ExtendedLossFunction::operator()(double x) const {
    if (truncation_.is_neg_inf()) return inner(x);
    const double k = truncation_.value();
    if (x < k) return ExtendedReal::neg_inf();
    if (x == k && kind_ == Kind::log_shift) return ExtendedReal::neg_inf();
    return inner(x);
}

std::string ExtendedLossFunction::describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind_) {
        case Kind::linear: os << "linear"; break;
        case Kind::expectile: os << "expectile(alpha=" << alpha_ << ")"; break;
        case Kind::log_shift: os << "log_shift"; break;
        case Kind::sqrt_shift: os << "sqrt_shift"; break;
        case Kind::zero_above_linear_below: os << "zero_above_linear_below"; break;
        case Kind::piecewise: os << "piecewise(" << knots_.size() << " knots)"; break;
    }
    os << " K=" << truncation_.to_string();
    return os.str();
}

}  // namespace cxls
