#include "cxls/elicit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "cxls/error.hpp"

namespace cxls {

namespace {

constexpr std::size_t kScanPoints = 256;
constexpr double kTieSlack = 1e-12;
constexpr double kGoldenWidth = 1e-9;
constexpr int kMaxGoldenSteps = 400;
const double kInvPhi = (std::sqrt(5.0) - 1.0) / 2.0;

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) comp_ += (sum_ - t) + v;
        else comp_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace

ScoringFunction ScoringFunction::expectile_score(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvariantError("alpha: expectile score needs alpha in (0, 1)");
    return ScoringFunction(Kind::expectile_score, 1.0 - alpha, alpha);
}

ScoringFunction ScoringFunction::squared_error() { return ScoringFunction(Kind::squared_error, 1.0, 1.0); }

ScoringFunction ScoringFunction::asymmetric_piecewise_quadratic(double w_over, double w_under) {
    if (!(w_over > 0.0) || !(w_under > 0.0) || !std::isfinite(w_over) || !std::isfinite(w_under)) {
        throw InvariantError("w_over, w_under: weights must be finite and positive");
    }
    return ScoringFunction(Kind::asymmetric_piecewise_quadratic, w_over, w_under);
}

std::string ScoringFunction::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::expectile_score: os << "expectile_score(alpha=" << w_under_ << ")"; break;
        case Kind::squared_error: os << "squared_error"; break;
        case Kind::asymmetric_piecewise_quadratic:
            os << "asymmetric_piecewise_quadratic(w_over=" << w_over_ << ", w_under=" << w_under_ << ")";
            break;
    }
    return os.str();
}

double ScoringFunction::operator()(double x, double y) const {
    const double d = x - y;
    return (x >= y ? w_over_ : w_under_) * d * d;
}

double ScoringFunction::difference(double x1, double x2, double y) const {
    const double w1 = x1 >= y ? w_over_ : w_under_;
    const double w2 = x2 >= y ? w_over_ : w_under_;
    if (w1 == w2) return w1 * (x1 - x2) * ((x1 - y) + (x2 - y));
    return (*this)(x1, y) - (*this)(x2, y);
}

double expected_score(const ScoringFunction& s, double x, const DiscreteDistribution& f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) acc += f.probs()[i] * s(x, f.points()[i]);
    return acc;
}

double elicit(const ScoringFunction& s, const DiscreteDistribution& f) {
    const double lo = f.min_point();
    const double hi = f.max_point();
    if (lo == hi) return lo;

    std::vector<double> xs(kScanPoints);
    std::vector<double> vs(kScanPoints);
    const double step = (hi - lo) / static_cast<double>(kScanPoints - 1);
    for (std::size_t i = 0; i < kScanPoints; ++i) {
        xs[i] = i + 1 == kScanPoints ? hi : lo + step * static_cast<double>(i);
        vs[i] = expected_score(s, xs[i], f);
    }
    const double vmin = *std::min_element(vs.begin(), vs.end());
    std::size_t first = 0;
    while (vs[first] > vmin + kTieSlack) ++first;
    std::size_t last = kScanPoints - 1;
    while (vs[last] > vmin + kTieSlack) --last;

    for (std::size_t i = 0; i + 1 < kScanPoints; ++i) {
        const double tol = kTieSlack * std::max(1.0, std::abs(vs[i]));
        const bool ok = i < first ? vs[i + 1] <= vs[i] + tol : (i >= last ? vs[i + 1] >= vs[i] - tol : true);
        if (!ok) throw NumericError("score: expected score is not unimodal on the support bracket");
    }

    double a = xs[first == 0 ? 0 : first - 1];
    double b = xs[std::min(last + 1, kScanPoints - 1)];
    // Positive when the expected score at x1 exceeds that at x2.
    auto compare = [&](double x1, double x2) {
        double acc = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) acc += f.probs()[i] * s.difference(x1, x2, f.points()[i]);
        return acc;
    };
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    for (int steps = 0; b - a > kGoldenWidth; ++steps) {
        if (steps > kMaxGoldenSteps) throw NumericError("score: golden-section search did not converge");
        if (compare(c, d) <= 0.0) {  // ties keep the left part
            b = d;
            d = c;
            c = b - kInvPhi * (b - a);
        } else {
            a = c;
            c = d;
            d = a + kInvPhi * (b - a);
        }
    }
    return a + 0.5 * (b - a);
}

ForecastComparison compare_forecasts(const ScoringFunction& s, std::span<const double> forecasts_a,
                                     std::span<const double> forecasts_b,
                                     std::span<const double> outcomes) {
    if (outcomes.empty()) throw InvariantError("outcomes: need at least one outcome");
    if (forecasts_a.size() != outcomes.size()) {
        throw InvariantError("forecasts_a: length " + std::to_string(forecasts_a.size()) +
                             " does not match outcomes length " + std::to_string(outcomes.size()));
    }
    if (forecasts_b.size() != outcomes.size()) {
        throw InvariantError("forecasts_b: length " + std::to_string(forecasts_b.size()) +
                             " does not match outcomes length " + std::to_string(outcomes.size()));
    }
    CompensatedSum sa;
    CompensatedSum sb;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        sa.add(s(forecasts_a[i], outcomes[i]));
        sb.add(s(forecasts_b[i], outcomes[i]));
    }
    ForecastComparison r;
    r.n = outcomes.size();
    r.mean_score_a = sa.value() / static_cast<double>(r.n);
    r.mean_score_b = sb.value() / static_cast<double>(r.n);
    if (std::abs(r.mean_score_a - r.mean_score_b) <= kTieSlack) r.winner = "tie";
    else r.winner = r.mean_score_a < r.mean_score_b ? "A" : "B";
    return r;
}

}  // namespace cxls
