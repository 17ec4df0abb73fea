#pragma once

#include <span>
#include <string>

#include "cxls/dist.hpp"

namespace cxls {

/// Scoring function S(x, y) for forecast x and realization y. Every member of
/// the family is an asymmetric quadratic
///     S(x, y) = w_over  * (x - y)^2   if x >= y
///     S(x, y) = w_under * (x - y)^2   if x <  y
/// so S(y, y) = 0 and S(., y) is convex and coercive.
class ScoringFunction {
public:
    enum class Kind { expectile_score, squared_error, asymmetric_piecewise_quadratic };

    /// |1{x >= y} - alpha| (x - y)^2, alpha in (0, 1). Elicits the expectile
    /// balancing alpha * E[(Y-x)^+] against (1-alpha) * E[(x-Y)^+].
    static ScoringFunction expectile_score(double alpha);
    static ScoringFunction squared_error();
    static ScoringFunction asymmetric_piecewise_quadratic(double w_over, double w_under);

    Kind kind() const { return kind_; }
    double w_over() const { return w_over_; }
    double w_under() const { return w_under_; }
    std::string describe() const;

    double operator()(double x, double y) const;

    /// S(x1, y) - S(x2, y), computed without cancellation when x1 and x2 are
    /// close and on the same side of y.
    double difference(double x1, double x2, double y) const;

private:
    ScoringFunction(Kind k, double over, double under) : kind_(k), w_over_(over), w_under_(under) {}
    Kind kind_;
    double w_over_;
    double w_under_;
};

/// sum_i p_i S(x, y_i).
double expected_score(const ScoringFunction& s, double x, const DiscreteDistribution& f);

/// argmin_x expected_score(s, x, F) over [essinf F, max support F].
///
/// A 256-point scan locates the leftmost grid cell within 1e-12 of the minimum
/// and checks the scanned values are unimodal (NumericError otherwise); golden
/// section then refines inside the neighbouring cells to width 1e-9.
double elicit(const ScoringFunction& s, const DiscreteDistribution& f);

struct ForecastComparison {
    double mean_score_a = 0.0;
    double mean_score_b = 0.0;
    std::size_t n = 0;
    /// "A", "B" or "tie" (|difference| <= 1e-12).
    std::string winner;
};

/// Mean realized score of each forecast stream. Throws InvariantError on
/// empty or mismatched inputs. Sums are compensated.
ForecastComparison compare_forecasts(const ScoringFunction& s, std::span<const double> forecasts_a,
                                     std::span<const double> forecasts_b,
                                     std::span<const double> outcomes);

}  // namespace cxls
