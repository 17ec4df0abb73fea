#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cxls/extended_real.hpp"

namespace cxls {

/// Concave nondecreasing loss function with values in R u {-inf}:
///
///     phi_bar(x) = -inf       for x < K
///     phi_bar(x) = inner(x)   for x > K
///     phi_bar(K) = lim_{x -> K+} inner(x)   (may itself be -inf)
///
/// with inner(0) = 0. K = -inf means the loss is finite everywhere.
///
/// Sign convention: losses are written for utilities (larger is better), so
/// the expectile loss takes alpha in (0, 1/2] and is scaled to inner(1) = 1:
///     inner(x) = x            for x >= 0
///     inner(x) = (1-a)/a * x  for x <  0
/// which corresponds to the risk-measure convention alpha' = 1 - alpha.
class ExtendedLossFunction {
public:
    enum class Kind { linear, expectile, log_shift, sqrt_shift, zero_above_linear_below, piecewise };

    using Knot = std::pair<double, double>;

    static ExtendedLossFunction linear(ExtendedReal truncation = ExtendedReal::neg_inf());
    static ExtendedLossFunction expectile(double alpha,
                                          ExtendedReal truncation = ExtendedReal::neg_inf());
    /// log(x - K) - log(-K), K < 0. Right limit at K is -inf.
    static ExtendedLossFunction log_shift(double truncation);
    /// sqrt(x - K) - sqrt(-K), K < 0. Right limit at K is -sqrt(-K).
    static ExtendedLossFunction sqrt_shift(double truncation);
    /// min(x, 0): the essential infimum as a finite shortfall.
    static ExtendedLossFunction zero_above_linear_below(
        ExtendedReal truncation = ExtendedReal::neg_inf());
    /// Piecewise-linear interpolation of knots, extended beyond the first and
    /// last knot with the edge slopes. Knot x-values strictly increasing.
    static ExtendedLossFunction piecewise(std::vector<Knot> knots,
                                          ExtendedReal truncation = ExtendedReal::neg_inf());

    Kind kind() const { return kind_; }
    ExtendedReal truncation() const { return truncation_; }
    double alpha() const { return alpha_; }
    const std::vector<Knot>& knots() const { return knots_; }

    /// phi_bar(x).
    ExtendedReal operator()(double x) const;

    /// The finite part, defined for x > K.
    double inner(double x) const;

    std::string describe() const;

private:
    ExtendedLossFunction(Kind kind, ExtendedReal truncation) : kind_(kind), truncation_(truncation) {}
    void validate() const;
    void validate_on_grid() const;

    Kind kind_;
    ExtendedReal truncation_;
    double alpha_ = 0.0;
    std::vector<Knot> knots_;
};

}  // namespace cxls
