#pragma once

#include <span>
#include <vector>

namespace cxls {

/// Finitely supported probability measure on the real line.
///
/// Always held in canonical form: points strictly increasing, atoms closer
/// than `kMergeTolerance` merged, zero-weight atoms dropped, weights positive
/// and summing to one within `kMassTolerance`. Immutable after construction.
class DiscreteDistribution {
public:
    static constexpr double kMassTolerance = 1e-12;
    static constexpr double kMergeTolerance = 1e-12;

    /// Builds the canonical form of an arbitrary weighted point list. Points
    /// need not be sorted or distinct. Throws InvariantError for non-finite
    /// points, negative or non-finite weights, or total mass != 1.
    DiscreteDistribution(std::vector<double> points, std::vector<double> probs);

    std::span<const double> points() const { return points_; }
    std::span<const double> probs() const { return probs_; }
    std::size_t size() const { return points_.size(); }

    double min_point() const { return points_.front(); }
    double max_point() const { return points_.back(); }

    /// Weight of the atom at exactly x (0 if x is not in the support).
    double mass_at(double x) const;

    /// Right-continuous CDF.
    double cdf(double t) const;

    /// Integrated CDF: integral of CDF over (-inf, t], i.e. E[(t - X)^+].
    double integrated_cdf(double t) const;

    friend bool operator==(const DiscreteDistribution&, const DiscreteDistribution&) = default;

private:
    std::vector<double> points_;
    std::vector<double> probs_;
};

/// Gauge function psi used for psi-weak convergence. Closed parametric family:
/// power(p): max(1,|x|)^p with p >= 1; absexp(scale): exp(|x|/scale).
class Gauge {
public:
    enum class Kind { power, absexp };

    static Gauge power(double p);
    static Gauge absexp(double scale);

    Kind kind() const { return kind_; }
    double parameter() const { return param_; }

    double operator()(double x) const;

private:
    Gauge(Kind k, double p) : kind_(k), param_(p) {}
    Kind kind_;
    double param_;
};

enum class OrderRelation { first_order, increasing_concave };

DiscreteDistribution dirac(double x);

/// lambda * F + (1 - lambda) * G.
DiscreteDistribution mixture(const DiscreteDistribution& f, const DiscreteDistribution& g,
                             double lambda);

/// Left-continuous quantile inf{t : CDF(t) >= level}, level in (0, 1].
double quantile(const DiscreteDistribution& f, double level);

DiscreteDistribution shift(const DiscreteDistribution& f, double h);

double mean(const DiscreteDistribution& f);
double essinf(const DiscreteDistribution& f);
double variance(const DiscreteDistribution& f);

/// True iff F <= G in the given order, i.e. G dominates F:
///   first_order:        CDF_G(t) <= CDF_F(t) at every merged support point;
///   increasing_concave: integrated CDF_G(t) <= integrated CDF_F(t) at every
///                       merged support point.
/// Both CDFs are piecewise constant (resp. linear) between support points, so
/// checking the knots is exact. Comparisons use a 1e-12 slack.
bool dominates(const DiscreteDistribution& f, const DiscreteDistribution& g, OrderRelation order);

/// Sum of probs_i * psi(points_i). Throws NumericError on overflow.
double gauge_integral(const DiscreteDistribution& f, const Gauge& psi);

}  // namespace cxls
