#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cxls/dist.hpp"
#include "cxls/measures.hpp"

namespace cxls {

/// Finite probability space: strictly positive state probabilities summing to
/// one within 1e-12.
class FiniteSpace {
public:
    explicit FiniteSpace(std::vector<double> probs);

    std::span<const double> probs() const { return probs_; }
    std::size_t size() const { return probs_.size(); }

    friend bool operator==(const FiniteSpace&, const FiniteSpace&) = default;

private:
    std::vector<double> probs_;
};

/// One real value per state of a finite space.
class RandomVariable {
public:
    RandomVariable(FiniteSpace space, std::vector<double> values);

    const FiniteSpace& space() const { return space_; }
    std::span<const double> values() const { return values_; }
    std::size_t size() const { return values_.size(); }

private:
    FiniteSpace space_;
    std::vector<double> values_;
};

/// Radon-Nikodym density dQ/dP on a finite space: q >= 0, sum q_i p_i = 1.
class Density {
public:
    /// Throws InvariantError if q is negative, mis-sized or not normalized.
    Density(const FiniteSpace& space, std::vector<double> q);

    std::span<const double> values() const { return q_; }

    /// E_Q[xi].
    double expectation(const RandomVariable& xi) const;

private:
    std::vector<double> q_;
};

/// Disjoint nonempty blocks of state indices covering every state.
class Partition {
public:
    Partition(std::size_t states, std::vector<std::vector<std::size_t>> blocks);

    static Partition trivial(std::size_t states);
    static Partition discrete(std::size_t states);

    const std::vector<std::vector<std::size_t>>& blocks() const { return blocks_; }
    std::size_t states() const { return states_; }

private:
    std::size_t states_;
    std::vector<std::vector<std::size_t>> blocks_;
};

/// Distribution of xi: distinct values with summed probabilities.
DiscreteDistribution law(const RandomVariable& xi);

/// E[xi | G] for the sigma-algebra generated by the partition.
RandomVariable condition(const RandomVariable& xi, const Partition& part);

/// min E_Q[xi] over densities 0 <= q <= 1/alpha, alpha in (0, 1]. Solved
/// exactly by the greedy fill of a fractional knapsack: states in increasing
/// order of xi receive density 1/alpha until probability alpha is used up.
double tvar_dual(const RandomVariable& xi, double alpha);

/// The structured densities q(s) = s + (1 - s) 1_{i*} / p_{i*}, s on a uniform
/// grid of [0, 1], where i* is a state minimizing xi.
std::vector<Density> truncated_mean_structured_family(const RandomVariable& xi,
                                                      std::size_t points = 101);

struct TruncatedMeanDualReport {
    double min_over_family = 0.0;  // min_Q E_Q[xi] + 1 - min_i q_i
    double closed_form = 0.0;      // min(E[xi], 1 + min_i xi_i)
    double gap = 0.0;              // min_over_family - closed_form
};

/// Compares the dual value over a density family with the truncated-mean
/// closed form. Throws InvariantError for an empty family or a density
/// defined on a different number of states.
TruncatedMeanDualReport truncated_mean_dual_check(const RandomVariable& xi,
                                                  std::span<const Density> family);

struct ConcavityViolation {
    double lambda;
    double lhs;  // u(law(lambda xi + (1-lambda) eta))
    double rhs;  // lambda u(xi) + (1-lambda) u(eta)
};

struct ConcavityReport {
    std::vector<ConcavityViolation> violations;
    double max_shortfall = 0.0;  // largest rhs - lhs seen (may be negative)
};

/// Checks u(lambda xi + (1-lambda) eta) >= lambda u(xi) + (1-lambda) u(eta) - 1e-7
/// state-wise on the lambda grid. Throws InvariantError if xi and eta live on
/// different spaces.
ConcavityReport concavity_check(const UtilityFunctional& u, const RandomVariable& xi,
                                const RandomVariable& eta, std::span<const double> lambdas);

struct ConditioningReport {
    double lhs = 0.0;  // u(law(E[xi | G]))
    double rhs = 0.0;  // u(law(xi))
    bool holds = false;
};

ConditioningReport conditioning_check(const UtilityFunctional& u, const RandomVariable& xi,
                                      const Partition& part);

}  // namespace cxls
