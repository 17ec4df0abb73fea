#include "cxls/dual.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cxls/error.hpp"

namespace cxls {

namespace {

constexpr double kConcavitySlack = 1e-7;
constexpr double kConditioningSlack = 1e-9;

}  // namespace

FiniteSpace::FiniteSpace(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw InvariantError("probs: finite space needs at least one state");
    double total = 0.0;
    for (double p : probs_) {
        if (!(p > 0.0) || !std::isfinite(p)) throw InvariantError("probs: state probabilities must be positive");
        total += p;
    }
    if (std::abs(total - 1.0) > DiscreteDistribution::kMassTolerance) {
        throw InvariantError("probs: state probabilities sum to " + std::to_string(total) + ", expected 1");
    }
}

RandomVariable::RandomVariable(FiniteSpace space, std::vector<double> values)
    : space_(std::move(space)), values_(std::move(values)) {
    if (values_.size() != space_.size()) {
        throw InvariantError("values: " + std::to_string(values_.size()) + " values for " +
                             std::to_string(space_.size()) + " states");
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw InvariantError("values: random variable values must be finite");
    }
}

Density::Density(const FiniteSpace& space, std::vector<double> q) : q_(std::move(q)) {
    if (q_.size() != space.size()) {
        throw InvariantError("density: " + std::to_string(q_.size()) + " values for " +
                             std::to_string(space.size()) + " states");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < q_.size(); ++i) {
        if (!(q_[i] >= 0.0) || !std::isfinite(q_[i])) throw InvariantError("density: values must be >= 0");
        total += q_[i] * space.probs()[i];
    }
    if (std::abs(total - 1.0) > DiscreteDistribution::kMassTolerance) {
        throw InvariantError("density: E_P[dQ/dP] = " + std::to_string(total) + ", expected 1");
    }
}

double Density::expectation(const RandomVariable& xi) const {
    if (xi.size() != q_.size()) throw InvariantError("density: state count does not match the variable");
    double acc = 0.0;
    for (std::size_t i = 0; i < q_.size(); ++i) acc += q_[i] * xi.space().probs()[i] * xi.values()[i];
    return acc;
}

Partition::Partition(std::size_t states, std::vector<std::vector<std::size_t>> blocks)
    : states_(states), blocks_(std::move(blocks)) {
    std::vector<char> seen(states, 0);
    for (const auto& block : blocks_) {
        if (block.empty()) throw InvariantError("blocks: blocks must be nonempty");
        for (std::size_t s : block) {
            if (s >= states) throw InvariantError("blocks: state index " + std::to_string(s) + " out of range");
            if (seen[s]) throw InvariantError("blocks: state " + std::to_string(s) + " appears twice");
            seen[s] = 1;
        }
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
        throw InvariantError("blocks: partition does not cover every state");
    }
}

Partition Partition::trivial(std::size_t states) {
    std::vector<std::size_t> all(states);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return Partition(states, {all});
}

Partition Partition::discrete(std::size_t states) {
    std::vector<std::vector<std::size_t>> blocks;
    for (std::size_t s = 0; s < states; ++s) blocks.push_back({s});
    return Partition(states, std::move(blocks));
}

DiscreteDistribution law(const RandomVariable& xi) {
    return DiscreteDistribution({xi.values().begin(), xi.values().end()},
                                {xi.space().probs().begin(), xi.space().probs().end()});
}

RandomVariable condition(const RandomVariable& xi, const Partition& part) {
    if (part.states() != xi.size()) throw InvariantError("partition: state count does not match the variable");
    std::vector<double> out(xi.size());
    const auto p = xi.space().probs();
    const auto v = xi.values();
    for (const auto& block : part.blocks()) {
        const bool constant = std::all_of(block.begin(), block.end(),
                                          [&](std::size_t s) { return v[s] == v[block.front()]; });
        double avg = v[block.front()];
        if (!constant) {
            double mass = 0.0;
            double acc = 0.0;
            for (std::size_t s : block) {
                mass += p[s];
                acc += p[s] * v[s];
            }
            avg = acc / mass;
        }
        for (std::size_t s : block) out[s] = avg;
    }
    return RandomVariable(xi.space(), std::move(out));
}

double tvar_dual(const RandomVariable& xi, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw InvariantError("alpha: dual TVaR level must lie in (0, 1]");
    std::vector<std::size_t> order(xi.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return xi.values()[a] < xi.values()[b]; });
    const double cap = 1.0 / alpha;
    double budget = 1.0;  // remaining Q-mass
    double value = 0.0;
    for (std::size_t s : order) {
        if (budget <= 0.0) break;
        const double p = xi.space().probs()[s];
        const double q_mass = std::min(cap * p, budget);  // q_s * p_s
        value += q_mass * xi.values()[s];
        budget -= q_mass;
    }
    return value;
}

std::vector<Density> truncated_mean_structured_family(const RandomVariable& xi, std::size_t points) {
    if (points < 2) throw InvariantError("points: structured family needs at least two grid points");
    const auto v = xi.values();
    const std::size_t argmin =
        static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
    const double p_min = xi.space().probs()[argmin];
    std::vector<Density> family;
    family.reserve(points);
    for (std::size_t j = 0; j < points; ++j) {
        const double s = static_cast<double>(j) / static_cast<double>(points - 1);
        std::vector<double> q(xi.size(), s);
        q[argmin] += (1.0 - s) / p_min;
        family.emplace_back(xi.space(), std::move(q));
    }
    return family;
}

TruncatedMeanDualReport truncated_mean_dual_check(const RandomVariable& xi,
                                                  std::span<const Density> family) {
    if (family.empty()) throw InvariantError("family: density family must be nonempty");
    TruncatedMeanDualReport r;
    r.min_over_family = HUGE_VAL;
    for (const Density& q : family) {
        if (q.values().size() != xi.size()) throw InvariantError("family: density defined on a different space");
        const double penalty = 1.0 - *std::min_element(q.values().begin(), q.values().end());
        r.min_over_family = std::min(r.min_over_family, q.expectation(xi) + penalty);
    }
    const DiscreteDistribution f = law(xi);
    r.closed_form = std::min(mean(f), 1.0 + essinf(f));
    r.gap = r.min_over_family - r.closed_form;
    return r;
}

ConcavityReport concavity_check(const UtilityFunctional& u, const RandomVariable& xi,
                                const RandomVariable& eta, std::span<const double> lambdas) {
    if (!(xi.space() == eta.space())) throw InvariantError("eta: xi and eta live on different spaces");
    const double u_xi = u(law(xi));
    const double u_eta = u(law(eta));
    ConcavityReport report;
    report.max_shortfall = -HUGE_VAL;
    std::vector<double> mix(xi.size());
    for (double lambda : lambdas) {
        if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvariantError("lambdas: values must lie in [0, 1]");
        for (std::size_t s = 0; s < xi.size(); ++s) {
            mix[s] = lambda * xi.values()[s] + (1.0 - lambda) * eta.values()[s];
        }
        const double lhs = u(law(RandomVariable(xi.space(), mix)));
        const double rhs = lambda * u_xi + (1.0 - lambda) * u_eta;
        report.max_shortfall = std::max(report.max_shortfall, rhs - lhs);
        if (lhs < rhs - kConcavitySlack) report.violations.push_back({lambda, lhs, rhs});
    }
    return report;
}

ConditioningReport conditioning_check(const UtilityFunctional& u, const RandomVariable& xi,
                                      const Partition& part) {
    ConditioningReport r;
    r.lhs = u(law(condition(xi, part)));
    r.rhs = u(law(xi));
    r.holds = r.lhs >= r.rhs - kConditioningSlack;
    return r;
}

}  // namespace cxls
