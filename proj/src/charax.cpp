#include "cxls/charax.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cxls/error.hpp"
#include "parallel.hpp"

namespace cxls {

namespace {

constexpr double kAlphaFloor = 1e-12;
constexpr double kAlphaWidth = 1e-10;
constexpr double kKWidth = 1e-8;
constexpr double kKUpperProbe = -1.0 / 1048576.0;  // -2^-20
constexpr int kRobustnessSteps = 40;
constexpr double kJumpTolerance = 1e-6;

bool contains(std::span<const double> xs, double v) {
    return std::find(xs.begin(), xs.end(), v) != xs.end();
}

}  // namespace

DiscreteDistribution random_distribution(std::mt19937_64& rng, const RandomDistributionConfig& cfg) {
    std::uniform_int_distribution<std::size_t> count(cfg.min_atoms, cfg.max_atoms);
    std::uniform_real_distribution<double> point(cfg.lo, cfg.hi);
    std::exponential_distribution<double> weight(1.0);
    const std::size_t n = count(rng);
    std::vector<double> xs(n);
    std::vector<double> ws(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = point(rng);
        ws[i] = weight(rng);
        total += ws[i];
    }
    for (double& w : ws) w /= total;
    return DiscreteDistribution(std::move(xs), std::move(ws));
}

std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

std::vector<CurvePoint> mixture_curve(const UtilityFunctional& u, const DiscreteDistribution& f,
                                      const DiscreteDistribution& g, std::span<const double> grid) {
    std::vector<CurvePoint> out;
    out.reserve(grid.size());
    for (double lambda : grid) out.push_back({lambda, u(mixture(f, g, lambda))});
    return out;
}

DiscreteDistribution dyadic(double k, double a, double alpha) {
    return DiscreteDistribution({k, a}, {alpha, 1.0 - alpha});
}

ConditionCResult condition_c(const UtilityFunctional& u, double k, double a) {
    if (!(k < 0.0 && a > 0.0)) throw PreconditionError("k, a: condition C needs k < 0 < a");
    auto accept = [&](double alpha) { return u(dyadic(k, a, alpha)) >= 0.0; };
    if (!accept(kAlphaFloor)) return {false, std::nullopt};
    double lo = kAlphaFloor;
    double hi = 1.0;
    if (accept(hi)) return {true, 1.0};
    while (hi - lo > kAlphaWidth) {
        const double mid = lo + 0.5 * (hi - lo);
        if (accept(mid)) lo = mid;
        else hi = mid;
    }
    return {true, lo};
}

const char* to_string(Trichotomy t) {
    switch (t) {
        case Trichotomy::essential_infimum: return "essential_infimum";
        case Trichotomy::wc_property: return "wc_property";
        case Trichotomy::intermediate: return "intermediate";
    }
    return "?";
}

std::vector<double> default_probe_ks() {
    std::vector<double> ks;
    for (int j = 20; j >= 1; --j) ks.push_back(-std::ldexp(1.0, -j));
    for (int j = 0; j <= 20; ++j) ks.push_back(-std::ldexp(1.0, j));
    return ks;
}

std::vector<double> default_probe_as() { return {0.5, 1.0, 2.0}; }

TrichotomyVerdict classify_trichotomy(const UtilityFunctional& u, std::span<const double> ks,
                                      std::span<const double> as) {
    for (int j = 0; j <= 20; ++j) {
        const double k = -std::ldexp(1.0, j);
        if (!contains(ks, k)) {
            throw PreconditionError("probe_ks: must contain -2^j for j = 0..20 (missing " +
                                    std::to_string(k) + ")");
        }
    }
    if (!contains(as, 1.0)) throw PreconditionError("probe_as: must contain 1");

    std::vector<ProbePair> pairs;
    for (double k : ks) {
        for (double a : as) pairs.push_back({k, a});
    }
    std::vector<char> holds(pairs.size());
    detail::parallel_for(pairs.size(),
                         [&](std::size_t i) { holds[i] = condition_c(u, pairs[i].k, pairs[i].a).holds; });

    TrichotomyVerdict v;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (holds[i] && !v.holding) v.holding = pairs[i];
        if (!holds[i] && !v.failing) v.failing = pairs[i];
    }
    if (!v.holding) v.tag = Trichotomy::essential_infimum;
    else if (!v.failing) v.tag = Trichotomy::wc_property;
    else v.tag = Trichotomy::intermediate;
    return v;
}

bool weber_condition(const UtilityFunctional& u, std::span<const double> ks,
                     std::span<const double> as) {
    for (double a : as) {
        const bool all = std::all_of(ks.begin(), ks.end(),
                                     [&](double k) { return condition_c(u, k, a).holds; });
        if (all) return true;
    }
    return false;
}

ExtendedReal estimate_K(const UtilityFunctional& u) {
    auto holds = [&](double k) { return condition_c(u, k, 1.0).holds; };
    if (holds(kKHorizon)) return ExtendedReal::neg_inf();
    double hi = kKUpperProbe;
    if (!holds(hi)) {
        throw PreconditionError(
            "utility: condition C fails at every probe; it behaves as the essential infimum and has "
            "no finite truncation point");
    }
    double lo = kKHorizon;
    while (hi - lo > kKWidth) {
        const double mid = lo + 0.5 * (hi - lo);
        if (holds(mid)) hi = mid;
        else lo = mid;
    }
    return hi;
}

LossReconstruction::LossReconstruction(UtilityFunctional u)
    : LossReconstruction(u, estimate_K(u)) {}

LossReconstruction::LossReconstruction(UtilityFunctional u, ExtendedReal k_hat)
    : u_(std::move(u)), k_hat_(k_hat) {
    k0_ = k_hat_.is_finite() ? 0.5 * k_hat_.value() : -1.0;
    const ConditionCResult c = condition_c(u_, k0_, 1.0);
    if (!c.holds) {
        throw PreconditionError("K_hat: condition C fails at the reference point (k0, 1); "
                                "the truncation estimate is inconsistent");
    }
    phi_k0_ = 1.0 - 1.0 / *c.alpha_max;
}

double LossReconstruction::alpha(double k, double a) const {
    const ConditionCResult c = condition_c(u_, k, a);
    if (!c.holds) {
        throw PreconditionError("k: condition C fails at k = " + std::to_string(k) +
                                ", a = " + std::to_string(a));
    }
    return *c.alpha_max;
}

ExtendedReal LossReconstruction::operator()(double x) const {
    if (k_hat_.is_finite() && x <= k_hat_.value()) return ExtendedReal::neg_inf();
    if (x == 0.0) return 0.0;
    if (x < 0.0) return 1.0 - 1.0 / alpha(x, 1.0);
    return phi_k0_ * (1.0 + 1.0 / (alpha(k0_, x) - 1.0));
}

ExtendedReal LossReconstruction::expectation(const DiscreteDistribution& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const ExtendedReal v = (*this)(f.points()[i]);
        if (v.is_neg_inf()) return ExtendedReal::neg_inf();
        acc += f.probs()[i] * v.value();
    }
    return acc;
}

ReconstructionReport reconstruct_phi(const UtilityFunctional& u, std::span<const double> grid,
                                     const ReconstructionOptions& options) {
    const LossReconstruction rec(u);
    ReconstructionReport report;
    report.k_hat = rec.k_hat();
    report.k0 = rec.k0();
    report.seed = options.seed;

    report.phi_grid.resize(grid.size());
    detail::parallel_for(grid.size(), [&](std::size_t i) { report.phi_grid[i] = {grid[i], rec(grid[i])}; });

    // Dyadic consistency on a (k, a) grid strictly inside (K_hat, 0) x (0, box_hi].
    const std::size_t n = options.residual_grid;
    const double k_lo = report.k_hat.is_finite() ? report.k_hat.value() : options.box_lo_untruncated;
    for (std::size_t i = 0; i < n; ++i) {
        report.residual_ks.push_back(k_lo * (1.0 - static_cast<double>(i + 1) / static_cast<double>(n + 1)));
        report.residual_as.push_back(options.box_hi * static_cast<double>(i + 1) / static_cast<double>(n));
    }
    std::vector<double> residuals(n * n, 0.0);
    detail::parallel_for(n * n, [&](std::size_t idx) {
        const double k = report.residual_ks[idx / n];
        const double a = report.residual_as[idx % n];
        const double al = rec.alpha(k, a);
        residuals[idx] = std::abs(al * rec(k).value() + (1.0 - al) * rec(a).value());
    });
    for (double r : residuals) report.max_consistency_residual = std::max(report.max_consistency_residual, r);
    report.consistent = report.max_consistency_residual <= options.residual_tolerance;

    // Acceptance-set agreement on random xi supported above K_hat.
    RandomDistributionConfig box;
    box.lo = report.k_hat.is_finite() ? report.k_hat.value() + options.truncation_margin
                                      : options.box_lo_untruncated;
    box.hi = options.box_hi;
    enum Outcome : char { agree, disagree, tie };
    std::vector<char> outcomes(options.agreement_trials);
    detail::parallel_for(options.agreement_trials, [&](std::size_t t) {
        auto rng = trial_rng(options.seed, t);
        const DiscreteDistribution xi = random_distribution(rng, box);
        const double e = rec.expectation(xi).value();
        if (std::abs(e) <= options.agreement_margin) {
            outcomes[t] = tie;
            return;
        }
        outcomes[t] = ((u(xi) >= 0.0) == (e > 0.0)) ? agree : disagree;
    });
    std::size_t agreed = 0;
    for (char o : outcomes) {
        if (o == tie) ++report.boundary_ties;
        if (o == agree) ++agreed;
    }
    report.agreement_trials = options.agreement_trials;
    const std::size_t decided = options.agreement_trials - report.boundary_ties;
    report.acceptance_agreement_rate =
        decided == 0 ? 1.0 : static_cast<double>(agreed) / static_cast<double>(decided);
    return report;
}

double cxls_deviation(const UtilityFunctional& u, const DiscreteDistribution& f,
                      const DiscreteDistribution& g, std::size_t lambda_points, double* worst_lambda) {
    const double uf = u(f);
    const DiscreteDistribution g_level = shift(g, uf - u(g));
    double worst = 0.0;
    double at = 0.0;
    for (std::size_t j = 1; j <= lambda_points; ++j) {
        const double lambda = static_cast<double>(j) / static_cast<double>(lambda_points + 1);
        const double dev = std::abs(u(mixture(f, g_level, lambda)) - uf);
        if (dev > worst) {
            worst = dev;
            at = lambda;
        }
    }
    if (worst_lambda) *worst_lambda = at;
    return worst;
}

CxlsReport check_cxls(const UtilityFunctional& u, std::size_t trials, std::uint64_t seed,
                      const CxlsOptions& options) {
    struct TrialResult {
        double deviation = 0.0;
        double lambda = 0.0;
    };
    std::vector<TrialResult> results(trials);
    detail::parallel_for(trials, [&](std::size_t t) {
        auto rng = trial_rng(seed, t);
        const DiscreteDistribution f = random_distribution(rng, options.sampling);
        const DiscreteDistribution g = random_distribution(rng, options.sampling);
        results[t].deviation = cxls_deviation(u, f, g, options.lambda_points, &results[t].lambda);
    });

    CxlsReport report;
    report.seed = seed;
    report.trials = trials;
    for (std::size_t t = 0; t < trials; ++t) {
        report.max_deviation = std::max(report.max_deviation, results[t].deviation);
        if (results[t].deviation <= options.tolerance) continue;
        ++report.violating_trials;
        if (report.violations.size() < options.max_recorded) {
            // Regenerate the pair; cheaper than keeping every trial's distributions alive.
            auto rng = trial_rng(seed, t);
            DiscreteDistribution f = random_distribution(rng, options.sampling);
            DiscreteDistribution g = random_distribution(rng, options.sampling);
            DiscreteDistribution g_level = shift(g, u(f) - u(g));
            report.violations.push_back(
                {t, std::move(f), std::move(g_level), results[t].lambda, results[t].deviation});
        }
    }
    return report;
}

RobustnessReport robustness_diagnostic(const UtilityFunctional& u, double x, double y) {
    if (!(x < y)) throw PreconditionError("x, y: robustness diagnostic needs x < y");
    RobustnessReport r;
    r.x = x;
    r.y = y;
    for (int j = 1; j <= kRobustnessSteps; ++j) {
        const double lambda = std::ldexp(1.0, -j);
        r.sequence.push_back({lambda, u(dyadic(x, y, lambda))});
    }
    r.limit_estimate = r.sequence.back().value;
    r.value_at_y = u(dirac(y));
    r.continuous_at_zero = std::abs(r.limit_estimate - r.value_at_y) <= kJumpTolerance;
    return r;
}

std::vector<ProbePair> default_robustness_pairs() {
    std::vector<ProbePair> pairs;
    for (double x : {-1.0, -2.0, -3.0, -4.0, -8.0, -16.0}) {
        for (double y : {0.5, 1.0, 2.0}) pairs.push_back({x, y});
    }
    return pairs;
}

Diagnosis diagnose(const UtilityFunctional& u, std::span<const double> ks,
                   std::span<const double> as, std::span<const ProbePair> robustness_pairs) {
    Diagnosis d;
    d.verdict = classify_trichotomy(u, ks, as);
    d.weber = weber_condition(u, ks, as);
    if (d.verdict.tag != Trichotomy::essential_infimum) {
        try {
            d.k_hat = estimate_K(u);
        } catch (const PreconditionError&) {
            d.k_hat.reset();
        }
    }
    d.robustness.resize(robustness_pairs.size());
    detail::parallel_for(robustness_pairs.size(), [&](std::size_t i) {
        d.robustness[i] = robustness_diagnostic(u, robustness_pairs[i].k, robustness_pairs[i].a);
    });
    d.all_continuous = std::all_of(d.robustness.begin(), d.robustness.end(),
                                   [](const RobustnessReport& r) { return r.continuous_at_zero; });
    return d;
}

}  // namespace cxls
