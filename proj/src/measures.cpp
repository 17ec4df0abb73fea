#include "cxls/measures.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cxls/error.hpp"

namespace cxls {

namespace {

constexpr double kRootWidth = 1e-10;
constexpr int kMaxHalvings = 200;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string fmt_num(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

/// Largest m in [lo, hi] with accept(m), given accept(lo) and accept is
/// monotone (true then false). Returns the midpoint of the final bracket.
template <class Accept>
double bisect_boundary(double lo, double hi, Accept accept, const char* what) {
    if (accept(hi)) return hi;
    int steps = 0;
    while (hi - lo > kRootWidth) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;  // bracket at machine resolution
        if (accept(mid)) lo = mid;
        else hi = mid;
        if (++steps > kMaxHalvings) {
            throw NumericError(std::string(what) + ": bisection did not converge in 200 steps");
        }
    }
    return lo + 0.5 * (hi - lo);
}

}  // namespace

double tvar(const DiscreteDistribution& f, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvariantError("alpha: TVaR level must lie in [0, 1]");
    if (alpha == 0.0) return essinf(f);
    double remaining = alpha;
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size() && remaining > 0.0; ++i) {
        const double take = std::min(f.probs()[i], remaining);
        acc += take * f.points()[i];
        remaining -= take;
    }
    return acc / alpha;
}

KusuokaSpec::KusuokaSpec(std::vector<KusuokaComponent> components)
    : components_(std::move(components)) {
    if (components_.empty()) throw InvariantError("components: need at least one component");
    double min_penalty = HUGE_VAL;
    for (const auto& c : components_) {
        if (c.levels.empty() || c.levels.size() != c.weights.size()) {
            throw InvariantError("components.levels: levels and weights must be nonempty and of equal length");
        }
        double total = 0.0;
        for (std::size_t j = 0; j < c.levels.size(); ++j) {
            if (!(c.levels[j] >= 0.0 && c.levels[j] <= 1.0)) {
                throw InvariantError("components.levels: levels must lie in [0, 1]");
            }
            if (!(c.weights[j] > 0.0) || !std::isfinite(c.weights[j])) {
                throw InvariantError("components.weights: weights must be positive");
            }
            total += c.weights[j];
        }
        if (std::abs(total - 1.0) > DiscreteDistribution::kMassTolerance) {
            throw InvariantError("components.weights: weights must sum to 1");
        }
        if (!(c.penalty >= 0.0) || !std::isfinite(c.penalty)) {
            throw InvariantError("components.penalty: penalty must be finite and >= 0");
        }
        min_penalty = std::min(min_penalty, c.penalty);
    }
    if (min_penalty != 0.0) throw InvariantError("components.penalty: smallest penalty must be 0");
}

bool KusuokaSpec::has_wc_form() const {
    for (const auto& c : components_) {
        for (double level : c.levels) {
            if (level == 0.0) return false;
        }
    }
    return true;
}

double kusuoka_eval(const KusuokaSpec& spec, const DiscreteDistribution& f) {
    double best = HUGE_VAL;
    for (const auto& c : spec.components()) {
        double v = c.penalty;
        for (std::size_t j = 0; j < c.levels.size(); ++j) v += c.weights[j] * tvar(f, c.levels[j]);
        best = std::min(best, v);
    }
    return best;
}

ExtendedReal expected_loss(const ExtendedLossFunction& phi, const DiscreteDistribution& f,
                           double m) {
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const ExtendedReal v = phi(f.points()[i] - m);
        if (v.is_neg_inf()) return ExtendedReal::neg_inf();
        acc += f.probs()[i] * v.value();
    }
    return acc;
}

double shortfall_eval(const ExtendedLossFunction& phi, const DiscreteDistribution& f) {
    const ExtendedReal k = phi.truncation();
    const double margin = k.is_finite() ? -k.value() + 1.0 : (f.max_point() - f.min_point()) + 1.0;
    const double lo = f.min_point() - margin;
    double hi = f.max_point();
    if (k.is_finite()) {
        // past this m the smallest atom drops below K
        const double edge = f.min_point() - k.value();
        if (edge < hi) {
            if (expected_loss(phi, f, edge) >= ExtendedReal(0.0)) return edge;
            hi = edge;
        }
    }
    return bisect_boundary(
        lo, hi, [&](double m) { return expected_loss(phi, f, m) >= ExtendedReal(0.0); }, "shortfall");
}

double expectile(const DiscreteDistribution& f, double alpha) {
    if (!(alpha > 0.0 && alpha <= 0.5)) throw InvariantError("alpha: expectile level must lie in (0, 0.5]");
    auto balance = [&](double m) {
        double gains = 0.0;
        double losses = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double d = f.points()[i] - m;
            if (d > 0.0) gains += f.probs()[i] * d;
            else losses -= f.probs()[i] * d;
        }
        return alpha * gains - (1.0 - alpha) * losses;
    };
    return bisect_boundary(
        f.min_point(), f.max_point(), [&](double m) { return balance(m) >= 0.0; }, "expectile");
}

double truncated_mean_eval(const DiscreteDistribution& f, double truncation) {
    return std::min(mean(f), essinf(f) - truncation);
}

UtilityFunctional UtilityFunctional::tvar(double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvariantError("alpha: TVaR level must lie in [0, 1]");
    return UtilityFunctional(Tvar{alpha});
}

UtilityFunctional UtilityFunctional::kusuoka(KusuokaSpec spec) {
    return UtilityFunctional(Kusuoka{std::move(spec)});
}

UtilityFunctional UtilityFunctional::shortfall(ExtendedLossFunction loss) {
    return UtilityFunctional(Shortfall{std::move(loss)});
}

UtilityFunctional UtilityFunctional::expectile(double alpha) {
    if (!(alpha > 0.0 && alpha <= 0.5)) throw InvariantError("alpha: expectile level must lie in (0, 0.5]");
    return UtilityFunctional(Expectile{alpha});
}

UtilityFunctional UtilityFunctional::essential_infimum() { return UtilityFunctional(EssentialInfimum{}); }

UtilityFunctional UtilityFunctional::truncated_mean(double truncation) {
    if (!(truncation <= 0.0) || !std::isfinite(truncation)) {
        throw InvariantError("K: truncated mean needs a finite K <= 0");
    }
    return UtilityFunctional(TruncatedMean{truncation});
}

UtilityFunctional UtilityFunctional::mean() { return UtilityFunctional(Mean{}); }

UtilityFunctional UtilityFunctional::custom(std::string name,
                                            std::function<double(const DiscreteDistribution&)> fn) {
    return UtilityFunctional(Custom{std::move(name), std::move(fn)});
}

double UtilityFunctional::evaluate(const DiscreteDistribution& f) const {
    return std::visit(
        overloaded{
            [&](const Tvar& k) { return cxls::tvar(f, k.alpha); },
            [&](const Kusuoka& k) { return kusuoka_eval(k.spec, f); },
            [&](const Shortfall& k) { return shortfall_eval(k.loss, f); },
            [&](const Expectile& k) { return cxls::expectile(f, k.alpha); },
            [&](const EssentialInfimum&) { return essinf(f); },
            [&](const TruncatedMean& k) { return truncated_mean_eval(f, k.truncation); },
            [&](const Mean&) { return cxls::mean(f); },
            [&](const Custom& k) { return k.fn(f); },
        },
        *kind_);
}

std::string UtilityFunctional::name() const {
    return std::visit(
        overloaded{
            [](const Tvar& k) { return "tvar(" + fmt_num(k.alpha) + ")"; },
            [](const Kusuoka& k) {
                return "kusuoka(" + std::to_string(k.spec.components().size()) + " components" +
                       (k.spec.has_wc_form() ? ")" : ", level 0 charged)");
            },
            [](const Shortfall& k) { return "shortfall(" + k.loss.describe() + ")"; },
            [](const Expectile& k) { return "expectile(" + fmt_num(k.alpha) + ")"; },
            [](const EssentialInfimum&) { return std::string("essinf"); },
            [](const TruncatedMean& k) { return "truncated_mean(K=" + fmt_num(k.truncation) + ")"; },
            [](const Mean&) { return std::string("mean"); },
            [](const Custom& k) { return k.name; },
        },
        *kind_);
}

std::optional<ExtendedLossFunction> UtilityFunctional::as_shortfall_loss() const {
    using Loss = ExtendedLossFunction;
    return std::visit(
        overloaded{
            [](const Shortfall& k) -> std::optional<Loss> { return k.loss; },
            [](const Expectile& k) -> std::optional<Loss> { return Loss::expectile(k.alpha); },
            [](const EssentialInfimum&) -> std::optional<Loss> {
                return Loss::zero_above_linear_below();
            },
            [](const TruncatedMean& k) -> std::optional<Loss> { return Loss::linear(k.truncation); },
            [](const Mean&) -> std::optional<Loss> { return Loss::linear(); },
            [](const auto&) -> std::optional<Loss> { return std::nullopt; },
        },
        *kind_);
}

std::vector<UtilityFunctional> utility_registry() {
    using U = UtilityFunctional;
    using Loss = ExtendedLossFunction;
    return {
        U::essential_infimum(),
        U::mean(),
        U::tvar(0.1),
        U::tvar(0.5),
        U::tvar(0.9),
        U::expectile(0.1),
        U::expectile(0.25),
        U::expectile(0.5),
        U::truncated_mean(-1.0),
        // min(E, essinf + 1/2): charges level 0 with a finite penalty.
        U::kusuoka(KusuokaSpec({{{1.0}, {1.0}, 0.0}, {{0.0}, {1.0}, 0.5}})),
        U::kusuoka(KusuokaSpec({{{0.25, 1.0}, {0.5, 0.5}, 0.0}, {{0.1}, {1.0}, 0.3}})),
        U::shortfall(Loss::linear()),
        U::shortfall(Loss::expectile(0.25)),
        U::shortfall(Loss::piecewise({{-3.0, -5.0}, {-1.0, -1.0}, {4.0, 4.0}}, -2.5)),
        U::shortfall(Loss::log_shift(-2.0)),
        U::shortfall(Loss::sqrt_shift(-1.0)),
        U::shortfall(Loss::zero_above_linear_below()),
    };
}

}  // namespace cxls
