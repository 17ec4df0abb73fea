#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cxls/dist.hpp"
#include "cxls/loss.hpp"

namespace cxls {

/// Tail Value-at-Risk: (1/alpha) * integral_0^alpha q_x(F) dx, and essinf(F)
/// at alpha = 0. Exact: sorted cumulative weights with one fractional atom.
double tvar(const DiscreteDistribution& f, double alpha);

/// One mixing measure nu over TVaR levels plus its penalty.
struct KusuokaComponent {
    std::vector<double> levels;   // in [0, 1]
    std::vector<double> weights;  // positive, sum to 1
    double penalty = 0.0;         // >= 0
};

/// Finite Kusuoka representation u(F) = min_i sum_j w_ij tvar(F, a_ij) + c_i.
class KusuokaSpec {
public:
    /// Throws InvariantError unless each component is a probability on [0,1],
    /// penalties are nonnegative and the smallest penalty is 0.
    explicit KusuokaSpec(std::vector<KusuokaComponent> components);

    const std::vector<KusuokaComponent>& components() const { return components_; }

    /// No component charges the level 0 (essinf) with finite penalty.
    bool has_wc_form() const;

private:
    std::vector<KusuokaComponent> components_;
};

double kusuoka_eval(const KusuokaSpec& spec, const DiscreteDistribution& f);

/// Generalized shortfall sup{m : E_F[phi_bar(X - m)] >= 0}.
///
/// g(m) = E[phi_bar(X - m)] is nonincreasing, so the boundary is found by
/// bisection on [essinf - B, max support] down to width 1e-10, where B makes
/// every atom land in the finite region at the left end. Throws NumericError
/// after 200 halvings.
double shortfall_eval(const ExtendedLossFunction& phi, const DiscreteDistribution& f);

/// E_F[phi_bar(X - m)], symbolic -inf as soon as one atom falls below the
/// finite region.
ExtendedReal expected_loss(const ExtendedLossFunction& phi, const DiscreteDistribution& f,
                           double m = 0.0);

/// Expectile at alpha in (0, 1/2]: the m solving
/// alpha * E[(X-m)^+] = (1-alpha) * E[(m-X)^+]. Bisection to 1e-10.
double expectile(const DiscreteDistribution& f, double alpha);

/// min(E[X], essinf(X) - K): the shortfall of phi_bar(x) = x truncated at K.
double truncated_mean_eval(const DiscreteDistribution& f, double truncation = -1.0);

/// A law-determined monetary utility that can be evaluated on distributions.
/// Cheap to copy; immutable.
class UtilityFunctional {
public:
    struct Tvar { double alpha; };
    struct Kusuoka { KusuokaSpec spec; };
    struct Shortfall { ExtendedLossFunction loss; };
    struct Expectile { double alpha; };
    struct EssentialInfimum {};
    struct TruncatedMean { double truncation; };
    struct Mean {};
    struct Custom {
        std::string name;
        std::function<double(const DiscreteDistribution&)> fn;
    };

    using Kind = std::variant<Tvar, Kusuoka, Shortfall, Expectile, EssentialInfimum, TruncatedMean,
                              Mean, Custom>;

    static UtilityFunctional tvar(double alpha);
    static UtilityFunctional kusuoka(KusuokaSpec spec);
    static UtilityFunctional shortfall(ExtendedLossFunction loss);
    static UtilityFunctional expectile(double alpha);
    static UtilityFunctional essential_infimum();
    static UtilityFunctional truncated_mean(double truncation = -1.0);
    static UtilityFunctional mean();
    /// User-composed functional. Nothing about it is checked; the caller vouches
    /// for whatever properties the analysis needs.
    static UtilityFunctional custom(std::string name,
                                    std::function<double(const DiscreteDistribution&)> fn);

    double operator()(const DiscreteDistribution& f) const { return evaluate(f); }
    double evaluate(const DiscreteDistribution& f) const;

    const Kind& kind() const { return *kind_; }
    std::string name() const;

    /// The loss if this is a shortfall (including expectile, mean and
    /// truncated mean, which are shortfalls in closed form); empty otherwise.
    std::optional<ExtendedLossFunction> as_shortfall_loss() const;

private:
    explicit UtilityFunctional(Kind k) : kind_(std::make_shared<const Kind>(std::move(k))) {}
    std::shared_ptr<const Kind> kind_;
};

/// The built-in catalogue used by diagnostics and the acceptance suite:
/// essinf, mean, TVaR at several levels, expectiles, the truncated mean, two
/// Kusuoka mixtures and the shortfalls of the worked loss-function examples.
std::vector<UtilityFunctional> utility_registry();

}  // namespace cxls
