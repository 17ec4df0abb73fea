#include <doctest.h>

#include <cmath>
#include <random>

#include "cxls/charax.hpp"
#include "cxls/error.hpp"
#include "oracles.hpp"
#include "witness.hpp"

using namespace cxls;
using U = UtilityFunctional;
using Loss = ExtendedLossFunction;

// ---------------------------------------------------------------------------
// curves and condition C
// ---------------------------------------------------------------------------

TEST_CASE("mixture curve examples") {
    const double grid[] = {0.25, 0.5, 0.75, 1.0};
    const auto c = mixture_curve(U::tvar(0.5), dirac(-1.0), dirac(1.0), grid);
    REQUIRE(c.size() == 4);
    CHECK(c[0].value == doctest::Approx(0.0));
    CHECK(c[1].value == doctest::Approx(-1.0));
    CHECK(c[2].value == doctest::Approx(-1.0));
    CHECK(c[3].value == doctest::Approx(-1.0));

    // mean is affine along the segment
    auto rng = trial_rng(31, 0);
    const auto f = random_distribution(rng);
    const auto g = random_distribution(rng);
    std::vector<double> lambdas;
    for (int i = 0; i <= 20; ++i) lambdas.push_back(i / 20.0);
    for (const auto& p : mixture_curve(U::mean(), f, g, lambdas)) {
        CHECK(std::abs(p.value - (p.lambda * mean(f) + (1 - p.lambda) * mean(g))) <= 1e-12);
    }
    const double bad[] = {1.5};
    CHECK_THROWS_AS(mixture_curve(U::mean(), f, g, bad), InvariantError);
}

TEST_CASE("condition C examples") {
    CHECK_FALSE(condition_c(U::essential_infimum(), -1.0, 1.0).holds);
    CHECK_FALSE(condition_c(U::essential_infimum(), -0.001, 5.0).alpha_max.has_value());

    const auto m = condition_c(U::mean(), -1.0, 1.0);
    REQUIRE(m.holds);
    CHECK(std::abs(*m.alpha_max - 0.5) <= 1e-9);

    const auto t = condition_c(U::tvar(0.5), -1.0, 1.0);
    REQUIRE(t.holds);
    CHECK(std::abs(*t.alpha_max - 0.25) <= 1e-9);

    // u(alpha_max delta_k + (1 - alpha_max) delta_a) = 0
    const auto e = condition_c(U::expectile(0.2), -3.0, 2.0);
    REQUIRE(e.holds);
    CHECK(std::abs(U::expectile(0.2)(dyadic(-3.0, 2.0, *e.alpha_max))) <= 1e-8);

    CHECK_FALSE(condition_c(U::truncated_mean(), -2.0, 1.0).holds);
    CHECK(condition_c(U::truncated_mean(), -0.5, 1.0).holds);
    CHECK_THROWS_AS(condition_c(U::mean(), 1.0, 2.0), PreconditionError);
}

TEST_CASE("property: condition C sets are prefix intervals, alpha_max monotone in k and a") {
    const double ks[] = {-8.0, -3.0, -1.5, -1.0, -0.7, -0.2, -0.01};
    const double as[] = {0.25, 0.5, 1.0, 2.0, 4.0};
    for (const auto& u : utility_registry()) {
        CAPTURE(u.name());
        for (double k : ks) {
            for (double a : as) {
                bool seen_negative = false;
                for (int i = 1; i <= 1024; ++i) {
                    const double alpha = i / 1025.0;
                    const bool accepted = u(dyadic(k, a, alpha)) >= 0.0;
                    if (!accepted) seen_negative = true;
                    CHECK_FALSE((accepted && seen_negative));
                }
            }
        }
        auto amax = [&](double k, double a) {
            const auto r = condition_c(u, k, a);
            return r.holds ? *r.alpha_max : 0.0;
        };
        for (double a : as) {
            for (std::size_t i = 0; i + 1 < std::size(ks); ++i) CHECK(amax(ks[i], a) <= amax(ks[i + 1], a) + 1e-9);
        }
        for (double k : ks) {
            for (std::size_t j = 0; j + 1 < std::size(as); ++j) CHECK(amax(k, as[j]) <= amax(k, as[j + 1]) + 1e-9);
        }
    }
}

TEST_CASE("property: dyadic curves are Lipschitz on [0.01, 1]") {
    const std::pair<double, double> pairs[] = {{-1.0, 1.0}, {-3.0, 1.0}, {-0.5, 2.0}, {0.5, 3.0}};
    std::vector<double> grid;
    for (int i = 10; i <= 1000; ++i) grid.push_back(i / 1000.0);
    for (const auto& u : utility_registry()) {
        CAPTURE(u.name());
        for (const auto& [x, y] : pairs) {
            const auto c = mixture_curve(u, dirac(x), dirac(y), grid);
            const double lipschitz = 200.0 * (y - x);
            for (std::size_t i = 0; i + 1 < c.size(); ++i) {
                CHECK(std::abs(c[i + 1].value - c[i].value) <= lipschitz * 1e-3);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// trichotomy and K
// ---------------------------------------------------------------------------

TEST_CASE("trichotomy examples") {
    const auto ks = default_probe_ks();
    const auto as = default_probe_as();
    CHECK(ks.size() == 41);
    CHECK(classify_trichotomy(U::essential_infimum(), ks, as).tag == Trichotomy::essential_infimum);
    for (double alpha : {0.05, 0.5, 1.0}) CHECK(classify_trichotomy(U::tvar(alpha), ks, as).tag == Trichotomy::wc_property);
    CHECK(classify_trichotomy(U::mean(), ks, as).tag == Trichotomy::wc_property);
    CHECK(classify_trichotomy(U::expectile(0.1), ks, as).tag == Trichotomy::wc_property);
    const auto tm = classify_trichotomy(U::truncated_mean(), ks, as);
    CHECK(tm.tag == Trichotomy::intermediate);
    REQUIRE(tm.failing.has_value());
    REQUIRE(tm.holding.has_value());
    CHECK_FALSE(condition_c(U::truncated_mean(), tm.failing->k, tm.failing->a).holds);
    CHECK(condition_c(U::truncated_mean(), tm.holding->k, tm.holding->a).holds);
    CHECK(std::string(to_string(Trichotomy::wc_property)) == "wc_property");

    const double short_ks[] = {-1.0, -2.0};
    CHECK_THROWS_AS(classify_trichotomy(U::mean(), short_ks, as), PreconditionError);
    const double no_one[] = {0.5, 2.0};
    CHECK_THROWS_AS(classify_trichotomy(U::mean(), ks, no_one), PreconditionError);
}

TEST_CASE("estimate_K examples") {
    CHECK(estimate_K(U::mean()).is_neg_inf());
    CHECK(estimate_K(U::tvar(0.3)).is_neg_inf());
    const auto k = estimate_K(U::truncated_mean());
    REQUIRE(k.is_finite());
    CHECK(std::abs(k.value() + 1.0) <= 1e-6);
    CHECK(k.value() >= -1.0);
    CHECK(std::abs(estimate_K(U::shortfall(Loss::log_shift(-2.0))).value() + 2.0) <= 1e-6);
    CHECK_THROWS_AS(estimate_K(U::essential_infimum()), PreconditionError);
}

TEST_CASE("property: trichotomy exclusivity and Weber's condition on the registry") {
    const auto ks = default_probe_ks();
    const auto as = default_probe_as();
    const auto pairs = default_robustness_pairs();
    for (const auto& u : utility_registry()) {
        CAPTURE(u.name());
        const auto v = classify_trichotomy(u, ks, as);
        CHECK(weber_condition(u, ks, as) == (v.tag == Trichotomy::wc_property));
        switch (v.tag) {
            case Trichotomy::wc_property:
                CHECK_FALSE(v.failing.has_value());
                for (const auto& p : pairs) CHECK(robustness_diagnostic(u, p.k, p.a).continuous_at_zero);
                break;
            case Trichotomy::essential_infimum:
                CHECK_FALSE(v.holding.has_value());
                for (std::uint64_t t = 0; t < 100; ++t) {
                    auto rng = trial_rng(32, t);
                    const auto f = random_distribution(rng);
                    CHECK(std::abs(u(f) - essinf(f)) <= 1e-9);
                }
                break;
            case Trichotomy::intermediate:
                CHECK(v.failing.has_value());
                CHECK(v.holding.has_value());
                break;
        }
    }
}

// ---------------------------------------------------------------------------
// reconstruction
// ---------------------------------------------------------------------------

TEST_CASE("reconstruction of the mean is the identity") {
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(-5.0 + 0.5 * i);
    const auto r = reconstruct_phi(U::mean(), grid);
    CHECK(r.k_hat.is_neg_inf());
    CHECK(r.k0 == -1.0);
    for (const auto& s : r.phi_grid) CHECK(std::abs(s.phi.value() - s.x) <= 1e-6);
    CHECK(r.consistent);
    CHECK(r.acceptance_agreement_rate == 1.0);

    // alpha(k, 1) = 1 / (1 - k)
    const LossReconstruction rec(U::mean());
    for (double k : {-4.0, -1.0, -0.25}) CHECK(std::abs(rec.alpha(k, 1.0) - 1.0 / (1.0 - k)) <= 1e-9);
}

TEST_CASE("reconstruction of expectiles") {
    for (double a : {0.1, 0.25, 0.4}) {
        const LossReconstruction rec(U::expectile(a));
        CHECK(rec.k_hat().is_neg_inf());
        CHECK(std::abs(rec(1.0).value() - 1.0) <= 1e-9);
        CHECK(rec(0.0).value() == 0.0);
        for (double x : {-4.0, -1.5, -0.3, 0.5, 2.0, 4.5}) {
            const double expect = x >= 0 ? x : (1 - a) / a * x;
            CHECK(std::abs(rec(x).value() - expect) <= 1e-6);
        }
    }
}

TEST_CASE("reconstruction of truncated losses") {
    const LossReconstruction tm(U::truncated_mean());
    CHECK(std::abs(tm.k_hat().value() + 1.0) <= 1e-6);
    CHECK(std::abs(tm.k0() + 0.5) <= 1e-6);
    CHECK(tm(-1.5).is_neg_inf());
    CHECK(std::abs(tm(-0.6).value() + 0.6) <= 1e-6);
    CHECK(std::abs(tm(1.0).value() - 1.0) <= 1e-9);
    CHECK(tm.expectation(DiscreteDistribution({-2.0, 5.0}, {0.1, 0.9})).is_neg_inf());
    CHECK_THROWS_AS(tm.alpha(-3.0, 1.0), PreconditionError);

    const LossReconstruction lg(U::shortfall(Loss::log_shift(-2.0)));
    const double scale = std::log(1.5);
    for (double x : {-1.9, -1.0, -0.4, 0.7, 3.0}) {
        CHECK(std::abs(lg(x).value() - (std::log(x + 2.0) - std::log(2.0)) / scale) <= 1e-5);
    }
    CHECK_THROWS_AS(reconstruct_phi(U::essential_infimum(), std::vector<double>{0.0}), PreconditionError);
}

// ---------------------------------------------------------------------------
// CxLS search and robustness
// ---------------------------------------------------------------------------

TEST_CASE("check_cxls: mean and shortfalls are clean, reports are reproducible") {
    const auto m = check_cxls(U::mean(), 500, 3);
    CHECK(m.violating_trials == 0);
    CHECK(m.seed == 3);
    CHECK(m.trials == 500);

    const auto a = check_cxls(U::tvar(0.5), 200, 9);
    const auto b = check_cxls(U::tvar(0.5), 200, 9);
    CHECK(a.violating_trials > 0);
    CHECK(a.violating_trials == b.violating_trials);
    CHECK(a.max_deviation == b.max_deviation);
    REQUIRE(a.violations.size() == b.violations.size());
    for (std::size_t i = 0; i < a.violations.size(); ++i) {
        CHECK(a.violations[i].trial == b.violations[i].trial);
        CHECK(a.violations[i].f == b.violations[i].f);
        CHECK(a.violations[i].g == b.violations[i].g);
    }
    CHECK(a.violations.size() <= 16);
}

TEST_CASE("frozen TVaR witness") {
    const auto u = U::tvar(witness::kTvarAlpha);
    const auto f = witness::tvar_f();
    const auto g = witness::tvar_g();
    CHECK(std::abs(oracle::tvar_ru(f, 0.5) - oracle::tvar_ru(g, 0.5)) <= 1e-9);
    const auto mix = mixture(f, g, witness::kTvarLambda);
    CHECK(std::abs(oracle::tvar_ru(mix, 0.5) - oracle::tvar_ru(f, 0.5)) > 1e-3);
    CHECK(cxls_deviation(u, f, g) > 1e-3);
}

TEST_CASE("robustness examples") {
    const auto t = robustness_diagnostic(U::tvar(0.5), -1.0, 1.0);
    CHECK(t.continuous_at_zero);
    CHECK(t.sequence.size() == 40);
    CHECK(t.sequence.front().lambda == 0.5);
    CHECK(t.sequence.back().lambda == std::ldexp(1.0, -40));

    const auto tm = robustness_diagnostic(U::truncated_mean(), -3.0, 1.0);
    CHECK_FALSE(tm.continuous_at_zero);
    CHECK(std::abs(tm.limit_estimate + 2.0) <= 1e-9);
    CHECK(tm.value_at_y == 1.0);

    const auto ei = robustness_diagnostic(U::essential_infimum(), -1.0, 1.0);
    CHECK_FALSE(ei.continuous_at_zero);
    CHECK(ei.limit_estimate == -1.0);
    CHECK_THROWS_AS(robustness_diagnostic(U::mean(), 1.0, 1.0), PreconditionError);
}

TEST_CASE("diagnose bundles the verdict") {
    const auto ks = default_probe_ks();
    const auto as = default_probe_as();
    const auto pairs = default_robustness_pairs();
    const auto d = diagnose(U::truncated_mean(), ks, as, pairs);
    CHECK(d.verdict.tag == Trichotomy::intermediate);
    CHECK_FALSE(d.weber);
    REQUIRE(d.k_hat.has_value());
    CHECK(std::abs(d.k_hat->value() + 1.0) <= 1e-6);
    CHECK_FALSE(d.all_continuous);

    const auto e = diagnose(U::essential_infimum(), ks, as, pairs);
    CHECK(e.verdict.tag == Trichotomy::essential_infimum);
    CHECK_FALSE(e.k_hat.has_value());
}
