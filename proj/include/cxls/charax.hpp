#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "cxls/dist.hpp"
#include "cxls/extended_real.hpp"
#include "cxls/measures.hpp"

namespace cxls {

// ---------------------------------------------------------------------------
// Random test distributions
// ---------------------------------------------------------------------------

/// Supports of size [min_atoms, max_atoms] drawn uniformly in [lo, hi),
/// weights from a flat Dirichlet draw.
struct RandomDistributionConfig {
    std::size_t min_atoms = 2;
    std::size_t max_atoms = 8;
    double lo = -5.0;
    double hi = 5.0;
};

DiscreteDistribution random_distribution(std::mt19937_64& rng,
                                         const RandomDistributionConfig& cfg = {});

/// Generator for trial `index` of a run seeded with `seed`. Independent of
/// evaluation order, so parallel sweeps stay bit-reproducible.
std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t index);

// ---------------------------------------------------------------------------
// Mixture curves and condition C
// ---------------------------------------------------------------------------

struct CurvePoint {
    double lambda;
    double value;
};

/// lambda -> u(lambda F + (1 - lambda) G) on the given grid (each in [0,1]).
std::vector<CurvePoint> mixture_curve(const UtilityFunctional& u, const DiscreteDistribution& f,
                                      const DiscreteDistribution& g, std::span<const double> grid);

/// alpha delta_k + (1 - alpha) delta_a.
DiscreteDistribution dyadic(double k, double a, double alpha);

struct ConditionCResult {
    bool holds = false;
    /// Largest alpha with u(alpha delta_k + (1-alpha) delta_a) >= 0; present iff holds.
    std::optional<double> alpha_max;
};

/// Condition C at (k, a), k < 0 < a. The map alpha -> u(dyadic(k, a, alpha))
/// is nonincreasing, so its zero-crossing is bisected to 1e-10. Fails when u
/// is already negative at alpha = 1e-12.
ConditionCResult condition_c(const UtilityFunctional& u, double k, double a);

// ---------------------------------------------------------------------------
// Trichotomy
// ---------------------------------------------------------------------------

enum class Trichotomy { essential_infimum, wc_property, intermediate };

const char* to_string(Trichotomy t);

struct ProbePair {
    double k;
    double a;
};

struct TrichotomyVerdict {
    Trichotomy tag = Trichotomy::essential_infimum;
    std::optional<ProbePair> failing;  // a probe where condition C fails
    std::optional<ProbePair> holding;  // a probe where condition C holds
};

/// {-2^j : j = -20..20}. The negative powers reach truncation points in (-1, 0).
std::vector<double> default_probe_ks();
/// {0.5, 1, 2}.
std::vector<double> default_probe_as();

/// Runs condition C on the probe grid ks x as. The grid must contain
/// {-2^j : j = 0..20} x {1}; throws PreconditionError otherwise.
TrichotomyVerdict classify_trichotomy(const UtilityFunctional& u, std::span<const double> ks,
                                      std::span<const double> as);

/// Weber's condition on the probe grid: some a0 in `as` makes condition C
/// hold for (k, a0) at every k in `ks`.
bool weber_condition(const UtilityFunctional& u, std::span<const double> ks,
                     std::span<const double> as);

// ---------------------------------------------------------------------------
// Truncation point and loss reconstruction
// ---------------------------------------------------------------------------

/// Horizon standing in for -inf: condition C at k = -2^20 means K = -inf.
inline constexpr double kKHorizon = -1048576.0;

/// K = inf{k < 0 : condition C holds at (k, 1)}, by bisection on k to 1e-8.
/// Returns -inf when condition C holds at -2^20. Only meaningful for CxLS
/// utilities (collapsing "for all a" to a = 1 needs CxLS). Throws
/// PreconditionError when condition C fails even at k = -2^-20, i.e. the
/// utility behaves as the essential infimum.
ExtendedReal estimate_K(const UtilityFunctional& u);

/// Pointwise reconstruction of the loss function of a CxLS utility from
/// evaluations of u on two-point distributions:
///     phi(0) = 0,
///     phi(k) = 1 - 1/alpha(k, 1)                       for K < k < 0,
///     phi(a) = phi(k0) * (1 + 1/(alpha(k0, a) - 1))    for a > 0,
/// with reference point k0 = K/2 (or -1 when K = -inf). phi(1) = 1.
class LossReconstruction {
public:
    /// Estimates K. Throws PreconditionError if condition C fails at (k0, 1).
    explicit LossReconstruction(UtilityFunctional u);
    LossReconstruction(UtilityFunctional u, ExtendedReal k_hat);

    ExtendedReal k_hat() const { return k_hat_; }
    double k0() const { return k0_; }
    double phi_k0() const { return phi_k0_; }

    /// alpha(k, a) = max C(k, a); throws PreconditionError if C(k, a) is empty.
    double alpha(double k, double a) const;

    /// phi_hat(x); -inf for x <= K_hat.
    ExtendedReal operator()(double x) const;

    /// E[phi_hat(X)] under F.
    ExtendedReal expectation(const DiscreteDistribution& f) const;

private:
    UtilityFunctional u_;
    ExtendedReal k_hat_;
    double k0_ = -1.0;
    double phi_k0_ = 0.0;
};

struct PhiSample {
    double x;
    ExtendedReal phi;
};

struct ReconstructionOptions {
    std::size_t residual_grid = 10;       // (k, a) grid is residual_grid^2
    std::size_t agreement_trials = 500;   // randomized xi for the acceptance check
    std::uint64_t seed = 1;
    double agreement_margin = 1e-7;       // |E[phi_hat]| below this is a boundary tie
    double box_hi = 5.0;                  // random supports live in (K_hat + margin, box_hi)
    double box_lo_untruncated = -5.0;     // lower end when K_hat = -inf
    double truncation_margin = 0.05;
    double residual_tolerance = 1e-5;
};

struct ReconstructionReport {
    ExtendedReal k_hat;
    double k0 = 0.0;
    std::vector<PhiSample> phi_grid;
    std::vector<double> residual_ks;
    std::vector<double> residual_as;
    double max_consistency_residual = 0.0;
    bool consistent = true;  // residual within options.residual_tolerance
    double acceptance_agreement_rate = 1.0;
    std::size_t agreement_trials = 0;
    std::size_t boundary_ties = 0;
    std::uint64_t seed = 0;
};

/// Full reconstruction: K_hat, phi_hat on `grid`, the dyadic consistency
/// residual |alpha(k,a) phi(k) + (1 - alpha(k,a)) phi(a)| on a (k, a) grid, and
/// the agreement rate between u(xi) >= 0 and E[phi_hat(xi)] >= 0 on random xi
/// supported above K_hat. Throws PreconditionError for the essential infimum.
ReconstructionReport reconstruct_phi(const UtilityFunctional& u, std::span<const double> grid,
                                     const ReconstructionOptions& options = {});

// ---------------------------------------------------------------------------
// CxLS search and robustness
// ---------------------------------------------------------------------------

struct CxlsViolation {
    std::size_t trial;
    DiscreteDistribution f;
    DiscreteDistribution g;  // already shifted so that u(f) = u(g)
    double lambda;
    double deviation;        // |u(mixture(f, g, lambda)) - u(f)|
};

struct CxlsOptions {
    double tolerance = 1e-6;
    std::size_t lambda_points = 33;  // interior grid j / (n + 1)
    RandomDistributionConfig sampling;
    std::size_t max_recorded = 16;   // violations kept in the report
};

struct CxlsReport {
    std::uint64_t seed = 0;
    std::size_t trials = 0;
    std::size_t violating_trials = 0;
    double max_deviation = 0.0;
    std::vector<CxlsViolation> violations;  // first few, in trial order
};

/// Randomized search for CxLS violations: draw F, G, shift G so that
/// u(F) = u(G), and compare u along the mixture segment.
CxlsReport check_cxls(const UtilityFunctional& u, std::size_t trials, std::uint64_t seed,
                      const CxlsOptions& options = {});

/// Largest |u(mixture(f, g, lambda)) - u(f)| on the interior grid, after
/// shifting g to the level of f.
double cxls_deviation(const UtilityFunctional& u, const DiscreteDistribution& f,
                      const DiscreteDistribution& g, std::size_t lambda_points = 33,
                      double* worst_lambda = nullptr);

struct RobustnessReport {
    double x = 0.0;
    double y = 0.0;
    double limit_estimate = 0.0;  // value at lambda = 2^-40
    double value_at_y = 0.0;      // u(delta_y)
    bool continuous_at_zero = false;
    std::vector<CurvePoint> sequence;  // lambda_j = 2^-j, j = 1..40
};

/// Mixture continuity at lambda -> 0+ along lambda delta_x + (1-lambda) delta_y.
/// Requires x < y.
RobustnessReport robustness_diagnostic(const UtilityFunctional& u, double x, double y);

/// Probe pairs for robustness: x in {-1,-2,-3,-4,-8,-16}, y in {0.5,1,2}.
/// Kept moderate because lambda = 2^-40 only resolves jumps above 1e-6 when
/// |x - y| is well below 1e6.
std::vector<ProbePair> default_robustness_pairs();

struct Diagnosis {
    TrichotomyVerdict verdict;
    bool weber = false;
    std::optional<ExtendedReal> k_hat;  // absent for the essential infimum
    std::vector<RobustnessReport> robustness;
    bool all_continuous = false;
};

Diagnosis diagnose(const UtilityFunctional& u, std::span<const double> ks,
                   std::span<const double> as, std::span<const ProbePair> robustness_pairs);

}  // namespace cxls
