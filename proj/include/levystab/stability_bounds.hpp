#pragma once
#include <optional>
#include <string>
#include <vector>

#include "levystab/estimation.hpp"
#include "levystab/pricing.hpp"

namespace levystab {

// Two parametric models compared under a common measure selection rule.
struct ModelPair {
    LevyModel base;  // physical measure P
    LevyModel tilde; // perturbed physical measure P~
    MeasureSelector selector;
    double T = 1.0;
};

// Gaussian parts must match and the jump supports must coincide; the jump
// density ratio must keep the Hellinger integral finite (same C and alpha),
// otherwise the laws are mutually singular and no bound exists.
void check_comparable(const ModelPair& pair);

// log(dν~/dν) on the common jump support
double log_density_ratio(const LevyModel& base, const LevyModel& tilde, double x);

// Envelope Y(x) <= a e^{kx} used by the bound machinery.
struct EnvelopeConstants {
    double a = 1.0;
    double k = 0.0;
    struct Certification {
        bool ok = true;
        double worst_x = 0.0;
        double worst_log_excess = 0.0; // max over the grid of log(Y / (a e^{kx}))
    };
    // grid check over the support window [-20, 20] (10^3 points)
    Certification certify(const GirsanovPair& g, const LevyModel& support_model,
                          int points = 1000) const;
};

// Envelope for the selected measure kind:
//   esscher, both tilts <= 0 -> (1, 0); general -> (1, max(λ, λ~, 0))
//   memm, both tilts <= 0    -> (e^{max|λ|}, 0)
//   fq                       -> grid fit, smallest k in {0, 0.5, 1, ...}
EnvelopeConstants envelope_for(const ModelPair& pair, const GirsanovPair& g_base,
                               const GirsanovPair& g_tilde);

// Both measure selections solved once and shared by the bound operations.
struct PairAnalysis {
    ModelPair pair;
    GirsanovPair g_base, g_tilde;
    TiltedLaw law_base, law_tilde;
    SolverReport rep_base, rep_tilde;
};
PairAnalysis analyze_pair(const ModelPair& pair, const SolverConfig& cfg = {});

// Hellinger-type jump distances
//   rho_QQ = T ∫ (sqrt(Y^Q~) - sqrt(Y^Q))^2 dν
//   rho_PP = T ∫ (1 - sqrt(dν~/dν))^2 dν
// both against the base measure's ν.
std::pair<double, double> rho_pair(const PairAnalysis& an, const QuadratureConfig& quad = {});

// A = 4 a T ∫ |e^x - 1| e^{kx} dν (time factor included); needs N > 1 + k.
double constant_A(const PairAnalysis& an, const EnvelopeConstants& env,
                  const QuadratureConfig& quad = {});

struct UvrProcesses {
    double U = 0.0, V = 0.0, R = 0.0;
};
// weighted versions of the rho distances with weights
//   p = A|e^x-1|/4 + 1,  q = A|e^x-1|/4 + e^x,  f = A|e^x-1|/2 + max(1, e^x)
UvrProcesses processes_UVR(const PairAnalysis& an, const EnvelopeConstants& env,
                           const QuadratureConfig& quad = {});

struct HellingerResult {
    double value = 0.0; // h_T(1/2, P, P~)
    double beta = 0.0;  // Girsanov drift parameter when c > 0
    double drift_residual = 0.0;
    bool drift_consistent = true;
};
// h_T(1/2, P, P~) = T [ β^2 c / 8 + 1/2 ∫ (1 - sqrt(Y))^2 dν ].
// With c = 0 the Girsanov drift identity b~ = b + ∫ l (Y-1) dν must hold
// exactly for true equivalence; by default the jump term is returned with
// the residual flagged, strict = true turns the mismatch into an error.
HellingerResult hellinger_T(const ModelPair& pair, bool strict = false,
                            const QuadratureConfig& quad = {});

// variation-distance bounds from a deterministic Hellinger value:
// first = 4 sqrt(h); second = 3 sqrt(2 eps) + 2 1{h >= eps}, infimum form
// 3 sqrt(2 h) when eps is absent
std::pair<double, double> variation_bounds(double h_T, std::optional<double> eps = {});

double price_gap_bound_thm1(const UvrProcesses& uvr, double c_growth, double d_growth);
double price_gap_bound_cor1(const UvrProcesses& uvr, double c_growth, double d_growth);

struct SpecializedBound {
    double value = 0.0;
    bool fallback_used = false; // tilt-sign precondition failed; generic route
};
// esscher specialization: T (λ-λ~)^2 ∫ f x^2 dν + T ∫ f (1-sqrt(Y))^2 dν,
// with f built from A at a = 1, k = 0; needs both tilts <= 0, otherwise
// falls back to the sqrt(R_T) bound with a general envelope (growths used
// only in that fallback).
SpecializedBound esscher_gap_bound(const PairAnalysis& an, double c_growth = 1.0,
                                   double d_growth = 0.0, const QuadratureConfig& quad = {});
// minimal-entropy specialization with (e^x-1)^2 in place of x^2
SpecializedBound memm_gap_bound(const PairAnalysis& an, double c_growth = 1.0,
                                double d_growth = 0.0, const QuadratureConfig& quad = {});

struct BoundReport {
    double rho_QQ = 0.0, rho_PP = 0.0;
    double A = 0.0;
    double U_T = 0.0, V_T = 0.0, R_T = 0.0;
    double h_T_PP = 0.0;
    double bound_thm1 = 0.0, bound_cor1 = 0.0;
    std::optional<double> bound_eq14, bound_m12;
    double variation_bound_h1 = 0.0;
    // metadata
    double lambda_base = 0.0, lambda_tilde = 0.0;
    double envelope_a = 1.0, envelope_k = 0.0;
    bool eq14_fallback = false;
    bool drift_consistent = true;
    bool envelope_certified = true;
    std::string base_measure = "P";
    std::string a_convention = "A = 4 a T ∫|e^x-1| e^{kx} dν (time factor included)";
};
void to_json(nlohmann::json& j, const BoundReport& r);

BoundReport bound_report(const ModelPair& pair, double c_growth, double d_growth,
                         const SolverConfig& cfg = {});

struct ParametricBound {
    double bound = 0.0;    // 2(c+d) exceedance + 3 sqrt2 (c+d) sqrt(sup R)
    double bound_uv = 0.0; // 2(c+d) exceedance + 4c sqrt(sup U) + 4d sqrt(sup V)
    double exceedance = 0.0; // empirical P(|theta_hat - theta|_inf > eps)
    double sup_R = 0.0;
    double sup_U = 0.0, sup_V = 0.0;
    int grid_points = 0;
    int excluded = 0;  // non-equivalent or unsolvable grid points
    bool certified = true;
    std::vector<std::string> exclusions;
};
// 2 (c+d) P(|θ^-θ|>ε) + 3 sqrt2 (c+d) sqrt( sup_{grid} R_T(θ, θ') ) with a
// 3-point-per-coordinate grid at offsets {-ε, 0, +ε} in the max-norm ball
ParametricBound parametric_bound_thm2(const LevyModel& model,
                                      const std::vector<std::vector<double>>& estimator_samples,
                                      double eps, double c_growth, double d_growth,
                                      const MeasureSelector& sel, double T);

struct ConvergenceRow {
    std::int64_t n = 0;
    double eps = 0.0;
    double sup_R_T = 0.0;
    double bound = 0.0;
    double empirical_gap = 0.0;
    double std_error = 0.0;
    int failed_batches = 0;
};
// estimator-convergence experiment: for each sample size, draw batches,
// estimate, price at the estimates, and compare the realized mean price
// error with the parametric bound at eps = 95th-percentile estimator error
std::vector<ConvergenceRow> convergence_curve_cor3(const LevyModel& model,
                                                   const std::vector<std::int64_t>& sample_sizes,
                                                   int batches, double dt,
                                                   const MeasureSelector& sel,
                                                   const PayoffSpec& payoff, double T,
                                                   std::uint64_t seed);

// model of the same family with the canonical parameter vector replaced
LevyModel model_from_theta(const LevyModel& tmpl, const std::vector<double>& theta);

} // namespace levystab
