#pragma once
#include <complex>
#include <optional>
#include <string>

#include "levystab/levy_model.hpp"
#include "levystab/quadrature.hpp"

namespace levystab {

// Deterministic Girsanov parameters (beta, Y) of an absolutely continuous
// measure change P -> Q for an exponential Levy model.
struct GirsanovPair {
    enum class Kind { identity, esscher, memm, fq };
    Kind kind = Kind::identity;
    double lambda = 0.0; // esscher / memm tilt
    double q = 0.0;      // fq divergence exponent
    double beta_q = 0.0; // fq first Girsanov parameter
    bool support_ok = true;

    double beta() const {
        return kind == Kind::fq ? beta_q : (kind == Kind::identity ? 0.0 : lambda);
    }
    // jump-density ratio Y(x) = dν^Q/dν
    double y(double x) const;
    double log_y(double x) const; // -inf where Y = 0
};

struct MeasureSelector {
    enum class Kind { esscher, memm, fq };
    Kind kind = Kind::esscher;
    double q = 2.0;    // fq only; q not in {0, 1}
    double rate = 0.0; // short rate r of the bond e^{rt}
};

void to_json(nlohmann::json& j, const MeasureSelector& s);
void from_json(const nlohmann::json& j, MeasureSelector& s);

struct SolverReport {
    double root = 0.0;
    double residual = 0.0;
    double bracket_lo = 0.0, bracket_hi = 0.0;
    int iterations = 0;
};

struct SolverConfig {
    double xtol = 1e-12;
    double step = 0.5;       // bracket expansion step
    double margin = 1e-6;    // shrink of finite admissible endpoints
    double lambda_limit = 1e3;
    QuadratureConfig quad{1e-11, 1e-14, {-1.0, 0.0, 1.0}, SingularityTransform::power_transform,
                          6000};
};

// Esscher tilt exponent: root of
//   b + (1/2 + λ) c + ∫ ((e^x - 1) e^{λx} - l(x)) dν = r
// over λ with [λ, λ+1] inside the exponential-moment domain.
double esscher_lambda(const LevyModel& model, double r, SolverReport* report = nullptr,
                      const SolverConfig& cfg = {});

// Minimal-entropy tilt exponent: root of
//   b + (1/2 + λ) c + ∫ ((e^x - 1) e^{λ(e^x - 1)} - l(x)) dν = r
double memm_lambda(const LevyModel& model, double r, SolverReport* report = nullptr,
                   const SolverConfig& cfg = {});

struct SignClassification {
    enum class Sign { negative, unknown, no_solution };
    Sign lambda_sign = Sign::unknown;
    std::string rule_applied;
};

// Sign of the minimal-entropy tilt from the tail index N and the value of
// the martingale function at 0, without running the root finder.
SignClassification memm_sign_classify(const LevyModel& model, double r,
                                      const SolverConfig& cfg = {});

// Characteristics of the stochastic-logarithm process X^ with
// S = S_0 E(X^): drift/variance plus a descriptor of the transformed jump
// measure (e^x - 1) · ν.  Documentation object; requires ∫_{x>1} e^x dν < ∞.
struct HatTriplet {
    double b_hat = 0.0;
    double c_hat = 0.0;
    std::string nu_hat_descriptor;
};
HatTriplet hat_triplet(const LevyModel& model, const SolverConfig& cfg = {});

struct FqResult {
    double beta_q = 0.0;
    GirsanovPair girsanov;
    bool support_ok = true;
    std::string support_violation; // region where 1+(q-1)β(e^x-1) <= 0
    SolverReport report;
};

// f^q-minimal measure parameters: β_q with
//   Y_q(x) = (1 + (q-1) β_q (e^x - 1))_+^{1/(q-1)}
// solving b + (1/2 + β_q) c + ∫ ((e^x - 1) Y_q(x) - l(x)) dν = r.
FqResult fq_parameters(const LevyModel& model, double q, double r,
                       const SolverConfig& cfg = {});

// Law of X under the changed measure: drift b^Q = b + βc + ∫ l (Y-1) dν,
// Gaussian part unchanged, jump density Y(x) dν/dx.  Esscher tilts of the
// parametric families stay in the family (M -> M+λ, N -> N-λ); other tilts
// keep a composable descriptor and are evaluated pointwise.
struct TiltedLaw {
    LevyModel base;
    GirsanovPair girsanov;
    double rate = 0.0;
    double b_q = 0.0;
    std::optional<LevyModel> closed;

    double c() const { return base.c; }
    bool has_jumps() const { return base.has_jumps(); }
    double jump_density(double x) const; // Y(x) dν/dx
    std::complex<double> psi(std::complex<double> u, const QuadratureConfig& cfg = {}) const;
    // b^Q + c/2 + ∫ (e^x - 1 - l) dν^Q - r
    double martingale_residual(const QuadratureConfig& cfg = {}) const;
};

TiltedLaw tilted_law(const LevyModel& model, const GirsanovPair& g, double r,
                     const SolverConfig& cfg = {});

GirsanovPair girsanov_for(const MeasureSelector& sel, const LevyModel& model,
                          SolverReport* report = nullptr, const SolverConfig& cfg = {});

// Convenience: solve the selector and assemble the law under Q.
TiltedLaw select_measure(const MeasureSelector& sel, const LevyModel& model,
                         SolverReport* report = nullptr, const SolverConfig& cfg = {});

// stable (e^x - 1 - x) / x^2 for real x
double expm1mx_over_x2(double x);

} // namespace levystab
