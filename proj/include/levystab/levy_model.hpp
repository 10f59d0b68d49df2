#pragma once
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "levystab/common.hpp"

#include <json.hpp>

namespace levystab {

enum class Family { black_scholes, variance_gamma, gmy, cgmy };

std::string family_name(Family f);
Family family_from_name(const std::string& name);

// Truncation function: l(x) = x on [-1, 1], 0 outside. All drifts b are
// stated relative to this choice.
inline double truncation(double x) { return std::abs(x) <= 1.0 ? x : 0.0; }

// Interval of tilt exponents lambda with E exp(lambda*X_1) finite.
// Finite endpoints are excluded; solvers stay strictly inside.
struct ExpMomentDomain {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool contains(double lambda) const { return lambda > lo && lambda < hi; }
    // degenerate: one side collapsed to the origin (M = 0 or N = 0 tail)
    bool degenerate() const { return lo == 0.0 || hi == 0.0; }
};

struct ModelDiagnostics {
    bool params_ok = false;
    bool levy_integrable = false;        // ∫ (x^2 ∧ 1) dν < ∞
    bool special_semimartingale = false; // ∫_{x>1} e^x dν < ∞ (N > 1)
    std::vector<std::string> messages;
    bool all_ok() const { return params_ok && levy_integrable && special_semimartingale; }
};

// Exponential Levy model: triplet (b, c, ν) with ν from a parametric
// family.  b is the drift w.r.t. the truncation above, c >= 0 the
// Gaussian variance rate.  Jump densities:
//   cgmy:  C e^{-N x} / x^{1+alpha}   (x > 0),  C e^{-M|x|} / |x|^{1+alpha}  (x < 0)
//   vg:    cgmy with alpha = 0
//   gmy:   one-sided cgmy (x > 0 only)
//   bs:    no jumps, c > 0
struct LevyModel {
    Family family = Family::black_scholes;
    double b = 0.0;
    double c = 0.0;
    double C = 0.0;
    double M = 0.0;
    double N = 0.0;
    double alpha = 0.0;

    static LevyModel black_scholes(double b, double c);
    static LevyModel variance_gamma(double C, double M, double N, double b = 0.0, double c = 0.0);
    static LevyModel gmy(double C, double N, double alpha, double b = 0.0, double c = 0.0);
    static LevyModel cgmy(double C, double M, double N, double alpha, double b = 0.0,
                          double c = 0.0);

    bool has_jumps() const { return family != Family::black_scholes; }
    bool has_negative_jumps() const {
        return family == Family::variance_gamma || family == Family::cgmy;
    }
    // order of the |x|^{-1-alpha} singularity at 0 (0 for vg)
    double singularity_order() const {
        return family == Family::variance_gamma ? 0.0 : alpha;
    }

    // dν/dx at x != 0; throws on x = 0 or when there is no jump part
    double density(double x) const;
    // log dν/dx; -inf off the support (finite x only)
    double log_density(double x) const;

    ExpMomentDomain exp_moment_domain() const;

    // closed-form characteristic exponent when available for the family
    // (BS always; VG/GMY/CGMY need M,N > 0 on present sides and alpha not
    // too close to {1, 2})
    std::optional<std::complex<double>> psi_closed(std::complex<double> u) const;

    // cumulant rates k1..k4 of X_1 (closed form; requires M,N > 0 on
    // present sides and alpha < 1 handled via incomplete-gamma tails)
    std::array<double, 4> cumulants_closed() const;

    bool operator==(const LevyModel&) const = default;
};

void to_json(nlohmann::json& j, const LevyModel& m);
void from_json(const nlohmann::json& j, LevyModel& m);

// Diagnostics: parameter ranges, Levy integrability (numeric), and the
// exponential-tail condition making S = e^X special.
ModelDiagnostics validate(const LevyModel& model);

// ∫_{|x|>1} x dν, closed form via upper incomplete gamma.
double big_jump_mean(const LevyModel& model);

// ∫ l(x) dν, closed form for vg, quadrature otherwise.
double truncated_jump_mean(const LevyModel& model);

// upper incomplete gamma Γ(a, x) for x > 0, any real a (recurrence below 0)
double upper_incomplete_gamma(double a, double x);

} // namespace levystab
