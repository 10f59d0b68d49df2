#pragma once
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include "levystab/levy_model.hpp"

namespace levystab {

// Behaviour of the integrand near x = 0; selects the power substitution
// that removes the |x|^{-1-alpha} singularity of the jump density.
enum class IntegrandClass {
    quadratic_near_zero, // |f| <= K x^2 near 0
    linear_near_zero,    // |f| <= K |x| near 0 (needs alpha < 1)
    bounded_near_zero,   // |f| <= K near 0 (needs alpha < 0)
};

enum class SingularityTransform { none, power_transform };

struct QuadratureConfig {
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    std::vector<double> split_points{-1.0, 0.0, 1.0};
    SingularityTransform singularity_transform = SingularityTransform::power_transform;
    int max_intervals = 6000;
};

class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double estimate, double error_estimate)
        : std::runtime_error(what), estimate(estimate), error_estimate(error_estimate) {}
    double estimate;       // best value reached
    double error_estimate; // achieved error bound
};

// ∫ f dν over (-inf,0) ∪ (0,inf) for the model's jump measure ν.
// Splits at cfg.split_points, removes the power singularity at 0 per the
// declared class, and maps exponential tails to (0,1].  Result is within
// max(abs_tol, rel_tol*|I|) on integrands of the declared class; outside
// that class the result is undefined.
double integrate_levy(const LevyModel& model, const std::function<double(double)>& f,
                      IntegrandClass cls, const QuadratureConfig& cfg = {});

// Same, for nonnegative integrands given in log form: ∫ exp(log_f) dν.
// Use for integrands with exponential growth that would overflow before
// the density decay is applied.
double integrate_levy_log(const LevyModel& model, const std::function<double(double)>& log_f,
                          IntegrandClass cls, const QuadratureConfig& cfg = {});

std::complex<double> integrate_levy_complex(const LevyModel& model,
                                            const std::function<std::complex<double>(double)>& f,
                                            IntegrandClass cls,
                                            const QuadratureConfig& cfg = {});

// ∫_a^b f dν over one interval not containing 0 in its interior
// (a or b may be 0 or ±inf).
double integrate_levy_interval(const LevyModel& model, const std::function<double(double)>& f,
                               double a, double b, IntegrandClass cls,
                               const QuadratureConfig& cfg = {});

// Characteristic exponent ψ(u) = i b u - u^2 c / 2 + ∫ (e^{iux} - 1 - iu l(x)) dν,
// evaluated by quadrature.  Im(u) must keep -Im(u) inside the
// exponential-moment domain, otherwise a DivergenceError is thrown.
std::complex<double> characteristic_exponent(const LevyModel& model, std::complex<double> u,
                                             const QuadratureConfig& cfg = {});

// (e^z - 1 - z) / z^2, stable near z = 0
std::complex<double> expm1m_over_z2(std::complex<double> z);
// (e^z - 1) / z, stable near z = 0
std::complex<double> expm1_over_z(std::complex<double> z);

} // namespace levystab
