// Independent numerical oracles for the test suites.  Everything here is
// deliberately written from scratch against the model definitions and does
// not reuse the library's quadrature, solvers, or pricers.
#pragma once
#include <cmath>
#include <functional>
#include <stdexcept>

#include "levystab/levy_model.hpp"

namespace oracles {

// Brute-force Riemann midpoint sum of ∫ f dν over [-20, 20] excluding
// (-1e-6, 1e-6), 1e7 panels, plus the analytic bound on the excluded core
// for integrands with |f| <= K x^2 near 0.  err_bound collects the core
// contribution bound; the midpoint rule's own edge error is not included,
// so callers compare with max(rel_tol * |value|, err_bound) slack.
struct RiemannResult {
    double value;
    double err_bound;
};

inline double oracle_density(const levystab::LevyModel& m, double x) {
    using levystab::Family;
    if (m.family == Family::black_scholes) return 0.0;
    if (x == 0.0) return 0.0;
    if (x < 0.0 && m.family == Family::gmy) return 0.0;
    double a = m.family == Family::variance_gamma ? 0.0 : m.alpha;
    double decay = x > 0.0 ? m.N : m.M;
    return m.C * std::exp(-decay * std::abs(x)) / std::pow(std::abs(x), 1.0 + a);
}

inline RiemannResult riemann_levy(const levystab::LevyModel& m,
                                  const std::function<double(double)>& f,
                                  double core_quadratic_bound_K = 1.0,
                                  long long panels = 10'000'000) {
    const double lo = -20.0, hi = 20.0, core = 1e-6;
    const double w = (hi - lo) / static_cast<double>(panels);
    double sum = 0.0;
    for (long long i = 0; i < panels; ++i) {
        double x = lo + (static_cast<double>(i) + 0.5) * w;
        if (std::abs(x) < core) continue;
        double den = oracle_density(m, x);
        if (den > 0.0) sum += f(x) * den * w;
    }
    // |∫_{|x|<core} f dν| <= K ∫_{|x|<core} x^2 dν <= 2 K C core^{2-a}/(2-a)
    double a = m.family == levystab::Family::variance_gamma ? 0.0 : m.alpha;
    double core_bound =
        2.0 * core_quadratic_bound_K * m.C * std::pow(core, 2.0 - a) / (2.0 - a);
    return {sum, core_bound};
}

// Fine-grid bracket + bisection root finder driven by a caller-supplied
// function (used with the Riemann oracle for the martingale equations).
inline double grid_bisect(const std::function<double(double)>& g, double lo, double hi,
                          int grid = 64, double tol = 1e-9) {
    double prev_x = lo, prev_g = g(lo);
    double a = 0, b = 0;
    bool found = false;
    for (int i = 1; i <= grid; ++i) {
        double x = lo + (hi - lo) * static_cast<double>(i) / grid;
        double gx = g(x);
        if (prev_g == 0.0) return prev_x;
        if (prev_g * gx <= 0.0) {
            a = prev_x;
            b = x;
            found = true;
            break;
        }
        prev_x = x;
        prev_g = gx;
    }
    if (!found) throw std::runtime_error("grid_bisect: no sign change");
    double ga = g(a);
    while (b - a > tol) {
        double mid = 0.5 * (a + b);
        double gm = g(mid);
        if (ga * gm <= 0.0) b = mid;
        else {
            a = mid;
            ga = gm;
        }
    }
    return 0.5 * (a + b);
}

// Martingale function b + (1/2+coef) c + ∫ ((e^x-1) Y(x) - l(x)) dν - r
// evaluated with the brute-force Riemann sum; Y supplied by the caller
// (Esscher e^{λx}, minimal-entropy e^{λ(e^x-1)}, power form, ...).
inline double riemann_martingale_g(const levystab::LevyModel& m, double r, double coef,
                                   const std::function<double(double, double)>& tilt_y,
                                   long long panels = 10'000'000) {
    const double lo = -20.0, hi = 20.0, core = 1e-6;
    const double w = (hi - lo) / static_cast<double>(panels);
    double sum = 0.0;
    for (long long i = 0; i < panels; ++i) {
        double x = lo + (static_cast<double>(i) + 0.5) * w;
        if (std::abs(x) < core) continue;
        double den = oracle_density(m, x);
        if (den <= 0.0) continue;
        double l = std::abs(x) <= 1.0 ? x : 0.0;
        sum += (std::expm1(x) * tilt_y(coef, x) - l) * den * w;
    }
    return m.b + (0.5 + coef) * m.c + sum - r;
}

// Standard normal cdf via erfc.
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Black-Scholes call on S0 = 1 with variance rate c: closed Gaussian form.
inline double bs_call(double K, double T, double r, double c) {
    double sig = std::sqrt(c * T);
    if (sig <= 0.0) return std::max(1.0 - K * std::exp(-r * T), 0.0);
    double d1 = (std::log(1.0 / K) + (r + 0.5 * c) * T) / sig;
    double d2 = d1 - sig;
    return norm_cdf(d1) - K * std::exp(-r * T) * norm_cdf(d2);
}

// Total variation distance between N(mu1, v) and N(mu2, v) laws by direct
// numeric integration of |density difference| (Simpson rule).
inline double gaussian_tv(double mu1, double mu2, double v, int n = 200001) {
    double sd = std::sqrt(v);
    double lo = std::min(mu1, mu2) - 12.0 * sd;
    double hi = std::max(mu1, mu2) + 12.0 * sd;
    double h = (hi - lo) / (n - 1);
    auto f = [&](double x) {
        double z1 = (x - mu1) / sd, z2 = (x - mu2) / sd;
        double p1 = std::exp(-0.5 * z1 * z1) / (sd * std::sqrt(2.0 * M_PI));
        double p2 = std::exp(-0.5 * z2 * z2) / (sd * std::sqrt(2.0 * M_PI));
        return std::abs(p1 - p2);
    };
    double s = f(lo) + f(hi);
    for (int i = 1; i < n - 1; ++i) s += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

// VG characteristic exponent from the closed Frullani form, independent of
// the library's quadrature and of its psi_closed implementation path.
inline std::complex<double> vg_psi_reference(const levystab::LevyModel& m,
                                             std::complex<double> u) {
    std::complex<double> iu(0.0, 1.0);
    iu *= u;
    std::complex<double> jump = m.C * (std::log(m.N / (m.N - iu)) + std::log(m.M / (m.M + iu)));
    double lmean =
        m.C * ((1.0 - std::exp(-m.N)) / m.N - (1.0 - std::exp(-m.M)) / m.M);
    return iu * m.b - 0.5 * u * u * m.c + jump - iu * lmean;
}

} // namespace oracles
