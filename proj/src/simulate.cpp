#include <algorithm>
#include <cmath>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "levystab/pricing.hpp"

namespace levystab {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// vg as a gamma-subordinated Brownian motion: clock variance nu, drift mu
// and volatility sigma of the subordinated part
struct VgSubordination {
    double nu, mu, sigma;
};

VgSubordination vg_subordination(const LevyModel& m) {
    if (!(m.M > 0.0) || !(m.N > 0.0))
        throw UnsupportedSimulationError("vg simulation needs M > 0 and N > 0");
    double nu = 1.0 / m.C;
    double sigma2 = 2.0 * m.C / (m.M * m.N);
    double mu = m.C * (m.M - m.N) / (m.M * m.N);
    return {nu, mu, std::sqrt(sigma2)};
}

// inverse-CDF sampler for one cgmy tail above the cutoff
struct TailTable {
    double intensity = 0.0;
    std::vector<double> x;   // geometric grid
    std::vector<double> cdf; // normalized cumulative mass
    double sample(double u) const {
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        size_t j = std::min<size_t>(std::distance(cdf.begin(), it), cdf.size() - 1);
        if (j == 0) return x.front();
        double c0 = cdf[j - 1], c1 = cdf[j];
        double w = c1 > c0 ? (u - c0) / (c1 - c0) : 0.5;
        return x[j - 1] + w * (x[j] - x[j - 1]);
    }
};

struct CgmyApprox {
    double drift;      // per unit time, includes the truncation adjustment
    double gauss_var;  // c + matched small-jump variance, per unit time
    TailTable right, left;
};

TailTable build_tail(const LevyModel& m, int sign, double h) {
    TailTable t;
    QuadratureConfig quad;
    quad.rel_tol = 1e-10;
    auto one = [](double) { return 1.0; };
    double a = sign > 0 ? h : -std::numeric_limits<double>::infinity();
    double b = sign > 0 ? std::numeric_limits<double>::infinity() : -h;
    t.intensity = integrate_levy_interval(m, one, a, b, IntegrandClass::bounded_near_zero, quad);
    if (t.intensity <= 0.0) return t;

    // outer edge: far enough that the remaining mass is negligible
    double edge = std::max(1.0, 2.0 * h);
    for (int i = 0; i < 60; ++i) {
        double rest = sign > 0 ? integrate_levy_interval(m, one, edge, b,
                                                        IntegrandClass::bounded_near_zero, quad)
                               : integrate_levy_interval(m, one, a, -edge,
                                                        IntegrandClass::bounded_near_zero, quad);
        if (rest < 1e-14 * t.intensity) break;
        edge *= 2.0;
        if (edge > 1e6)
            throw UnsupportedSimulationError(
                "cgmy jump tail decays too slowly for compound-Poisson sampling");
    }

    // table of jump magnitudes; the caller applies the sign
    const int n = 4096;
    t.x.resize(n + 1);
    t.cdf.resize(n + 1);
    double lr = std::log(edge / h) / n;
    double acc = 0.0;
    t.x[0] = h;
    t.cdf[0] = 0.0;
    for (int j = 1; j <= n; ++j) {
        double x0 = h * std::exp(lr * (j - 1));
        double x1 = h * std::exp(lr * j);
        double seg = sign > 0 ? integrate_levy_interval(m, one, x0, x1,
                                                        IntegrandClass::bounded_near_zero, quad)
                              : integrate_levy_interval(m, one, -x1, -x0,
                                                        IntegrandClass::bounded_near_zero, quad);
        acc += seg;
        t.x[j] = x1;
        t.cdf[j] = acc;
    }
    for (double& cv : t.cdf) cv /= acc;
    return t;
}

CgmyApprox build_cgmy(const LevyModel& m, double h) {
    CgmyApprox ap;
    QuadratureConfig quad;
    quad.rel_tol = 1e-10;
    double sigma_h2 =
        integrate_levy_interval(m, [](double x) { return x * x; }, 0.0, h,
                                IntegrandClass::quadratic_near_zero, quad) +
        (m.has_negative_jumps()
             ? integrate_levy_interval(m, [](double x) { return x * x; }, -h, 0.0,
                                       IntegrandClass::quadratic_near_zero, quad)
             : 0.0);
    double ladj =
        integrate_levy_interval(m, [](double x) { return x; }, h, 1.0,
                                IntegrandClass::bounded_near_zero, quad) +
        (m.has_negative_jumps()
             ? integrate_levy_interval(m, [](double x) { return x; }, -1.0, -h,
                                       IntegrandClass::bounded_near_zero, quad)
             : 0.0);
    ap.drift = m.b - ladj;
    ap.gauss_var = m.c + sigma_h2;
    ap.right = build_tail(m, +1, h);
    if (m.has_negative_jumps()) ap.left = build_tail(m, -1, h);
    return ap;
}

} // namespace

std::uint64_t batch_seed(std::uint64_t seed, int batch_index) {
    return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(batch_index) + 1));
}

void run_batches(std::int64_t total, int batch_size, bool parallel,
                 const std::function<void(int, std::int64_t, std::int64_t)>& fn) {
    if (batch_size <= 0) batch_size = 8192;
    int n_batches = static_cast<int>((total + batch_size - 1) / batch_size);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel)
#endif
    for (int i = 0; i < n_batches; ++i) {
        std::int64_t lo = static_cast<std::int64_t>(i) * batch_size;
        std::int64_t hi = std::min(total, lo + batch_size);
        fn(i, lo, hi);
    }
    (void)parallel;
}

std::vector<double> simulate_terminal(const LevyModel& model, double T, const SimConfig& cfg) {
    std::vector<double> out(static_cast<size_t>(cfg.n_paths));

    switch (model.family) {
        case Family::black_scholes: {
            double mean = model.b * T, sd = std::sqrt(model.c * T);
            run_batches(cfg.n_paths, cfg.batch_size, cfg.parallel,
                        [&](int bi, std::int64_t lo, std::int64_t hi) {
                            std::mt19937_64 rng(batch_seed(cfg.seed, bi));
                            std::normal_distribution<double> z;
                            for (std::int64_t i = lo; i < hi; ++i) out[i] = mean + sd * z(rng);
                        });
            return out;
        }
        case Family::variance_gamma: {
            auto sub = vg_subordination(model);
            double d0 = (model.b - truncated_jump_mean(model)) * T;
            double sdc = std::sqrt(model.c * T);
            run_batches(cfg.n_paths, cfg.batch_size, cfg.parallel,
                        [&](int bi, std::int64_t lo, std::int64_t hi) {
                            std::mt19937_64 rng(batch_seed(cfg.seed, bi));
                            std::normal_distribution<double> z;
                            std::gamma_distribution<double> gam(T / sub.nu, sub.nu);
                            for (std::int64_t i = lo; i < hi; ++i) {
                                double g = gam(rng);
                                double x = d0 + sub.mu * g +
                                           sub.sigma * std::sqrt(g) * z(rng);
                                if (model.c > 0.0) x += sdc * z(rng);
                                out[i] = x;
                            }
                        });
            return out;
        }
        case Family::cgmy: {
            auto ap = build_cgmy(model, cfg.small_jump_cutoff);
            double d0 = ap.drift * T, sd = std::sqrt(ap.gauss_var * T);
            run_batches(cfg.n_paths, cfg.batch_size, cfg.parallel,
                        [&](int bi, std::int64_t lo, std::int64_t hi) {
                            std::mt19937_64 rng(batch_seed(cfg.seed, bi));
                            std::normal_distribution<double> z;
                            std::poisson_distribution<int> pr(
                                std::max(ap.right.intensity * T, 1e-300));
                            std::poisson_distribution<int> pl(
                                std::max(ap.left.intensity * T, 1e-300));
                            std::uniform_real_distribution<double> unif;
                            for (std::int64_t i = lo; i < hi; ++i) {
                                double x = d0 + sd * z(rng);
                                int nr = pr(rng);
                                for (int k = 0; k < nr; ++k) x += ap.right.sample(unif(rng));
                                if (ap.left.intensity > 0.0) {
                                    int nl = pl(rng);
                                    for (int k = 0; k < nl; ++k) x -= ap.left.sample(unif(rng));
                                }
                                out[i] = x;
                            }
                        });
            return out;
        }
        case Family::gmy:
            throw UnsupportedSimulationError(
                "no exact sampler for the gmy family; price via the characteristic-function "
                "method");
    }
    return out;
}

std::vector<double> simulate_terminal(const TiltedLaw& law, double T, const SimConfig& cfg) {
    if (!law.closed)
        throw UnsupportedSimulationError(
            "tilted law leaves the parametric families; price via the characteristic-function "
            "method");
    return simulate_terminal(*law.closed, T, cfg);
}

std::vector<double> simulate_terminal_serial(const LevyModel& model, double T,
                                             const SimConfig& cfg) {
    SimConfig c2 = cfg;
    c2.parallel = false;
    return simulate_terminal(model, T, c2);
}

std::vector<double> simulate_price_paths(const LevyModel& model, double T,
                                         const SimConfig& cfg) {
    int steps = std::max(1, cfg.n_steps);
    double dt = T / steps;
    size_t stride = static_cast<size_t>(steps) + 1;
    std::vector<double> out(static_cast<size_t>(cfg.n_paths) * stride);

    if (model.family == Family::black_scholes) {
        double mean = model.b * dt, sd = std::sqrt(model.c * dt);
        run_batches(cfg.n_paths, cfg.batch_size, cfg.parallel,
                    [&](int bi, std::int64_t lo, std::int64_t hi) {
                        std::mt19937_64 rng(batch_seed(cfg.seed, bi));
                        std::normal_distribution<double> z;
                        for (std::int64_t i = lo; i < hi; ++i) {
                            double x = 0.0;
                            double* row = &out[static_cast<size_t>(i) * stride];
                            row[0] = 1.0;
                            for (int s = 1; s <= steps; ++s) {
                                x += mean + sd * z(rng);
                                row[s] = std::exp(x);
                            }
                        }
                    });
        return out;
    }
    if (model.family == Family::variance_gamma) {
        auto sub = vg_subordination(model);
        double d0 = (model.b - truncated_jump_mean(model)) * dt;
        double sdc = std::sqrt(model.c * dt);
        run_batches(cfg.n_paths, cfg.batch_size, cfg.parallel,
                    [&](int bi, std::int64_t lo, std::int64_t hi) {
                        std::mt19937_64 rng(batch_seed(cfg.seed, bi));
                        std::normal_distribution<double> z;
                        std::gamma_distribution<double> gam(dt / sub.nu, sub.nu);
                        for (std::int64_t i = lo; i < hi; ++i) {
                            double x = 0.0;
                            double* row = &out[static_cast<size_t>(i) * stride];
                            row[0] = 1.0;
                            for (int s = 1; s <= steps; ++s) {
                                double g = gam(rng);
                                x += d0 + sub.mu * g + sub.sigma * std::sqrt(g) * z(rng);
                                if (model.c > 0.0) x += sdc * z(rng);
                                row[s] = std::exp(x);
                            }
                        }
                    });
        return out;
    }
    throw UnsupportedSimulationError("path simulation supports bs and vg only");
}

} // namespace levystab
