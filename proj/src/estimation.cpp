#include "levystab/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace levystab {

void write_returns_csv(const ReturnSample& sample, std::ostream& os) {
    os << "log_return\n";
    char buf[40];
    for (double x : sample.increments) {
        std::snprintf(buf, sizeof buf, "%.17g\n", x);
        os << buf;
    }
}

ReturnSample read_returns_csv(std::istream& is, double dt) {
    ReturnSample s;
    s.dt = dt;
    std::string line;
    if (!std::getline(is, line) || line != "log_return")
        throw ConfigError("return csv: expected header 'log_return'");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        s.increments.push_back(std::stod(line));
    }
    if (s.increments.empty()) throw ConfigError("return csv: no data rows");
    return s;
}

ReturnSample simulate_returns(const LevyModel& model, std::int64_t n, double dt,
                              std::uint64_t seed) {
    SimConfig cfg;
    cfg.n_paths = n;
    cfg.seed = seed;
    ReturnSample s;
    s.dt = dt;
    s.increments = simulate_terminal(model, dt, cfg);
    return s;
}

std::vector<double> theta_vector(const LevyModel& m) {
    if (m.family == Family::black_scholes) return {m.b, m.c};
    return {m.C, m.M, m.N};
}

std::vector<std::string> theta_names(Family family) {
    if (family == Family::black_scholes) return {"b", "c"};
    return {"C", "M", "N"};
}

std::array<double, 4> empirical_cumulants(const std::vector<double>& xs) {
    double n = static_cast<double>(xs.size());
    double m1 = 0.0;
    for (double x : xs) m1 += x;
    m1 /= n;
    double m2 = 0, m3 = 0, m4 = 0;
    for (double x : xs) {
        double d = x - m1;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    return {m1, m2, m3, m4 - 3.0 * m2 * m2};
}

namespace {

struct NmResult {
    std::vector<double> x;
    double f = 0.0;
    bool converged = false;
};

// Nelder-Mead over R^d; good enough for the 3-parameter moment systems
NmResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                     std::vector<double> x0, double scale, int max_iter, double ftol) {
    size_t d = x0.size();
    std::vector<std::vector<double>> xs(d + 1, x0);
    std::vector<double> fs(d + 1);
    for (size_t i = 0; i < d; ++i) xs[i + 1][i] += scale;
    for (size_t i = 0; i <= d; ++i) fs[i] = f(xs[i]);

    for (int it = 0; it < max_iter; ++it) {
        // order
        std::vector<size_t> idx(d + 1);
        for (size_t i = 0; i <= d; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return fs[a] < fs[b]; });
        size_t best = idx[0], worst = idx[d], second = idx[d - 1];
        if (std::abs(fs[worst] - fs[best]) <= ftol * (std::abs(fs[best]) + ftol))
            return {xs[best], fs[best], true};

        std::vector<double> centroid(d, 0.0);
        for (size_t i = 0; i <= d; ++i)
            if (i != worst)
                for (size_t k = 0; k < d; ++k) centroid[k] += xs[i][k] / static_cast<double>(d);

        auto blend = [&](double t) {
            std::vector<double> p(d);
            for (size_t k = 0; k < d; ++k) p[k] = centroid[k] + t * (xs[worst][k] - centroid[k]);
            return p;
        };
        auto refl = blend(-1.0);
        double fr = f(refl);
        if (fr < fs[best]) {
            auto exp_p = blend(-2.0);
            double fe = f(exp_p);
            if (fe < fr) {
                xs[worst] = exp_p;
                fs[worst] = fe;
            } else {
                xs[worst] = refl;
                fs[worst] = fr;
            }
        } else if (fr < fs[second]) {
            xs[worst] = refl;
            fs[worst] = fr;
        } else {
            auto con = blend(0.5);
            double fc = f(con);
            if (fc < fs[worst]) {
                xs[worst] = con;
                fs[worst] = fc;
            } else {
                for (size_t i = 0; i <= d; ++i) {
                    if (i == best) continue;
                    for (size_t k = 0; k < d; ++k)
                        xs[i][k] = xs[best][k] + 0.5 * (xs[i][k] - xs[best][k]);
                    fs[i] = f(xs[i]);
                }
            }
        }
    }
    size_t best = 0;
    for (size_t i = 1; i <= d; ++i)
        if (fs[i] < fs[best]) best = i;
    return {xs[best], fs[best], false};
}

// sampling standard deviations of k1..k4 from empirical central moments
std::array<double, 4> cumulant_noise(const std::vector<double>& xs) {
    double n = static_cast<double>(xs.size());
    double m1 = 0.0;
    for (double x : xs) m1 += x;
    m1 /= n;
    double m2 = 0, m4 = 0, m6 = 0, m8 = 0;
    for (double x : xs) {
        double d = x - m1, d2 = d * d;
        m2 += d2;
        m4 += d2 * d2;
        m6 += d2 * d2 * d2;
        m8 += d2 * d2 * d2 * d2;
    }
    m2 /= n;
    m4 /= n;
    m6 /= n;
    m8 /= n;
    double s1 = std::sqrt(m2 / n);
    double s2 = std::sqrt(std::max(m4 - m2 * m2, 1e-300) / n);
    double s3 = std::sqrt(std::max(m6, 1e-300) / n);
    double s4 = std::sqrt(std::max(m8, 1e-300) / n);
    return {s1, s2, s3, s4};
}

} // namespace

EstimatorReport cumulant_estimator(const ReturnSample& sample, Family family,
                                   double alpha_known) {
    if (sample.increments.size() < 100)
        throw std::invalid_argument("cumulant_estimator: need at least 100 increments");
    double dt = sample.dt;
    auto k = empirical_cumulants(sample.increments);

    EstimatorReport rep;
    rep.n = static_cast<int>(sample.increments.size());
    rep.names = theta_names(family);

    if (family == Family::black_scholes) {
        double b = k[0] / dt, c = k[1] / dt;
        rep.converged = c > 0.0;
        rep.model = LevyModel::black_scholes(b, std::max(c, 1e-300));
        rep.theta_hat = {b, c};
        return rep;
    }
    if (family == Family::gmy)
        throw std::invalid_argument("cumulant_estimator: supported families are bs, vg, cgmy");

    auto noise = cumulant_noise(sample.increments);
    auto make = [&](const std::vector<double>& lx) {
        double C = std::exp(lx[0]), M = std::exp(lx[1]), N = std::exp(lx[2]);
        return family == Family::variance_gamma ? LevyModel::variance_gamma(C, M, N)
                                                : LevyModel::cgmy(C, M, N, alpha_known);
    };
    auto objective = [&](const std::vector<double>& lx) {
        for (double v : lx)
            if (!std::isfinite(v) || std::abs(v) > 9.0) return 1e100; // positivity box
        auto th = make(lx).cumulants_closed();
        double s = 0.0;
        for (int i = 0; i < 4; ++i) {
            double resid = (k[i] - th[i] * dt) / std::max(noise[i], 1e-300);
            s += resid * resid;
        }
        return s;
    };

    // scale heuristic from the second and fourth cumulants, symmetric start
    double n0 = std::sqrt(std::max(6.0 * k[1] / std::max(k[3], 1e-300), 1e-6));
    if (family == Family::cgmy) {
        // kappa4/kappa2 = Gamma(4-a)/Gamma(2-a) / N^2 at M = N
        double ratio = std::tgamma(4.0 - alpha_known) / std::tgamma(2.0 - alpha_known);
        n0 = std::sqrt(std::max(ratio * k[1] / std::max(k[3], 1e-300), 1e-6));
    }
    // kappa2 = 2 C g2 N^{a-2} at M = N  =>  C = kappa2 N^{2-a} / (2 g2)
    double g2 = family == Family::cgmy ? std::tgamma(2.0 - alpha_known) : 1.0;
    double a0 = family == Family::cgmy ? alpha_known : 0.0;
    double c0 = std::max(k[1] / dt * std::pow(n0, 2.0 - a0) / (2.0 * g2), 1e-8);

    // multi-start: symmetric plus both skew directions (k3 is noisy)
    double lc0 = std::log(c0), ln0 = std::log(n0);
    NmResult nm;
    nm.f = std::numeric_limits<double>::infinity();
    for (auto x0 : {std::vector<double>{lc0, ln0, ln0}, {lc0, ln0 + 0.5, ln0 - 0.5},
                    {lc0, ln0 - 0.5, ln0 + 0.5}}) {
        auto cand = nelder_mead(objective, x0, 0.35, 500, 1e-12);
        auto polish = nelder_mead(objective, cand.x, 0.08, 300, 1e-12);
        if (polish.f < cand.f) cand = polish;
        if (cand.f < nm.f) nm = cand;
    }

    rep.model = make(nm.x);
    rep.theta_hat = theta_vector(rep.model);
    rep.residual_norm = std::sqrt(nm.f);
    // solutions pinned to the positivity box do not count as converged
    bool interior = true;
    for (double v : nm.x) interior = interior && std::abs(v) < 8.9;
    rep.converged = nm.converged && interior;
    return rep;
}

double EstimatorDistribution::exceedance(double eps) const {
    if (thetas.empty()) return 0.0;
    int count = 0;
    for (const auto& th : thetas) {
        double err = 0.0;
        for (size_t i = 0; i < th.size(); ++i)
            err = std::max(err, std::abs(th[i] - theta_true[i]));
        if (err > eps) ++count;
    }
    return static_cast<double>(count) / static_cast<double>(thetas.size());
}

std::vector<double> EstimatorDistribution::errors() const {
    std::vector<double> es;
    es.reserve(thetas.size());
    for (const auto& th : thetas) {
        double err = 0.0;
        for (size_t i = 0; i < th.size(); ++i)
            err = std::max(err, std::abs(th[i] - theta_true[i]));
        es.push_back(err);
    }
    return es;
}

double EstimatorDistribution::error_quantile(double p) const {
    auto es = errors();
    if (es.empty()) return 0.0;
    std::sort(es.begin(), es.end());
    double pos = p * (static_cast<double>(es.size()) - 1.0);
    size_t lo = static_cast<size_t>(pos);
    size_t hi = std::min(lo + 1, es.size() - 1);
    double w = pos - static_cast<double>(lo);
    return es[lo] * (1.0 - w) + es[hi] * w;
}

EstimatorDistribution estimator_distribution(const LevyModel& model, std::int64_t n, double dt,
                                             int batches, std::uint64_t seed) {
    if (batches < 2) throw std::invalid_argument("estimator_distribution: need batches >= 2");
    EstimatorDistribution dist;
    dist.theta_true = theta_vector(model);
    std::vector<std::vector<double>> slots(batches);
    std::vector<char> ok(batches, 0);

    run_batches(batches, 1, true, [&](int bi, std::int64_t, std::int64_t) {
        try {
            auto sample = simulate_returns(model, n, dt, batch_seed(seed, bi));
            auto rep = cumulant_estimator(sample, model.family, model.alpha);
            if (rep.converged) {
                slots[bi] = rep.theta_hat;
                ok[bi] = 1;
            }
        } catch (const std::exception&) {
            // failed batch: excluded and counted below
        }
    });
    for (int i = 0; i < batches; ++i) {
        if (ok[i]) dist.thetas.push_back(std::move(slots[i]));
        else ++dist.failed;
    }
    return dist;
}

} // namespace levystab
