#include "levystab/pricing.hpp"

#include <cmath>

namespace levystab {

PayoffSpec PayoffSpec::call(double strike) {
    if (strike < 0.0) throw std::invalid_argument("call: strike must be >= 0");
    PayoffSpec p;
    p.kind = Kind::call;
    p.strike = strike;
    std::tie(p.c_growth, p.d_growth) = payoff_growth(Kind::call, strike);
    return p;
}

PayoffSpec PayoffSpec::put(double strike) {
    if (strike < 0.0) throw std::invalid_argument("put: strike must be >= 0");
    PayoffSpec p;
    p.kind = Kind::put;
    p.strike = strike;
    std::tie(p.c_growth, p.d_growth) = payoff_growth(Kind::put, strike);
    return p;
}

PayoffSpec PayoffSpec::custom(std::function<double(std::span<const double>)> eval,
                              double c_growth, double d_growth) {
    PayoffSpec p;
    p.kind = Kind::custom;
    p.path_eval = std::move(eval);
    p.c_growth = c_growth;
    p.d_growth = d_growth;
    return p;
}

double PayoffSpec::terminal(double terminal_price) const {
    switch (kind) {
        case Kind::call: return std::max(terminal_price - strike, 0.0);
        case Kind::put: return std::max(strike - terminal_price, 0.0);
        case Kind::custom: {
            double path[2] = {1.0, terminal_price};
            return path_eval(std::span<const double>(path, 2));
        }
    }
    return 0.0;
}

std::pair<double, double> payoff_growth(PayoffSpec::Kind kind, double strike) {
    if (strike < 0.0) throw std::invalid_argument("payoff_growth: strike must be >= 0");
    switch (kind) {
        case PayoffSpec::Kind::call: return {1.0, 0.0}; // (S-K)+ <= S
        case PayoffSpec::Kind::put: return {0.0, strike}; // (K-S)+ <= K
        case PayoffSpec::Kind::custom:
            throw std::invalid_argument("payoff_growth: custom payoffs declare their own bound");
    }
    return {0.0, 0.0};
}

PriceEstimate mc_price(const TiltedLaw& law, const PayoffSpec& payoff, double T, double r,
                       const SimConfig& cfg) {
    std::vector<double> values(static_cast<size_t>(cfg.n_paths));
    if (payoff.terminal_only() || cfg.n_steps <= 1) {
        std::vector<double> xs = simulate_terminal(law, T, cfg);
        for (size_t i = 0; i < xs.size(); ++i) values[i] = payoff.terminal(std::exp(xs[i]));
    } else {
        if (!law.closed)
            throw UnsupportedSimulationError("path-dependent pricing needs a closed-family law");
        std::vector<double> paths = simulate_price_paths(*law.closed, T, cfg);
        size_t stride = static_cast<size_t>(cfg.n_steps) + 1;
        for (std::int64_t i = 0; i < cfg.n_paths; ++i)
            values[i] = payoff.path_eval(
                std::span<const double>(&paths[static_cast<size_t>(i) * stride], stride));
    }

    // ordered accumulation: the estimate is a pure function of (cfg, seed)
    double sum = 0.0;
    for (double v : values) sum += v;
    double mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    double var = values.size() > 1 ? ss / (static_cast<double>(values.size()) - 1.0) : 0.0;

    PriceEstimate est;
    est.method = PriceEstimate::Method::mc;
    est.n_paths = cfg.n_paths;
    est.seed = cfg.seed;
    double disc = std::exp(-r * T);
    est.value = disc * mean;
    est.std_error = disc * std::sqrt(var / static_cast<double>(values.size()));
    return est;
}

namespace {

// cumulants (k1, k2, k4) of ln S_T under the law, via central differences
// of the characteristic exponent (closed form where available, a handful
// of quadratures otherwise)
std::array<double, 3> cumulants_124(const TiltedLaw& law, double T,
                                    const QuadratureConfig& quad) {
    if (law.closed) {
        try {
            auto k = law.closed->cumulants_closed();
            return {k[0] * T, k[1] * T, k[3] * T};
        } catch (const DivergenceError&) {
            // fall through to the numeric route
        }
    }
    double h = 1e-2;
    auto psi = [&](double u) { return law.psi(std::complex<double>(u, 0.0), quad); };
    auto p0 = psi(0.0), p1 = psi(h), p2 = psi(2.0 * h), m1 = psi(-h), m2 = psi(-2.0 * h);
    std::complex<double> d1 = (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h);
    std::complex<double> d2 = (-p2 + 16.0 * p1 - 30.0 * p0 + 16.0 * m1 - m2) / (12.0 * h * h);
    std::complex<double> d4 = (p2 - 4.0 * p1 + 6.0 * p0 - 4.0 * m1 + m2) / (h * h * h * h);
    return {d1.imag() * T, -d2.real() * T, d4.real() * T};
}

} // namespace

PriceEstimate cf_price(const TiltedLaw& law, PayoffSpec::Kind kind, double strike, double T,
                       double r, const CosConfig& cos_cfg, const QuadratureConfig& quad) {
    if (kind == PayoffSpec::Kind::custom)
        throw std::invalid_argument("cf_price handles call/put payoffs");
    if (strike < 0.0) throw std::invalid_argument("cf_price: strike must be >= 0");

    auto [c1, c2, c4] = cumulants_124(law, T, quad);
    // fourth-cumulant widening keeps semi-heavy tails inside the window;
    // reduces to L sqrt(c2 T) for Gaussian laws
    double width = cos_cfg.L * std::sqrt(std::max(c2, 1e-12) + std::sqrt(std::max(c4, 0.0)));
    double a = c1 - width, b = c1 + width;

    // put coefficients on [a, b]: V_k = 2/(b-a) ∫_a^kappa (K - e^x) cos(...) dx
    double kappa = std::min(std::max(std::log(strike), a), b);
    double put = 0.0;
    for (int k = 0; k < cos_cfg.n_terms; ++k) {
        double u = k * M_PI / (b - a);
        double chi, psi_k;
        if (k == 0) {
            chi = std::exp(kappa) - std::exp(a);
            psi_k = kappa - a;
        } else {
            double ud = u * (kappa - a);
            chi = (std::cos(ud) * std::exp(kappa) - std::exp(a) +
                   u * std::sin(ud) * std::exp(kappa)) /
                  (1.0 + u * u);
            psi_k = std::sin(ud) / u;
        }
        double vk = 2.0 / (b - a) * (strike * psi_k - chi);
        std::complex<double> phi = std::exp(T * law.psi(std::complex<double>(u, 0.0), quad));
        double fk = (phi * std::exp(std::complex<double>(0.0, -u * a))).real();
        put += (k == 0 ? 0.5 : 1.0) * fk * vk;
    }
    put *= std::exp(-r * T);

    PriceEstimate est;
    est.method = PriceEstimate::Method::cf;
    est.value = kind == PayoffSpec::Kind::put
                    ? put
                    : put + 1.0 - strike * std::exp(-r * T); // parity, S_0 = 1
    return est;
}

double cf_identity_price(const TiltedLaw& law, double T, double r,
                         const QuadratureConfig& quad) {
    double psi_mi = law.psi(std::complex<double>(0.0, -1.0), quad).real();
    return std::exp(-r * T + T * psi_mi);
}

std::pair<double, double> price_gap(const LevyModel& model_a, const LevyModel& model_b,
                                    const MeasureSelector& sel, const PayoffSpec& payoff,
                                    double T, const SimConfig& cfg) {
    TiltedLaw la = select_measure(sel, model_a);
    TiltedLaw lb = select_measure(sel, model_b);
    if (payoff.terminal_only()) {
        auto pa = cf_price(la, payoff.kind, payoff.strike, T, sel.rate);
        auto pb = cf_price(lb, payoff.kind, payoff.strike, T, sel.rate);
        return {std::abs(pa.value - pb.value), 0.0};
    }
    auto pa = mc_price(la, payoff, T, sel.rate, cfg);
    auto pb = mc_price(lb, payoff, T, sel.rate, cfg);
    return {std::abs(pa.value - pb.value),
            std::sqrt(pa.std_error * pa.std_error + pb.std_error * pb.std_error)};
}

} // namespace levystab
