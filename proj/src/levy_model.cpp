#include "levystab/levy_model.hpp"

#include <array>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>

#include "levystab/quadrature.hpp"

namespace levystab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_jump_params(double C, double M, double N, double alpha, double c) {
    if (!(C > 0.0)) throw std::invalid_argument("levy model: C must be > 0");
    if (!(M >= 0.0) || !(N >= 0.0)) throw std::invalid_argument("levy model: M, N must be >= 0");
    if (!(alpha < 2.0)) throw std::invalid_argument("levy model: alpha must be < 2");
    if (!(c >= 0.0)) throw std::invalid_argument("levy model: c must be >= 0");
}
} // namespace

std::string family_name(Family f) {
    switch (f) {
        case Family::black_scholes: return "black_scholes";
        case Family::variance_gamma: return "variance_gamma";
        case Family::gmy: return "gmy";
        case Family::cgmy: return "cgmy";
    }
    return "?";
}

Family family_from_name(const std::string& name) {
    if (name == "black_scholes" || name == "bs") return Family::black_scholes;
    if (name == "variance_gamma" || name == "vg") return Family::variance_gamma;
    if (name == "gmy") return Family::gmy;
    if (name == "cgmy") return Family::cgmy;
    throw ConfigError("unknown model family: " + name);
}

LevyModel LevyModel::black_scholes(double b, double c) {
    if (!(c > 0.0)) throw std::invalid_argument("black_scholes: c must be > 0");
    LevyModel m;
    m.family = Family::black_scholes;
    m.b = b;
    m.c = c;
    return m;
}

LevyModel LevyModel::variance_gamma(double C, double M, double N, double b, double c) {
    check_jump_params(C, M, N, 0.0, c);
    LevyModel m;
    m.family = Family::variance_gamma;
    m.b = b;
    m.c = c;
    m.C = C;
    m.M = M;
    m.N = N;
    m.alpha = 0.0;
    return m;
}

LevyModel LevyModel::gmy(double C, double N, double alpha, double b, double c) {
    check_jump_params(C, 0.0, N, alpha, c);
    LevyModel m;
    m.family = Family::gmy;
    m.b = b;
    m.c = c;
    m.C = C;
    m.M = 0.0;
    m.N = N;
    m.alpha = alpha;
    return m;
}

LevyModel LevyModel::cgmy(double C, double M, double N, double alpha, double b, double c) {
    check_jump_params(C, M, N, alpha, c);
    LevyModel m;
    m.family = Family::cgmy;
    m.b = b;
    m.c = c;
    m.C = C;
    m.M = M;
    m.N = N;
    m.alpha = alpha;
    return m;
}

double LevyModel::density(double x) const {
    if (family == Family::black_scholes)
        throw std::domain_error("levy_density: model has no jump part");
    if (x == 0.0) throw std::domain_error("levy_density: x must be nonzero");
    if (x < 0.0 && !has_negative_jumps())
        throw std::domain_error("levy_density: measure supported on x > 0");
    double ax = std::abs(x);
    double decay = x > 0.0 ? N : M;
    return C * std::exp(-decay * ax) / std::pow(ax, 1.0 + singularity_order());
}

double LevyModel::log_density(double x) const {
    if (family == Family::black_scholes || x == 0.0 || (x < 0.0 && !has_negative_jumps()))
        return -kInf;
    double ax = std::abs(x);
    double decay = x > 0.0 ? N : M;
    return std::log(C) - decay * ax - (1.0 + singularity_order()) * std::log(ax);
}

ExpMomentDomain LevyModel::exp_moment_domain() const {
    ExpMomentDomain d;
    switch (family) {
        case Family::black_scholes: break;
        case Family::gmy: d.hi = N; break;
        case Family::variance_gamma:
        case Family::cgmy:
            d.lo = -M;
            d.hi = N;
            break;
    }
    return d;
}

double upper_incomplete_gamma(double a, double x) {
    if (a > 0.0) return boost::math::tgamma(a, x);
    // Γ(a, x) = (Γ(a+1, x) - x^a e^{-x}) / a
    return (upper_incomplete_gamma(a + 1.0, x) - std::pow(x, a) * std::exp(-x)) / a;
}

double big_jump_mean(const LevyModel& model) {
    if (!model.has_jumps()) return 0.0;
    double a = model.singularity_order();
    auto tail = [&](double decay) {
        // ∫_1^∞ x^{-a} e^{-decay x} dx
        if (decay <= 0.0) {
            if (a > 1.0) return 1.0 / (a - 1.0);
            throw DivergenceError("big_jump_mean: undamped tail with alpha <= 1");
        }
        return std::pow(decay, a - 1.0) * upper_incomplete_gamma(1.0 - a, decay);
    };
    double v = model.C * tail(model.N);
    if (model.has_negative_jumps()) v -= model.C * tail(model.M);
    return v;
}

double truncated_jump_mean(const LevyModel& model) {
    if (!model.has_jumps()) return 0.0;
    double a = model.singularity_order();
    if (a >= 1.0) throw DivergenceError("truncated_jump_mean: infinite variation (alpha >= 1)");
    auto head = [&](double decay) {
        // ∫_0^1 x^{-a} e^{-decay x} dx
        if (decay <= 0.0) return 1.0 / (1.0 - a);
        return std::pow(decay, a - 1.0) * boost::math::tgamma_lower(1.0 - a, decay);
    };
    double v = model.C * head(model.N);
    if (model.has_negative_jumps()) v -= model.C * head(model.M);
    return v;
}

std::optional<std::complex<double>> LevyModel::psi_closed(std::complex<double> u) const {
    const std::complex<double> iu(-u.imag(), u.real());
    std::complex<double> psi = iu * b - 0.5 * u * u * c;
    if (family == Family::black_scholes) return psi;

    double a = singularity_order();
    if (N <= 0.0 || (has_negative_jumps() && M <= 0.0)) return std::nullopt;

    if (std::abs(a) < 1e-8) {
        // log form: ∫ (e^{iux}-1) dν has a closed Frullani-type value
        std::complex<double> jump = C * std::log(N / (N - iu));
        double lmean = C * (1.0 - std::exp(-N)) / N;
        if (has_negative_jumps()) {
            jump += C * std::log(M / (M + iu));
            lmean -= C * (1.0 - std::exp(-M)) / M;
        }
        return psi + jump - iu * lmean;
    }
    if (std::abs(a - 1.0) < 1e-6 || a > 1.95) return std::nullopt;

    double gm = std::tgamma(-a);
    double g1 = std::tgamma(1.0 - a);
    // fully compensated one-tail transform, valid for all alpha < 2
    auto side = [&](double decay, std::complex<double> v) {
        return gm * (std::pow(decay - v, a) - std::pow(decay, a)) -
               v * g1 * std::pow(decay, a - 1.0);
    };
    std::complex<double> jump = C * side(N, iu);
    if (has_negative_jumps()) jump += C * side(M, -iu); // mirrored tail
    return psi + jump + iu * big_jump_mean(*this);
}

std::array<double, 4> LevyModel::cumulants_closed() const {
    if (family == Family::black_scholes) return {b, c, 0.0, 0.0};
    double a = singularity_order();
    if (N <= 0.0 || (has_negative_jumps() && M <= 0.0))
        throw DivergenceError("cumulants: undamped exponential tail");
    // ∫_0^∞ x^n e^{-d x} x^{-1-a} dx = Γ(n-a) d^{a-n}
    auto mom = [a](int n, double d) { return std::tgamma(n - a) * std::pow(d, a - n); };
    bool neg = has_negative_jumps();
    double k1 = b + big_jump_mean(*this);
    double k2 = c + C * mom(2, N) + (neg ? C * mom(2, M) : 0.0);
    double k3 = C * mom(3, N) - (neg ? C * mom(3, M) : 0.0);
    double k4 = C * mom(4, N) + (neg ? C * mom(4, M) : 0.0);
    return {k1, k2, k3, k4};
}

ModelDiagnostics validate(const LevyModel& model) {
    ModelDiagnostics d;
    d.params_ok = true;
    if (model.family == Family::black_scholes) {
        if (!(model.c > 0.0)) {
            d.params_ok = false;
            d.messages.push_back("black_scholes requires c > 0");
        }
        d.levy_integrable = true;
        d.special_semimartingale = true;
        return d;
    }
    if (!(model.C > 0.0) || !(model.alpha < 2.0) || !(model.c >= 0.0) || !(model.N >= 0.0) ||
        !(model.M >= 0.0)) {
        d.params_ok = false;
        d.messages.push_back("parameter out of range");
    }
    try {
        double mass = integrate_levy(
            model, [](double x) { return std::min(x * x, 1.0); },
            IntegrandClass::quadratic_near_zero);
        d.levy_integrable = std::isfinite(mass);
    } catch (const std::exception& e) {
        d.levy_integrable = false;
        d.messages.push_back(std::string("levy integrability check failed: ") + e.what());
    }
    d.special_semimartingale = model.N > 1.0;
    if (!d.special_semimartingale)
        d.messages.push_back("exp(x) tail not integrable (N <= 1): S = e^X is not special");
    return d;
}

void to_json(nlohmann::json& j, const LevyModel& m) {
    j = nlohmann::json{{"family", family_name(m.family)}, {"b", m.b}, {"c", m.c}};
    nlohmann::json p = nlohmann::json::object();
    switch (m.family) {
        case Family::black_scholes: break;
        case Family::variance_gamma:
            p["C"] = m.C;
            p["M"] = m.M;
            p["N"] = m.N;
            break;
        case Family::gmy:
            p["C"] = m.C;
            p["N"] = m.N;
            p["alpha"] = m.alpha;
            break;
        case Family::cgmy:
            p["C"] = m.C;
            p["M"] = m.M;
            p["N"] = m.N;
            p["alpha"] = m.alpha;
            break;
    }
    j["params"] = p;
}

void from_json(const nlohmann::json& j, LevyModel& m) {
    Family f = family_from_name(j.at("family").get<std::string>());
    double b = j.value("b", 0.0);
    double c = j.value("c", 0.0);
    const auto& p = j.contains("params") ? j.at("params") : nlohmann::json::object();
    switch (f) {
        case Family::black_scholes: m = LevyModel::black_scholes(b, c); break;
        case Family::variance_gamma:
            m = LevyModel::variance_gamma(p.at("C").get<double>(), p.at("M").get<double>(),
                                          p.at("N").get<double>(), b, c);
            break;
        case Family::gmy:
            m = LevyModel::gmy(p.at("C").get<double>(), p.at("N").get<double>(),
                               p.at("alpha").get<double>(), b, c);
            break;
        case Family::cgmy:
            m = LevyModel::cgmy(p.at("C").get<double>(), p.at("M").get<double>(),
                                p.at("N").get<double>(), p.at("alpha").get<double>(), b, c);
            break;
    }
}

} // namespace levystab
