#include "levystab/measure_change.hpp"

#include <algorithm>
#include <cmath>

#include "levystab/root_finding.hpp"

namespace levystab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
} // namespace

double expm1mx_over_x2(double x) {
    if (std::abs(x) > 0.25) return (std::expm1(x) - x) / (x * x);
    double term = 0.5, sum = 0.5;
    for (int k = 3; k <= 20; ++k) {
        term *= x / static_cast<double>(k);
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

double GirsanovPair::log_y(double x) const {
    switch (kind) {
        case Kind::identity: return 0.0;
        case Kind::esscher: return lambda * x;
        case Kind::memm: return lambda * std::expm1(x);
        case Kind::fq: {
            double base = 1.0 + (q - 1.0) * beta_q * std::expm1(x);
            if (base <= 0.0) return -kInf;
            return std::log(base) / (q - 1.0);
        }
    }
    return 0.0;
}

double GirsanovPair::y(double x) const {
    double ly = log_y(x);
    return ly == -kInf ? 0.0 : std::exp(ly);
}

void to_json(nlohmann::json& j, const MeasureSelector& s) {
    switch (s.kind) {
        case MeasureSelector::Kind::esscher: j["kind"] = "esscher"; break;
        case MeasureSelector::Kind::memm: j["kind"] = "memm"; break;
        case MeasureSelector::Kind::fq:
            j["kind"] = "fq";
            j["q"] = s.q;
            break;
    }
    j["rate"] = s.rate;
}

void from_json(const nlohmann::json& j, MeasureSelector& s) {
    std::string k = j.at("kind").get<std::string>();
    if (k == "esscher") s.kind = MeasureSelector::Kind::esscher;
    else if (k == "memm") s.kind = MeasureSelector::Kind::memm;
    else if (k == "fq") s.kind = MeasureSelector::Kind::fq;
    else throw ConfigError("unknown selector kind: " + k);
    if (s.kind == MeasureSelector::Kind::fq) {
        s.q = j.at("q").get<double>();
        if (s.q == 0.0 || s.q == 1.0) throw ConfigError("fq selector requires q not in {0, 1}");
    }
    s.rate = j.value("rate", 0.0);
}

namespace {

// Monotone-increasing objective: expand brackets from 0 in fixed steps
// inside (lo, hi), skipping probes whose quadrature fails, then polish with
// Brent.  Throws NoSolutionError when the objective is single-signed on the
// admissible interval.
double solve_monotone(const std::function<double(double)>& g, double lo, double hi,
                      const SolverConfig& cfg, SolverReport* report, const char* what) {
    if (!(lo < hi))
        throw DivergenceError(std::string(what) +
                              ": admissible tilt interval is empty or degenerate");

    int n_ok = 0, n_diverged = 0;
    auto eval = [&](double x) -> std::optional<double> {
        try {
            double v = g(x);
            if (!std::isfinite(v)) return std::nullopt;
            ++n_ok;
            return v;
        } catch (const QuadratureError&) {
            return std::nullopt;
        } catch (const DivergenceError&) {
            ++n_diverged;
            return std::nullopt;
        }
    };

    double start = std::clamp(0.0, lo, hi);
    double neg_x = 0, neg_g = 0, pos_x = 0, pos_g = 0;
    bool have_neg = false, have_pos = false;
    auto note = [&](double x, double v) {
        if (v <= 0.0 && (!have_neg || x > neg_x)) {
            neg_x = x;
            neg_g = v;
            have_neg = true;
        }
        if (v >= 0.0 && (!have_pos || x < pos_x)) {
            pos_x = x;
            pos_g = v;
            have_pos = true;
        }
    };

    if (auto v = eval(start)) note(start, *v);
    // walk down while no negative value seen, up while no positive one
    for (int dir : {-1, +1}) {
        double x = start;
        bool edge_done = false;
        while (!(dir < 0 ? have_neg : have_pos)) {
            x += dir * cfg.step;
            double edge = dir < 0 ? lo : hi;
            if ((dir < 0 && x <= edge) || (dir > 0 && x >= edge)) {
                if (edge_done || !std::isfinite(edge)) break;
                x = edge;
                edge_done = true;
            }
            if (std::abs(x) > cfg.lambda_limit) break;
            if (auto v = eval(x)) note(x, *v);
            if (edge_done) break;
        }
    }

    // A finite edge whose integrals blow up may hide the missing sign in a
    // thin boundary layer; bisect between the last good probe and the edge.
    auto refine_edge = [&](int dir) {
        bool& have_far = dir > 0 ? have_pos : have_neg;
        if (have_far || !(have_pos || have_neg)) return;
        double inner = dir > 0 ? neg_x : pos_x;
        double outer = dir > 0 ? hi : lo;
        if (!std::isfinite(outer)) return;
        for (int j = 0; j < 60 && !have_far; ++j) {
            double mid = 0.5 * (inner + outer);
            if (mid == inner || mid == outer) break;
            if (auto v = eval(mid)) {
                note(mid, *v);
                if ((dir > 0 && *v < 0.0) || (dir < 0 && *v > 0.0)) inner = mid;
            } else {
                outer = mid;
            }
        }
    };
    refine_edge(+1);
    refine_edge(-1);

    if (!have_neg || !have_pos) {
        if (n_ok == 0 && n_diverged > 0)
            throw DivergenceError(std::string(what) +
                                  ": tilt integrals diverge everywhere on the admissible "
                                  "interval");
        throw NoSolutionError(std::string(what) + ": martingale equation has no root on the "
                                                  "admissible interval (no sign change)");
    }

    auto res = brent_root(
        [&](double x) {
            auto v = eval(x);
            return v ? *v : std::numeric_limits<double>::quiet_NaN();
        },
        neg_x, pos_x, neg_g, pos_g, cfg.xtol);
    if (report) {
        report->root = res.x;
        report->residual = res.fx;
        report->bracket_lo = neg_x;
        report->bracket_hi = pos_x;
        report->iterations = res.iterations;
    }
    return res.x;
}

// (e^x - 1) e^{λx} - l(x), stable near 0
double esscher_integrand(double lam, double x) {
    if (std::abs(x) <= 1.0)
        return std::expm1(x) * std::expm1(lam * x) + x * x * expm1mx_over_x2(x);
    return std::expm1(x) * std::exp(lam * x);
}

// (e^x - 1) e^{λ(e^x-1)} - l(x), stable near 0
double memm_integrand(double lam, double x) {
    double u = std::expm1(x);
    if (std::abs(x) <= 1.0) return u * std::expm1(lam * u) + x * x * expm1mx_over_x2(x);
    return u * std::exp(lam * u);
}

// (e^x - 1) Y_q(x) - l(x), stable near 0
double fq_integrand(double q, double beta, double x) {
    double u = std::expm1(x);
    double base = 1.0 + (q - 1.0) * beta * u;
    if (std::abs(x) <= 1.0) {
        if (base <= 0.0) return -x;
        double ym1 = std::expm1(std::log1p((q - 1.0) * beta * u) / (q - 1.0));
        return u * ym1 + x * x * expm1mx_over_x2(x);
    }
    return base <= 0.0 ? 0.0 : u * std::pow(base, 1.0 / (q - 1.0));
}

} // namespace

double esscher_lambda(const LevyModel& model, double r, SolverReport* report,
                      const SolverConfig& cfg) {
    auto dom = model.exp_moment_domain();
    double lo = dom.lo, hi = dom.hi - 1.0;
    if (std::isfinite(lo)) lo += cfg.margin;
    if (std::isfinite(hi)) hi -= cfg.margin;
    auto g = [&](double lam) {
        double jump = model.has_jumps()
                          ? integrate_levy(
                                model, [lam](double x) { return esscher_integrand(lam, x); },
                                IntegrandClass::quadratic_near_zero, cfg.quad)
                          : 0.0;
        return model.b + (0.5 + lam) * model.c + jump - r;
    };
    return solve_monotone(g, lo, hi, cfg, report, "esscher_lambda");
}

double memm_lambda(const LevyModel& model, double r, SolverReport* report,
                   const SolverConfig& cfg) {
    double hi = kInf;
    if (model.has_jumps()) hi = model.N > 1.0 ? 0.0 : -cfg.margin;
    auto g = [&](double lam) {
        double jump = model.has_jumps()
                          ? integrate_levy(
                                model, [lam](double x) { return memm_integrand(lam, x); },
                                IntegrandClass::quadratic_near_zero, cfg.quad)
                          : 0.0;
        return model.b + (0.5 + lam) * model.c + jump - r;
    };
    return solve_monotone(g, -kInf, hi, cfg, report, "memm_lambda");
}

SignClassification memm_sign_classify(const LevyModel& model, double r,
                                      const SolverConfig& cfg) {
    SignClassification sc;
    if (!model.has_jumps()) {
        sc.lambda_sign = SignClassification::Sign::unknown;
        sc.rule_applied = "no jump part: rules for parametric jump families do not apply";
        return sc;
    }
    if (model.family == Family::cgmy && model.M == 0.0 && model.N == 0.0 && model.alpha > 0.0 &&
        model.alpha < 2.0 && model.C > 0.0) {
        sc.lambda_sign = SignClassification::Sign::negative;
        sc.rule_applied = "symmetric stable jump measure (M = N = 0, 0 < alpha < 2, C > 0)";
        return sc;
    }
    if (model.N <= 1.0) {
        sc.lambda_sign = SignClassification::Sign::negative;
        sc.rule_applied = "N <= 1: martingale function diverges at 0-, root is negative";
        return sc;
    }
    // N > 1: compare the martingale function at 0 with r
    double f0;
    try {
        f0 = model.b + 0.5 * model.c +
             integrate_levy(
                 model, [](double x) { return memm_integrand(0.0, x); },
                 IntegrandClass::quadratic_near_zero, cfg.quad);
    } catch (const std::exception&) {
        sc.lambda_sign = SignClassification::Sign::unknown;
        sc.rule_applied = "N > 1 but martingale function at 0 not computable";
        return sc;
    }
    if (f0 >= r) {
        sc.lambda_sign = SignClassification::Sign::negative;
        sc.rule_applied = "N > 1 and f^(0) >= r";
    } else {
        sc.lambda_sign = SignClassification::Sign::no_solution;
        sc.rule_applied = "N > 1 and f^(0) < r: no root";
    }
    return sc;
}

HatTriplet hat_triplet(const LevyModel& model, const SolverConfig& cfg) {
    HatTriplet h;
    h.c_hat = model.c;
    if (!model.has_jumps()) {
        h.b_hat = model.b + 0.5 * model.c;
        h.nu_hat_descriptor = "no jumps";
        return h;
    }
    if (model.N <= 1.0)
        throw DivergenceError("hat_triplet: ∫_{x>1} e^x dν diverges (N <= 1)");
    double jump = integrate_levy(
        model,
        [](double x) {
            // e^x - 1 - l(x), stable near 0
            if (std::abs(x) <= 1.0) return x * x * expm1mx_over_x2(x);
            return std::expm1(x);
        },
        IntegrandClass::quadratic_near_zero, cfg.quad);
    h.b_hat = model.b + 0.5 * model.c + jump;
    h.nu_hat_descriptor = "image of nu under x -> e^x - 1";
    return h;
}

FqResult fq_parameters(const LevyModel& model, double q, double r, const SolverConfig& cfg) {
    if (q == 0.0 || q == 1.0)
        throw std::invalid_argument("fq_parameters: q must not be 0 or 1");
    FqResult out;

    // admissible window for the growing-Y side: (q-1)β > 0 makes
    // Y ~ ((q-1)β e^x)^{1/(q-1)}, so (e^x-1) Y needs tail order q/(q-1) < N
    double lo = -kInf, hi = kInf;
    bool right_tail = model.has_jumps();
    double grow_order = q / (q - 1.0);
    if (right_tail && grow_order > 0.0 && grow_order >= model.N) {
        if (q > 1.0) hi = 0.0;
        else lo = 0.0;
    }

    auto g_of = [&](double beta) {
        QuadratureConfig quad = cfg.quad;
        // kink of (1 + (q-1)β(e^x-1))_+ becomes a split point
        double s = (q - 1.0) * beta;
        if (s != 0.0) {
            double u0 = -1.0 / s;
            if (u0 > -1.0) quad.split_points.push_back(std::log1p(u0));
        }
        double jump = model.has_jumps()
                          ? integrate_levy(
                                model, [q, beta](double x) { return fq_integrand(q, beta, x); },
                                IntegrandClass::quadratic_near_zero, quad)
                          : 0.0;
        return model.b + (0.5 + beta) * model.c + jump - r;
    };
    out.beta_q = solve_monotone(g_of, lo, hi, cfg, &out.report, "fq_parameters");

    out.girsanov.kind = GirsanovPair::Kind::fq;
    out.girsanov.q = q;
    out.girsanov.beta_q = out.beta_q;

    // support: 1 + (q-1)β(e^x - 1) > 0 for all x in supp ν, checked at the
    // support edges analytically
    double s = (q - 1.0) * out.beta_q;
    out.support_ok = true;
    if (model.has_jumps()) {
        if (s < 0.0) {
            out.support_ok = false;
            out.support_violation =
                "Y_q vanishes on (" + std::to_string(std::log1p(-1.0 / s)) + ", inf)";
        } else if (s > 1.0 && model.has_negative_jumps()) {
            out.support_ok = false;
            out.support_violation =
                "Y_q vanishes on (-inf, " + std::to_string(std::log1p(-1.0 / s)) + ")";
        }
    }
    out.girsanov.support_ok = out.support_ok;
    return out;
}

double TiltedLaw::jump_density(double x) const { return girsanov.y(x) * base.density(x); }

std::complex<double> TiltedLaw::psi(std::complex<double> u, const QuadratureConfig& cfg) const {
    if (closed) {
        if (auto p = closed->psi_closed(u)) return *p;
        return characteristic_exponent(*closed, u, cfg);
    }
    const std::complex<double> iu(-u.imag(), u.real());
    QuadratureConfig quad = cfg;
    if (girsanov.kind == GirsanovPair::Kind::fq) {
        double s = (girsanov.q - 1.0) * girsanov.beta_q;
        if (s != 0.0) {
            double u0 = -1.0 / s;
            if (u0 > -1.0) quad.split_points.push_back(std::log1p(u0));
        }
    }
    auto f = [&, iu](double x) -> std::complex<double> {
        double y = girsanov.y(x);
        if (y == 0.0) return {0.0, 0.0};
        if (std::abs(x) <= 1.0) return iu * iu * (x * x) * expm1m_over_z2(iu * x) * y;
        return (std::exp(iu * x) - 1.0) * y;
    };
    std::complex<double> jump =
        integrate_levy_complex(base, f, IntegrandClass::quadratic_near_zero, quad);
    return iu * b_q - 0.5 * u * u * base.c + jump;
}

double TiltedLaw::martingale_residual(const QuadratureConfig& cfg) const {
    QuadratureConfig quad = cfg;
    if (!closed && girsanov.kind == GirsanovPair::Kind::fq) {
        double s = (girsanov.q - 1.0) * girsanov.beta_q;
        if (s != 0.0) {
            double u0 = -1.0 / s;
            if (u0 > -1.0) quad.split_points.push_back(std::log1p(u0));
        }
    }
    const LevyModel& m = closed ? *closed : base;
    double drift = closed ? closed->b : b_q;
    auto y = [&](double x) { return closed ? 1.0 : girsanov.y(x); };
    double jump = m.has_jumps()
                      ? integrate_levy(
                            m,
                            [&](double x) {
                                double f = std::abs(x) <= 1.0 ? x * x * expm1mx_over_x2(x)
                                                              : std::expm1(x);
                                return f * y(x);
                            },
                            IntegrandClass::quadratic_near_zero, quad)
                      : 0.0;
    return drift + 0.5 * m.c + jump - rate;
}

TiltedLaw tilted_law(const LevyModel& model, const GirsanovPair& g, double r,
                     const SolverConfig& cfg) {
    TiltedLaw law;
    law.base = model;
    law.girsanov = g;
    law.rate = r;

    QuadratureConfig quad = cfg.quad;
    if (g.kind == GirsanovPair::Kind::fq) {
        double s = (g.q - 1.0) * g.beta_q;
        if (s != 0.0) {
            double u0 = -1.0 / s;
            if (u0 > -1.0) quad.split_points.push_back(std::log1p(u0));
        }
    }
    double lshift = model.has_jumps()
                        ? integrate_levy(
                              model,
                              [&](double x) {
                                  if (std::abs(x) > 1.0) return 0.0;
                                  double ly = g.log_y(x);
                                  return ly == -kInf ? -x : x * std::expm1(ly);
                              },
                              IntegrandClass::quadratic_near_zero, quad)
                        : 0.0;
    law.b_q = model.b + g.beta() * model.c + lshift;

    if (!model.has_jumps()) {
        law.closed = LevyModel::black_scholes(law.b_q, model.c);
    } else if (g.kind == GirsanovPair::Kind::identity) {
        law.closed = model;
    } else if (g.kind == GirsanovPair::Kind::esscher) {
        double lam = g.lambda;
        LevyModel t = model;
        t.b = law.b_q;
        t.N = model.N - lam;
        if (model.has_negative_jumps()) t.M = model.M + lam;
        law.closed = t;
    }
    return law;
}

GirsanovPair girsanov_for(const MeasureSelector& sel, const LevyModel& model,
                          SolverReport* report, const SolverConfig& cfg) {
    GirsanovPair g;
    switch (sel.kind) {
        case MeasureSelector::Kind::esscher:
            g.kind = GirsanovPair::Kind::esscher;
            g.lambda = esscher_lambda(model, sel.rate, report, cfg);
            break;
        case MeasureSelector::Kind::memm:
            g.kind = GirsanovPair::Kind::memm;
            g.lambda = memm_lambda(model, sel.rate, report, cfg);
            break;
        case MeasureSelector::Kind::fq: {
            auto fq = fq_parameters(model, sel.q, sel.rate, cfg);
            if (report) *report = fq.report;
            g = fq.girsanov;
            break;
        }
    }
    return g;
}

TiltedLaw select_measure(const MeasureSelector& sel, const LevyModel& model,
                         SolverReport* report, const SolverConfig& cfg) {
    return tilted_law(model, girsanov_for(sel, model, report, cfg), sel.rate, cfg);
}

} // namespace levystab
