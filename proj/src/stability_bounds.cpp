#include "levystab/stability_bounds.hpp"

#include <algorithm>
#include <cmath>

namespace levystab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// log of (e^{h1} - e^{h2})^2 without overflow for large |h|
double log_sq_exp_diff(double h1, double h2) {
    if (h1 == -kInf && h2 == -kInf) return -kInf;
    if (h1 == -kInf) return 2.0 * h2;
    if (h2 == -kInf) return 2.0 * h1;
    double lo = std::min(h1, h2), d = std::abs(h1 - h2);
    if (d == 0.0) return -kInf;
    double le = d > 30.0 ? d : std::log(std::expm1(d));
    return 2.0 * (lo + le);
}

// log of (1 - e^{h})^2
double log_sq_one_minus_exp(double h) { return log_sq_exp_diff(0.0, h); }

} // namespace

void check_comparable(const ModelPair& pair) {
    const LevyModel& a = pair.base;
    const LevyModel& b = pair.tilde;
    if (a.c != b.c)
        throw EquivalenceError("pair not comparable: Gaussian variance rates differ");
    if (a.has_jumps() != b.has_jumps() || a.has_negative_jumps() != b.has_negative_jumps())
        throw EquivalenceError("pair not comparable: jump supports differ");
    if (!a.has_jumps()) return;
    double sa = a.singularity_order(), sb = b.singularity_order();
    bool activity_matches = sa == sb && a.C == b.C;
    if (!activity_matches && std::max(sa, sb) >= 0.0)
        throw EquivalenceError(
            "pair not comparable: small-jump activity differs (C or alpha mismatch makes the "
            "Hellinger jump integral diverge; the laws are mutually singular)");
    if (!(pair.T > 0.0)) throw std::invalid_argument("pair: maturity T must be > 0");
}

double log_density_ratio(const LevyModel& base, const LevyModel& tilde, double x) {
    return tilde.log_density(x) - base.log_density(x);
}

EnvelopeConstants::Certification EnvelopeConstants::certify(const GirsanovPair& g,
                                                            const LevyModel& support_model,
                                                            int points) const {
    Certification cert;
    cert.worst_log_excess = -kInf;
    double lo = support_model.has_negative_jumps() ? -20.0 : 1e-6;
    double hi = 20.0;
    double la = std::log(a);
    for (int i = 0; i <= points; ++i) {
        double x = lo + (hi - lo) * static_cast<double>(i) / points;
        if (x == 0.0) continue;
        double excess = g.log_y(x) - la - k * x;
        if (excess > cert.worst_log_excess) {
            cert.worst_log_excess = excess;
            cert.worst_x = x;
        }
    }
    cert.ok = cert.worst_log_excess <= 1e-9;
    return cert;
}

EnvelopeConstants envelope_for(const ModelPair& pair, const GirsanovPair& g_base,
                               const GirsanovPair& g_tilde) {
    EnvelopeConstants env;
    switch (pair.selector.kind) {
        case MeasureSelector::Kind::esscher: {
            double l1 = g_base.lambda, l2 = g_tilde.lambda;
            env.a = 1.0;
            env.k = std::max({l1, l2, 0.0});
            return env;
        }
        case MeasureSelector::Kind::memm: {
            double l1 = g_base.lambda, l2 = g_tilde.lambda;
            if (l1 <= 0.0 && l2 <= 0.0) {
                // e^{λ(e^x-1)} <= e^{|λ|} uniformly for λ <= 0
                env.a = std::exp(std::max(std::abs(l1), std::abs(l2)));
                env.k = 0.0;
                return env;
            }
            break; // grid fit below
        }
        case MeasureSelector::Kind::fq: break; // grid fit below
    }
    // grid-certified fit: smallest k in {0, 0.5, ...} admitting a finite a
    for (double k = 0.0; k <= 8.0; k += 0.5) {
        EnvelopeConstants cand{1.0, k};
        auto c1 = cand.certify(g_base, pair.base);
        auto c2 = cand.certify(g_tilde, pair.tilde);
        double excess = std::max(c1.worst_log_excess, c2.worst_log_excess);
        // accept when the required a stays moderate and the excess is not
        // driven by the unbounded tail direction (k too small shows up as a
        // huge excess at the window edge)
        if (excess < 20.0) {
            cand.a = std::exp(std::max(excess, 0.0)) * (1.0 + 1e-12);
            return cand;
        }
    }
    throw DivergenceError("envelope_for: no envelope a e^{kx} certifies on the grid");
}

PairAnalysis analyze_pair(const ModelPair& pair, const SolverConfig& cfg) {
    check_comparable(pair);
    PairAnalysis an;
    an.pair = pair;
    MeasureSelector sel = pair.selector;
    an.g_base = girsanov_for(sel, pair.base, &an.rep_base, cfg);
    an.g_tilde = girsanov_for(sel, pair.tilde, &an.rep_tilde, cfg);
    an.law_base = tilted_law(pair.base, an.g_base, sel.rate, cfg);
    an.law_tilde = tilted_law(pair.tilde, an.g_tilde, sel.rate, cfg);
    return an;
}

std::pair<double, double> rho_pair(const PairAnalysis& an, const QuadratureConfig& quad) {
    const LevyModel& base = an.pair.base;
    if (!base.has_jumps()) return {0.0, 0.0};
    double T = an.pair.T;
    auto log_rho_qq = [&](double x) {
        return log_sq_exp_diff(0.5 * an.g_tilde.log_y(x), 0.5 * an.g_base.log_y(x));
    };
    auto log_rho_pp = [&](double x) {
        return log_sq_one_minus_exp(0.5 * log_density_ratio(base, an.pair.tilde, x));
    };
    double qq = T * integrate_levy_log(base, log_rho_qq, IntegrandClass::quadratic_near_zero,
                                       quad);
    double pp = T * integrate_levy_log(base, log_rho_pp, IntegrandClass::quadratic_near_zero,
                                       quad);
    return {qq, pp};
}

double constant_A(const PairAnalysis& an, const EnvelopeConstants& env,
                  const QuadratureConfig& quad) {
    const LevyModel& base = an.pair.base;
    if (!base.has_jumps()) return 0.0;
    if (base.N <= 1.0 + env.k)
        throw DivergenceError("constant_A: right tail ∫ |e^x-1| e^{kx} dν diverges (requires N "
                              "> 1 + k)");
    auto log_f = [&](double x) {
        double l1 = std::log(std::abs(std::expm1(x)));
        return l1 + env.k * x;
    };
    return 4.0 * env.a * an.pair.T *
           integrate_levy_log(base, log_f, IntegrandClass::linear_near_zero, quad);
}

UvrProcesses processes_UVR(const PairAnalysis& an, const EnvelopeConstants& env,
                           const QuadratureConfig& quad) {
    UvrProcesses out;
    const LevyModel& base = an.pair.base;
    if (!base.has_jumps()) return out;
    double A = constant_A(an, env, quad);
    double T = an.pair.T;

    auto log_p = [A](double x) { return std::log1p(0.25 * A * std::abs(std::expm1(x))); };
    auto log_q = [A](double x) {
        return std::log(0.25 * A * std::abs(std::expm1(x)) + std::exp(x));
    };
    auto log_fw = [A](double x) {
        return std::log(0.5 * A * std::abs(std::expm1(x)) + std::max(1.0, std::exp(x)));
    };
    auto log_rho_qq = [&](double x) {
        return log_sq_exp_diff(0.5 * an.g_tilde.log_y(x), 0.5 * an.g_base.log_y(x));
    };
    auto log_rho_pp = [&](double x) {
        return log_sq_one_minus_exp(0.5 * log_density_ratio(base, an.pair.tilde, x));
    };
    double la = std::log(env.a);
    double k = env.k;

    auto weighted = [&](const std::function<double(double)>& lw) {
        double first =
            integrate_levy_log(base, [&](double x) { return lw(x) + log_rho_qq(x); },
                               IntegrandClass::quadratic_near_zero, quad);
        double second = integrate_levy_log(
            base, [&](double x) { return la + k * x + lw(x) + log_rho_pp(x); },
            IntegrandClass::quadratic_near_zero, quad);
        return T * (first + second);
    };
    out.U = weighted(log_p);
    out.V = weighted(log_q);
    out.R = weighted(log_fw);
    return out;
}

HellingerResult hellinger_T(const ModelPair& pair, bool strict, const QuadratureConfig& quad) {
    check_comparable(pair);
    HellingerResult res;
    const LevyModel& base = pair.base;
    double jump = 0.0, lshift = 0.0;
    if (base.has_jumps()) {
        auto log_rho_pp = [&](double x) {
            return log_sq_one_minus_exp(0.5 * log_density_ratio(base, pair.tilde, x));
        };
        jump = integrate_levy_log(base, log_rho_pp, IntegrandClass::quadratic_near_zero, quad);
        lshift = integrate_levy(
            base,
            [&](double x) {
                if (std::abs(x) > 1.0) return 0.0;
                double ly = log_density_ratio(base, pair.tilde, x);
                return x * std::expm1(ly);
            },
            IntegrandClass::quadratic_near_zero, quad);
    }
    double drift_gap = pair.tilde.b - base.b - lshift;
    if (base.c > 0.0) {
        res.beta = drift_gap / base.c;
        res.drift_consistent = true;
    } else {
        res.beta = 0.0;
        res.drift_residual = drift_gap;
        res.drift_consistent = std::abs(drift_gap) <= 1e-12 * std::max(1.0, std::abs(base.b));
        if (strict && !res.drift_consistent)
            throw EquivalenceError(
                "hellinger_T: c = 0 and the Girsanov drift identity b~ = b + ∫ l (Y-1) dν "
                "fails; the laws are not equivalent");
    }
    res.value = pair.T * (0.125 * res.beta * res.beta * base.c + 0.5 * jump);
    return res;
}

std::pair<double, double> variation_bounds(double h_T, std::optional<double> eps) {
    if (h_T < 0.0) throw std::invalid_argument("variation_bounds: h_T must be >= 0");
    double b1 = 4.0 * std::sqrt(h_T);
    double b2 = eps ? 3.0 * std::sqrt(2.0 * *eps) + (h_T >= *eps ? 2.0 : 0.0)
                    : 3.0 * std::sqrt(2.0 * h_T);
    return {b1, b2};
}

double price_gap_bound_thm1(const UvrProcesses& uvr, double c_growth, double d_growth) {
    return 4.0 * c_growth * std::sqrt(uvr.U) + 4.0 * d_growth * std::sqrt(uvr.V);
}

double price_gap_bound_cor1(const UvrProcesses& uvr, double c_growth, double d_growth) {
    return 3.0 * std::sqrt(2.0) * (c_growth + d_growth) * std::sqrt(uvr.R);
}

namespace {

SpecializedBound tilt_gap_bound(const PairAnalysis& an, double c_growth, double d_growth,
                                const QuadratureConfig& quad, bool esscher_weights) {
    SpecializedBound out;
    double l1 = an.g_base.lambda, l2 = an.g_tilde.lambda;
    const LevyModel& base = an.pair.base;
    double T = an.pair.T;
    if (!base.has_jumps()) return out; // no jump measure: both terms vanish

    if (l1 > 0.0 || l2 > 0.0) {
        out.fallback_used = true;
        auto env = envelope_for(an.pair, an.g_base, an.g_tilde);
        auto uvr = processes_UVR(an, env, quad);
        out.value = price_gap_bound_cor1(uvr, c_growth, d_growth);
        return out;
    }
    if (base.N <= 1.0)
        throw DivergenceError("specialized gap bound: right tail needs N > 1 for A at k = 0");

    double A = 4.0 * T *
               integrate_levy_log(
                   base, [](double x) { return std::log(std::abs(std::expm1(x))); },
                   IntegrandClass::linear_near_zero, quad);
    auto log_fw = [A](double x) {
        return std::log(0.5 * A * std::abs(std::expm1(x)) + std::max(1.0, std::exp(x)));
    };
    auto log_carrier = [&](double x) {
        // x^2 for the esscher tilt distance, (e^x - 1)^2 for minimal entropy
        return esscher_weights ? 2.0 * std::log(std::abs(x))
                               : 2.0 * std::log(std::abs(std::expm1(x)));
    };
    double term1 = 0.0;
    if (l1 != l2) {
        double carrier =
            integrate_levy_log(base, [&](double x) { return log_fw(x) + log_carrier(x); },
                               IntegrandClass::quadratic_near_zero, quad);
        term1 = T * (l1 - l2) * (l1 - l2) * carrier;
    }
    auto log_rho_pp = [&](double x) {
        return log_sq_one_minus_exp(0.5 * log_density_ratio(base, an.pair.tilde, x));
    };
    double term2 = T * integrate_levy_log(
                           base, [&](double x) { return log_fw(x) + log_rho_pp(x); },
                           IntegrandClass::quadratic_near_zero, quad);
    out.value = term1 + term2;
    return out;
}

} // namespace

SpecializedBound esscher_gap_bound(const PairAnalysis& an, double c_growth, double d_growth,
                                   const QuadratureConfig& quad) {
    return tilt_gap_bound(an, c_growth, d_growth, quad, true);
}

SpecializedBound memm_gap_bound(const PairAnalysis& an, double c_growth, double d_growth,
                                const QuadratureConfig& quad) {
    return tilt_gap_bound(an, c_growth, d_growth, quad, false);
}

void to_json(nlohmann::json& j, const BoundReport& r) {
    j = nlohmann::json{{"rho_QQ", r.rho_QQ},
                       {"rho_PP", r.rho_PP},
                       {"A", r.A},
                       {"U_T", r.U_T},
                       {"V_T", r.V_T},
                       {"R_T", r.R_T},
                       {"h_T_PP", r.h_T_PP},
                       {"bound_thm1", r.bound_thm1},
                       {"bound_cor1", r.bound_cor1},
                       {"variation_bound_h1", r.variation_bound_h1},
                       {"lambda_base", r.lambda_base},
                       {"lambda_tilde", r.lambda_tilde},
                       {"envelope_a", r.envelope_a},
                       {"envelope_k", r.envelope_k},
                       {"eq14_fallback", r.eq14_fallback},
                       {"drift_consistent", r.drift_consistent},
                       {"envelope_certified", r.envelope_certified},
                       {"base_measure", r.base_measure},
                       {"a_convention", r.a_convention}};
    j["bound_eq14"] = r.bound_eq14 ? nlohmann::json(*r.bound_eq14) : nlohmann::json();
    j["bound_m12"] = r.bound_m12 ? nlohmann::json(*r.bound_m12) : nlohmann::json();
}

BoundReport bound_report(const ModelPair& pair, double c_growth, double d_growth,
                         const SolverConfig& cfg) {
    BoundReport rep;
    auto an = analyze_pair(pair, cfg);
    rep.lambda_base = an.g_base.beta();
    rep.lambda_tilde = an.g_tilde.beta();

    auto [qq, pp] = rho_pair(an, cfg.quad);
    rep.rho_QQ = qq;
    rep.rho_PP = pp;

    auto env = envelope_for(pair, an.g_base, an.g_tilde);
    rep.envelope_a = env.a;
    rep.envelope_k = env.k;
    if (pair.base.has_jumps()) {
        rep.envelope_certified = env.certify(an.g_base, pair.base).ok &&
                                 env.certify(an.g_tilde, pair.tilde).ok;
        rep.A = constant_A(an, env, cfg.quad);
        auto uvr = processes_UVR(an, env, cfg.quad);
        rep.U_T = uvr.U;
        rep.V_T = uvr.V;
        rep.R_T = uvr.R;
        rep.bound_thm1 = price_gap_bound_thm1(uvr, c_growth, d_growth);
        rep.bound_cor1 = price_gap_bound_cor1(uvr, c_growth, d_growth);
        if (pair.selector.kind == MeasureSelector::Kind::esscher) {
            auto sb = esscher_gap_bound(an, c_growth, d_growth, cfg.quad);
            rep.bound_eq14 = sb.value;
            rep.eq14_fallback = sb.fallback_used;
        } else if (pair.selector.kind == MeasureSelector::Kind::memm) {
            auto sb = memm_gap_bound(an, c_growth, d_growth, cfg.quad);
            rep.bound_m12 = sb.value;
            rep.eq14_fallback = sb.fallback_used;
        }
    }
    auto h = hellinger_T(pair, false, cfg.quad);
    rep.h_T_PP = h.value;
    rep.drift_consistent = h.drift_consistent;
    rep.variation_bound_h1 = variation_bounds(h.value).first;
    return rep;
}

LevyModel model_from_theta(const LevyModel& tmpl, const std::vector<double>& theta) {
    switch (tmpl.family) {
        case Family::black_scholes: return LevyModel::black_scholes(theta.at(0), theta.at(1));
        case Family::variance_gamma:
            return LevyModel::variance_gamma(theta.at(0), theta.at(1), theta.at(2), tmpl.b,
                                             tmpl.c);
        case Family::gmy: return LevyModel::gmy(theta.at(0), theta.at(2), tmpl.alpha, tmpl.b,
                                                tmpl.c);
        case Family::cgmy:
            return LevyModel::cgmy(theta.at(0), theta.at(1), theta.at(2), tmpl.alpha, tmpl.b,
                                   tmpl.c);
    }
    throw std::invalid_argument("model_from_theta: unknown family");
}

ParametricBound parametric_bound_thm2(const LevyModel& model,
                                      const std::vector<std::vector<double>>& estimator_samples,
                                      double eps, double c_growth, double d_growth,
                                      const MeasureSelector& sel, double T) {
    if (estimator_samples.empty())
        throw std::invalid_argument("parametric_bound_thm2: estimator sample list is empty");
    ParametricBound out;
    auto theta = theta_vector(model);

    int exceed = 0;
    for (const auto& th : estimator_samples) {
        double err = 0.0;
        for (size_t i = 0; i < theta.size(); ++i)
            err = std::max(err, std::abs(th[i] - theta[i]));
        if (err > eps) ++exceed;
    }
    out.exceedance = static_cast<double>(exceed) /
                     static_cast<double>(estimator_samples.size());

    // 3-point-per-coordinate grid at offsets {-eps, 0, +eps}
    size_t p = theta.size();
    int n_points = 1;
    for (size_t i = 0; i < p; ++i) n_points *= 3;
    for (int code = 0; code < n_points; ++code) {
        std::vector<double> th = theta;
        int c = code;
        bool center = true;
        for (size_t i = 0; i < p; ++i) {
            int off = c % 3 - 1;
            c /= 3;
            th[i] += off * eps;
            center = center && off == 0;
        }
        ++out.grid_points;
        if (center) continue; // R_T(θ, θ) = 0
        try {
            ModelPair pr{model, model_from_theta(model, th), sel, T};
            auto an = analyze_pair(pr);
            auto env = envelope_for(pr, an.g_base, an.g_tilde);
            auto uvr = processes_UVR(an, env, {});
            out.sup_R = std::max(out.sup_R, uvr.R);
            out.sup_U = std::max(out.sup_U, uvr.U);
            out.sup_V = std::max(out.sup_V, uvr.V);
        } catch (const std::exception& e) {
            ++out.excluded;
            out.certified = false;
            out.exclusions.push_back(e.what());
        }
    }
    double exceed_term = 2.0 * (c_growth + d_growth) * out.exceedance;
    out.bound = exceed_term + 3.0 * std::sqrt(2.0) * (c_growth + d_growth) * std::sqrt(out.sup_R);
    out.bound_uv = exceed_term + 4.0 * c_growth * std::sqrt(out.sup_U) +
                   4.0 * d_growth * std::sqrt(out.sup_V);
    return out;
}

std::vector<ConvergenceRow> convergence_curve_cor3(const LevyModel& model,
                                                   const std::vector<std::int64_t>& sample_sizes,
                                                   int batches, double dt,
                                                   const MeasureSelector& sel,
                                                   const PayoffSpec& payoff, double T,
                                                   std::uint64_t seed) {
    std::vector<ConvergenceRow> rows;
    auto law_true = select_measure(sel, model);
    double price_true = cf_price(law_true, payoff.kind, payoff.strike, T, sel.rate).value;

    for (size_t si = 0; si < sample_sizes.size(); ++si) {
        std::int64_t n = sample_sizes[si];
        ConvergenceRow row;
        row.n = n;
        auto dist = estimator_distribution(model, n, dt, batches,
                                           batch_seed(seed, static_cast<int>(si)));
        row.failed_batches = dist.failed;
        row.eps = dist.error_quantile(0.95);

        std::vector<double> gaps;
        for (const auto& th : dist.thetas) {
            try {
                auto law = select_measure(sel, model_from_theta(model, th));
                double price = cf_price(law, payoff.kind, payoff.strike, T, sel.rate).value;
                gaps.push_back(std::abs(price - price_true));
            } catch (const std::exception&) {
                ++row.failed_batches;
            }
        }
        if (!gaps.empty()) {
            double mean = 0.0;
            for (double g : gaps) mean += g;
            mean /= static_cast<double>(gaps.size());
            double ss = 0.0;
            for (double g : gaps) ss += (g - mean) * (g - mean);
            row.empirical_gap = mean;
            row.std_error = gaps.size() > 1
                                ? std::sqrt(ss / (static_cast<double>(gaps.size()) - 1.0) /
                                            static_cast<double>(gaps.size()))
                                : 0.0;
        }
        auto pb = parametric_bound_thm2(model, dist.thetas, row.eps, payoff.c_growth,
                                        payoff.d_growth, sel, T);
        row.sup_R_T = pb.sup_R;
        row.bound = pb.bound;
        rows.push_back(row);
    }
    return rows;
}

} // namespace levystab
