#include "levystab/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace levystab {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

nlohmann::json girsanov_json(const GirsanovPair& g) {
    nlohmann::json j;
    switch (g.kind) {
        case GirsanovPair::Kind::identity: j["kind"] = "identity"; break;
        case GirsanovPair::Kind::esscher:
            j["kind"] = "esscher";
            j["lambda"] = g.lambda;
            break;
        case GirsanovPair::Kind::memm:
            j["kind"] = "memm";
            j["lambda"] = g.lambda;
            break;
        case GirsanovPair::Kind::fq:
            j["kind"] = "fq";
            j["q"] = g.q;
            j["beta_q"] = g.beta_q;
            j["support_ok"] = g.support_ok;
            break;
    }
    return j;
}

nlohmann::json tilted_json(const TiltedLaw& law) {
    nlohmann::json j;
    j["b_q"] = law.b_q;
    j["c"] = law.c();
    if (law.closed) j["closed_model"] = *law.closed;
    else j["jump_density"] = "Y(x) * dnu/dx with Y from the girsanov descriptor";
    return j;
}

struct ParsedConfig {
    LevyModel model;
    std::optional<LevyModel> model_tilde;
    MeasureSelector selector;
    PayoffSpec payoff = PayoffSpec::call(1.0);
    double T = 1.0;
    SimConfig sim;
    std::string experiment;
    nlohmann::json params; // experiment-specific block
};

ParsedConfig parse_config(const nlohmann::json& cfg) {
    ParsedConfig pc;
    try {
        pc.experiment = cfg.at("experiment").get<std::string>();
        pc.model = cfg.at("model").get<LevyModel>();
        if (cfg.contains("model_tilde")) pc.model_tilde = cfg.at("model_tilde").get<LevyModel>();
        if (cfg.contains("selector")) pc.selector = cfg.at("selector").get<MeasureSelector>();
        if (cfg.contains("r")) pc.selector.rate = cfg.at("r").get<double>();
        pc.T = cfg.value("T", 1.0);
        if (cfg.contains("payoff")) {
            const auto& p = cfg.at("payoff");
            std::string kind = p.value("kind", "call");
            double K = p.value("strike", 1.0);
            if (kind == "call") pc.payoff = PayoffSpec::call(K);
            else if (kind == "put") pc.payoff = PayoffSpec::put(K);
            else throw ConfigError("payoff kind must be call or put in configs");
        }
        if (cfg.contains("sim")) {
            const auto& s = cfg.at("sim");
            pc.sim.n_paths = s.value("n_paths", pc.sim.n_paths);
            pc.sim.n_steps = s.value("n_steps", pc.sim.n_steps);
            pc.sim.seed = s.value("seed", pc.sim.seed);
            pc.sim.small_jump_cutoff = s.value("small_jump_cutoff", pc.sim.small_jump_cutoff);
        }
        pc.params = cfg.value("experiment_params", nlohmann::json::object());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    auto d = validate(pc.model);
    if (!d.params_ok) throw ConfigError("config: model parameters out of range");
    return pc;
}

nlohmann::json cmd_calibrate(const ParsedConfig& pc) {
    SolverReport rep;
    auto g = girsanov_for(pc.selector, pc.model, &rep);
    auto law = tilted_law(pc.model, g, pc.selector.rate);
    nlohmann::json out;
    out["girsanov"] = girsanov_json(g);
    out["lambda_star"] = g.beta();
    out["residual"] = rep.residual;
    out["bracket"] = {rep.bracket_lo, rep.bracket_hi};
    out["iterations"] = rep.iterations;
    out["tilted"] = tilted_json(law);
    out["martingale_residual"] = law.martingale_residual();
    if (pc.selector.kind == MeasureSelector::Kind::memm && pc.model.has_jumps()) {
        auto sc = memm_sign_classify(pc.model, pc.selector.rate);
        out["lambda_sign"] = sc.lambda_sign == SignClassification::Sign::negative ? "negative"
                             : sc.lambda_sign == SignClassification::Sign::no_solution
                                 ? "no_solution"
                                 : "unknown";
        out["rule_applied"] = sc.rule_applied;
    }
    return out;
}

nlohmann::json cmd_bound(const ParsedConfig& pc) {
    if (!pc.model_tilde) throw ConfigError("bound experiment needs model_tilde");
    ModelPair pair{pc.model, *pc.model_tilde, pc.selector, pc.T};
    auto rep = bound_report(pair, pc.payoff.c_growth, pc.payoff.d_growth);
    nlohmann::json j = rep;
    j["payoff_growth"] = {pc.payoff.c_growth, pc.payoff.d_growth};
    return j;
}

nlohmann::json cmd_price(const ParsedConfig& pc) {
    auto law = select_measure(pc.selector, pc.model);
    std::string method = pc.params.value("method", "cf");
    nlohmann::json out;
    if (method == "cf") {
        auto est = cf_price(law, pc.payoff.kind, pc.payoff.strike, pc.T, pc.selector.rate);
        out["value"] = est.value;
        out["std_error"] = 0.0;
        out["method"] = "cf";
    } else if (method == "mc") {
        auto est = mc_price(law, pc.payoff, pc.T, pc.selector.rate, pc.sim);
        out["value"] = est.value;
        out["std_error"] = est.std_error;
        out["method"] = "mc";
        out["n_paths"] = est.n_paths;
        out["seed"] = est.seed;
    } else {
        throw ConfigError("price method must be cf or mc");
    }
    out["martingale_residual"] = law.martingale_residual();
    return out;
}

// parameters that admit equivalent perturbed companions (same small-jump
// activity, same Gaussian part)
std::vector<std::string> perturbable_params(const LevyModel& m) {
    std::vector<std::string> ps;
    if (m.family == Family::black_scholes) {
        if (m.b != 0.0) ps.push_back("b");
        return ps;
    }
    if (m.has_negative_jumps()) ps.push_back("M");
    ps.push_back("N");
    if (m.b != 0.0) ps.push_back("b");
    return ps;
}

LevyModel perturbed(const LevyModel& m, const std::string& param, double delta) {
    LevyModel t = m;
    if (param == "b") t.b *= 1.0 + delta;
    else if (param == "M") t.M *= 1.0 + delta;
    else if (param == "N") t.N *= 1.0 + delta;
    else if (param != "none") throw ConfigError("unknown perturbation parameter " + param);
    return t;
}

std::string cmd_stability_csv(const ParsedConfig& pc) {
    std::vector<double> deltas = {0.01, 0.02, 0.05, 0.10};
    if (pc.params.contains("deltas")) deltas = pc.params.at("deltas").get<std::vector<double>>();
    std::ostringstream os;
    os << "param,delta,gap,stderr,bound_thm1,bound_cor1,holds\n";

    auto emit = [&](const std::string& param, double delta) {
        try {
            ModelPair pair{pc.model, perturbed(pc.model, param, delta), pc.selector, pc.T};
            auto rep = bound_report(pair, pc.payoff.c_growth, pc.payoff.d_growth);
            auto [gap, se] =
                price_gap(pair.base, pair.tilde, pc.selector, pc.payoff, pc.T, pc.sim);
            bool holds = gap <= rep.bound_thm1 + 3.0 * se && gap <= rep.bound_cor1 + 3.0 * se;
            os << param << ',' << fmt(delta) << ',' << fmt(gap) << ',' << fmt(se) << ','
               << fmt(rep.bound_thm1) << ',' << fmt(rep.bound_cor1) << ','
               << (holds ? "true" : "false") << '\n';
        } catch (const std::exception& e) {
            std::string what = e.what();
            for (char& ch : what)
                if (ch == ',' || ch == '\n') ch = ';';
            os << param << ',' << fmt(delta) << ",nan,nan,nan,nan,error: " << what << '\n';
        }
    };
    emit("none", 0.0);
    for (const auto& param : perturbable_params(pc.model))
        for (double d : deltas) emit(param, d);
    return os.str();
}

nlohmann::json cmd_parametric(const ParsedConfig& pc) {
    std::int64_t n = pc.params.value("n", 2000);
    int batches = pc.params.value("batches", 50);
    double dt = pc.params.value("dt", 1.0 / 252.0);
    double eps = pc.params.value("eps", 0.25);
    auto dist = estimator_distribution(pc.model, n, dt, batches, pc.sim.seed);
    auto pb = parametric_bound_thm2(pc.model, dist.thetas, eps, pc.payoff.c_growth,
                                    pc.payoff.d_growth, pc.selector, pc.T);
    nlohmann::json out;
    out["eps"] = eps;
    out["n"] = n;
    out["batches"] = batches;
    out["failed_batches"] = dist.failed;
    out["exceedance"] = pb.exceedance;
    out["sup_R_T"] = pb.sup_R;
    out["sup_U_T"] = pb.sup_U;
    out["sup_V_T"] = pb.sup_V;
    out["bound"] = pb.bound;
    out["bound_uv"] = pb.bound_uv;
    out["grid_points"] = pb.grid_points;
    out["excluded"] = pb.excluded;
    out["certified"] = pb.certified;
    out["exclusions"] = pb.exclusions;
    out["theta_true"] = theta_vector(pc.model);
    return out;
}

std::string cmd_convergence_csv(const ParsedConfig& pc) {
    std::vector<std::int64_t> sizes = {500, 2000, 8000};
    if (pc.params.contains("sample_sizes"))
        sizes = pc.params.at("sample_sizes").get<std::vector<std::int64_t>>();
    int batches = pc.params.value("batches", 50);
    double dt = pc.params.value("dt", 1.0 / 252.0);
    auto rows = convergence_curve_cor3(pc.model, sizes, batches, dt, pc.selector, pc.payoff,
                                       pc.T, pc.sim.seed);
    std::ostringstream os;
    os << "n,eps,sup_R_T,bound,empirical_gap,stderr\n";
    for (const auto& r : rows)
        os << r.n << ',' << fmt(r.eps) << ',' << fmt(r.sup_R_T) << ',' << fmt(r.bound) << ','
           << fmt(r.empirical_gap) << ',' << fmt(r.std_error) << '\n';
    return os.str();
}

} // namespace

std::string config_hash(const nlohmann::json& config) {
    std::string s = config.dump();
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001B3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void apply_override(nlohmann::json& config, const std::string& key, const std::string& value) {
    nlohmann::json* node = &config;
    size_t start = 0;
    while (true) {
        size_t dot = key.find('.', start);
        std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
        if (part.empty()) throw ConfigError("override: empty path segment in " + key);
        if (dot == std::string::npos) {
            nlohmann::json parsed;
            try {
                parsed = nlohmann::json::parse(value);
            } catch (const nlohmann::json::exception&) {
                parsed = value;
            }
            (*node)[part] = parsed;
            return;
        }
        node = &(*node)[part];
        start = dot + 1;
    }
}

ExperimentResult run_experiment(const nlohmann::json& config) {
    ExperimentResult res;
    res.format = config.value("format", "json");
    auto fail = [&](int code, const std::string& kind, const std::string& what) {
        nlohmann::json err;
        err["error"] = kind;
        err["message"] = what;
        err["exit_code"] = code;
        err["config"] = config;
        err["config_hash"] = config_hash(config);
        res.exit_code = code;
        res.format = "json";
        res.report = err.dump(2) + "\n";
        return res;
    };

    try {
        ParsedConfig pc = parse_config(config);
        nlohmann::json body;
        std::string csv;
        if (pc.experiment == "calibrate") body = cmd_calibrate(pc);
        else if (pc.experiment == "bound") body = cmd_bound(pc);
        else if (pc.experiment == "price") body = cmd_price(pc);
        else if (pc.experiment == "stability_pair") csv = cmd_stability_csv(pc);
        else if (pc.experiment == "parametric_bound") body = cmd_parametric(pc);
        else if (pc.experiment == "convergence") csv = cmd_convergence_csv(pc);
        else throw ConfigError("unknown experiment: " + pc.experiment);

        if (!csv.empty() && res.format != "json") {
            res.format = "csv";
            res.report = csv;
        } else {
            nlohmann::json out;
            out["experiment"] = pc.experiment;
            if (!csv.empty()) out["csv"] = csv;
            else out["result"] = body;
            out["config"] = config;
            out["config_hash"] = config_hash(config);
            res.report = out.dump(2) + "\n";
        }
        return res;
    } catch (const ConfigError& e) {
        return fail(4, "config", e.what());
    } catch (const NoSolutionError& e) {
        return fail(2, "no_solution", e.what());
    } catch (const EquivalenceError& e) {
        return fail(3, "non_equivalence", e.what());
    } catch (const DivergenceError& e) {
        return fail(3, "integrability", e.what());
    } catch (const QuadratureError& e) {
        return fail(3, "quadrature", e.what());
    } catch (const UnsupportedSimulationError& e) {
        return fail(4, "unsupported_simulation", e.what());
    } catch (const nlohmann::json::exception& e) {
        return fail(4, "config", e.what());
    } catch (const std::invalid_argument& e) {
        return fail(4, "config", e.what());
    }
}

} // namespace levystab
