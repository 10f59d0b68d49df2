#pragma once
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "levystab/measure_change.hpp"

namespace levystab {

// Payoff with growth certificate (c_growth, d_growth):
// |g(path)| <= c_growth * S_T + d_growth for every path.
struct PayoffSpec {
    enum class Kind { call, put, custom };
    Kind kind = Kind::call;
    double strike = 1.0;
    double c_growth = 1.0;
    double d_growth = 0.0;
    // custom payoffs see the price path (S at times j T / n_steps, S_0 first)
    std::function<double(std::span<const double>)> path_eval;

    static PayoffSpec call(double strike);
    static PayoffSpec put(double strike);
    static PayoffSpec custom(std::function<double(std::span<const double>)> eval,
                             double c_growth, double d_growth);

    double terminal(double terminal_price) const;
    bool terminal_only() const { return kind != Kind::custom; }
};

// (c_growth, d_growth) for the named payoff kinds
std::pair<double, double> payoff_growth(PayoffSpec::Kind kind, double strike);

struct PriceEstimate {
    double value = 0.0;
    double std_error = 0.0; // 0 for the characteristic-function method
    enum class Method { mc, cf } method = Method::mc;
    std::int64_t n_paths = 0;
    std::uint64_t seed = 0;
};

struct SimConfig {
    std::int64_t n_paths = 100'000;
    int n_steps = 1;
    std::uint64_t seed = 42;
    double small_jump_cutoff = 1e-3; // compound-Poisson threshold for cgmy
    bool parallel = true;
    int batch_size = 8192;
};

// Runs fn(batch_index, begin, end) over [0, total) in fixed batches.
// Batches execute in parallel when requested; any output indexed by item
// position is independent of the scheduling.
void run_batches(std::int64_t total, int batch_size, bool parallel,
                 const std::function<void(int, std::int64_t, std::int64_t)>& fn);

// counter-derived per-batch seed
std::uint64_t batch_seed(std::uint64_t seed, int batch_index);

// i.i.d. terminal values X_T under the model's law.  Exact for bs
// (Gaussian) and vg (gamma-subordinated Gaussian); cgmy uses compound
// Poisson above the cutoff plus a variance-matched Gaussian for the small
// jumps.  Deterministic given cfg.seed, independent of thread count.
std::vector<double> simulate_terminal(const LevyModel& model, double T, const SimConfig& cfg);
std::vector<double> simulate_terminal(const TiltedLaw& law, double T, const SimConfig& cfg);

// serial reference of the same kernel (parallelism forced off)
std::vector<double> simulate_terminal_serial(const LevyModel& model, double T,
                                             const SimConfig& cfg);

// price paths on an n_steps grid for path-dependent payoffs (bs/vg only);
// row i occupies [i*(n_steps+1), (i+1)*(n_steps+1)), S_0 = 1 first
std::vector<double> simulate_price_paths(const LevyModel& model, double T, const SimConfig& cfg);

PriceEstimate mc_price(const TiltedLaw& law, const PayoffSpec& payoff, double T, double r,
                       const SimConfig& cfg);

struct CosConfig {
    double L = 10.0;  // truncation half-width in std devs of ln S_T
    int n_terms = 1024;
};

// Fourier-cosine expansion price of a call/put under the tilted law.
PriceEstimate cf_price(const TiltedLaw& law, PayoffSpec::Kind kind, double strike, double T,
                       double r, const CosConfig& cos_cfg = {},
                       const QuadratureConfig& quad = {});

// e^{-rT} E_Q S_T from the characteristic exponent (identity payoff)
double cf_identity_price(const TiltedLaw& law, double T, double r,
                         const QuadratureConfig& quad = {});

// |C_T(model_a) - C_T(model_b)| under the same selector; CF preferred when
// the payoff is a call/put, Monte Carlo otherwise.
std::pair<double, double> price_gap(const LevyModel& model_a, const LevyModel& model_b,
                                    const MeasureSelector& sel, const PayoffSpec& payoff,
                                    double T, const SimConfig& cfg);

} // namespace levystab
