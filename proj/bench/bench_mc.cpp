// Compares the OpenMP batch kernels against the serial reference and checks
// that the outputs are bitwise identical (the per-batch counter seeds make
// scheduling irrelevant).
#include <chrono>
#include <cstdio>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "levystab/pricing.hpp"

using namespace levystab;

namespace {

double time_ms(const std::function<void()>& fn) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

void bench_model(const char* name, const LevyModel& m, std::int64_t n_paths) {
    SimConfig cfg;
    cfg.n_paths = n_paths;
    cfg.seed = 1234;

    std::vector<double> par, ser;
    double t_par = time_ms([&] { par = simulate_terminal(m, 1.0, cfg); });
    double t_ser = time_ms([&] { ser = simulate_terminal_serial(m, 1.0, cfg); });
    bool same = par == ser;
    std::printf("%-18s n=%lld  parallel %8.1f ms   serial %8.1f ms   speedup %.2fx   %s\n",
                name, static_cast<long long>(n_paths), t_par, t_ser, t_ser / t_par,
                same ? "bitwise-identical" : "MISMATCH");
}

} // namespace

int main(int argc, char** argv) {
    std::int64_t n = argc > 1 ? std::atoll(argv[1]) : 2'000'000;
#ifdef _OPENMP
    std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
    std::printf("openmp: not enabled\n");
#endif
    bench_model("black_scholes", LevyModel::black_scholes(0.05, 0.04), n);
    bench_model("variance_gamma", LevyModel::variance_gamma(1.0, 5.0, 5.0), n);
    bench_model("cgmy", LevyModel::cgmy(1.0, 5.0, 5.0, 0.5), n / 10);
    return 0;
}
