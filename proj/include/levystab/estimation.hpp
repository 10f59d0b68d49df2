#pragma once
#include <array>
#include <iosfwd>
#include <vector>

#include "levystab/pricing.hpp"

namespace levystab {

struct ReturnSample {
    std::vector<double> increments; // log-returns X_{i dt} - X_{(i-1) dt}
    double dt = 1.0;
};

// single-column csv with header "log_return"; dt travels out of band
void write_returns_csv(const ReturnSample& sample, std::ostream& os);
ReturnSample read_returns_csv(std::istream& is, double dt);

struct EstimatorReport {
    LevyModel model; // fitted model carrying theta_hat
    std::vector<double> theta_hat;
    std::vector<std::string> names;
    int n = 0;
    bool converged = false;
    double residual_norm = 0.0; // weighted cumulant residual at the optimum
};

// n i.i.d. increments of X over dt under the physical measure
ReturnSample simulate_returns(const LevyModel& model, std::int64_t n, double dt,
                              std::uint64_t seed);

// canonical estimated-parameter vector: bs -> (b, c); vg/cgmy -> (C, M, N)
std::vector<double> theta_vector(const LevyModel& model);
std::vector<std::string> theta_names(Family family);

// k-statistics k1..k4 of a sample (population central moments)
std::array<double, 4> empirical_cumulants(const std::vector<double>& xs);

// Moment estimator matching empirical to theoretical cumulants.
// bs: exact (mean/dt, var/dt).  vg / cgmy with alpha held known: weighted
// least squares over (C, M, N) in log space with b = c = 0, weights from
// the empirical sampling noise of each cumulant.
EstimatorReport cumulant_estimator(const ReturnSample& sample, Family family,
                                   double alpha_known = 0.5);

struct EstimatorDistribution {
    std::vector<std::vector<double>> thetas; // converged batches, batch order
    std::vector<double> theta_true;
    int failed = 0;
    // empirical P(|theta_hat - theta|_inf > eps)
    double exceedance(double eps) const;
    // p-quantile of the max-norm errors (linear interpolation)
    double error_quantile(double p) const;
    std::vector<double> errors() const;
};

EstimatorDistribution estimator_distribution(const LevyModel& model, std::int64_t n, double dt,
                                             int batches, std::uint64_t seed);

} // namespace levystab
