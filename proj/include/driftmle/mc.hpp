#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "driftmle/est.hpp"
#include "driftmle/model.hpp"
#include "driftmle/sim.hpp"

namespace driftmle {

struct ExperimentConfig {
    DiffusionModel model;
    std::vector<int> ns;
    std::vector<double> alphas;
    int replicates = 100;  // at least 2
    Method method = Method::milstein;
    std::uint64_t master_seed = 0;
    int substeps = 1;
    int threads = 1;  // execution knob only: results do not depend on it
};

struct CellSummary {
    int n = 0;
    double alpha = 0.0;
    double mean_theta_hat = 0.0;
    double std_theta_hat = 0.0;  // sample std, divisor R-1
    double mean_Dn = 0.0;
    double ks_statistic = 0.0;   // of standardized errors vs standard normal
    bool ks_pass_5pct = false;
    double predicted_std = 0.0;  // n^{-alpha/2} / sqrt(info)
    int failures = 0;
};

struct ReplicateRecord {
    int n = 0;
    double alpha = 0.0;
    int replicate = 0;
    std::uint64_t seed = 0;
    double theta_hat = 0.0;
    double Dn = 0.0;
    double std_err = 0.0;
    bool ok = false;
    std::string status;  // "ok" or the failure reason
};

// Runs every (n, alpha) cell of the grid, ns-outer and alphas-inner.
// Replicate r of cell i draws seed derive_seed(master_seed,
// i * replicates + r), so any cell or replicate can be reproduced in
// isolation. Failed replicates (blowup, degenerate
// denominator, domain error) are excluded from the statistics and counted;
// a cell with no survivors throws AllReplicatesFailed. Statistics are
// folded sequentially in replicate order, so results are bit-identical for
// any thread count. Pass `records` to capture the per-replicate rows.
std::vector<CellSummary> run_experiment(const ExperimentConfig& config,
                                        std::vector<ReplicateRecord>* records = nullptr);

// One-sample Kolmogorov-Smirnov distance to the standard normal:
// max_i max(i/m - F(x_(i)), F(x_(i)) - (i-1)/m). Throws on empty input.
double ks_statistic(std::vector<double> samples);

inline double ks_critical_5pct(std::size_t m) {
    return 1.36 / std::sqrt(static_cast<double>(m));
}

// (1/T) integral of h along one simulated trajectory, left-endpoint Riemann
// sum on step dt. For ergodic models this estimates the stationary mean of
// h; the library's quadrature-based `info` can be cross-checked against it.
double ergodic_average(const DiffusionModel& model,
                       const std::function<double(double)>& h, double T,
                       double dt, std::uint64_t seed);

}  // namespace driftmle
