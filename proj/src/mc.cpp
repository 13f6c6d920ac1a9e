#include "driftmle/mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "driftmle/errors.hpp"
#include "driftmle/rng.hpp"

namespace driftmle {

double ks_statistic(std::vector<double> samples) {
    if (samples.empty()) throw Error("ks_statistic: empty sample");
    std::sort(samples.begin(), samples.end());
    const double m = static_cast<double>(samples.size());
    double dist = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double F = normal_cdf(samples[i]);
        const double upper = (static_cast<double>(i) + 1.0) / m - F;
        const double lower = F - static_cast<double>(i) / m;
        dist = std::max(dist, std::max(upper, lower));
    }
    return dist;
}

double ergodic_average(const DiffusionModel& model,
                       const std::function<double(double)>& h, double T,
                       double dt, std::uint64_t seed) {
    if (!(T > 0.0) || !(dt > 0.0))
        throw Error("ergodic_average: T and dt must be positive");
    const double steps_exact = T / dt;
    if (steps_exact > 1e9)
        throw Error("ergodic_average: more than 1e9 steps requested");
    const auto steps = static_cast<std::size_t>(std::llround(steps_exact));
    if (steps == 0) throw Error("ergodic_average: dt exceeds T");

    SchemeKernel kernel(model);
    NormalStream stream(seed);
    KahanSum sum;
    double x = model.x0;
    for (std::size_t i = 0; i < steps; ++i) {
        sum.add(h(x) * dt);
        x = kernel.step(Method::milstein, x, dt, stream.normal(), nullptr);
        if (!(std::fabs(x) <= 1e12)) throw NumericalBlowup(i, x);
    }
    // Averaged over the horizon actually covered, steps * dt, which equals T
    // whenever T / dt is an integer.
    return sum.value() / (static_cast<double>(steps) * dt);
}

namespace {

struct Outcome {
    bool ok = false;
    double theta_hat = 0.0;
    double dn = 0.0;
    double std_err = 0.0;
    std::string status;
};

Outcome run_one(const DiffusionModel& model, const SchemeKernel& kernel,
                const ObservationScheme& scheme, Method method,
                std::uint64_t seed, double info) {
    Outcome out;
    try {
        NormalStream stream(seed);
        EstimatorAccumulator acc(model.a, model.b);
        std::size_t fallbacks = 0;
        run_path(kernel, scheme, method, stream, model.x0,
                 [&](std::size_t k, double x) {
                     if (k == 0)
                         acc.start(x);
                     else
                         acc.add(x);
                 },
                 &fallbacks);
        const EstimateResult r = acc.finish(scheme);
        out.theta_hat = r.theta_hat;
        out.dn = r.denominator_Dn;
        out.std_err = standardized_error(r, model.theta, info, scheme);
        out.ok = true;
        out.status = "ok";
    } catch (const NumericalBlowup& e) {
        out.status = e.what();
    } catch (const DegenerateDenominator& e) {
        out.status = e.what();
    } catch (const DegenerateDiffusion& e) {
        out.status = e.what();
    } catch (const DomainError& e) {
        out.status = e.what();
    }
    return out;
}

}  // namespace

std::vector<CellSummary> run_experiment(const ExperimentConfig& config,
                                        std::vector<ReplicateRecord>* records) {
    if (config.replicates < 2)
        throw Error("experiment: replicates must be at least 2");
    if (config.ns.empty() || config.alphas.empty())
        throw Error("experiment: ns and alphas must be non-empty");
    if (config.threads < 1) throw Error("experiment: threads must be positive");

    // Asymptotic information for the standardized errors, computed once.
    const double info = invariant_law(config.model).info;
    const SchemeKernel kernel(config.model);
    const int R = config.replicates;

    std::vector<CellSummary> cells;
    cells.reserve(config.ns.size() * config.alphas.size());

    // Cells are enumerated ns-outer, alphas-inner; this order fixes the
    // global replicate index and therefore every seed.
    std::size_t cell_index = 0;
    for (int n : config.ns) {
        for (double alpha : config.alphas) {
            ObservationScheme scheme{n, alpha, config.substeps};
            scheme.validate();

            std::vector<Outcome> slots(static_cast<std::size_t>(R));
            std::atomic<int> next{0};
            const std::uint64_t base = cell_index * static_cast<std::uint64_t>(R);

            auto worker = [&]() {
                for (;;) {
                    const int r = next.fetch_add(1, std::memory_order_relaxed);
                    if (r >= R) return;
                    const std::uint64_t seed =
                        derive_seed(config.master_seed, base + static_cast<std::uint64_t>(r));
                    slots[static_cast<std::size_t>(r)] =
                        run_one(config.model, kernel, scheme, config.method, seed, info);
                }
            };

            const int T = std::min(config.threads, R);
            if (T <= 1) {
                worker();
            } else {
                std::vector<std::thread> pool;
                std::vector<std::exception_ptr> errs(static_cast<std::size_t>(T));
                pool.reserve(static_cast<std::size_t>(T));
                for (int t = 0; t < T; ++t)
                    pool.emplace_back([&, t]() {
                        try {
                            worker();
                        } catch (...) {
                            errs[static_cast<std::size_t>(t)] = std::current_exception();
                        }
                    });
                for (auto& th : pool) th.join();
                for (auto& e : errs)
                    if (e) std::rethrow_exception(e);
            }

            // Sequential fold in replicate order: thread count cannot change
            // the result.
            std::vector<double> errs_std;
            KahanSum sum_theta, sum_dn;
            int ok_count = 0;
            for (int r = 0; r < R; ++r) {
                const Outcome& o = slots[static_cast<std::size_t>(r)];
                if (records) {
                    ReplicateRecord row;
                    row.n = n;
                    row.alpha = alpha;
                    row.replicate = r;
                    row.seed = derive_seed(config.master_seed,
                                           base + static_cast<std::uint64_t>(r));
                    row.theta_hat = o.theta_hat;
                    row.Dn = o.dn;
                    row.std_err = o.std_err;
                    row.ok = o.ok;
                    row.status = o.status;
                    records->push_back(std::move(row));
                }
                if (!o.ok) continue;
                ++ok_count;
                sum_theta.add(o.theta_hat);
                sum_dn.add(o.dn);
                errs_std.push_back(o.std_err);
            }
            if (ok_count == 0) throw AllReplicatesFailed(n, alpha);

            CellSummary cell;
            cell.n = n;
            cell.alpha = alpha;
            cell.failures = R - ok_count;
            cell.mean_theta_hat = sum_theta.value() / ok_count;
            cell.mean_Dn = sum_dn.value() / ok_count;
            if (ok_count >= 2) {
                KahanSum sq;
                for (int r = 0; r < R; ++r) {
                    const Outcome& o = slots[static_cast<std::size_t>(r)];
                    if (!o.ok) continue;
                    const double dev = o.theta_hat - cell.mean_theta_hat;
                    sq.add(dev * dev);
                }
                cell.std_theta_hat = std::sqrt(sq.value() / (ok_count - 1));
            }
            cell.ks_statistic = ks_statistic(errs_std);
            cell.ks_pass_5pct =
                cell.ks_statistic < ks_critical_5pct(errs_std.size());
            cell.predicted_std =
                std::pow(static_cast<double>(n), -0.5 * alpha) / std::sqrt(info);
            cells.push_back(cell);
            ++cell_index;
        }
    }
    return cells;
}

}  // namespace driftmle
