#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "driftmle/expr.hpp"
#include "driftmle/model.hpp"
#include "driftmle/rng.hpp"

namespace driftmle {

enum class Method { euler, milstein };

const char* to_string(Method m);
Method method_from_string(const std::string& name);  // throws ConfigError

// Observations at t_k = k/n for k = 0..N with N = floor(n^(1+alpha)):
// step 1/n shrinks while the horizon N/n ~ n^alpha grows. substeps > 1
// refines the integrator below the observation grid without changing which
// points are recorded.
struct ObservationScheme {
    int n = 0;
    double alpha = 0.0;
    int substeps = 1;

    std::size_t N() const;
    double delta() const { return 1.0 / static_cast<double>(n); }
    double horizon() const { return static_cast<double>(N()) / static_cast<double>(n); }

    void validate() const;  // throws Error on out-of-range fields
};

struct ObservedPath {
    ObservationScheme scheme;
    Method method = Method::milstein;
    std::uint64_t seed = 0;
    std::uint64_t fingerprint = 0;  // model_fingerprint at simulation time
    std::vector<double> values;     // N+1 entries, values[0] = x0 exactly
    std::size_t derivative_fallbacks = 0;
};

// The per-step update shared by every simulation in this library:
//   x + theta a(x) h + b(x) sqrt(h) z            (euler)
//   ... + (1/2) b(x) b'(x) h (z^2 - 1)           (milstein)
// b' is the symbolic derivative; at a kink (abs at its corner) it falls
// back to a central difference with h = 1e-7 and counts the event.
class SchemeKernel {
public:
    explicit SchemeKernel(const DiffusionModel& model);

    double step(Method method, double x, double h, double z,
                std::size_t* fallbacks) const;

    double theta() const { return theta_; }

private:
    double bprime(double x, std::size_t* fallbacks) const;

    double theta_;
    CompiledExpr a_, b_, bp_;
};

// Core recursion behind simulate_path and the streaming experiment loop.
// sink(k, x) receives observation k = 0..N in order; substeps between
// observations are not reported. Throws NumericalBlowup past |x| = 1e12
// with the offending substep index.
template <class Sink>
void run_path(const SchemeKernel& kernel, const ObservationScheme& scheme,
              Method method, NormalStream& stream, double x0, Sink&& sink,
              std::size_t* fallbacks) {
    const std::size_t N = scheme.N();
    const int m = scheme.substeps;
    const double h = scheme.delta() / static_cast<double>(m);
    double x = x0;
    sink(std::size_t{0}, x);
    for (std::size_t k = 1; k <= N; ++k) {
        for (int s = 0; s < m; ++s) {
            x = kernel.step(method, x, h, stream.normal(), fallbacks);
            if (!(std::fabs(x) <= 1e12))
                throw NumericalBlowup((k - 1) * static_cast<std::size_t>(m) + s, x);
        }
        sink(k, x);
    }
}

// Pure in its arguments: the same (model, scheme, method, seed) give a
// bit-identical path no matter what else runs concurrently.
ObservedPath simulate_path(const DiffusionModel& model,
                           const ObservationScheme& scheme, Method method,
                           std::uint64_t seed);

}  // namespace driftmle
