#include "driftmle/sim.hpp"

#include <cmath>

#include "driftmle/errors.hpp"

namespace driftmle {

const char* to_string(Method m) {
    return m == Method::euler ? "euler" : "milstein";
}

Method method_from_string(const std::string& name) {
    if (name == "euler") return Method::euler;
    if (name == "milstein") return Method::milstein;
    throw ConfigError("method", "expected \"euler\" or \"milstein\", got \"" + name + "\"");
}

std::size_t ObservationScheme::N() const {
    // floor(n^(1+alpha)) computed in extended precision. The relative nudge
    // keeps exact powers (alpha such that n^(1+alpha) is an integer) from
    // landing a hair below the integer and flooring one short.
    long double v = powl(static_cast<long double>(n), 1.0L + static_cast<long double>(alpha));
    return static_cast<std::size_t>(floorl(v * (1.0L + 4e-19L)));
}

void ObservationScheme::validate() const {
    if (n < 1) throw Error("scheme: n must be a positive integer");
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error("scheme: alpha must lie in (0, 1)");
    if (substeps < 1) throw Error("scheme: substeps must be a positive integer");
}

SchemeKernel::SchemeKernel(const DiffusionModel& model)
    : theta_(model.theta),
      a_(model.a),
      b_(model.b),
      bp_(differentiate(model.b)) {}

double SchemeKernel::bprime(double x, std::size_t* fallbacks) const {
    try {
        return bp_(x);
    } catch (const DomainError&) {
        // abs'(0) and friends: the symbolic derivative divides by |b|.
        if (fallbacks) ++*fallbacks;
        const double h = 1e-7;
        return (b_(x + h) - b_(x - h)) / (2.0 * h);
    }
}

double SchemeKernel::step(Method method, double x, double h, double z,
                          std::size_t* fallbacks) const {
    const double av = a_(x);
    const double bv = b_(x);
    double next = x + theta_ * av * h + bv * std::sqrt(h) * z;
    if (method == Method::milstein)
        next += 0.5 * bv * bprime(x, fallbacks) * h * (z * z - 1.0);
    return next;
}

ObservedPath simulate_path(const DiffusionModel& model,
                           const ObservationScheme& scheme, Method method,
                           std::uint64_t seed) {
    scheme.validate();
    SchemeKernel kernel(model);
    NormalStream stream(seed);

    ObservedPath path;
    path.scheme = scheme;
    path.method = method;
    path.seed = seed;
    path.fingerprint = model_fingerprint(model);
    path.values.resize(scheme.N() + 1);

    std::size_t fallbacks = 0;
    run_path(kernel, scheme, method, stream, model.x0,
             [&](std::size_t k, double x) { path.values[k] = x; }, &fallbacks);
    path.derivative_fallbacks = fallbacks;
    return path;
}

}  // namespace driftmle
