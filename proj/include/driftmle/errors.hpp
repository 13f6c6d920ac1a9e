#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace driftmle {

// Every failure raised by the library derives from Error so callers can
// catch one type at the boundary and map it to an exit code.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed expression text. offset is the byte position of the offending
// token; expected lists what would have been accepted there.
class SyntaxError : public Error {
public:
    SyntaxError(std::size_t offset, std::vector<std::string> expected,
                const std::string& detail)
        : Error("syntax error at offset " + std::to_string(offset) + ": " + detail),
          offset(offset),
          expected(std::move(expected)) {}

    std::size_t offset;
    std::vector<std::string> expected;
};

// An identifier other than x, pi, e, or a known function name.
class UnknownIdentifier : public Error {
public:
    UnknownIdentifier(std::string name, std::size_t offset)
        : Error("unknown identifier '" + name + "' at offset " + std::to_string(offset)),
          name(std::move(name)),
          offset(offset) {}

    std::string name;
    std::size_t offset;
};

// Evaluation hit a point outside an operation's domain, or produced a
// non-finite value. node holds the offending subexpression, rendered.
class DomainError : public Error {
public:
    DomainError(const std::string& detail, std::string node_text)
        : Error(detail + " in '" + node_text + "'"), node(std::move(node_text)) {}

    std::string node;
};

// b(x) vanished (or nearly so) where the model needs to divide by it.
class DegenerateDiffusion : public Error {
public:
    explicit DegenerateDiffusion(double x)
        : Error("diffusion coefficient vanishes at x = " + std::to_string(x)), x(x) {}

    double x;
};

// A quadrature integrand returned NaN or +/-inf inside the integration range.
class NonFiniteValue : public Error {
public:
    explicit NonFiniteValue(double x)
        : Error("integrand is non-finite at x = " + std::to_string(x)), x(x) {}

    double x;
};

// A whole-line integral kept growing as the truncation window was widened.
class SuspectedDivergentIntegral : public Error {
public:
    explicit SuspectedDivergentIntegral(const std::string& which)
        : Error("integral did not stabilize under window doubling: " + which) {}
};

// The Fisher-type information came out zero or negative, so no standardized
// quantities can be formed.
class NonPositiveInformation : public Error {
public:
    explicit NonPositiveInformation(double value)
        : Error("information integral is not positive (" + std::to_string(value) + ")"),
          value(value) {}

    double value;
};

// A simulated trajectory left the representable range.
class NumericalBlowup : public Error {
public:
    NumericalBlowup(std::size_t step, double x)
        : Error("trajectory became non-finite at step " + std::to_string(step)),
          step(step),
          x(x) {}

    std::size_t step;
    double x;
};

// The estimator's denominator was too close to zero to divide by.
class DegenerateDenominator : public Error {
public:
    explicit DegenerateDenominator(double value)
        : Error("estimator denominator is degenerate (" + std::to_string(value) + ")"),
          value(value) {}

    double value;
};

// Every replicate of a Monte Carlo cell failed; the cell has no summary.
class AllReplicatesFailed : public Error {
public:
    AllReplicatesFailed(std::size_t n, double alpha)
        : Error("all replicates failed for n = " + std::to_string(n) +
                ", alpha = " + std::to_string(alpha)) {}
};

// Bad or missing configuration value. path is the JSON-pointer-ish location.
class ConfigError : public Error {
public:
    ConfigError(std::string path, const std::string& detail)
        : Error("config: " + path + ": " + detail), path(std::move(path)) {}

    std::string path;
};

}  // namespace driftmle
