#pragma once

#include <cstddef>
#include <functional>

#include "driftmle/errors.hpp"

namespace driftmle {

struct QuadOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    std::size_t max_evaluations = 1'000'000;
};

struct QuadResult {
    double value = 0.0;
    double abs_error_estimate = 0.0;
    bool converged = false;
    std::size_t evaluations = 0;
    // Whole-line integration only: the mass added per window doubling
    // stopped shrinking, or the integrand overflowed in the far field.
    bool suspected_divergent = false;
};

// Globally adaptive Gauss-Kronrod (7, 15) on [a, b]. Bisects the panel with
// the largest error estimate until the total satisfies
// max(abs_tol, rel_tol * |value|) or the evaluation budget runs out.
// Integrand values must be finite; otherwise NonFiniteValue is thrown with
// the offending abscissa. Exceptions from f itself pass through.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadOptions& opts = {});

// Integral over the whole real line by truncation to [-R, R], with R
// doubling from 8 up to 16384 until the contribution of the newest wings is
// negligible against the running total. Assumes the integrand's mass is
// reachable by doubling from [-8, 8], which holds for the stationary
// densities this library builds (they concentrate around the origin).
// A non-finite integrand value or a domain failure in a wing counts as
// divergence evidence, not an error: mass is exploding where the tails
// should decay. Inside the initial window it is still thrown.
QuadResult integrate_real_line(const std::function<double(double)>& f,
                               const QuadOptions& opts = {});

}  // namespace driftmle
