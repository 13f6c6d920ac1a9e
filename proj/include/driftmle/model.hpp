#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "driftmle/expr.hpp"
#include "driftmle/quad.hpp"

namespace driftmle {

// dX = theta * a(X) dt + b(X) dW, started at x0. theta scales the drift
// only; a and b are known coefficient expressions in x.
struct DiffusionModel {
    ExprPtr a;
    ExprPtr b;
    double theta = 0.0;
    double x0 = 0.0;
};

// Stable hash of (a, b, theta, x0) for tagging artifacts and path files.
std::uint64_t model_fingerprint(const DiffusionModel& model);

// Closures derived from the model:
//   c = a/b^2, d = a^2/b^2 = a*c >= 0,
//   phi(x) = exp(-2 theta * integral_0^x c),
//   Phi(x) = integral_0^x phi   (diverging at both infinities <=> recurrence)
// All four share one cached table of integral_0^x c, so phi costs O(1)
// amortized. Each may throw DegenerateDiffusion (b = 0 at an evaluated
// point) or DomainError (coefficient left its domain, or phi overflowed).
struct DerivedFunctions {
    std::function<double(double)> c;
    std::function<double(double)> d;
    std::function<double(double)> phi;
    std::function<double(double)> Phi;
};

DerivedFunctions derive(const DiffusionModel& model);

// Stationary law: density(x) = 1 / (G * b(x)^2 * phi(x)), G the normalizer,
// info = E d(xi) under the law (the reciprocal asymptotic variance), and
// absolute moments E|xi|^r for even r up to max_moment.
struct InvariantLaw {
    double G = 0.0;
    double info = 0.0;
    std::function<double(double)> density;
    std::map<int, double> moments;
};

// Throws SuspectedDivergentIntegral when the normalization or information
// integral fails to stabilize (the model is not ergodic as given) and
// NonPositiveInformation when info is numerically zero (drift factor
// vanishes under the law).
InvariantLaw invariant_law(const DiffusionModel& model, int max_moment = 0);

struct ProbeGrid {
    double R = 50.0;
    std::size_t points = 10'000;
};

enum class CheckStatus { pass, fail, inconclusive };

const char* to_string(CheckStatus s);

struct AssumptionEntry {
    std::string id;  // A1..A6 and C7, see check_assumptions
    CheckStatus status = CheckStatus::inconclusive;
    std::string witness;
};

struct AssumptionReport {
    std::vector<AssumptionEntry> entries;  // every id exactly once, in order

    const AssumptionEntry& entry(const std::string& id) const;
    bool all_pass() const;
};

// Numeric screens for the conditions the estimator's theory needs. These
// decide pass/fail from finite probes and say how in the witness text; they
// are evidence, not proofs.
//   A1 coefficients Lipschitz: adjacent-point difference quotients of a and
//      b stay finite and stable under 2x grid refinement.
//   A2 recurrence: Phi grows without bound on both sides as the window
//      doubles (overflow counts as divergence).
//   A3 ergodicity: the normalization integral converges.
//   A4 diffusion nondegeneracy: 1/|b| admits a polynomial envelope
//      K(1+|x|^p) fitted on the probe.
//   A5 finite moments: E|xi|^r converges for even r <= 16 (higher orders
//      are unknowable from a finite probe; pass is best-effort).
//   A6 drift factor not null: max |a| on the probe exceeds 1e-12.
//   C7 mean reversion: c(x) sign(x) < 0 on the outer decade of the probe.
AssumptionReport check_assumptions(const DiffusionModel& model,
                                   const ProbeGrid& probe = {});

}  // namespace driftmle
