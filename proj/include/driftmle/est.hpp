#pragma once

#include <cmath>
#include <cstddef>

#include "driftmle/expr.hpp"
#include "driftmle/sim.hpp"

namespace driftmle {

struct EstimateResult {
    double theta_hat = 0.0;
    double numerator = 0.0;        // sum_k c(X_{(k-1)/n}) (X_{k/n} - X_{(k-1)/n})
    double denominator_Dn = 0.0;   // n^{-1-alpha} sum_k d(X_{(k-1)/n})
    double denominator_raw = 0.0;  // n^{-1}       sum_k d(X_{(k-1)/n})
    std::size_t N_used = 0;
};

// Neumaier-compensated summation. The estimator adds ~n^{1+alpha} terms of
// wildly mixed magnitude; naive summation loses digits the tests can see.
class KahanSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::fabs(sum_) >= std::fabs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Streaming estimator for theta: weights c = a/b^2 against increments, and
// d = a c (= a^2/b^2) for the observed information. Feed observations in
// time order; estimate() below is the whole-path wrapper. Both run this
// exact code, so streamed and materialized results are bit-identical.
class EstimatorAccumulator {
public:
    EstimatorAccumulator(const ExprPtr& a, const ExprPtr& b);

    void start(double x0);
    void add(double x);  // throws DegenerateDiffusion where b = 0
    EstimateResult finish(const ObservationScheme& scheme) const;

private:
    CompiledExpr a_, b_;
    KahanSum num_, sum_d_;
    double prev_ = 0.0;
    std::size_t count_ = 0;
    bool started_ = false;
};

// Coefficients are passed separately from the path on purpose: fitting with
// a mis-specified model is a legitimate experiment. Throws
// DegenerateDenominator when the raw denominator is at or below 1e-300.
EstimateResult estimate(const ObservedPath& path, const ExprPtr& a,
                        const ExprPtr& b);

// n^{alpha/2} (theta_hat - theta) sqrt(info): asymptotically standard normal
// for a correctly specified model. Throws NonPositiveInformation.
double standardized_error(const EstimateResult& result, double theta_true,
                          double info, const ObservationScheme& scheme);

}  // namespace driftmle
