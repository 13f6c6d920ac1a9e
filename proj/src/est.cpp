#include "driftmle/est.hpp"

#include <cmath>

#include "driftmle/errors.hpp"

namespace driftmle {

EstimatorAccumulator::EstimatorAccumulator(const ExprPtr& a, const ExprPtr& b)
    : a_(a), b_(b) {}

void EstimatorAccumulator::start(double x0) {
    prev_ = x0;
    count_ = 0;
    num_ = KahanSum{};
    sum_d_ = KahanSum{};
    started_ = true;
}

void EstimatorAccumulator::add(double x) {
    if (!started_) throw Error("estimator: add() before start()");
    const double bv = b_(prev_);
    const double b2 = bv * bv;
    if (b2 == 0.0) throw DegenerateDiffusion(prev_);
    const double av = a_(prev_);
    const double cv = av / b2;
    num_.add(cv * (x - prev_));
    sum_d_.add(av * cv);
    prev_ = x;
    ++count_;
}

EstimateResult EstimatorAccumulator::finish(const ObservationScheme& scheme) const {
    if (!started_ || count_ == 0)
        throw Error("estimator: no increments consumed");
    const double n = static_cast<double>(scheme.n);
    const double sum_d = sum_d_.value();

    EstimateResult r;
    r.N_used = count_;
    r.numerator = num_.value();
    r.denominator_raw = sum_d / n;
    r.denominator_Dn = sum_d / std::pow(n, 1.0 + scheme.alpha);
    if (!(r.denominator_raw > 1e-300))
        throw DegenerateDenominator(r.denominator_raw);
    r.theta_hat = r.numerator / r.denominator_raw;
    return r;
}

EstimateResult estimate(const ObservedPath& path, const ExprPtr& a,
                        const ExprPtr& b) {
    if (path.values.size() != path.scheme.N() + 1)
        throw Error("estimate: path length does not match its scheme");
    EstimatorAccumulator acc(a, b);
    acc.start(path.values[0]);
    for (std::size_t k = 1; k < path.values.size(); ++k) acc.add(path.values[k]);
    return acc.finish(path.scheme);
}

double standardized_error(const EstimateResult& result, double theta_true,
                          double info, const ObservationScheme& scheme) {
    if (!(info > 0.0)) throw NonPositiveInformation(info);
    return std::pow(static_cast<double>(scheme.n), 0.5 * scheme.alpha) *
           (result.theta_hat - theta_true) * std::sqrt(info);
}

}  // namespace driftmle
